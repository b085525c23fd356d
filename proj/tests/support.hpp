#pragma once
#include <Eigen/Dense>

#include "cdyb/blade_engine.hpp"
#include "cdyb/harness/sampling.hpp"

namespace cdyb::testing {

inline MultiVector random_mv(const SystemPtr &s, Rng &rng, double scale = 1.0) {
  Dense d(s->blade_count());
  for (auto &x : d)
    x = rng.uniform(-scale, scale);
  return MultiVector::from_dense(s, d);
}

// symmetric, well conditioned, not diagonal; definite unless signature given
inline Eigen::MatrixXd random_form(int n, Rng &rng, int negatives = 0) {
  Eigen::MatrixXd X = rng.uniform_matrix(n, n, -0.3, 0.3);
  Eigen::MatrixXd Q = (Eigen::MatrixXd::Identity(n, n) + X).householderQr().householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i)
    d[i] = (i < negatives ? -1 : 1) * rng.uniform(0.5, 2.0);
  return Q * d.asDiagonal() * Q.transpose();
}

inline MultiVector e(const SystemPtr &s, int i) {
  return MultiVector::blade(s, Blade(1) << i);
}

inline double max_diff(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  return (a - b).cwiseAbs().maxCoeff();
}

} // namespace cdyb::testing
