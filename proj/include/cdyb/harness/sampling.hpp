#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>

#include "../dynamical_r.hpp"
#include "../errors.hpp"
#include "../generator_system.hpp"

namespace cdyb {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

// CDYBE_SEED overrides the default; an explicit --seed overrides both
inline std::uint64_t default_seed() {
  if (const char *s = std::getenv("CDYBE_SEED")) {
    try {
      return std::stoull(s);
    } catch (...) {
      throw ConfigParseError(std::string("CDYBE_SEED is not an unsigned integer: ") + s);
    }
  }
  return kDefaultSeed;
}

// mt19937_64 plus explicit uniform sampling (std distributions are not
// portable across standard libraries)
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300)
      u1 = 1e-300;
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
  }
  Eigen::VectorXd uniform_vector(int n, double a, double b) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
      v[i] = uniform(a, b);
    return v;
  }
  Eigen::MatrixXd uniform_matrix(int r, int c, double a, double b) {
    Eigen::MatrixXd m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i)
        m(i, j) = uniform(a, b);
    return m;
  }
  std::uint64_t next() { return eng_(); }

private:
  std::mt19937_64 eng_;
};

// A = B^{-1} K with K antisymmetric, so A is B-skew
inline Eigen::MatrixXd random_skew_adjoint(const GeneratorSystem &s, Rng &rng,
                                           double scale = 1.0) {
  const int n = s.n();
  Eigen::MatrixXd X = rng.uniform_matrix(n, n, -scale, scale);
  Eigen::MatrixXd K = 0.5 * (X - X.transpose());
  return s.bilinear().inverse() * K;
}

// uniform in the ball of the given radius on the coordinates in k
inline Eigen::VectorXd random_in_k(int n, const std::vector<int> &k, Rng &rng,
                                   double radius) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  const int m = int(k.size());
  Eigen::VectorXd g(m);
  for (int i = 0; i < m; ++i)
    g[i] = rng.normal();
  double r = radius * std::pow(rng.uniform(), 1.0 / std::max(m, 1));
  if (g.norm() > 0)
    g *= r / g.norm();
  for (int i = 0; i < m; ++i)
    v[k[i]] = g[i];
  return v;
}

struct SamplerOptions {
  int max_attempts_per_sample = 200;
};

// draws until the predicate accepts; GuardExhaustion when it never does
template <class T>
T sample_admissible(const std::function<T(Rng &)> &draw,
                    const std::function<bool(const T &)> &accept, Rng &rng,
                    const std::string &what, SamplerOptions opt = {}) {
  for (int i = 0; i < opt.max_attempts_per_sample; ++i) {
    T x = draw(rng);
    if (accept(x))
      return x;
  }
  throw GuardExhaustion("no admissible sample for " + what + " after " +
                        std::to_string(opt.max_attempts_per_sample) + " attempts");
}

// mu in k accepted by r's guard, with the FD stencil also inside the guard;
// radius is in units of r.mu_scale
inline Eigen::VectorXd sample_mu(const DynamicalRMatrix &r, int n, Rng &rng,
                                 double radius = 2.5, double h = 1e-5,
                                 SamplerOptions opt = {}) {
  std::function<Eigen::VectorXd(Rng &)> draw = [&](Rng &g) {
    return random_in_k(n, r.k, g, radius * r.mu_scale);
  };
  std::function<bool(const Eigen::VectorXd &)> accept = [&](const Eigen::VectorXd &mu) {
    if (!r.admissible(mu))
      return false;
    for (int i : r.k) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
      if (!r.admissible(mu + h * e) || !r.admissible(mu - h * e))
        return false;
    }
    return true;
  };
  return sample_admissible(draw, accept, rng, r.provenance + " r-matrix", opt);
}

} // namespace cdyb
