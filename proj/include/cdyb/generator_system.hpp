#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace cdyb {

using Blade = std::uint32_t;

class GeneratorSystem;
using SystemPtr = std::shared_ptr<const GeneratorSystem>;

struct SystemOptions {
  double symmetry_tol = 1e-12; // relative
  double det_threshold = 1e-12;
  double prune_eps = 1e-14;
};

// Generators e_0..e_{n-1} with pairing B(e_a,e_b). Generators in the
// extension mask pair to zero with everything.
class GeneratorSystem {
public:
  static constexpr int kMaxGenerators = 16;

  static SystemPtr create(const Eigen::MatrixXd &B, Blade extension_mask = 0,
                          std::vector<int> orientation = {},
                          SystemOptions opts = {}) {
    return SystemPtr(
        new GeneratorSystem(B, extension_mask, std::move(orientation), opts));
  }

  static SystemPtr euclidean(int n, SystemOptions opts = {}) {
    return create(Eigen::MatrixXd::Identity(n, n), 0, {}, opts);
  }

  // base generators followed by m generators with zero pairing
  static SystemPtr with_extension(const GeneratorSystem &base, int m) {
    int n = base.n();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + m, n + m);
    B.topLeftCorner(n, n) = base.bilinear();
    Blade mask = base.extension_mask();
    for (int i = 0; i < m; ++i)
      mask |= Blade(1) << (n + i);
    return create(B, mask, base.orientation(), base.options());
  }

  int n() const { return n_; }
  std::size_t blade_count() const { return std::size_t(1) << n_; }
  Blade full_mask() const { return Blade((std::uint64_t(1) << n_) - 1); }
  const Eigen::MatrixXd &bilinear() const { return B_; }
  double b(int i, int j) const { return B_(i, j); }
  Blade extension_mask() const { return ext_; }
  Blade core_mask() const { return full_mask() & ~ext_; }
  int core_dim() const { return std::popcount(core_mask()); }
  std::vector<int> core_indices() const {
    std::vector<int> out;
    for (int i = 0; i < n_; ++i)
      if (!(ext_ >> i & 1))
        out.push_back(i);
    return out;
  }
  const std::vector<int> &orientation() const { return orientation_; }
  // sign of the orientation permutation relative to ascending core order
  int orientation_sign() const { return orientation_sign_; }
  // B^{-1} on the core block, zero on the extension block
  const Eigen::MatrixXd &dual() const { return dual_; }
  bool is_diagonal() const { return diagonal_; }
  bool is_definite() const { return definite_; }
  bool is_nondegenerate() const { return ext_ == 0; }
  double prune_eps() const { return opts_.prune_eps; }
  const SystemOptions &options() const { return opts_; }

  bool same_as(const GeneratorSystem &o) const {
    return this == &o ||
           (n_ == o.n_ && ext_ == o.ext_ && B_ == o.B_ &&
            opts_.prune_eps == o.opts_.prune_eps);
  }

private:
  GeneratorSystem(const Eigen::MatrixXd &B, Blade ext,
                  std::vector<int> orientation, SystemOptions opts)
      : n_(int(B.rows())), B_(B), ext_(ext), opts_(opts) {
    if (B.rows() != B.cols())
      throw StructuralError("bilinear form must be square");
    if (n_ > kMaxGenerators)
      throw StructuralError("too many generators (" + std::to_string(n_) +
                            " > " + std::to_string(kMaxGenerators) + ")");
    if (n_ < 32 && (ext_ >> n_) != 0)
      throw StructuralError("extension mask refers to missing generators");
    if (!B.allFinite())
      throw StructuralError("bilinear form has non-finite entries");
    double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
    if ((B - B.transpose()).cwiseAbs().maxCoeff() > opts.symmetry_tol * scale)
      throw StructuralError("bilinear form is not symmetric");
    B_ = 0.5 * (B + B.transpose());
    for (int i = 0; i < n_; ++i) {
      if (!(ext_ >> i & 1))
        continue;
      if (B_.row(i).cwiseAbs().maxCoeff() != 0.0)
        throw StructuralError("extension generator " + std::to_string(i) +
                              " has nonzero pairing");
    }
    auto core = core_indices();
    int m = int(core.size());
    Eigen::MatrixXd Bc(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        Bc(i, j) = B_(core[i], core[j]);
    dual_ = Eigen::MatrixXd::Zero(n_, n_);
    if (m > 0) {
      double det = Bc.determinant();
      if (!(std::abs(det) > opts.det_threshold))
        throw StructuralError("core bilinear form is degenerate (|det| = " +
                              std::to_string(std::abs(det)) + ")");
      Eigen::MatrixXd inv = Bc.inverse();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          dual_(core[i], core[j]) = inv(i, j);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bc);
      definite_ = es.eigenvalues().minCoeff() > 0;
    } else {
      definite_ = false;
    }
    diagonal_ = true;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (i != j && B_(i, j) != 0.0)
          diagonal_ = false;
    if (orientation.empty()) {
      orientation_ = core;
    } else {
      auto sorted = orientation;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != core)
        throw StructuralError("orientation must list each core index once");
      orientation_ = std::move(orientation);
    }
    // parity by counting inversions
    int inv = 0;
    for (std::size_t i = 0; i < orientation_.size(); ++i)
      for (std::size_t j = i + 1; j < orientation_.size(); ++j)
        if (orientation_[i] > orientation_[j])
          ++inv;
    orientation_sign_ = (inv & 1) ? -1 : 1;
  }

  int n_;
  Eigen::MatrixXd B_;
  Blade ext_;
  SystemOptions opts_;
  std::vector<int> orientation_;
  int orientation_sign_ = 1;
  Eigen::MatrixXd dual_;
  bool diagonal_ = true;
  bool definite_ = false;
};

inline void require_same(const GeneratorSystem &a, const GeneratorSystem &b) {
  if (!a.same_as(b))
    throw StructuralError("operands live over different generator systems");
}

} // namespace cdyb
