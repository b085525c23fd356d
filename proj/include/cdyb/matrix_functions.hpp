#pragma once
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "blade_engine.hpp"

namespace cdyb {

// A with A^T B + B A = 0 relative to the system's pairing
class SkewAdjointMap {
public:
  SkewAdjointMap(SystemPtr sys, Eigen::MatrixXd A, double tol = 1e-10)
      : sys_(std::move(sys)), A_(std::move(A)) {
    if (A_.rows() != sys_->n() || A_.cols() != sys_->n())
      throw StructuralError("skew-adjoint map: size does not match system");
    double r = skew_adjoint_residual(*sys_, A_);
    if (A_.norm() > 0 && r > tol)
      throw DomainError("map is not skew-adjoint (relative residual " +
                        std::to_string(r) + ")");
  }
  const Eigen::MatrixXd &matrix() const { return A_; }
  const SystemPtr &system() const { return sys_; }
  int n() const { return int(A_.rows()); }

private:
  SystemPtr sys_;
  Eigen::MatrixXd A_;
};

enum class AnalyticFunctionId {
  J_SINHC,    // sinh(z/2)/(z/2)
  F_LOGDERIV, // 1/2 coth(z/2) - 1/z
  G_AUX,      // (sinh z - z)/z^2
  JL,         // (1 - e^{-z})/z
  JR,         // (e^z - 1)/z
  TANH_HALF,
  COTH_HALF,
  EXPM,
  INV,
};

inline const char *function_name(AnalyticFunctionId id) {
  switch (id) {
  case AnalyticFunctionId::J_SINHC: return "j";
  case AnalyticFunctionId::F_LOGDERIV: return "f";
  case AnalyticFunctionId::G_AUX: return "g";
  case AnalyticFunctionId::JL: return "jL";
  case AnalyticFunctionId::JR: return "jR";
  case AnalyticFunctionId::TANH_HALF: return "tanh(z/2)";
  case AnalyticFunctionId::COTH_HALF: return "coth(z/2)";
  case AnalyticFunctionId::EXPM: return "exp";
  case AnalyticFunctionId::INV: return "inv";
  }
  return "?";
}

inline bool has_poles(AnalyticFunctionId id) {
  return id == AnalyticFunctionId::F_LOGDERIV ||
         id == AnalyticFunctionId::COTH_HALF ||
         id == AnalyticFunctionId::TANH_HALF || id == AnalyticFunctionId::INV;
}

struct MatrixFunctionOptions {
  int taylor_order = 40; // minimum number of series terms
  int max_order = 400;
  double spectral_cap = 0.9 * 2 * std::numbers::pi;
  double sv_floor = 1e-8;
};

namespace mf_detail {

using cplx = std::complex<double>;

inline std::vector<cplx> eigenvalues(const Eigen::MatrixXd &A) {
  std::vector<cplx> out;
  if (A.rows() == 0)
    return out;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    out.push_back(es.eigenvalues()[i]);
  return out;
}

inline double spectral_radius(const Eigen::MatrixXd &A) {
  double r = 0;
  for (auto z : eigenvalues(A))
    r = std::max(r, std::abs(z));
  return r;
}

inline double sigma_min(const Eigen::MatrixXd &M) {
  if (M.rows() == 0)
    return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues().minCoeff();
}

inline std::string fmt(cplx z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
  return buf;
}

// distance of z to the pole set of the function
inline double pole_distance(AnalyticFunctionId id, cplx z) {
  const double tp = 2 * std::numbers::pi;
  double k;
  switch (id) {
  case AnalyticFunctionId::F_LOGDERIV:
    k = std::round(z.imag() / tp);
    if (k == 0)
      k = z.imag() >= 0 ? 1 : -1;
    return std::abs(z - cplx(0, k * tp));
  case AnalyticFunctionId::COTH_HALF:
    k = std::round(z.imag() / tp);
    return std::abs(z - cplx(0, k * tp));
  case AnalyticFunctionId::TANH_HALF:
    k = std::round((z.imag() / std::numbers::pi - 1) / 2);
    return std::abs(z - cplx(0, (2 * k + 1) * std::numbers::pi));
  case AnalyticFunctionId::INV:
    return std::abs(z);
  default:
    return std::numeric_limits<double>::infinity();
  }
}

inline cplx nearest_to_poles(AnalyticFunctionId id, const Eigen::MatrixXd &A) {
  cplx best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (auto z : eigenvalues(A)) {
    double d = pole_distance(id, z);
    if (d < bd) {
      bd = d;
      best = z;
    }
  }
  return best;
}

// sum_k c(k) X^k with adaptive truncation
inline Eigen::MatrixXd power_series(const Eigen::MatrixXd &X,
                                    const std::function<double(int)> &c,
                                    const MatrixFunctionOptions &opt) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  int quiet = 0;
  for (int k = 0; k <= opt.max_order; ++k) {
    double ck = c(k);
    if (ck != 0.0) {
      Eigen::MatrixXd term = ck * P;
      sum += term;
      if (k >= opt.taylor_order) {
        if (term.norm() <= 1e-17 * std::max(sum.norm(), 1e-300)) {
          if (++quiet >= 2)
            return sum;
        } else {
          quiet = 0;
        }
      }
    } else if (k >= opt.taylor_order && P.norm() == 0.0) {
      return sum;
    }
    P = P * X;
  }
  if (!sum.allFinite())
    throw NumericError("power series overflowed");
  throw NumericError("power series did not converge within " +
                     std::to_string(opt.max_order) + " terms");
}

inline double inv_factorial(int k) { return std::exp(-std::lgamma(k + 1.0)); }

inline Eigen::MatrixXd expm(const Eigen::MatrixXd &A,
                            const MatrixFunctionOptions &opt) {
  double nrm = A.norm();
  int s = 0;
  while (nrm > 0.5) {
    nrm /= 2;
    ++s;
  }
  Eigen::MatrixXd X = A / std::ldexp(1.0, s);
  Eigen::MatrixXd E = power_series(
      X, [](int k) { return inv_factorial(k); }, opt);
  for (int i = 0; i < s; ++i)
    E = E * E;
  return E;
}

// sinh(A/2), cosh(A/2)
inline Eigen::MatrixXd sinh_half(const Eigen::MatrixXd &A,
                                 const MatrixFunctionOptions &opt) {
  if (A.norm() <= 4.0)
    return power_series(
        A / 2, [](int k) { return (k & 1) ? inv_factorial(k) : 0.0; }, opt);
  return 0.5 * (expm(A / 2, opt) - expm(-A / 2, opt));
}

inline Eigen::MatrixXd cosh_half(const Eigen::MatrixXd &A,
                                 const MatrixFunctionOptions &opt) {
  if (A.norm() <= 4.0)
    return power_series(
        A / 2, [](int k) { return (k & 1) ? 0.0 : inv_factorial(k); }, opt);
  return 0.5 * (expm(A / 2, opt) + expm(-A / 2, opt));
}

// j(A) = sinh(A/2)/(A/2), with j(2w) = j(w) cosh(w/2) for large arguments
inline Eigen::MatrixXd j_sinhc(const Eigen::MatrixXd &A,
                               const MatrixFunctionOptions &opt) {
  int s = 0;
  double nrm = A.norm();
  while (nrm > 4.0) {
    nrm /= 2;
    ++s;
  }
  Eigen::MatrixXd X = A / std::ldexp(1.0, s);
  Eigen::MatrixXd J = power_series(
      X / 2, [](int k) { return (k & 1) ? 0.0 : inv_factorial(k + 1); }, opt);
  for (int i = 1; i <= s; ++i)
    J = J * cosh_half(A / std::ldexp(1.0, i), opt);
  return J;
}

// j'(A)
inline Eigen::MatrixXd j_prime(const Eigen::MatrixXd &A,
                               const MatrixFunctionOptions &opt) {
  // j(z) = sum z^{2m} / (4^m (2m+1)!), so j'(z) = sum 2m z^{2m-1} / (4^m (2m+1)!)
  return power_series(
      A,
      [](int k) {
        if (!(k & 1))
          return 0.0;
        int m = (k + 1) / 2;
        return 2.0 * m * std::ldexp(1.0, -2 * m) * inv_factorial(2 * m + 1);
      },
      opt);
}

inline void guard_sv(AnalyticFunctionId id, const Eigen::MatrixXd &A,
                     const Eigen::MatrixXd &den,
                     const MatrixFunctionOptions &opt) {
  double s = sigma_min(den);
  if (!(s > opt.sv_floor))
    throw DomainError(std::string("pole proximity for ") + function_name(id) +
                      ": smallest singular value " + std::to_string(s) +
                      " of the denominator, offending eigenvalue " +
                      fmt(nearest_to_poles(id, A)));
}

inline void guard_radius(AnalyticFunctionId id, const Eigen::MatrixXd &A,
                         const MatrixFunctionOptions &opt) {
  double r = spectral_radius(A);
  if (!(r < opt.spectral_cap)) {
    cplx worst = 0;
    for (auto z : eigenvalues(A))
      if (std::abs(z) > std::abs(worst))
        worst = z;
    throw DomainError(std::string("spectral radius ") + std::to_string(r) +
                      " exceeds the guard " + std::to_string(opt.spectral_cap) +
                      " for " + function_name(id) + ", offending eigenvalue " +
                      fmt(worst));
  }
}

// N D^{-1} where N and D commute
inline Eigen::MatrixXd ratio(const Eigen::MatrixXd &N, const Eigen::MatrixXd &D) {
  return D.partialPivLu().solve(N);
}

inline Eigen::MatrixXd eval_raw(AnalyticFunctionId id, const Eigen::MatrixXd &A,
                                const MatrixFunctionOptions &opt) {
  using F = AnalyticFunctionId;
  if (A.rows() != A.cols())
    throw StructuralError("matrix function of a non-square matrix");
  if (!A.allFinite())
    throw NumericError("matrix function argument is not finite");
  switch (id) {
  case F::J_SINHC:
    return j_sinhc(A, opt);
  case F::F_LOGDERIV: {
    guard_radius(id, A, opt);
    Eigen::MatrixXd J = j_sinhc(A, opt);
    guard_sv(id, A, J, opt);
    return ratio(j_prime(A, opt), J);
  }
  case F::G_AUX:
    return power_series(
        A, [](int k) { return (k & 1) ? inv_factorial(k + 2) : 0.0; }, opt);
  case F::JR:
    return power_series(
        A, [](int k) { return inv_factorial(k + 1); }, opt);
  case F::JL:
    return power_series(
        A, [](int k) { return ((k & 1) ? -1.0 : 1.0) * inv_factorial(k + 1); },
        opt);
  case F::TANH_HALF: {
    Eigen::MatrixXd C = cosh_half(A, opt);
    guard_sv(id, A, C, opt);
    return ratio(sinh_half(A, opt), C);
  }
  case F::COTH_HALF: {
    Eigen::MatrixXd S = sinh_half(A, opt);
    guard_sv(id, A, S, opt);
    return ratio(cosh_half(A, opt), S);
  }
  case F::EXPM:
    return expm(A, opt);
  case F::INV: {
    guard_sv(id, A, A, opt);
    return A.partialPivLu().inverse();
  }
  }
  throw StructuralError("unknown matrix function");
}

// upper-right block of f([[A, H], [0, A]])
inline Eigen::MatrixXd
block_derivative(const Eigen::MatrixXd &A, const Eigen::MatrixXd &H,
                 const std::function<Eigen::MatrixXd(const Eigen::MatrixXd &)> &f) {
  const Eigen::Index n = A.rows();
  if (H.rows() != n || H.cols() != n)
    throw StructuralError("direction has the wrong size");
  double h = H.norm();
  if (h == 0.0)
    return Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  X.topLeftCorner(n, n) = A;
  X.bottomRightCorner(n, n) = A;
  X.topRightCorner(n, n) = H / h;
  return f(X).topRightCorner(n, n) * h;
}

} // namespace mf_detail

inline Eigen::MatrixXd eval_matrix_function(AnalyticFunctionId id,
                                            const Eigen::MatrixXd &A,
                                            const MatrixFunctionOptions &opt = {}) {
  return mf_detail::eval_raw(id, A, opt);
}

inline Eigen::MatrixXd eval_matrix_function(AnalyticFunctionId id,
                                            const SkewAdjointMap &A,
                                            const MatrixFunctionOptions &opt = {}) {
  return mf_detail::eval_raw(id, A.matrix(), opt);
}

inline Eigen::MatrixXd sinh_half(const Eigen::MatrixXd &A,
                                 const MatrixFunctionOptions &opt = {}) {
  return mf_detail::sinh_half(A, opt);
}
inline Eigen::MatrixXd cosh_half(const Eigen::MatrixXd &A,
                                 const MatrixFunctionOptions &opt = {}) {
  return mf_detail::cosh_half(A, opt);
}

inline Eigen::MatrixXd frechet_derivative(AnalyticFunctionId id,
                                          const Eigen::MatrixXd &A,
                                          const Eigen::MatrixXd &H,
                                          const MatrixFunctionOptions &opt = {}) {
  if (has_poles(id)) // guards on A itself, not only on the block
    mf_detail::eval_raw(id, A, opt);
  return mf_detail::block_derivative(A, H, [&](const Eigen::MatrixXd &X) {
    return mf_detail::eval_raw(id, X, opt);
  });
}

inline Eigen::MatrixXd frechet_derivative(AnalyticFunctionId id,
                                          const SkewAdjointMap &A,
                                          const Eigen::MatrixXd &H,
                                          const MatrixFunctionOptions &opt = {}) {
  return frechet_derivative(id, A.matrix(), H, opt);
}

// (c e^A + I)(c e^A - I)^{-1}
inline Eigen::MatrixXd cayley_like(const Eigen::MatrixXd &c,
                                   const Eigen::MatrixXd &A,
                                   const MatrixFunctionOptions &opt = {}) {
  const Eigen::Index n = A.rows();
  if (c.rows() != n || c.cols() != n)
    throw StructuralError("cayley_like: size mismatch");
  double scale = std::max(c.norm() * A.norm(), 1e-300);
  if ((c * A - A * c).norm() > 1e-10 * scale)
    throw DomainError("cayley_like: c does not commute with A");
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd M = c * mf_detail::expm(A, opt);
  double s = mf_detail::sigma_min(M - I);
  if (!(s > opt.sv_floor))
    throw DomainError("cayley_like: c exp(A) - I is singular (smallest "
                      "singular value " +
                      std::to_string(s) + ")");
  return mf_detail::ratio(M + I, M - I);
}

inline Eigen::MatrixXd cayley_like(const Eigen::MatrixXd &c,
                                   const SkewAdjointMap &A,
                                   const MatrixFunctionOptions &opt = {}) {
  Eigen::MatrixXd out = cayley_like(c, A.matrix(), opt);
  double r = skew_adjoint_residual(*A.system(), out);
  if (out.norm() > 0 && r > 1e-8)
    throw NumericError("cayley_like: result is not skew-adjoint (" +
                       std::to_string(r) + ")");
  return out;
}

// derivative of cayley_like(c, .) at A along H
inline Eigen::MatrixXd cayley_derivative(const Eigen::MatrixXd &c,
                                         const Eigen::MatrixXd &A,
                                         const Eigen::MatrixXd &H,
                                         const MatrixFunctionOptions &opt = {}) {
  cayley_like(c, A, opt); // guards
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd cc = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  cc.topLeftCorner(n, n) = c;
  cc.bottomRightCorner(n, n) = c;
  return mf_detail::block_derivative(A, H, [&](const Eigen::MatrixXd &X) {
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(X.rows(), X.cols());
    Eigen::MatrixXd M = cc * mf_detail::expm(X, opt);
    return mf_detail::ratio(M + I, M - I);
  });
}

inline double j_det_sqrt(const Eigen::MatrixXd &A,
                         const MatrixFunctionOptions &opt = {}) {
  mf_detail::guard_radius(AnalyticFunctionId::J_SINHC, A, opt);
  double d = mf_detail::j_sinhc(A, opt).determinant();
  if (!(d > 0))
    throw NumericError("det j(A) is not positive (" + std::to_string(d) + ")");
  return std::sqrt(d);
}

inline double j_det_sqrt(const SkewAdjointMap &A,
                         const MatrixFunctionOptions &opt = {}) {
  return j_det_sqrt(A.matrix(), opt);
}

// prod over eigenvalue pairs (z, -z) of h(z); h even with h(0) = 1. This is
// the analytic square root of det h(A) for A with symmetric spectrum.
inline double paired_eigen_product(const Eigen::MatrixXd &A,
                                   const std::function<std::complex<double>(std::complex<double>)> &h) {
  auto ev = mf_detail::eigenvalues(A);
  std::vector<bool> used(ev.size(), false);
  std::complex<double> prod = 1.0;
  double scale = std::max(1.0, mf_detail::spectral_radius(A));
  for (std::size_t it = 0; it < ev.size(); ++it) {
    std::size_t i = ev.size();
    for (std::size_t k = 0; k < ev.size(); ++k)
      if (!used[k] && (i == ev.size() || std::abs(ev[k]) > std::abs(ev[i])))
        i = k;
    if (i == ev.size())
      break;
    used[i] = true;
    if (std::abs(ev[i]) < 1e-7 * scale)
      continue; // near-zero eigenvalues contribute h(0) = 1
    std::size_t j = ev.size();
    for (std::size_t k = 0; k < ev.size(); ++k)
      if (!used[k] && (j == ev.size() ||
                       std::abs(ev[k] + ev[i]) < std::abs(ev[j] + ev[i])))
        j = k;
    if (j == ev.size() || std::abs(ev[j] + ev[i]) > 1e-6 * scale)
      throw NumericError("spectrum is not symmetric under z -> -z");
    used[j] = true;
    prod *= h(ev[i]);
  }
  return prod.real();
}

// det^{1/2} cosh(A/2), analytic branch equal to 1 at A = 0
inline double det_sqrt_cosh_half(const Eigen::MatrixXd &A) {
  return paired_eigen_product(
      A, [](std::complex<double> z) { return std::cosh(z / 2.0); });
}

// Pfaffian of a real skew-symmetric matrix (Parlett-Reid style elimination)
inline double pfaffian(Eigen::MatrixXd M) {
  const Eigen::Index n = M.rows();
  if (n != M.cols())
    throw StructuralError("pfaffian: matrix not square");
  if (n % 2)
    return 0.0;
  double pf = 1.0;
  for (Eigen::Index k = 0; k < n - 1; k += 2) {
    Eigen::Index p = k + 1;
    double best = std::abs(M(k, k + 1));
    for (Eigen::Index i = k + 2; i < n; ++i)
      if (std::abs(M(k, i)) > best) {
        best = std::abs(M(k, i));
        p = i;
      }
    if (p != k + 1) {
      M.row(k + 1).swap(M.row(p));
      M.col(k + 1).swap(M.col(p));
      pf = -pf;
    }
    double piv = M(k, k + 1);
    if (piv == 0.0)
      return 0.0;
    pf *= piv;
    if (k + 2 < n) {
      Eigen::VectorXd tau = M.row(k).tail(n - k - 2).transpose() / piv;
      // eliminate using row/col k+1
      Eigen::VectorXd r1 = M.row(k + 1).tail(n - k - 2).transpose();
      Eigen::MatrixXd upd = r1 * tau.transpose() - tau * r1.transpose();
      M.bottomRightCorner(n - k - 2, n - k - 2) += upd;
    }
  }
  return pf;
}

// L^{-T} with B = L L^T; columns form a B-orthonormal frame
inline Eigen::MatrixXd orthonormal_frame(const GeneratorSystem &s) {
  if (!s.is_definite() || !s.is_nondegenerate())
    throw DomainError("orthonormal frame needs a positive-definite pairing");
  Eigen::LLT<Eigen::MatrixXd> llt(s.bilinear());
  Eigen::MatrixXd L = llt.matrixL();
  return L.transpose().inverse();
}

// det^{1/2} of a skew-adjoint map as a Pfaffian, oriented by the system
inline double pfaffian_sqrt_det(const SkewAdjointMap &M) {
  const auto &s = *M.system();
  if (s.n() % 2)
    throw DomainError("pfaffian_sqrt_det: odd dimension");
  Eigen::MatrixXd P = orthonormal_frame(s);
  Eigen::MatrixXd X = P.inverse() * M.matrix() * P;
  double scale = std::max(X.norm(), 1e-300);
  if ((X + X.transpose()).norm() > 1e-10 * scale)
    throw DomainError("pfaffian_sqrt_det: map is not skew in the orthonormal frame");
  return s.orientation_sign() * pfaffian(0.5 * (X - X.transpose()));
}

// volume form of the oriented orthonormal frame
inline MultiVector volume_form(const SystemPtr &s) {
  Eigen::MatrixXd P = orthonormal_frame(*s);
  return MultiVector::blade(s, s->full_mask(), s->orientation_sign() * P.determinant());
}

// l2 norm of coefficients in a B-orthonormal frame; plain coefficient l2
// when the pairing is indefinite or degenerate
inline double frame_norm(const MultiVector &x) {
  const auto &s = x.system();
  if (!s.is_nondegenerate() || !s.is_definite())
    return x.norm();
  if (s.bilinear().isIdentity(0.0))
    return x.norm();
  Eigen::MatrixXd P = orthonormal_frame(s);
  Eigen::VectorXd y = induced_action(x.system_ptr(), P.inverse()) * x.eigen();
  return y.norm();
}

inline const char *frame_norm_name(const GeneratorSystem &s) {
  return (s.is_nondegenerate() && s.is_definite()) ? "orthonormal-frame-l2"
                                                   : "coefficient-l2";
}

} // namespace cdyb
