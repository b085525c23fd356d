#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "blade_engine.hpp"
#include "dynamical_r.hpp"
#include "matrix_functions.hpp"

namespace cdyb {

// W = V + V* with Q_W(v + a) = 2 a(v). Coordinates of W: (v, a) with a in
// the dual basis of the generators of V.
class DoubledSpace {
public:
  explicit DoubledSpace(SystemPtr base) : base_(std::move(base)) {
    if (!base_->is_nondegenerate())
      throw StructuralError("DoubledSpace: base system must be nondegenerate");
    const int n = base_->n();
    Eigen::MatrixXd BW = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    BW.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    BW.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    doubled_ = GeneratorSystem::create(BW);
    kappa_ = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    const auto &B = base_->bilinear();
    kappa_.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    kappa_.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    kappa_.bottomLeftCorner(n, n) = 0.5 * B;
    kappa_.bottomRightCorner(n, n) = -0.5 * B;
  }

  const SystemPtr &base() const { return base_; }
  const SystemPtr &doubled() const { return doubled_; }
  int n() const { return base_->n(); }
  // V + V (form B + (-B)) -> W
  const Eigen::MatrixXd &kappa() const { return kappa_; }

  // |kappa^T B_W kappa - (B + (-B))|
  double kappa_isometry_residual() const {
    const int n = this->n();
    Eigen::MatrixXd target = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    target.topLeftCorner(n, n) = base_->bilinear();
    target.bottomRightCorner(n, n) = -base_->bilinear();
    return (kappa_.transpose() * doubled_->bilinear() * kappa_ - target)
        .cwiseAbs()
        .maxCoeff();
  }

private:
  SystemPtr base_, doubled_;
  Eigen::MatrixXd kappa_;
};

namespace spinor_detail {

// sum over terms of coeff * gens[i1] ... gens[ik], i1 < ... < ik; monomials
// sharing a prefix share its product
inline OperatorMatrix monomial_sum(const std::vector<OperatorMatrix> &gens,
                                   const MultiVector &x, Eigen::Index N) {
  const auto &terms = x.terms();
  OperatorMatrix out = OperatorMatrix::Zero(N, N);
  // prefix: product so far, fixed: its generators, start: next allowed index
  std::function<void(const OperatorMatrix &, Blade, int)> walk =
      [&](const OperatorMatrix &prefix, Blade fixed, int start) {
        const Blade low = (Blade(1) << start) - 1;
        bool any = false;
        for (auto &t : terms) {
          if ((t.blade & low) != fixed)
            continue;
          any = true;
          if (t.blade == fixed)
            out += t.coeff * prefix;
        }
        if (!any)
          return;
        for (int i = start; i < int(gens.size()); ++i)
          walk(prefix * gens[i], fixed | Blade(1) << i, i + 1);
      };
  walk(OperatorMatrix::Identity(N, N), 0, 0);
  return out;
}

} // namespace spinor_detail

// v ^ (.) + i_a (.) on wedge V, a contracting through the plain dual pairing
inline OperatorMatrix pi_action(const DoubledSpace &ds, const Eigen::VectorXd &w) {
  const int n = ds.n();
  if (w.size() != 2 * n)
    throw StructuralError("pi_action: element of W has the wrong size");
  Eigen::VectorXd v = w.head(n), a = w.tail(n);
  MultiVector vv = MultiVector::vector(ds.base(), v);
  return operator_of(ds.base(), [&](const MultiVector &x) {
    return wedge(vv, x) + contract_covector(a, x);
  });
}

// image of a Clifford element of W under pi
inline OperatorMatrix pi_action(const DoubledSpace &ds, const MultiVector &x) {
  require_same(x.system(), *ds.doubled());
  const int n2 = 2 * ds.n();
  const Eigen::Index N = Eigen::Index(ds.base()->blade_count());
  std::vector<OperatorMatrix> gens;
  for (int i = 0; i < n2; ++i)
    gens.push_back(pi_action(ds, Eigen::VectorXd(Eigen::VectorXd::Unit(n2, i))));
  return spinor_detail::monomial_sum(gens, x, N);
}

// rho = pi o kappa on the first copy: rho(v) = v ^ + 1/2 i_v, extended to
// ordered monomials e_{i1} ... e_{ik}
inline OperatorMatrix rho_embed(const DoubledSpace &ds, const MultiVector &x) {
  require_same(x.system(), *ds.base());
  const int n = ds.n();
  const Eigen::Index N = Eigen::Index(ds.base()->blade_count());
  std::vector<OperatorMatrix> gens;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * n);
    v.head(n) = Eigen::VectorXd::Unit(n, i);
    gens.push_back(pi_action(ds, Eigen::VectorXd(ds.kappa() * v)));
  }
  return spinor_detail::monomial_sum(gens, x, N);
}

inline OperatorMatrix rho_embed(const MultiVector &x) {
  return rho_embed(DoubledSpace(x.system_ptr()), x);
}

// ------------------------------------------------------- Gauss factorization

struct GaussFactors {
  Eigen::MatrixXd E1, E2; // skew-adjoint endomorphisms of V
  Eigen::MatrixXd R;
  double detsqrt_R = 1; // |det R|^{1/2}
};

// [[C+I)/2, C-I], [(C-I)/4, (C+I)/2]] in the coordinates (v, B^{-1} a)
inline Eigen::MatrixXd embedded_orthogonal(const Eigen::MatrixXd &C) {
  const Eigen::Index n = C.rows();
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd out(2 * n, 2 * n);
  out << 0.5 * (C + I), C - I, 0.25 * (C - I), 0.5 * (C + I);
  return out;
}

inline GaussFactors factorize_f1(const SystemPtr &sys, const Eigen::MatrixXd &C,
                                 const Eigen::MatrixXd &D, double tol = 1e-10) {
  const int n = sys->n();
  if (C.rows() != n || C.cols() != n || D.rows() != n || D.cols() != n)
    throw StructuralError("factorize_f1: size mismatch");
  const auto &B = sys->bilinear();
  double cs = std::max(1.0, C.norm());
  if ((C.transpose() * B * C - B).norm() > tol * cs * cs * std::max(1.0, B.norm()))
    throw DomainError("factorize_f1: C is not orthogonal");
  if (D.norm() > 0 && skew_adjoint_residual(*sys, D) > tol)
    throw DomainError("factorize_f1: D is not skew-adjoint");
  if ((C * D - D * C).norm() > tol * std::max(1.0, cs * D.norm()))
    throw DomainError("factorize_f1: C and D do not commute");
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  if (mf_detail::sigma_min(C - I) < 1e-8)
    throw DomainError("factorize_f1: C - I is singular");
  if (mf_detail::sigma_min(D) < 1e-8)
    throw DomainError("factorize_f1: D is singular");
  Eigen::MatrixXd Ci = C.inverse(), Di = D.inverse();
  GaussFactors g;
  g.E1 = 0.5 * (C + I) * (C - I).inverse() - Di;
  g.E2 = Di * Di * (0.5 * (C - Ci) - D);
  g.R = D * (I - Ci).inverse();
  g.detsqrt_R = std::sqrt(std::abs(g.R.determinant()));
  return g;
}

// [[I,0],[E1,I]] [[I,D],[0,I]] [[I,0],[E2,I]] diag(R, (R^dagger)^{-1})
inline Eigen::MatrixXd gauss_product(const SystemPtr &sys, const GaussFactors &g,
                                     const Eigen::MatrixXd &D) {
  const Eigen::Index n = D.rows();
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n), Z = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd L1(2 * n, 2 * n), U(2 * n, 2 * n), L2(2 * n, 2 * n), Rd(2 * n, 2 * n);
  L1 << I, Z, g.E1, I;
  U << I, D, Z, I;
  L2 << I, Z, g.E2, I;
  const auto &B = sys->bilinear();
  Eigen::MatrixXd Rdag = B.inverse() * g.R.transpose() * B;
  Rd << g.R, Z, Z, Rdag.inverse();
  return L1 * U * L2 * Rd;
}

inline double f1_block_residual(const SystemPtr &sys, const Eigen::MatrixXd &C,
                                const Eigen::MatrixXd &D, const GaussFactors &g) {
  return (gauss_product(sys, g, D) - embedded_orthogonal(C)).cwiseAbs().maxCoeff();
}

struct FactorizationCheck {
  double residual = 0;  // max |rho(C^) - factored operator|
  double scale = 1;     // the resolved scalar, +-1/|det R|^{1/2}
  double magnitude = 1; // 1/|det R|^{1/2}
};

// rho(exp gamma(A)) = s i_{exp lambda(E1)} (exp lambda(D)) ^ i_{exp lambda(E2)} R_*
inline FactorizationCheck rho_factorization_main(const SystemPtr &sys,
                                                 const Eigen::MatrixXd &A,
                                                 const Eigen::MatrixXd &D) {
  Eigen::MatrixXd C = eval_matrix_function(AnalyticFunctionId::EXPM, A);
  GaussFactors g = factorize_f1(sys, C, D, 1e-8);
  OperatorMatrix rho = rho_embed(exp_clifford(gamma_of(sys, A)));
  OperatorMatrix T = contraction_operator(exp_exterior(lambda_of(sys, g.E1, 1e-8))) *
                     wedge_operator(exp_exterior(lambda_of(sys, D, 1e-8))) *
                     contraction_operator(exp_exterior(lambda_of(sys, g.E2, 1e-8))) *
                     induced_action(sys, g.R);
  FactorizationCheck out;
  out.magnitude = 1.0 / g.detsqrt_R;
  // only the branch of the square root is read off the blade 1
  out.scale = (rho(0, 0) * T(0, 0) >= 0 ? 1.0 : -1.0) * out.magnitude;
  out.residual = (rho - out.scale * T).cwiseAbs().maxCoeff();
  return out;
}

// rho(exp gamma(A)) = i_{S(A)} (exp lambda(A)) ^ i_{exp lambda(g(A))} jL(A)^{-1}_*
inline double rho_factorization_fac2(const SystemPtr &sys, const Eigen::MatrixXd &A,
                                     SPath path = SPath::Auto) {
  OperatorMatrix rho = rho_embed(exp_clifford(gamma_of(sys, A)));
  Eigen::MatrixXd G = eval_matrix_function(AnalyticFunctionId::G_AUX, A);
  Eigen::MatrixXd jL = eval_matrix_function(AnalyticFunctionId::JL, A);
  OperatorMatrix T = contraction_operator(s_function(sys, A, path)) *
                     wedge_operator(exp_exterior(lambda_of(sys, A, 1e-8))) *
                     contraction_operator(exp_exterior(lambda_of(sys, G, 1e-8))) *
                     induced_action(sys, jL.inverse());
  return (rho - T).cwiseAbs().maxCoeff();
}

// ----------------------------------------------------------- symbol formulas

// det^{1/2}(cosh(A/2)) exp(2 lambda(tanh(A/2))), the branch of exp gamma(A)
inline MultiVector symbol_formula_I(const SkewAdjointMap &A) {
  Eigen::MatrixXd T = eval_matrix_function(AnalyticFunctionId::TANH_HALF, A);
  double pre = det_sqrt_cosh_half(A.matrix());
  return pre * exp_exterior(2.0 * lambda_of(A.system(), T, 1e-8));
}

// sign * |det((C+I)/2)|^{1/2} exp(2 lambda((C-I)(C+I)^{-1})) for orthogonal C
inline MultiVector symbol_formula_I(const SystemPtr &sys, const Eigen::MatrixXd &C,
                                    int sign = 1) {
  const int n = sys->n();
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  if (mf_detail::sigma_min(C + I) < 1e-8)
    throw DomainError("symbol_formula_I: C + I is singular");
  double pre = std::sqrt(std::abs((0.5 * (C + I)).determinant()));
  Eigen::MatrixXd K = mf_detail::ratio(C - I, C + I);
  return (sign < 0 ? -pre : pre) * exp_exterior(2.0 * lambda_of(sys, K, 1e-8));
}

// Pf(2 sinh(A/2)) i_{exp(1/2 lambda(coth(A/2)))} dVol
inline MultiVector symbol_formula_II(const SkewAdjointMap &A) {
  const auto &sys = A.system();
  if (sys->n() % 2)
    throw DomainError("symbol_formula_II: odd dimension");
  if (!sys->is_definite())
    throw DomainError("symbol_formula_II: needs a definite form");
  Eigen::MatrixXd Ct = eval_matrix_function(AnalyticFunctionId::COTH_HALF, A);
  Eigen::MatrixXd S2 = 2.0 * sinh_half(A.matrix());
  double pre = pfaffian_sqrt_det(SkewAdjointMap(sys, S2, 1e-8));
  MultiVector ctr = exp_exterior(0.5 * lambda_of(sys, Ct, 1e-8));
  return pre * contract_multi(ctr, volume_form(sys));
}

// |det(c e^A - I)|^{1/2} i_{exp(1/2 lambda(cayley(c, A)))} dVol, defined up
// to the sign of the lift
inline MultiVector symbol_formula_II(const SystemPtr &sys, const Eigen::MatrixXd &c,
                                     const Eigen::MatrixXd &A) {
  if (!sys->is_definite())
    throw DomainError("symbol_formula_II: needs a definite form");
  const int n = sys->n();
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd K = cayley_like(c, A);
  double pre = std::sqrt(std::abs((c * mf_detail::expm(A, {}) - I).determinant()));
  MultiVector ctr = exp_exterior(0.5 * lambda_of(sys, K, 1e-8));
  return pre * contract_multi(ctr, volume_form(sys));
}

// product of vectors u_1 ... u_k with c = s_{u_1} ... s_{u_k}, each u with
// |u^2| = 1
inline MultiVector pin_lift(const SystemPtr &sys, const Eigen::MatrixXd &c,
                            double tol = 1e-10) {
  const int n = sys->n();
  const auto &B = sys->bilinear();
  if ((c.transpose() * B * c - B).cwiseAbs().maxCoeff() > tol * std::max(1.0, c.squaredNorm()))
    throw DomainError("pin_lift: c is not orthogonal");
  Eigen::MatrixXd M = c;
  MultiVector lift = MultiVector::scalar(sys, 1.0);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd u = M.col(i) - Eigen::VectorXd::Unit(n, i);
    if (u.norm() <= tol)
      continue;
    double q = u.dot(B * u);
    if (std::abs(q) <= 1e-10 * u.squaredNorm())
      throw DomainError("pin_lift: isotropic reflection vector");
    u /= std::sqrt(std::abs(0.5 * q));
    q = u.dot(B * u);
    Eigen::MatrixXd su = Eigen::MatrixXd::Identity(n, n) - 2.0 / q * u * (u.transpose() * B);
    M = su * M;
    lift = clifford_product(lift, MultiVector::vector(sys, u));
  }
  if ((M - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-8)
    throw NumericError("pin_lift: reflections did not reduce c to the identity");
  return lift;
}

// max over basis x of |alpha(g) x - (c x) g|
inline double twisted_adjoint_residual(const MultiVector &g, const Eigen::MatrixXd &c) {
  const auto &sp = g.system_ptr();
  const int n = sp->n();
  MultiVector ag = g.even_part() - g.odd_part();
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    MultiVector x = MultiVector::vector(sp, Eigen::VectorXd::Unit(n, i));
    MultiVector cx = MultiVector::vector(sp, c.col(i));
    worst = std::max(worst, distance(clifford_product(ag, x), clifford_product(cx, g)));
  }
  return worst;
}

inline double distance_up_to_sign(const MultiVector &a, const MultiVector &b) {
  return std::min(distance(a, b), distance(a, -b));
}

} // namespace cdyb
