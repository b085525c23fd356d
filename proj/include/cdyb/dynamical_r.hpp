#pragma once
#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "blade_engine.hpp"
#include "matrix_functions.hpp"
#include "quadratic_lie.hpp"

namespace cdyb {

enum class Provenance { Full, Split, Twisted, Scaled, Shifted, Rational, Sum, Constant };

inline const char *provenance_name(Provenance p) {
  switch (p) {
  case Provenance::Full: return "full";
  case Provenance::Split: return "split";
  case Provenance::Twisted: return "twisted";
  case Provenance::Scaled: return "scaled";
  case Provenance::Shifted: return "shifted";
  case Provenance::Rational: return "rational";
  case Provenance::Sum: return "sum";
  case Provenance::Constant: return "constant";
  }
  return "?";
}

// admissibility margins for sampled mu
struct GuardOptions {
  double margin = 0.3;                              // distance to poles / singular values
  double radius_cap = 0.9 * 2 * std::numbers::pi;   // spectral radius of ad_mu
  double support_tol = 1e-12;
};

using Evaluator = std::function<MultiVector(const Eigen::VectorXd &)>;
// derivative of r at mu along the direction v (v in k)
using DirectionalDerivative =
    std::function<MultiVector(const Eigen::VectorXd &, const Eigen::VectorXd &)>;
// empty when mu is admissible, otherwise the reason
using Guard = std::function<std::optional<std::string>(const Eigen::VectorXd &)>;

struct DynamicalRMatrix {
  Provenance kind = Provenance::Full;
  std::string provenance;
  double coupling = 0.25;
  std::vector<int> k; // derivative directions: indices of k in g
  double mu_scale = 1; // typical size of admissible mu, grows under scaling
  SystemPtr system;
  Evaluator evaluate;
  DirectionalDerivative derivative;
  Guard guard;

  MultiVector operator()(const Eigen::VectorXd &mu) const {
    if (auto why = guard(mu))
      throw DomainError(provenance + ": " + *why);
    return evaluate(mu);
  }
  bool admissible(const Eigen::VectorXd &mu) const { return !guard(mu); }
};

namespace dr_detail {

inline Eigen::MatrixXd sub(const Eigen::MatrixXd &A, const std::vector<int> &idx) {
  const Eigen::Index m = Eigen::Index(idx.size());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      out(a, b) = A(idx[a], idx[b]);
  return out;
}

inline void embed(Eigen::MatrixXd &into, const Eigen::MatrixXd &M,
                  const std::vector<int> &idx) {
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      into(idx[a], idx[b]) += M(Eigen::Index(a), Eigen::Index(b));
}

inline std::optional<std::string> check_support(const Eigen::VectorXd &mu,
                                                const std::vector<int> &k, int n,
                                                const GuardOptions &go) {
  if (mu.size() != n)
    return "mu has " + std::to_string(mu.size()) + " components, expected " +
           std::to_string(n);
  if (!mu.allFinite())
    return std::string("mu is not finite");
  std::vector<bool> in(n, false);
  for (int i : k)
    in[i] = true;
  double scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i)
    if (!in[i] && std::abs(mu[i]) > go.support_tol * scale)
      return "mu has a component along generator " + std::to_string(i) +
             " outside k";
  return std::nullopt;
}

inline std::optional<std::string> check_poles(AnalyticFunctionId id,
                                              const Eigen::MatrixXd &A,
                                              const GuardOptions &go,
                                              const char *what) {
  if (A.size() == 0)
    return std::nullopt;
  for (auto z : mf_detail::eigenvalues(A)) {
    if (std::abs(z) >= go.radius_cap)
      return std::string(what) + ": eigenvalue " + mf_detail::fmt(z) +
             " beyond spectral cap";
    if (mf_detail::pole_distance(id, z) < go.margin)
      return std::string(what) + ": eigenvalue " + mf_detail::fmt(z) +
             " within " + std::to_string(go.margin) + " of a pole of " +
             function_name(id);
  }
  return std::nullopt;
}

inline std::optional<std::string> check_sv(const Eigen::MatrixXd &M,
                                           const GuardOptions &go,
                                           const char *what) {
  if (M.size() == 0)
    return std::nullopt;
  double s = mf_detail::sigma_min(M);
  if (s < go.margin)
    return std::string(what) + " is near singular (smallest singular value " +
           std::to_string(s) + ")";
  return std::nullopt;
}

inline void require_split(const QuadraticLieAlgebra &g, const SubalgebraSplit &sp) {
  auto rep = validate_split(g, sp);
  if (!rep.passed())
    throw ValidationError("invalid split for " + g.name() + ":\n" + rep.summary());
  if (sp.k.empty())
    throw ValidationError("split needs a nonempty k");
}

// p-block builder shared by split / twisted / rational
struct PBlock {
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd &)> value;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd &, const Eigen::MatrixXd &)> deriv;
  std::function<std::optional<std::string>(const Eigen::MatrixXd &)> guard;
};

inline DynamicalRMatrix assemble(const QuadraticLieAlgebra &g,
                                 const SubalgebraSplit &sp, bool with_k_part,
                                 PBlock pb, Provenance kind, double coupling,
                                 GuardOptions go) {
  auto sys = g.system();
  const int n = g.n();
  DynamicalRMatrix r;
  r.kind = kind;
  r.provenance = provenance_name(kind);
  r.coupling = coupling;
  r.k = sp.k;
  r.system = sys;
  auto ad = [g](const Eigen::VectorXd &mu) { return adjoint(g, mu); };
  auto k = sp.k, p = sp.p;
  auto matrix_at = [=](const Eigen::VectorXd &mu) {
    Eigen::MatrixXd A = ad(mu);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    if (with_k_part)
      embed(M, eval_matrix_function(AnalyticFunctionId::F_LOGDERIV, sub(A, k)), k);
    if (!p.empty())
      embed(M, pb.value(sub(A, p)), p);
    return M;
  };
  r.evaluate = [=](const Eigen::VectorXd &mu) {
    return lambda_of(sys, matrix_at(mu), 1e-8);
  };
  r.derivative = [=](const Eigen::VectorXd &mu, const Eigen::VectorXd &v) {
    Eigen::MatrixXd A = ad(mu), H = ad(v);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    if (with_k_part)
      embed(M,
            frechet_derivative(AnalyticFunctionId::F_LOGDERIV, sub(A, k), sub(H, k)),
            k);
    if (!p.empty())
      embed(M, pb.deriv(sub(A, p), sub(H, p)), p);
    return lambda_of(sys, M, 1e-8);
  };
  r.guard = [=](const Eigen::VectorXd &mu) -> std::optional<std::string> {
    if (auto why = check_support(mu, k, n, go))
      return why;
    Eigen::MatrixXd A = ad(mu);
    if (with_k_part)
      if (auto why = check_poles(AnalyticFunctionId::F_LOGDERIV, sub(A, k), go, "ad_mu on k"))
        return why;
    if (!p.empty() && pb.guard)
      return pb.guard(sub(A, p));
    return std::nullopt;
  };
  return r;
}

} // namespace dr_detail

// r(mu) = lambda(f(ad_mu)), k = g
inline DynamicalRMatrix r_full(const QuadraticLieAlgebra &g, GuardOptions go = {}) {
  std::vector<int> all(g.n());
  std::iota(all.begin(), all.end(), 0);
  return dr_detail::assemble(g, {all, {}}, true, {}, Provenance::Full, 0.25, go);
}

// r = lambda(f(ad^k)) + 1/2 lambda(coth(ad^p / 2))
inline DynamicalRMatrix r_split(const QuadraticLieAlgebra &g,
                                const SubalgebraSplit &sp, GuardOptions go = {}) {
  dr_detail::require_split(g, sp);
  dr_detail::PBlock pb;
  pb.value = [](const Eigen::MatrixXd &Ap) {
    return Eigen::MatrixXd(0.5 * eval_matrix_function(AnalyticFunctionId::COTH_HALF, Ap));
  };
  pb.deriv = [](const Eigen::MatrixXd &Ap, const Eigen::MatrixXd &Hp) {
    return Eigen::MatrixXd(0.5 * frechet_derivative(AnalyticFunctionId::COTH_HALF, Ap, Hp));
  };
  pb.guard = [go](const Eigen::MatrixXd &Ap) -> std::optional<std::string> {
    if (auto why = dr_detail::check_sv(Ap, go, "ad_mu on p"))
      return why;
    return dr_detail::check_poles(AnalyticFunctionId::COTH_HALF, Ap, go, "ad_mu on p");
  };
  return dr_detail::assemble(g, sp, true, pb, Provenance::Split, 0.25, go);
}

// r = lambda(f(ad^k)) + 1/2 lambda((c e^ad + I)(c e^ad - I)^{-1} on p)
inline DynamicalRMatrix r_twisted(const QuadraticLieAlgebra &g, const Twist &tw,
                                  GuardOptions go = {}) {
  dr_detail::require_split(g, tw.split);
  auto rep = validate_automorphism(g, tw.c, &tw.split);
  if (!rep.passed())
    throw ValidationError("invalid automorphism for " + g.name() + ":\n" +
                          rep.summary());
  Eigen::MatrixXd cp = dr_detail::sub(tw.c, tw.split.p);
  // c preserves p since it is orthogonal and fixes k
  dr_detail::PBlock pb;
  pb.value = [cp](const Eigen::MatrixXd &Ap) {
    return Eigen::MatrixXd(0.5 * cayley_like(cp, Ap));
  };
  pb.deriv = [cp](const Eigen::MatrixXd &Ap, const Eigen::MatrixXd &Hp) {
    return Eigen::MatrixXd(0.5 * cayley_derivative(cp, Ap, Hp));
  };
  pb.guard = [cp, go](const Eigen::MatrixXd &Ap) -> std::optional<std::string> {
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(Ap.rows(), Ap.cols());
    if (mf_detail::spectral_radius(Ap) >= go.radius_cap)
      return std::string("ad_mu on p beyond spectral cap");
    return dr_detail::check_sv(cp * mf_detail::expm(Ap, {}) - I, go, "c exp(ad_mu) - I on p");
  };
  return dr_detail::assemble(g, tw.split, true, pb, Provenance::Twisted, 0.25, go);
}

// mu -> lambda((ad^p)^{-1}), vanishing coupling
inline DynamicalRMatrix rational_limit(const QuadraticLieAlgebra &g,
                                       const SubalgebraSplit &sp, GuardOptions go = {}) {
  dr_detail::require_split(g, sp);
  if (sp.p.empty())
    throw ValidationError("rational_limit: p is empty");
  dr_detail::PBlock pb;
  pb.value = [](const Eigen::MatrixXd &Ap) {
    return eval_matrix_function(AnalyticFunctionId::INV, Ap);
  };
  pb.deriv = [](const Eigen::MatrixXd &Ap, const Eigen::MatrixXd &Hp) {
    Eigen::MatrixXd inv = eval_matrix_function(AnalyticFunctionId::INV, Ap);
    return Eigen::MatrixXd(-inv * Hp * inv);
  };
  pb.guard = [go](const Eigen::MatrixXd &Ap) {
    return dr_detail::check_sv(Ap, go, "ad_mu on p");
  };
  return dr_detail::assemble(g, sp, false, pb, Provenance::Rational, 0.0, go);
}

// r_t(mu) = t^{-1} r(mu / t), coupling t^{-2} eps
inline DynamicalRMatrix scale_transform(const DynamicalRMatrix &r, double t) {
  if (t == 0.0 || !std::isfinite(t))
    throw DomainError("scale_transform: t must be finite and nonzero");
  DynamicalRMatrix out = r;
  out.kind = Provenance::Scaled;
  char buf[64];
  std::snprintf(buf, sizeof buf, "scaled(%g)", t);
  out.provenance = std::string(buf) + "<" + r.provenance + ">";
  out.coupling = r.coupling / (t * t);
  out.mu_scale = r.mu_scale * std::abs(t);
  out.evaluate = [r, t](const Eigen::VectorXd &mu) {
    return r.evaluate(mu / t) / t;
  };
  out.derivative = [r, t](const Eigen::VectorXd &mu, const Eigen::VectorXd &v) {
    return r.derivative(mu / t, v) / (t * t);
  };
  out.guard = [r, t](const Eigen::VectorXd &mu) { return r.guard(mu / t); };
  return out;
}

// mu -> r(mu + nu) for nu central in k
inline DynamicalRMatrix shift_transform(const QuadraticLieAlgebra &g,
                                        const DynamicalRMatrix &r,
                                        const Eigen::VectorXd &nu,
                                        double tol = 1e-10) {
  if (nu.size() != g.n())
    throw StructuralError("shift_transform: nu has the wrong dimension");
  if (auto why = dr_detail::check_support(nu, r.k, g.n(), {}))
    throw DomainError("shift_transform: " + *why);
  for (int i : r.k) {
    double b = g.bracket(nu, g.basis(i)).cwiseAbs().maxCoeff();
    if (b > tol * std::max(1.0, nu.norm()))
      throw DomainError("shift_transform: nu is not central in k ([nu, e_" +
                        std::to_string(i) + "] has size " + std::to_string(b) + ")");
  }
  DynamicalRMatrix out = r;
  out.kind = Provenance::Shifted;
  out.provenance = "shifted<" + r.provenance + ">";
  out.evaluate = [r, nu](const Eigen::VectorXd &mu) { return r.evaluate(mu + nu); };
  out.derivative = [r, nu](const Eigen::VectorXd &mu, const Eigen::VectorXd &v) {
    return r.derivative(mu + nu, v);
  };
  out.guard = [r, nu](const Eigen::VectorXd &mu) { return r.guard(mu + nu); };
  return out;
}

// the constant map mu -> s on k, a candidate (k,k) solution with coupling delta
inline DynamicalRMatrix constant_solution(const std::vector<int> &k,
                                          const MultiVector &s, double delta) {
  DynamicalRMatrix out;
  out.kind = Provenance::Constant;
  out.provenance = "constant";
  out.coupling = delta;
  out.k = k;
  out.system = s.system_ptr();
  auto sys = s.system_ptr();
  const int n = sys->n();
  out.evaluate = [s](const Eigen::VectorXd &) { return s; };
  out.derivative = [sys](const Eigen::VectorXd &, const Eigen::VectorXd &) {
    return MultiVector(sys);
  };
  out.guard = [k, n](const Eigen::VectorXd &mu) {
    return dr_detail::check_support(mu, k, n, {});
  };
  return out;
}

struct ResidualSample {
  Eigen::VectorXd mu;
  double residual_norm = 0;
  // derivative term, schouten term, theta term
  std::array<double, 3> component_norms{};
  bool passed = false;
};

enum class DerivativeMode { CentralDifference, AnalyticFrechet };

struct ResidualOptions {
  DerivativeMode mode = DerivativeMode::AnalyticFrechet;
  double h = 1e-5;
  double tol_fd = 1e-6;
  double tol_analytic = 1e-9;
  double tolerance() const {
    return mode == DerivativeMode::AnalyticFrechet ? tol_analytic : tol_fd;
  }
};

namespace dr_detail {

inline MultiVector partial(const DynamicalRMatrix &r, const Eigen::VectorXd &mu,
                           int i, const ResidualOptions &opt) {
  Eigen::VectorXd e = Eigen::VectorXd::Unit(mu.size(), i);
  if (opt.mode == DerivativeMode::AnalyticFrechet)
    return r.derivative(mu, e);
  Eigen::VectorXd up = mu + opt.h * e, dn = mu - opt.h * e;
  if (auto why = r.guard(up))
    throw DomainError("stencil point fails the guard: " + *why);
  if (auto why = r.guard(dn))
    throw DomainError("stencil point fails the guard: " + *why);
  return (r.evaluate(up) - r.evaluate(dn)) / (2 * opt.h);
}

// e^i_k = sum_j (B_k^{-1})_{ij} e_j as vectors over g
inline std::vector<Eigen::VectorXd> k_duals(const QuadraticLieAlgebra &g,
                                            const std::vector<int> &k) {
  Eigen::MatrixXd Bk = sub(g.bilinear(), k);
  Eigen::MatrixXd inv = Bk.inverse();
  std::vector<Eigen::VectorXd> out;
  for (std::size_t a = 0; a < k.size(); ++a) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.n());
    for (std::size_t b = 0; b < k.size(); ++b)
      v[k[b]] = inv(Eigen::Index(a), Eigen::Index(b));
    out.push_back(v);
  }
  return out;
}

} // namespace dr_detail

// sum_{i in k} dr/dmu^i ^ e^i + 1/2 [r, r] - eps Theta
inline ResidualSample cdybe_residual(const QuadraticLieAlgebra &g,
                                     const DynamicalRMatrix &r,
                                     const Eigen::VectorXd &mu,
                                     const ResidualOptions &opt = {}) {
  require_same(*g.system(), *r.system);
  if (auto why = r.guard(mu))
    throw DomainError(r.provenance + ": " + *why);
  auto sys = g.system();
  MultiVector rv = r.evaluate(mu);
  if (!rv.is_homogeneous(2))
    throw NumericError("r-matrix value is not of degree 2");
  MultiVector deriv(sys);
  auto duals = dr_detail::k_duals(g, r.k);
  for (std::size_t a = 0; a < r.k.size(); ++a) {
    MultiVector d = dr_detail::partial(r, mu, r.k[a], opt);
    deriv += wedge(d, MultiVector::vector(sys, duals[a]));
  }
  MultiVector sch = 0.5 * schouten_bracket(g, rv, rv);
  MultiVector th = r.coupling * cubic_theta(g);
  ResidualSample out;
  out.mu = mu;
  out.residual_norm = frame_norm(deriv + sch - th);
  out.component_norms = {frame_norm(deriv), frame_norm(sch), frame_norm(th)};
  out.passed = out.residual_norm <= opt.tolerance();
  return out;
}

// r + s with s valued in wedge^2 k; s is spot-checked against the (k,k)
// equation with its own coupling at the supplied points
inline DynamicalRMatrix add_k_solution(const QuadraticLieAlgebra &g,
                                       const DynamicalRMatrix &r,
                                       const DynamicalRMatrix &s,
                                       const std::vector<Eigen::VectorXd> &spot = {},
                                       double tol = 1e-9) {
  require_same(*r.system, *s.system);
  if (r.k != s.k)
    throw StructuralError("add_k_solution: r and s must share k");
  Blade kmask = 0;
  for (int i : r.k)
    kmask |= Blade(1) << i;
  auto h = subalgebra(g, r.k);
  auto hsys = h.system();
  auto compress = [&](const MultiVector &x) {
    Dense d(hsys->blade_count(), 0.0);
    for (auto &t : x.terms()) {
      if (t.blade & ~kmask)
        throw DomainError("add_k_solution: s has a component outside wedge^2 k");
      Blade b = 0;
      for (std::size_t a = 0; a < r.k.size(); ++a)
        if (t.blade >> r.k[a] & 1)
          b |= Blade(1) << a;
      d[b] = t.coeff;
    }
    return MultiVector::from_dense(hsys, d);
  };
  std::vector<Eigen::VectorXd> pts = spot;
  if (pts.empty()) {
    pts.push_back(Eigen::VectorXd::Zero(g.n()));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.n());
    for (int i : r.k)
      v[i] = 0.1 * (i + 1);
    pts.push_back(v);
  }
  auto duals = dr_detail::k_duals(h, [&] {
    std::vector<int> all(r.k.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }());
  int checked = 0;
  for (auto &mu : pts) {
    if (!s.admissible(mu))
      continue;
    MultiVector sv = compress(s.evaluate(mu));
    MultiVector z = 0.5 * schouten_bracket(h, sv, sv) - s.coupling * cubic_theta(h);
    for (std::size_t a = 0; a < r.k.size(); ++a)
      z += wedge(compress(s.derivative(mu, Eigen::VectorXd::Unit(g.n(), r.k[a]))),
                 MultiVector::vector(hsys, duals[a]));
    if (z.max_abs() > tol)
      throw ValidationError("add_k_solution: s fails the (k,k) equation at a spot "
                            "check (residual " + std::to_string(z.max_abs()) + ")");
    ++checked;
  }
  if (checked == 0)
    throw DomainError("add_k_solution: no admissible spot-check point for s");
  DynamicalRMatrix out = r;
  out.kind = Provenance::Sum;
  out.provenance = "sum<" + r.provenance + "," + s.provenance + ">";
  out.coupling = r.coupling + s.coupling;
  out.evaluate = [r, s](const Eigen::VectorXd &mu) {
    return r.evaluate(mu) + s.evaluate(mu);
  };
  out.derivative = [r, s](const Eigen::VectorXd &mu, const Eigen::VectorXd &v) {
    return r.derivative(mu, v) + s.derivative(mu, v);
  };
  out.guard = [r, s](const Eigen::VectorXd &mu) -> std::optional<std::string> {
    if (auto why = r.guard(mu))
      return why;
    return s.guard(mu);
  };
  return out;
}

// max deviation between analytic and central-difference partials
inline double derivative_agreement(const DynamicalRMatrix &r,
                                   const Eigen::VectorXd &mu, double h = 1e-5) {
  double worst = 0;
  ResidualOptions fd;
  fd.mode = DerivativeMode::CentralDifference;
  fd.h = h;
  ResidualOptions an;
  for (int i : r.k)
    worst = std::max(worst, distance(dr_detail::partial(r, mu, i, an),
                                     dr_detail::partial(r, mu, i, fd)));
  return worst;
}

// d/dt r(mu + t[nu,mu]) at 0 minus ad_nu r(mu)
inline double equivariance_residual(const QuadraticLieAlgebra &g,
                                    const DynamicalRMatrix &r,
                                    const Eigen::VectorXd &mu,
                                    const Eigen::VectorXd &nu, double h = 1e-5) {
  Eigen::VectorXd w = g.bracket(nu, mu);
  MultiVector lhs = (r(mu + h * w) - r(mu - h * w)) / (2 * h);
  MultiVector rhs = schouten_bracket(g, MultiVector::vector(g.system(), nu), r(mu));
  return distance(lhs, rhs);
}

// ------------------------------------------------------------- S function

enum class SPath { Auto, Direct, Star };

// J^{1/2}(A) exp(lambda(f(A)))
inline MultiVector s_function_direct(const SystemPtr &sys, const Eigen::MatrixXd &A) {
  double J = j_det_sqrt(A);
  Eigen::MatrixXd F = eval_matrix_function(AnalyticFunctionId::F_LOGDERIV, A);
  return J * exp_exterior(lambda_of(sys, F, 1e-8));
}

// S from i_S exp(lambda(A) - Phi) = symbol exp(gamma(A) - Phi) with E = V,
// phi = id, solved through the star operator of the top form
inline MultiVector s_function_star(const SystemPtr &sys, const Eigen::MatrixXd &A) {
  const int n = sys->n();
  if (!sys->is_nondegenerate())
    throw DomainError("s_function: needs a nondegenerate system");
  if (2 * n > 10)
    throw DomainError("s_function: star path limited to dim V <= 5");
  auto comb = GeneratorSystem::with_extension(*sys, n);
  Eigen::MatrixXd B2 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  B2.topLeftCorner(n, n) = sys->bilinear();
  B2.bottomRightCorner(n, n) = sys->bilinear();
  auto nondeg = GeneratorSystem::create(B2, 0, {}, sys->options());

  Eigen::MatrixXd A2 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A2.topLeftCorner(n, n) = A;
  MultiVector lam = lambda_of(comb, A2, 1e-8);
  const Eigen::MatrixXd &D = sys->dual();
  MultiVector Phi(comb);
  for (int a = 0; a < n; ++a) {
    Eigen::VectorXd ea = Eigen::VectorXd::Unit(2 * n, a);
    Eigen::VectorXd phia = Eigen::VectorXd::Zero(2 * n);
    phia.tail(n) = D.row(a).transpose();
    Phi += wedge(MultiVector::vector(comb, ea), MultiVector::vector(comb, phia));
  }
  MultiVector alpha = exp_exterior(lam - Phi);
  MultiVector beta = symbol(exp_clifford(quantize(lam - Phi)));
  MultiVector a2 = alpha.rebased(nondeg), b2 = beta.rebased(nondeg);
  MultiVector Gamma = a2.grade(2 * n);
  MultiVector sa = star(Gamma, a2), sb = star(Gamma, b2);
  MultiVector S = wedge(sb, wedge_inverse(sa));
  Dense d(sys->blade_count(), 0.0);
  double leak = 0;
  for (auto &t : S.terms()) {
    if (t.blade >> n)
      leak = std::max(leak, std::abs(t.coeff));
    else
      d[t.blade] = t.coeff;
  }
  if (leak > 1e-7 * std::max(1.0, S.max_abs()))
    throw NumericError("s_function: star path left a parameter component (" +
                       std::to_string(leak) + ")");
  return MultiVector::from_dense(sys, d);
}

inline MultiVector s_function(const SystemPtr &sys, const Eigen::MatrixXd &A,
                              SPath path = SPath::Auto) {
  if (skew_adjoint_residual(*sys, A) > 1e-8 && A.norm() > 0)
    throw DomainError("s_function: A is not skew-adjoint");
  switch (path) {
  case SPath::Direct:
    return s_function_direct(sys, A);
  case SPath::Star:
    return s_function_star(sys, A);
  case SPath::Auto:
    break;
  }
  GuardOptions go;
  go.margin = 0.5;
  if (!dr_detail::check_poles(AnalyticFunctionId::F_LOGDERIV, A, go, "A"))
    return s_function_direct(sys, A);
  return s_function_star(sys, A);
}

inline MultiVector s_function(const SkewAdjointMap &A, SPath path = SPath::Auto) {
  return s_function(A.system(), A.matrix(), path);
}

// ------------------------------------------------------------ remark identity

struct RemarkTerms {
  Eigen::VectorXd half_grad; // 1/2 sum_a d lnJ / d mu^a e^a
  Eigen::VectorXd u;         // bracket image of r_full(mu)
  double printed = 0;        // |half_grad + u|
  double corrected = 0;      // |half_grad - u|
};

inline RemarkTerms j_u_terms(const QuadraticLieAlgebra &g, const Eigen::VectorXd &mu,
                             DerivativeMode mode = DerivativeMode::AnalyticFrechet,
                             double h = 1e-5) {
  const int n = g.n();
  auto r = r_full(g);
  MultiVector rv = r(mu);
  Eigen::VectorXd grad(n);
  Eigen::MatrixXd F = eval_matrix_function(AnalyticFunctionId::F_LOGDERIV, adjoint(g, mu));
  for (int a = 0; a < n; ++a) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, a);
    if (mode == DerivativeMode::AnalyticFrechet) {
      grad[a] = (F * adjoint(g, e)).trace();
    } else {
      double up = std::log(mf_detail::j_sinhc(adjoint(g, mu + h * e), {}).determinant());
      double dn = std::log(mf_detail::j_sinhc(adjoint(g, mu - h * e), {}).determinant());
      grad[a] = (up - dn) / (2 * h);
    }
  }
  RemarkTerms t;
  t.half_grad = 0.5 * g.system()->dual() * grad;
  t.u = bracket_contraction_u(g, rv);
  t.printed = frame_norm(MultiVector::vector(g.system(), t.half_grad + t.u));
  t.corrected = frame_norm(MultiVector::vector(g.system(), t.half_grad - t.u));
  return t;
}

inline double j_u_identity_residual(const QuadraticLieAlgebra &g,
                                    const Eigen::VectorXd &mu,
                                    DerivativeMode mode = DerivativeMode::AnalyticFrechet) {
  return j_u_terms(g, mu, mode).printed;
}

} // namespace cdyb
