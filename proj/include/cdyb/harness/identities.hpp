#pragma once
#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "../blade_engine.hpp"
#include "../dynamical_r.hpp"
#include "../matrix_functions.hpp"
#include "../quadratic_lie.hpp"
#include "../spinor_rep.hpp"
#include "config.hpp"
#include "report.hpp"
#include "sampling.hpp"

namespace cdyb {

enum class IdentityId {
  KEY, ALTER, C1, C2, C3, RELATED, RCONJ, THETA_SQ, DELTA_SQ,
  CDYBE_FULL, CDYBE_SPLIT, CDYBE_TWISTED, CDYBE_SCALED, CDYBE_RATIONAL,
  CDYBE_SUM, REMARK_JU, RHO_FACTOR, SYMBOL_I, SYMBOL_II
};

inline const std::vector<std::pair<IdentityId, const char *>> &identity_table() {
  static const std::vector<std::pair<IdentityId, const char *>> t = {
      {IdentityId::KEY, "KEY"},
      {IdentityId::ALTER, "ALTER"},
      {IdentityId::C1, "C1"},
      {IdentityId::C2, "C2"},
      {IdentityId::C3, "C3"},
      {IdentityId::RELATED, "RELATED"},
      {IdentityId::RCONJ, "RCONJ"},
      {IdentityId::THETA_SQ, "THETA_SQ"},
      {IdentityId::DELTA_SQ, "DELTA_SQ"},
      {IdentityId::CDYBE_FULL, "CDYBE_FULL"},
      {IdentityId::CDYBE_SPLIT, "CDYBE_SPLIT"},
      {IdentityId::CDYBE_TWISTED, "CDYBE_TWISTED"},
      {IdentityId::CDYBE_SCALED, "CDYBE_SCALED"},
      {IdentityId::CDYBE_RATIONAL, "CDYBE_RATIONAL"},
      {IdentityId::CDYBE_SUM, "CDYBE_SUM"},
      {IdentityId::REMARK_JU, "REMARK_JU"},
      {IdentityId::RHO_FACTOR, "RHO_FACTOR"},
      {IdentityId::SYMBOL_I, "SYMBOL_I"},
      {IdentityId::SYMBOL_II, "SYMBOL_II"}};
  return t;
}

inline const char *identity_name(IdentityId id) {
  for (auto &[k, v] : identity_table())
    if (k == id)
      return v;
  return "?";
}

inline std::optional<IdentityId> parse_identity(const std::string &s) {
  for (auto &[k, v] : identity_table())
    if (s == v)
      return k;
  return std::nullopt;
}

// ------------------------------------------------------------ building blocks

struct KeyResult {
  double key = 0;   // |LHS - RHS| of the key identity
  double alter = 0; // |LHS - RHS| of the alternative right side
  double rhs_gap = 0; // |RHS_key - RHS_alter|
  double lhs_norm = 0;
};

// V + E with zero pairing on E; phi is |E| x n
inline KeyResult verify_key_identity(const SystemPtr &V, const Eigen::MatrixXd &A,
                                     const Eigen::MatrixXd &phi,
                                     SPath path = SPath::Auto) {
  const int n = V->n();
  const int m = int(phi.rows());
  if (m > 0 && phi.cols() != n)
    throw StructuralError("phi must map V to E");
  auto comb = GeneratorSystem::with_extension(*V, m);
  const int N = n + m;
  auto lift = [&](const MultiVector &x) {
    Dense d(comb->blade_count(), 0.0);
    for (auto &t : x.terms())
      d[t.blade] = t.coeff;
    return MultiVector::from_dense(comb, d);
  };
  auto evec = [&](const Eigen::VectorXd &e) { // vector in E
    Eigen::VectorXd v = Eigen::VectorXd::Zero(N);
    v.tail(m) = e;
    return MultiVector::vector(comb, v);
  };
  const Eigen::MatrixXd &D = V->dual();
  // phi^a = phi(e^a), e^a the dual basis
  Eigen::MatrixXd phis = m > 0 ? Eigen::MatrixXd(phi * D) : Eigen::MatrixXd(0, n);
  MultiVector Phi(comb);
  for (int a = 0; a < n && m > 0; ++a)
    Phi += wedge(MultiVector::vector(comb, Eigen::VectorXd::Unit(N, a)), evec(phis.col(a)));

  Eigen::MatrixXd AN = Eigen::MatrixXd::Zero(N, N);
  AN.topLeftCorner(n, n) = A;
  MultiVector lam = lambda_of(comb, AN, 1e-8);
  MultiVector S = lift(s_function(V, A, path));
  MultiVector lhs = quantize(contract_multi(S, exp_exterior(lam - Phi)));
  MultiVector rhs = exp_clifford(quantize(lam - Phi));

  // exp(-varpi) exp(gamma) exp(-sum e_a psi^a), psi = phi jR(A)
  Eigen::MatrixXd G = eval_matrix_function(AnalyticFunctionId::G_AUX, A);
  Eigen::MatrixXd JR = eval_matrix_function(AnalyticFunctionId::JR, A);
  MultiVector varpi(comb), Psi(comb);
  for (int a = 0; a < n && m > 0; ++a) {
    Eigen::VectorXd ga = phi * G.col(a);
    varpi += 0.5 * wedge(evec(ga), evec(phis.col(a)));
    Psi += wedge(MultiVector::vector(comb, Eigen::VectorXd::Unit(N, a)),
                 evec(phi * JR * D.col(a)));
  }
  MultiVector alt = clifford_product(
      clifford_product(exp_exterior(-varpi), exp_clifford(quantize(lam))),
      exp_clifford(-Psi));
  KeyResult r;
  r.key = (lhs - rhs).norm();
  r.alter = (lhs - alt).norm();
  r.rhs_gap = (rhs - alt).norm();
  r.lhs_norm = lhs.norm();
  return r;
}

// symbol(exp gamma(A)) against (c1); (c2) when the space is even and definite
struct ExpFormulaResult {
  double c1 = 0;
  std::optional<double> c2;
};

inline ExpFormulaResult verify_exp_formulas(const SkewAdjointMap &A) {
  const auto &sys = A.system();
  MultiVector series = symbol(exp_clifford(gamma_of(sys, A.matrix())));
  ExpFormulaResult r;
  r.c1 = frame_norm(series - symbol_formula_I(A));
  if (sys->n() % 2 == 0 && sys->is_definite())
    r.c2 = frame_norm(series - symbol_formula_II(A));
  return r;
}

// symbol(c^ exp gamma(A)) against (c3), up to a global sign
inline double verify_c3(const SystemPtr &sys, const Eigen::MatrixXd &c,
                        const Eigen::MatrixXd &A) {
  MultiVector lift = pin_lift(sys, c);
  MultiVector lhs = symbol(clifford_product(lift, exp_clifford(gamma_of(sys, A))));
  MultiVector rhs = symbol_formula_II(sys, c, A);
  return std::min(frame_norm(lhs - rhs), frame_norm(lhs + rhs));
}

struct DifferentialResult {
  double related = 0;        // Sy delta Q - (d + 1/4 i_Theta)
  double delta_sq = 0;       // delta^2
  double theta_sq_rest = 0;  // q(Theta)^2 minus its scalar part
  double theta_sq_scalar = 0;
  double gamma_closed = 0;   // closedness of gamma - sum e_a phi^a
};

inline double gamma_closedness(const QuadraticLieAlgebra &g) {
  const int n = g.n();
  auto comb = GeneratorSystem::with_extension(*g.system(), n);
  CliffordDifferential delta(g, comb);
  const Eigen::MatrixXd &D = g.system()->dual();
  auto evec = [&](const Eigen::VectorXd &e) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * n);
    v.tail(n) = e;
    return MultiVector::vector(comb, v);
  };
  MultiVector X(comb), Y(comb);
  double lin = 0;
  for (int a = 0; a < n; ++a) {
    MultiVector phia = evec(D.row(a).transpose());
    X -= wedge(MultiVector::vector(comb, Eigen::VectorXd::Unit(2 * n, a)), phia);
    Eigen::MatrixXd adA = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    adA.topLeftCorner(n, n) = adjoint(g, g.basis(a));
    MultiVector ga = gamma_of(comb, adA);
    Y += clifford_product(phia, ga);
    lin = std::max(lin, delta(ga).norm());
  }
  return std::max(lin, (delta(X) + Y).norm());
}

inline DifferentialResult verify_differential_identities(const QuadraticLieAlgebra &g) {
  auto s = g.system();
  DifferentialResult r;
  MultiVector th = cubic_theta(g);
  CliffordDifferential delta(g);
  LieDifferential d(g);
  OperatorMatrix dm = delta.matrix();
  OperatorMatrix rel = symbol_operator(s) * dm * quantize_operator(s) - d.matrix() -
                       0.25 * contraction_operator(th);
  r.related = rel.cwiseAbs().maxCoeff();
  r.delta_sq = (dm * dm).cwiseAbs().maxCoeff();
  MultiVector q2 = clifford_product(delta.q_theta(), delta.q_theta());
  r.theta_sq_scalar = q2.scalar_part();
  r.theta_sq_rest = (q2 - MultiVector::scalar(s, r.theta_sq_scalar)).max_abs();
  r.gamma_closed = gamma_closedness(g);
  return r;
}

// exp(-i_r) d exp(i_r) - (d - 1/2 i_[r,r] + sum e^a ^ i_[e_a,r] - i_u)
inline double rconj_residual(const QuadraticLieAlgebra &g, const MultiVector &r) {
  auto s = g.system();
  const int n = g.n();
  LieDifferential d(g);
  OperatorMatrix dm = d.matrix();
  OperatorMatrix lhs = contraction_operator(exp_exterior(-r)) * dm *
                       contraction_operator(exp_exterior(r));
  OperatorMatrix rhs = dm - 0.5 * contraction_operator(schouten_bracket(g, r, r));
  const Eigen::MatrixXd &D = s->dual();
  for (int a = 0; a < n; ++a) {
    MultiVector ea = MultiVector::vector(s, g.basis(a));
    MultiVector br = schouten_bracket(g, ea, r);
    if (br.is_zero())
      continue;
    rhs += wedge_operator(MultiVector::vector(s, D.col(a))) * contraction_operator(br);
  }
  rhs -= contraction_operator(MultiVector::vector(s, bracket_contraction_u(g, r)));
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

// ------------------------------------------------------------------ the cases

struct IdentityCase {
  IdentityId id = IdentityId::KEY;
  ParsedAlgebra algebra{catalog("so3"), "so3"};
  int samples = 20;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> tol;
  DerivativeMode mode = DerivativeMode::AnalyticFrechet;
  std::optional<Eigen::VectorXd> mu; // fixes A = ad_mu
  std::optional<double> theta;       // fixes A = theta B^{-1}(e1 e0^T - e0 e1^T)
  double t = 2.0;                    // scaled family
  std::optional<int> e_dim;          // KEY / ALTER: |E|; default alternates 0, n
};

inline double default_tolerance(IdentityId id, DerivativeMode mode) {
  switch (id) {
  case IdentityId::RELATED:
  case IdentityId::RCONJ:
  case IdentityId::THETA_SQ:
  case IdentityId::DELTA_SQ:
    return 1e-10;
  case IdentityId::CDYBE_FULL:
  case IdentityId::CDYBE_SPLIT:
  case IdentityId::CDYBE_TWISTED:
  case IdentityId::CDYBE_SCALED:
  case IdentityId::CDYBE_RATIONAL:
  case IdentityId::CDYBE_SUM:
  case IdentityId::REMARK_JU:
    return mode == DerivativeMode::AnalyticFrechet ? 1e-9 : 1e-6;
  default:
    return 1e-9;
  }
}

namespace id_detail {

// fixed A from --mu / --theta, or nullopt for random sampling
inline std::optional<Eigen::MatrixXd> fixed_A(const IdentityCase &c,
                                              const QuadraticLieAlgebra &g) {
  if (c.mu) {
    if (c.mu->size() != g.n())
      throw UsageError("--mu needs " + std::to_string(g.n()) + " components");
    return adjoint(g, *c.mu);
  }
  if (c.theta) {
    if (g.n() < 2)
      throw UsageError("--theta needs dimension >= 2");
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(g.n(), g.n());
    K(1, 0) = 1;
    K(0, 1) = -1;
    return Eigen::MatrixXd(*c.theta * g.system()->dual() * K);
  }
  return std::nullopt;
}

using APredicate = std::function<bool(const Eigen::MatrixXd &)>;

inline Eigen::MatrixXd draw_A(const IdentityCase &c, const QuadraticLieAlgebra &g,
                              Rng &rng, const APredicate &ok, const std::string &what) {
  if (auto A = fixed_A(c, g)) {
    if (!ok(*A))
      throw GuardExhaustion("the requested A is outside the domain of " + what);
    return *A;
  }
  std::function<Eigen::MatrixXd(Rng &)> draw = [&](Rng &r) {
    double scale = r.uniform(0.2, 1.5);
    return random_skew_adjoint(*g.system(), r, scale);
  };
  std::function<bool(const Eigen::MatrixXd &)> acc = ok;
  return sample_admissible(draw, acc, rng, what);
}

inline APredicate poles_ok(AnalyticFunctionId id, double margin = 0.3) {
  return [id, margin](const Eigen::MatrixXd &A) {
    GuardOptions go;
    go.margin = margin;
    return !dr_detail::check_poles(id, A, go, "A");
  };
}

inline json params_A(const Eigen::MatrixXd &A) { return json{{"A", to_json(A)}}; }

struct Family {
  DynamicalRMatrix r;
  std::vector<std::string> notes;
};

inline Family make_family(IdentityId id, const QuadraticLieAlgebra &g,
                          const CatalogEntry &e, double t) {
  auto base = [&]() { return e.split ? r_split(g, *e.split) : r_full(g); };
  switch (id) {
  case IdentityId::CDYBE_FULL:
    return {r_full(g), {}};
  case IdentityId::CDYBE_SPLIT:
    if (!e.split)
      throw UsageError(g.name() + " has no split; supply one in a config file");
    return {r_split(g, *e.split), {}};
  case IdentityId::CDYBE_TWISTED:
    if (!e.twist)
      throw UsageError(g.name() + " has no automorphism for the twisted family");
    return {r_twisted(g, *e.twist), {}};
  case IdentityId::CDYBE_SCALED:
    return {scale_transform(base(), t), {}};
  case IdentityId::CDYBE_RATIONAL:
    if (!e.split || e.split->p.empty())
      throw UsageError(g.name() + " has no split with nonempty p for the rational family");
    return {rational_limit(g, *e.split), {}};
  case IdentityId::CDYBE_SUM: {
    auto r = base();
    // constant 2-form on an abelian k of dimension >= 2, otherwise 0
    MultiVector s(g.system());
    bool abelian_k = true;
    for (int a : r.k)
      for (int b : r.k)
        for (int c : r.k)
          if (g.f(c, a, b) != 0.0)
            abelian_k = false;
    std::vector<std::string> notes;
    if (abelian_k && r.k.size() >= 2)
      s = MultiVector::blade(g.system(), (Blade(1) << r.k[0]) | (Blade(1) << r.k[1]), 0.3);
    else
      notes.push_back("k is not abelian of dimension >= 2; added s = 0");
    return {add_k_solution(g, r, constant_solution(r.k, s, 0.0)), notes};
  }
  default:
    throw UsageError(std::string(identity_name(id)) + " is not a CDYBE family");
  }
}

} // namespace id_detail

inline DynamicalRMatrix shifted_family(const QuadraticLieAlgebra &g, const CatalogEntry &e,
                                       std::vector<std::string> *notes = nullptr) {
  auto r = e.split ? r_split(g, *e.split) : r_full(g);
  Eigen::VectorXd nu = 0.2 * g.basis(r.k.front());
  try {
    return shift_transform(g, r, nu);
  } catch (const DomainError &) {
    if (notes)
      notes->push_back("first basis vector of k is not central; nu = 0");
    return shift_transform(g, r, Eigen::VectorXd::Zero(g.n()));
  }
}

inline ResidualReport run_cdybe(const CatalogEntry &e, const DynamicalRMatrix &r,
                                const std::string &identity, int samples,
                                std::uint64_t seed, DerivativeMode mode,
                                std::optional<double> tol = std::nullopt) {
  const auto &g = e.algebra;
  ResidualReport rep;
  rep.identity = identity;
  rep.algebra = g.name();
  rep.seed = seed;
  rep.norm = frame_norm_name(*g.system());
  ResidualOptions opt;
  opt.mode = mode;
  if (tol)
    (mode == DerivativeMode::AnalyticFrechet ? opt.tol_analytic : opt.tol_fd) = *tol;
  rep.tolerance = opt.tolerance();
  Rng rng(seed);
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd mu = sample_mu(r, g.n(), rng, 2.5, opt.h);
    ResidualSample s = cdybe_residual(g, r, mu, opt);
    SampleRecord rec;
    rec.params = {{"mu", to_json(mu)},
                  {"coupling", r.coupling},
                  {"provenance", r.provenance},
                  {"mode", mode == DerivativeMode::AnalyticFrechet ? "analytic" : "fd"}};
    rec.residual = s.residual_norm;
    rec.components = {{"derivative", s.component_norms[0]},
                      {"schouten", s.component_norms[1]},
                      {"theta", s.component_norms[2]}};
    rep.add(rec);
  }
  return rep;
}

inline ResidualReport run_identity(const IdentityCase &c) {
  Stopwatch sw;
  const auto &e = c.algebra.entry;
  const auto &g = e.algebra;
  auto sys = g.system();
  const int n = g.n();
  ResidualReport rep;
  rep.identity = identity_name(c.id);
  rep.algebra = g.name();
  rep.seed = c.seed;
  rep.tolerance = c.tol.value_or(default_tolerance(c.id, c.mode));
  rep.norm = frame_norm_name(*sys);
  Rng rng(c.seed);
  using id_detail::draw_A;
  using id_detail::poles_ok;
  using F = AnalyticFunctionId;

  switch (c.id) {
  case IdentityId::KEY:
  case IdentityId::ALTER: {
    rep.norm = "coefficient-l2";
    for (int i = 0; i < c.samples; ++i) {
      Eigen::MatrixXd A = draw_A(c, g, rng, poles_ok(F::F_LOGDERIV), "S(A)");
      int m = c.e_dim.value_or(i % 2 == 0 ? 0 : n);
      if (n + m > GeneratorSystem::kMaxGenerators)
        throw UsageError("V + E exceeds the generator cap");
      Eigen::MatrixXd phi = rng.uniform_matrix(m, n, -1, 1);
      KeyResult k = verify_key_identity(sys, A, phi);
      SampleRecord rec;
      rec.params = id_detail::params_A(A);
      rec.params["phi"] = to_json(phi);
      rec.params["E_dim"] = m;
      rec.residual = c.id == IdentityId::KEY ? k.key : k.alter;
      rec.components = {{"key", k.key}, {"alter", k.alter}, {"rhs_gap", k.rhs_gap},
                        {"lhs_norm", k.lhs_norm}};
      rep.add(rec);
    }
    break;
  }
  case IdentityId::C1:
  case IdentityId::C2:
  case IdentityId::SYMBOL_I:
  case IdentityId::SYMBOL_II: {
    bool needs_pf = c.id == IdentityId::C2 || c.id == IdentityId::SYMBOL_II;
    if (needs_pf && (n % 2 || !sys->is_definite()))
      throw UsageError(std::string(identity_name(c.id)) +
                       " needs an even-dimensional definite space");
    auto ok = [&](const Eigen::MatrixXd &A) {
      if (!poles_ok(F::TANH_HALF)(A))
        return false;
      return !needs_pf || poles_ok(F::COTH_HALF)(A);
    };
    for (int i = 0; i < c.samples; ++i) {
      Eigen::MatrixXd A = draw_A(c, g, rng, ok, identity_name(c.id));
      SkewAdjointMap Am(sys, A, 1e-8);
      SampleRecord rec;
      rec.params = id_detail::params_A(A);
      if (c.id == IdentityId::C1 || c.id == IdentityId::C2) {
        auto r = verify_exp_formulas(Am);
        rec.residual = c.id == IdentityId::C1 ? r.c1 : *r.c2;
        rec.components = {{"c1", r.c1}};
        if (r.c2)
          rec.components.push_back({"c2", *r.c2});
      } else if (c.id == IdentityId::SYMBOL_I) {
        // orthogonal-C form on the + branch against the series
        Eigen::MatrixXd C = eval_matrix_function(F::EXPM, A);
        MultiVector series = symbol(exp_clifford(gamma_of(sys, A)));
        rec.residual = frame_norm(series - symbol_formula_I(sys, C, 1));
        rec.components = {{"series_vs_I", rec.residual}};
      } else {
        MultiVector one = symbol_formula_I(Am), two = symbol_formula_II(Am);
        rec.residual = frame_norm(one - two);
        rec.components = {{"I_vs_II", rec.residual}, {"top_degree", two.coeff(sys->full_mask())}};
      }
      rep.add(rec);
    }
    break;
  }
  case IdentityId::C3: {
    if (!sys->is_definite())
      throw UsageError("C3 needs a definite space");
    Eigen::MatrixXd P = orthonormal_frame(*sys);
    for (int i = 0; i < c.samples; ++i) {
      std::function<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>(Rng &)> draw = [&](Rng &r) {
        Eigen::MatrixXd X(n, n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            X(a, b) = r.normal();
        Eigen::MatrixXd Q = X.householderQr().householderQ();
        Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(n, n), A0 = Eigen::MatrixXd::Zero(n, n);
        for (int b = 0; b + 1 < n; b += 2) {
          double th = r.uniform(0, 2 * std::numbers::pi), a = r.uniform(-2, 2);
          c0(b, b) = c0(b + 1, b + 1) = std::cos(th);
          c0(b + 1, b) = std::sin(th);
          c0(b, b + 1) = -std::sin(th);
          A0(b + 1, b) = a;
          A0(b, b + 1) = -a;
        }
        if (n % 2)
          c0(n - 1, n - 1) = -1;
        Eigen::MatrixXd U = P * Q, Ui = U.inverse();
        return std::make_pair(Eigen::MatrixXd(U * c0 * Ui), Eigen::MatrixXd(U * A0 * Ui));
      };
      std::function<bool(const std::pair<Eigen::MatrixXd, Eigen::MatrixXd> &)> ok =
          [&](const std::pair<Eigen::MatrixXd, Eigen::MatrixXd> &p) {
            Eigen::MatrixXd M = p.first * eval_matrix_function(F::EXPM, p.second) -
                                Eigen::MatrixXd::Identity(n, n);
            return mf_detail::sigma_min(M) >= 0.3;
          };
      auto [cm, A] = sample_admissible(draw, ok, rng, "C3 commuting pair");
      SampleRecord rec;
      rec.params = {{"c", to_json(cm)}, {"A", to_json(A)}};
      rec.residual = verify_c3(sys, cm, A);
      rec.components = {{"twisted_adjoint", twisted_adjoint_residual(pin_lift(sys, cm), cm)}};
      rep.add(rec);
    }
    rep.notes.push_back("compared up to a global sign");
    break;
  }
  case IdentityId::RELATED:
  case IdentityId::DELTA_SQ:
  case IdentityId::THETA_SQ: {
    rep.norm = "operator-max-abs";
    auto r = verify_differential_identities(g);
    SampleRecord rec;
    rec.params = json::object();
    if (c.id == IdentityId::RELATED) {
      rec.residual = std::max(r.related, r.gamma_closed);
      rec.components = {{"related", r.related}, {"gamma_closed", r.gamma_closed}};
    } else if (c.id == IdentityId::DELTA_SQ) {
      rec.residual = r.delta_sq;
      rec.components = {{"delta_sq", r.delta_sq}};
    } else {
      rec.residual = r.theta_sq_rest;
      rec.components = {{"scalar", r.theta_sq_scalar}, {"non_scalar", r.theta_sq_rest}};
    }
    rep.add(rec);
    break;
  }
  case IdentityId::RCONJ: {
    rep.norm = "operator-max-abs";
    for (int i = 0; i < c.samples; ++i) {
      Dense d(sys->blade_count(), 0.0);
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          d[(Blade(1) << a) | (Blade(1) << b)] = rng.uniform(-1, 1);
      MultiVector r = MultiVector::from_dense(sys, d);
      SampleRecord rec;
      rec.params = {{"r", to_json(lambda_inv(r))}};
      rec.residual = rconj_residual(g, r);
      rep.add(rec);
    }
    break;
  }
  case IdentityId::CDYBE_FULL:
  case IdentityId::CDYBE_SPLIT:
  case IdentityId::CDYBE_TWISTED:
  case IdentityId::CDYBE_SCALED:
  case IdentityId::CDYBE_RATIONAL:
  case IdentityId::CDYBE_SUM: {
    auto fam = id_detail::make_family(c.id, g, e, c.t);
    auto out = run_cdybe(e, fam.r, identity_name(c.id), c.samples, c.seed, c.mode, c.tol);
    out.notes = fam.notes;
    out.runtime_ms = sw.ms();
    return out;
  }
  case IdentityId::REMARK_JU: {
    auto r = r_full(g);
    for (int i = 0; i < c.samples; ++i) {
      Eigen::VectorXd mu = c.mu ? *c.mu : sample_mu(r, n, rng);
      if (!r.admissible(mu))
        throw GuardExhaustion("the requested mu is outside the domain of J");
      auto t = j_u_terms(g, mu, c.mode);
      SampleRecord rec;
      rec.params = {{"mu", to_json(mu)}};
      rec.residual = t.printed;
      rec.components = {{"printed", t.printed},
                        {"corrected_sign", t.corrected},
                        {"half_grad_lnJ", t.half_grad.norm()},
                        {"u", t.u.norm()}};
      rep.add(rec);
    }
    break;
  }
  case IdentityId::RHO_FACTOR: {
    bool main_form = n % 2 == 0;
    auto ok = [&](const Eigen::MatrixXd &A) {
      if (!poles_ok(F::F_LOGDERIV)(A))
        return false;
      if (!main_form)
        return true;
      Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      return mf_detail::sigma_min(eval_matrix_function(F::EXPM, A) - I) >= 0.3 &&
             mf_detail::sigma_min(A) >= 0.3;
    };
    for (int i = 0; i < c.samples; ++i) {
      Eigen::MatrixXd A = draw_A(c, g, rng, ok, "RHO_FACTOR");
      SampleRecord rec;
      rec.params = id_detail::params_A(A);
      double fac2 = rho_factorization_fac2(sys, A);
      rec.components = {{"fac2", fac2}};
      rec.residual = fac2;
      if (main_form) {
        // D = a A + b A^3 commutes with exp(A); b small keeps D invertible
        std::function<Eigen::MatrixXd(Rng &)> drawD = [&](Rng &r) {
          return Eigen::MatrixXd(r.uniform(0.5, 1.5) * A + r.uniform(-0.1, 0.1) * A * A * A);
        };
        std::function<bool(const Eigen::MatrixXd &)> okD = [](const Eigen::MatrixXd &D) {
          return mf_detail::sigma_min(D) >= 0.3;
        };
        Eigen::MatrixXd D = sample_admissible(drawD, okD, rng, "D");
        Eigen::MatrixXd C = eval_matrix_function(F::EXPM, A);
        double f1 = f1_block_residual(sys, C, D, factorize_f1(sys, C, D, 1e-8));
        auto fm = rho_factorization_main(sys, A, D);
        rec.params["D"] = to_json(D);
        rec.components.push_back({"f1_block", f1});
        rec.components.push_back({"main", fm.residual});
        rec.residual = std::max({fac2, fm.residual, f1});
      }
      rep.add(rec);
    }
    if (!main_form)
      rep.notes.push_back("odd dimension: only the fac2 form applies");
    break;
  }
  }
  rep.runtime_ms = sw.ms();
  return rep;
}

inline const std::vector<std::string> &cdybe_family_names() {
  static const std::vector<std::string> names = {"full",     "split", "twisted", "scaled",
                                                 "rational", "sum",   "shifted"};
  return names;
}

inline std::optional<IdentityId> family_identity(const std::string &f) {
  if (f == "full") return IdentityId::CDYBE_FULL;
  if (f == "split") return IdentityId::CDYBE_SPLIT;
  if (f == "twisted") return IdentityId::CDYBE_TWISTED;
  if (f == "scaled") return IdentityId::CDYBE_SCALED;
  if (f == "rational") return IdentityId::CDYBE_RATIONAL;
  if (f == "sum") return IdentityId::CDYBE_SUM;
  return std::nullopt;
}

// one report per applicable family; families that do not apply to the
// algebra go to skipped as "family: reason", guard exhaustion is recorded
// as a failed report
inline std::vector<ResidualReport>
run_cdybe_suite(const ParsedAlgebra &alg, const std::vector<std::string> &families,
                int samples, std::uint64_t seed, DerivativeMode mode, double t = 2.0,
                std::vector<std::string> *skipped = nullptr) {
  std::vector<ResidualReport> out;
  const auto &g = alg.entry.algebra;
  for (auto &f : families)
    if (f != "shifted" && !family_identity(f))
      throw UsageError("unknown family '" + f + "'");
  for (auto &f : families) {
    Stopwatch sw;
    try {
      if (f == "shifted") {
        std::vector<std::string> notes;
        auto r = shifted_family(g, alg.entry, &notes);
        auto rep = run_cdybe(alg.entry, r, "CDYBE_SHIFTED", samples, seed, mode);
        rep.notes = notes;
        rep.runtime_ms = sw.ms();
        out.push_back(rep);
        continue;
      }
      auto id = family_identity(f);
      IdentityCase c;
      c.id = *id;
      c.algebra = alg;
      c.samples = samples;
      c.seed = seed;
      c.mode = mode;
      c.t = t;
      out.push_back(run_identity(c));
    } catch (const UsageError &ex) {
      if (skipped)
        skipped->push_back(f + ": " + ex.what());
      continue;
    } catch (const GuardExhaustion &ex) {
      ResidualReport rep;
      rep.guard_exhausted = true;
      auto fid = family_identity(f);
      rep.identity = fid ? identity_name(*fid) : "CDYBE_SHIFTED";
      rep.algebra = g.name();
      rep.seed = seed;
      rep.notes.push_back(std::string("guard exhaustion: ") + ex.what());
      rep.runtime_ms = sw.ms();
      out.push_back(rep);
    }
  }
  return out;
}

} // namespace cdyb
