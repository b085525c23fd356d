#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "blade_engine.hpp"
#include "matrix_functions.hpp"

namespace cdyb {

// Structure constants f^c_{ab} = <e^c, [e_a, e_b]> plus an invariant form.
class QuadraticLieAlgebra {
public:
  QuadraticLieAlgebra(std::string name, SystemPtr sys, std::vector<double> f)
      : name_(std::move(name)), sys_(std::move(sys)), f_(std::move(f)) {
    const int n = sys_->n();
    if (!sys_->is_nondegenerate())
      throw StructuralError("Lie algebra form must be nondegenerate");
    if (f_.size() != std::size_t(n) * n * n)
      throw StructuralError("structure tensor has the wrong size");
  }

  static QuadraticLieAlgebra from_brackets(std::string name,
                                           const Eigen::MatrixXd &B) {
    const int n = int(B.rows());
    return QuadraticLieAlgebra(std::move(name), GeneratorSystem::create(B),
                               std::vector<double>(std::size_t(n) * n * n, 0.0));
  }

  const std::string &name() const { return name_; }
  const SystemPtr &system() const { return sys_; }
  int n() const { return sys_->n(); }
  const Eigen::MatrixXd &bilinear() const { return sys_->bilinear(); }

  double f(int c, int a, int b) const { return f_[idx(c, a, b)]; }
  double &f(int c, int a, int b) { return f_[idx(c, a, b)]; }
  // sets [e_a, e_b] component c and its antisymmetric partner
  void set_bracket(int a, int b, int c, double v) {
    f(c, a, b) = v;
    f(c, b, a) = -v;
  }

  Eigen::VectorXd bracket(const Eigen::VectorXd &x,
                          const Eigen::VectorXd &y) const {
    const int n = this->n();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < n; ++a) {
      if (x[a] == 0.0)
        continue;
      for (int b = 0; b < n; ++b) {
        if (y[b] == 0.0)
          continue;
        for (int c = 0; c < n; ++c)
          out[c] += x[a] * y[b] * f(c, a, b);
      }
    }
    return out;
  }

  Eigen::VectorXd basis(int a) const {
    return Eigen::VectorXd::Unit(n(), a);
  }

  double max_structure() const {
    double m = 0;
    for (double v : f_)
      m = std::max(m, std::abs(v));
    return m;
  }

private:
  std::size_t idx(int c, int a, int b) const {
    const std::size_t n = std::size_t(this->n());
    return (std::size_t(c) * n + std::size_t(a)) * n + std::size_t(b);
  }
  std::string name_;
  SystemPtr sys_;
  std::vector<double> f_;
};

struct InvariantCheck {
  std::string name;
  double residual = 0;
  bool passed = true;
  std::string detail; // offending indices

  InvariantCheck() = default;
  explicit InvariantCheck(std::string n) : name(std::move(n)) {}
};

struct AlgebraReport {
  std::vector<InvariantCheck> checks;
  bool passed() const {
    for (auto &c : checks)
      if (!c.passed)
        return false;
    return true;
  }
  std::string summary() const {
    std::ostringstream os;
    for (auto &c : checks) {
      os << (c.passed ? "ok   " : "FAIL ") << c.name << " residual "
         << c.residual;
      if (!c.detail.empty())
        os << " at " << c.detail;
      os << "\n";
    }
    return os.str();
  }
};

struct SubalgebraSplit {
  std::vector<int> k, p;
};

inline AlgebraReport validate_algebra(const QuadraticLieAlgebra &g,
                                      double tol = 1e-10) {
  const int n = g.n();
  const auto &B = g.bilinear();
  double scale = std::max(1.0, g.max_structure() * g.max_structure());
  AlgebraReport rep;

  InvariantCheck anti{"antisymmetry"};
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double r = std::abs(g.f(c, a, b) + g.f(c, b, a));
        if (r > anti.residual) {
          anti.residual = r;
          anti.detail = "(a,b,c)=(" + std::to_string(a) + "," +
                        std::to_string(b) + "," + std::to_string(c) + ")";
        }
      }
  anti.passed = anti.residual <= tol * std::max(1.0, g.max_structure());
  if (anti.passed)
    anti.detail.clear();
  rep.checks.push_back(anti);

  InvariantCheck jac{"jacobi"};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int e = 0; e < n; ++e) {
          double s = 0;
          for (int d = 0; d < n; ++d)
            s += g.f(d, a, b) * g.f(e, d, c) + g.f(d, b, c) * g.f(e, d, a) +
                 g.f(d, c, a) * g.f(e, d, b);
          if (std::abs(s) > jac.residual) {
            jac.residual = std::abs(s);
            jac.detail = "(a,b,c,e)=(" + std::to_string(a) + "," +
                         std::to_string(b) + "," + std::to_string(c) + "," +
                         std::to_string(e) + ")";
          }
        }
  jac.passed = jac.residual <= tol * scale;
  if (jac.passed)
    jac.detail.clear();
  rep.checks.push_back(jac);

  // B([x,y],z) + B(y,[x,z]) on basis triples
  InvariantCheck inv{"invariance"};
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        double s = 0;
        for (int c = 0; c < n; ++c)
          s += g.f(c, x, y) * B(c, z) + B(y, c) * g.f(c, x, z);
        if (std::abs(s) > inv.residual) {
          inv.residual = std::abs(s);
          inv.detail = "(x,y,z)=(" + std::to_string(x) + "," +
                       std::to_string(y) + "," + std::to_string(z) + ")";
        }
      }
  inv.passed = inv.residual <= tol * std::max(1.0, g.max_structure()) *
                                   std::max(1.0, B.cwiseAbs().maxCoeff());
  if (inv.passed)
    inv.detail.clear();
  rep.checks.push_back(inv);
  return rep;
}

inline AlgebraReport validate_split(const QuadraticLieAlgebra &g,
                                    const SubalgebraSplit &sp,
                                    double tol = 1e-10) {
  const int n = g.n();
  AlgebraReport rep;
  InvariantCheck cover{"split covers generators"};
  std::vector<int> seen(n, 0);
  for (int i : sp.k)
    if (i >= 0 && i < n)
      ++seen[i];
    else
      cover.detail = "index " + std::to_string(i) + " out of range";
  for (int i : sp.p)
    if (i >= 0 && i < n)
      ++seen[i];
    else
      cover.detail = "index " + std::to_string(i) + " out of range";
  for (int i = 0; i < n; ++i)
    if (seen[i] != 1 && cover.detail.empty())
      cover.detail = "index " + std::to_string(i) +
                     (seen[i] ? " listed twice" : " missing");
  cover.passed = cover.detail.empty();
  cover.residual = cover.passed ? 0 : 1;
  rep.checks.push_back(cover);
  if (!cover.passed)
    return rep;

  const auto &B = g.bilinear();
  InvariantCheck orth{"split orthogonal"};
  for (int i : sp.k)
    for (int j : sp.p)
      if (std::abs(B(i, j)) > orth.residual) {
        orth.residual = std::abs(B(i, j));
        orth.detail = "(k,p)=(" + std::to_string(i) + "," + std::to_string(j) + ")";
      }
  orth.passed = orth.residual <= tol;
  if (orth.passed)
    orth.detail.clear();
  rep.checks.push_back(orth);

  InvariantCheck sub{"k closed under bracket"};
  for (int i : sp.k)
    for (int j : sp.k)
      for (int c : sp.p)
        if (std::abs(g.f(c, i, j)) > sub.residual) {
          sub.residual = std::abs(g.f(c, i, j));
          sub.detail = "(i,j,c)=(" + std::to_string(i) + "," +
                       std::to_string(j) + "," + std::to_string(c) + ")";
        }
  sub.passed = sub.residual <= tol * std::max(1.0, g.max_structure());
  if (sub.passed)
    sub.detail.clear();
  rep.checks.push_back(sub);

  InvariantCheck nd{"k nondegenerate"};
  Eigen::MatrixXd Bk(sp.k.size(), sp.k.size());
  for (std::size_t a = 0; a < sp.k.size(); ++a)
    for (std::size_t b = 0; b < sp.k.size(); ++b)
      Bk(a, b) = B(sp.k[a], sp.k[b]);
  double det = sp.k.empty() ? 1.0 : Bk.determinant();
  nd.residual = std::abs(det);
  nd.passed = std::abs(det) > 1e-12;
  if (!nd.passed)
    nd.detail = "det B|k = " + std::to_string(det);
  rep.checks.push_back(nd);
  return rep;
}

inline AlgebraReport validate_automorphism(const QuadraticLieAlgebra &g,
                                           const Eigen::MatrixXd &c,
                                           const SubalgebraSplit *sp = nullptr,
                                           double tol = 1e-10) {
  const int n = g.n();
  AlgebraReport rep;
  InvariantCheck shape{"automorphism shape"};
  shape.passed = c.rows() == n && c.cols() == n;
  if (!shape.passed) {
    shape.residual = 1;
    shape.detail = "expected " + std::to_string(n) + "x" + std::to_string(n);
    rep.checks.push_back(shape);
    return rep;
  }
  rep.checks.push_back(shape);
  const auto &B = g.bilinear();
  InvariantCheck orth{"automorphism orthogonal"};
  orth.residual = (c.transpose() * B * c - B).cwiseAbs().maxCoeff();
  orth.passed = orth.residual <= tol * std::max(1.0, B.cwiseAbs().maxCoeff());
  rep.checks.push_back(orth);

  InvariantCheck hom{"automorphism preserves bracket"};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Eigen::VectorXd lhs = c * g.bracket(g.basis(a), g.basis(b));
      Eigen::VectorXd rhs = g.bracket(c.col(a), c.col(b));
      double r = (lhs - rhs).cwiseAbs().maxCoeff();
      if (r > hom.residual) {
        hom.residual = r;
        hom.detail = "(a,b)=(" + std::to_string(a) + "," + std::to_string(b) + ")";
      }
    }
  hom.passed = hom.residual <= tol * std::max(1.0, g.max_structure()) *
                                   std::max(1.0, c.squaredNorm());
  if (hom.passed)
    hom.detail.clear();
  rep.checks.push_back(hom);

  if (sp) {
    InvariantCheck fix{"automorphism fixes k"};
    for (int i : sp->k) {
      double r = (c.col(i) - g.basis(i)).cwiseAbs().maxCoeff();
      if (r > fix.residual) {
        fix.residual = r;
        fix.detail = "k index " + std::to_string(i);
      }
    }
    fix.passed = fix.residual <= tol;
    if (fix.passed)
      fix.detail.clear();
    rep.checks.push_back(fix);
  }
  return rep;
}

// (ad_mu)^c_b = sum_a mu^a f^c_{ab}
inline Eigen::MatrixXd adjoint(const QuadraticLieAlgebra &g,
                               const Eigen::VectorXd &mu) {
  const int n = g.n();
  if (mu.size() != n)
    throw StructuralError("adjoint: mu has the wrong dimension");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    if (mu[a] == 0.0)
      continue;
    for (int c = 0; c < n; ++c)
      for (int b = 0; b < n; ++b)
        A(c, b) += mu[a] * g.f(c, a, b);
  }
  return A;
}

inline SkewAdjointMap adjoint_map(const QuadraticLieAlgebra &g,
                                  const Eigen::VectorXd &mu) {
  return SkewAdjointMap(g.system(), adjoint(g, mu));
}

inline MultiVector lambda_g(const QuadraticLieAlgebra &g,
                            const Eigen::VectorXd &mu) {
  return lambda_of(g.system(), adjoint(g, mu));
}

namespace lie_detail {

// the leading g.n() generators of s must carry g's pairing, the rest pair to zero
inline void check_embedding(const QuadraticLieAlgebra &g,
                            const GeneratorSystem &s) {
  const int n = g.n();
  if (s.n() < n)
    throw StructuralError("system is smaller than the Lie algebra");
  if (s.bilinear().topLeftCorner(n, n) != g.bilinear())
    throw StructuralError("system does not extend the Lie algebra's pairing");
  for (int i = n; i < s.n(); ++i)
    if (!(s.extension_mask() >> i & 1))
      throw StructuralError("extra generators must be extension generators");
}

inline Eigen::VectorXd pad(const Eigen::VectorXd &v, int n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  out.head(v.size()) = v;
  return out;
}

} // namespace lie_detail

// Theta = -1/6 sum f^{abc} e_a ^ e_b ^ e_c,  f^{abc} = B(e^a, [e^b, e^c])
inline MultiVector cubic_theta(const QuadraticLieAlgebra &g,
                               const SystemPtr &target = nullptr) {
  SystemPtr s = target ? target : g.system();
  lie_detail::check_embedding(g, *s);
  const int n = g.n();
  const Eigen::MatrixXd &D = g.system()->dual();
  // F(a,b,c) = sum_{b',c'} D_{bb'} D_{cc'} f^a_{b'c'}
  std::vector<double> F(std::size_t(n) * n * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double v = 0;
        for (int bb = 0; bb < n; ++bb) {
          if (D(b, bb) == 0.0)
            continue;
          for (int cc = 0; cc < n; ++cc)
            v += D(b, bb) * D(c, cc) * g.f(a, bb, cc);
        }
        F[(std::size_t(a) * n + b) * n + c] = v;
      }
  Dense out(s->blade_count(), 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        if (a == b || b == c || a == c)
          continue;
        double v = F[(std::size_t(a) * n + b) * n + c];
        if (v == 0.0)
          continue;
        Blade ea = Blade(1) << a, eb = Blade(1) << b, ec = Blade(1) << c;
        int sgn = kernel::reorder_sign(ea, eb) *
                  kernel::reorder_sign(ea | eb, ec);
        out[ea | eb | ec] += -v / 6.0 * sgn;
      }
  return MultiVector::from_dense(s, out);
}

// biderivation extension of the bracket:
// [x1..xk, y1..yl] = sum (-1)^{i+j} [xi,yj] ^ x\i ^ y\j
inline MultiVector schouten_bracket(const QuadraticLieAlgebra &g,
                                    const MultiVector &x,
                                    const MultiVector &y) {
  require_same(x.system(), y.system());
  lie_detail::check_embedding(g, x.system());
  const int n = g.n();
  const auto &sp = x.system_ptr();
  if (((x.system().full_mask() >> n) << n) != 0)
    for (auto *m : {&x, &y})
      for (auto &t : m->terms())
        if (t.blade >> n)
          throw StructuralError("schouten_bracket: arguments must lie in the exterior algebra of g");
  Dense out(sp->blade_count(), 0.0);
  for (auto &ta : x.terms())
    for (auto &tb : y.terms()) {
      int pi = 0;
      for (int i = 0; i < n; ++i) {
        if (!(ta.blade >> i & 1))
          continue;
        Blade xr = ta.blade ^ (Blade(1) << i);
        int pj = 0;
        for (int j = 0; j < n; ++j) {
          if (!(tb.blade >> j & 1))
            continue;
          Blade yr = tb.blade ^ (Blade(1) << j);
          if (xr & yr) {
            ++pj;
            continue;
          }
          double base = kernel::parity_sign(pi + pj) * ta.coeff * tb.coeff;
          int s_xy = kernel::reorder_sign(xr, yr);
          Blade rest = xr | yr;
          for (int c = 0; c < n; ++c) {
            double fc = g.f(c, i, j);
            if (fc == 0.0 || (rest >> c & 1))
              continue;
            Blade ec = Blade(1) << c;
            out[rest | ec] += base * fc * s_xy * kernel::reorder_sign(ec, rest);
          }
          ++pj;
        }
        ++pi;
      }
    }
  return MultiVector::from_dense(sp, out);
}

// d = sum_c omega_c ^ i_{e_c},  omega_c = -1/2 sum f^c_{ab} e^a ^ e^b
class LieDifferential {
public:
  LieDifferential(const QuadraticLieAlgebra &g, SystemPtr target = nullptr)
      : sys_(target ? std::move(target) : g.system()) {
    lie_detail::check_embedding(g, *sys_);
    const int n = g.n();
    const Eigen::MatrixXd &D = g.system()->dual();
    for (int c = 0; c < n; ++c) {
      MultiVector w(sys_);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double v = g.f(c, a, b);
          if (v == 0.0)
            continue;
          auto ea = MultiVector::vector(sys_, lie_detail::pad(D.col(a), sys_->n()));
          auto eb = MultiVector::vector(sys_, lie_detail::pad(D.col(b), sys_->n()));
          w.axpy(-0.5 * v, wedge(ea, eb));
        }
      omega_.push_back(w);
    }
  }

  MultiVector operator()(const MultiVector &x) const {
    require_same(*sys_, x.system());
    MultiVector out(sys_);
    for (std::size_t c = 0; c < omega_.size(); ++c) {
      if (omega_[c].is_zero())
        continue;
      auto ic = contract_vector(Eigen::VectorXd::Unit(sys_->n(), int(c)), x);
      if (!ic.is_zero())
        out += wedge(omega_[c], ic);
    }
    return out;
  }

  OperatorMatrix matrix() const {
    return operator_of(sys_, [this](const MultiVector &b) { return (*this)(b); });
  }

private:
  SystemPtr sys_;
  std::vector<MultiVector> omega_;
};

inline MultiVector lie_differential(const QuadraticLieAlgebra &g,
                                    const MultiVector &x) {
  return LieDifferential(g, x.system_ptr())(x);
}

// delta = [q(Theta), .] (graded commutator)
class CliffordDifferential {
public:
  CliffordDifferential(const QuadraticLieAlgebra &g, SystemPtr target = nullptr)
      : sys_(target ? std::move(target) : g.system()),
        q_theta_(quantize(cubic_theta(g, sys_))) {}

  MultiVector operator()(const MultiVector &x) const {
    return graded_commutator(q_theta_, x);
  }
  const MultiVector &q_theta() const { return q_theta_; }
  OperatorMatrix matrix() const {
    return operator_of(sys_, [this](const MultiVector &b) { return (*this)(b); });
  }

private:
  SystemPtr sys_;
  MultiVector q_theta_;
};

inline MultiVector clifford_differential(const QuadraticLieAlgebra &g,
                                         const MultiVector &x) {
  return CliffordDifferential(g, x.system_ptr())(x);
}

// u = 1/2 sum r^{ab} [e_a, e_b] for r = 1/2 sum r^{ab} e_a ^ e_b
inline Eigen::VectorXd bracket_contraction_u(const QuadraticLieAlgebra &g,
                                             const MultiVector &r) {
  if (!r.is_homogeneous(2))
    throw DomainError("bracket_contraction_u: r must have degree 2");
  lie_detail::check_embedding(g, r.system());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(g.n());
  for (auto &t : r.terms()) {
    int a = std::countr_zero(t.blade);
    int b = 31 - std::countl_zero(t.blade);
    if (b >= g.n())
      throw StructuralError("bracket_contraction_u: r must lie in wedge^2 g");
    for (int c = 0; c < g.n(); ++c)
      u[c] += t.coeff * g.f(c, a, b);
  }
  return u;
}

// restriction of g to the index set k (a subalgebra with nondegenerate form)
inline QuadraticLieAlgebra subalgebra(const QuadraticLieAlgebra &g,
                                      const std::vector<int> &k) {
  const int m = int(k.size());
  if (m == 0)
    throw StructuralError("subalgebra: empty index set");
  Eigen::MatrixXd Bk(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      Bk(a, b) = g.bilinear()(k[a], k[b]);
  auto h = QuadraticLieAlgebra::from_brackets(g.name() + "|k", Bk);
  for (int c = 0; c < m; ++c)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        h.f(c, a, b) = g.f(k[c], k[a], k[b]);
  return h;
}

// ---------------------------------------------------------------- catalog

inline QuadraticLieAlgebra so3() {
  auto g = QuadraticLieAlgebra::from_brackets("so3", Eigen::MatrixXd::Identity(3, 3));
  g.set_bracket(0, 1, 2, 1);
  g.set_bracket(1, 2, 0, 1);
  g.set_bracket(2, 0, 1, 1);
  return g;
}

// [e_a, e_b] = eps_{abc} eta_cc e_c with eta = diag(1, 1, -1)
inline QuadraticLieAlgebra so21() {
  Eigen::MatrixXd eta = Eigen::Vector3d(1, 1, -1).asDiagonal();
  auto g = QuadraticLieAlgebra::from_brackets("so21", eta);
  g.set_bracket(0, 1, 2, -1);
  g.set_bracket(1, 2, 0, 1);
  g.set_bracket(2, 0, 1, 1);
  return g;
}

inline QuadraticLieAlgebra abelian(int n) {
  if (n < 1)
    throw StructuralError("abelian: dimension must be positive");
  return QuadraticLieAlgebra::from_brackets("abelian:" + std::to_string(n),
                                            Eigen::MatrixXd::Identity(n, n));
}

// a Lie algebra s given only by structure constants c[k][i][j] (k-th
// component of [x_i, x_j]); no invariant form needed
struct LieStructure {
  std::string name;
  int dim = 0;
  std::vector<double> c;
  double at(int k, int i, int j) const {
    return c[(std::size_t(k) * dim + i) * dim + j];
  }
};

inline LieStructure aff1_structure() {
  LieStructure s{"aff1", 2, std::vector<double>(8, 0.0)};
  s.c[(1 * 2 + 0) * 2 + 1] = 1; // [x0, x1] = x1
  s.c[(1 * 2 + 1) * 2 + 0] = -1;
  return s;
}

inline double jacobi_residual(const LieStructure &s) {
  const int m = s.dim;
  double worst = 0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int e = 0; e < m; ++e) {
          double v = 0;
          for (int d = 0; d < m; ++d)
            v += s.at(d, a, b) * s.at(e, d, c) + s.at(d, b, c) * s.at(e, d, a) +
                 s.at(d, c, a) * s.at(e, d, b);
          worst = std::max(worst, std::abs(v));
        }
  return worst;
}

// s x| s* with the coadjoint action and the canonical pairing
inline QuadraticLieAlgebra semidirect(const LieStructure &s) {
  if (jacobi_residual(s) > 1e-10)
    throw ValidationError("semidirect: supplied Lie algebra " + s.name +
                          " fails the Jacobi identity");
  const int m = s.dim;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (int i = 0; i < m; ++i)
    B(i, m + i) = B(m + i, i) = 1;
  auto g = QuadraticLieAlgebra::from_brackets("semidirect:" + s.name, B);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        g.f(k, i, j) = s.at(k, i, j);
        // [x_i, xi^j] = -sum_k c^j_{ik} xi^k
        g.f(m + k, i, m + j) = -s.at(j, i, k);
        g.f(m + k, m + j, i) = s.at(j, i, k);
      }
  return g;
}

inline LieStructure structure_of(const QuadraticLieAlgebra &g) {
  LieStructure s{g.name(), g.n(), {}};
  const int n = g.n();
  s.c.resize(std::size_t(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s.c[(std::size_t(k) * n + i) * n + j] = g.f(k, i, j);
  return s;
}

// realification of k^C: basis (k, i k), form Re B^C
inline QuadraticLieAlgebra complexify(const QuadraticLieAlgebra &k) {
  const int n = k.n();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  B.topLeftCorner(n, n) = k.bilinear();
  B.bottomRightCorner(n, n) = -k.bilinear();
  auto g = QuadraticLieAlgebra::from_brackets("complexify:" + k.name(), B);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double v = k.f(c, a, b);
        g.f(c, a, b) = v;
        g.f(n + c, a, n + b) = v;
        g.f(n + c, n + a, b) = v;
        g.f(c, n + a, n + b) = -v;
      }
  return g;
}

inline Eigen::MatrixXd complex_conjugation(int n) {
  Eigen::VectorXd d(2 * n);
  d << Eigen::VectorXd::Ones(n), -Eigen::VectorXd::Ones(n);
  return d.asDiagonal();
}

inline QuadraticLieAlgebra direct_sum(const QuadraticLieAlgebra &a,
                                      const QuadraticLieAlgebra &b) {
  const int na = a.n(), nb = b.n();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(na + nb, na + nb);
  B.topLeftCorner(na, na) = a.bilinear();
  B.bottomRightCorner(nb, nb) = b.bilinear();
  auto g = QuadraticLieAlgebra::from_brackets(a.name() + "+" + b.name(), B);
  for (int c = 0; c < na; ++c)
    for (int x = 0; x < na; ++x)
      for (int y = 0; y < na; ++y)
        g.f(c, x, y) = a.f(c, x, y);
  for (int c = 0; c < nb; ++c)
    for (int x = 0; x < nb; ++x)
      for (int y = 0; y < nb; ++y)
        g.f(na + c, na + x, na + y) = b.f(c, x, y);
  return g;
}

struct Twist {
  SubalgebraSplit split;
  Eigen::MatrixXd c;
};

struct CatalogEntry {
  QuadraticLieAlgebra algebra;
  std::optional<SubalgebraSplit> split; // used by split / rational families
  std::optional<Twist> twist;
};

inline std::vector<std::string> catalog_names() {
  return {"so3",           "so21",           "abelian:N",
          "semidirect:aff1", "semidirect:so3", "complexify:so3",
          "complexify:so21", "direct_sum:A+B"};
}

// the algebras exercised by the CI gate
inline std::vector<std::string> gate_catalog() {
  return {"so3", "so21", "abelian:3", "semidirect:aff1", "complexify:so3"};
}

inline CatalogEntry catalog(const std::string &name) {
  auto rot3 = [] {
    Eigen::MatrixXd c = Eigen::Vector3d(-1, -1, 1).asDiagonal();
    return c;
  };
  if (name == "so3")
    return {so3(), SubalgebraSplit{{2}, {0, 1}}, Twist{{{2}, {0, 1}}, rot3()}};
  if (name == "so21")
    return {so21(), SubalgebraSplit{{2}, {0, 1}}, Twist{{{2}, {0, 1}}, rot3()}};
  if (name.rfind("abelian:", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(name.substr(8));
    } catch (...) {
      throw StructuralError("catalog: bad dimension in " + name);
    }
    auto g = abelian(n);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    CatalogEntry e{g, SubalgebraSplit{all, {}}, std::nullopt};
    if (n >= 2) {
      Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
      double t = 2.0;
      c(n - 2, n - 2) = std::cos(t);
      c(n - 2, n - 1) = -std::sin(t);
      c(n - 1, n - 2) = std::sin(t);
      c(n - 1, n - 1) = std::cos(t);
      std::vector<int> k(all.begin(), all.end() - 2);
      e.twist = Twist{{k, {n - 2, n - 1}}, c};
    }
    return e;
  }
  if (name == "semidirect:aff1") {
    Eigen::MatrixXd c = Eigen::Vector4d(1, -1, 1, -1).asDiagonal();
    return {semidirect(aff1_structure()), SubalgebraSplit{{0, 2}, {1, 3}},
            Twist{{{0, 2}, {1, 3}}, c}};
  }
  if (name == "semidirect:so3") {
    // k = span(x3, xi3), rotation by pi about the third axis on both halves
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(6, 6);
    c.diagonal() << -1, -1, 1, -1, -1, 1;
    return {semidirect(structure_of(so3())), SubalgebraSplit{{2, 5}, {0, 1, 3, 4}},
            Twist{{{2, 5}, {0, 1, 3, 4}}, c}};
  }
  if (name.rfind("complexify:", 0) == 0) {
    auto base = catalog(name.substr(11));
    const int n = base.algebra.n();
    auto g = complexify(base.algebra);
    std::vector<int> re(n), im(n);
    std::iota(re.begin(), re.end(), 0);
    std::iota(im.begin(), im.end(), n);
    CatalogEntry e{g, std::nullopt, Twist{{re, im}, complex_conjugation(n)}};
    if (base.split) {
      SubalgebraSplit sp;
      for (int i : base.split->k)
        sp.k.push_back(i);
      for (int i : base.split->k)
        sp.k.push_back(n + i);
      for (int i : base.split->p)
        sp.p.push_back(i);
      for (int i : base.split->p)
        sp.p.push_back(n + i);
      e.split = sp;
    }
    return e;
  }
  if (name.rfind("direct_sum:", 0) == 0) {
    auto rest = name.substr(11);
    auto plus = rest.find('+');
    if (plus == std::string::npos)
      throw StructuralError("catalog: direct_sum needs A+B");
    auto a = catalog(rest.substr(0, plus));
    auto b = catalog(rest.substr(plus + 1));
    return {direct_sum(a.algebra, b.algebra), std::nullopt, std::nullopt};
  }
  throw StructuralError("catalog: unknown algebra '" + name + "'");
}

} // namespace cdyb
