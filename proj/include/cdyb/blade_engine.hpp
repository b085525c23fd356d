#pragma once
#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "multivector.hpp"

namespace cdyb {

using OperatorMatrix = Eigen::MatrixXd;

enum class ContractionOrder {
  Natural,  // i_{v1^...^vk} = i_{v1} o ... o i_{vk}
  Reversed, // i_{vk} o ... o i_{v1}; kept for the convention bootstrap test
};

namespace kernel {

inline int parity_sign(int k) { return (k & 1) ? -1 : 1; }

// generators of b strictly below index i
inline int count_below(Blade b, int i) {
  return std::popcount(b & ((Blade(1) << i) - 1));
}

// sign of e_a ^ e_b relative to the sorted blade e_{a|b}
inline int reorder_sign(Blade a, Blade b) {
  int swaps = 0;
  a >>= 1;
  while (a) {
    swaps += std::popcount(a & b);
    a >>= 1;
  }
  return parity_sign(swaps);
}

// out += c * (e_j ^ in)
inline void wedge_gen(int j, const Dense &in, Dense &out, double c = 1.0) {
  Blade bit = Blade(1) << j;
  for (std::size_t b = 0; b < in.size(); ++b) {
    if (in[b] == 0.0 || (b & bit))
      continue;
    out[b | bit] += c * parity_sign(count_below(Blade(b), j)) * in[b];
  }
}

// out += c * i_w(in) where w holds the pairing values w_i = <w, e_i>
inline void contract_cov(const double *w, const Dense &in, Dense &out,
                         double c = 1.0) {
  for (std::size_t b = 0; b < in.size(); ++b) {
    if (in[b] == 0.0)
      continue;
    Blade rest = Blade(b);
    int pos = 0;
    while (rest) {
      int i = std::countr_zero(rest);
      rest &= rest - 1;
      if (w[i] != 0.0)
        out[b ^ (Blade(1) << i)] += c * parity_sign(pos) * w[i] * in[b];
      ++pos;
    }
  }
}

// contraction with the generator e_j through the pairing B
inline void contract_gen(const GeneratorSystem &s, int j, const Dense &in,
                         Dense &out, double c = 1.0) {
  contract_cov(s.bilinear().col(j).data(), in, out, c);
}

// out += e_j * in (Clifford left multiplication, ordered-monomial basis)
inline void gen_left(const GeneratorSystem &s, int j, const Dense &in,
                     Dense &out) {
  const auto &B = s.bilinear();
  Blade bit = Blade(1) << j;
  for (std::size_t b = 0; b < in.size(); ++b) {
    double c = in[b];
    if (c == 0.0)
      continue;
    Blade low = Blade(b) & (bit - 1);
    int t = 0;
    while (low) {
      int i = std::countr_zero(low);
      low &= low - 1;
      if (B(j, i) != 0.0)
        out[b ^ (Blade(1) << i)] += parity_sign(t) * B(j, i) * c;
      ++t;
    }
    if (b & bit)
      out[b ^ bit] += parity_sign(t) * 0.5 * B(j, j) * c;
    else
      out[b | bit] += parity_sign(t) * c;
  }
}

// rho(e_j) = e_j ^ . + 1/2 i_{e_j}
inline void rho_gen(const GeneratorSystem &s, int j, const Dense &in,
                    Dense &out) {
  wedge_gen(j, in, out);
  contract_gen(s, j, in, out, 0.5);
}

// Sum over blades M of beta_M * op_{m1}(op_{m2}(...op_{mk}(seed))) with
// m1 < ... < mk. Shares work between blades with a common upper part.
template <class Op>
Dense apply_words(const MultiVector &beta, Op &&op, const Dense &seed) {
  const std::size_t N = seed.size();
  Dense out(N, 0.0);
  if (beta.is_zero())
    return out;
  Dense coef(N, 0.0);
  std::vector<char> reach(N, 0);
  for (auto &t : beta.terms()) {
    coef[t.blade] = t.coeff;
    Blade rest = t.blade;
    while (rest) {
      int i = std::countr_zero(rest);
      rest &= rest - 1;
      reach[t.blade & ~((Blade(1) << i) - 1)] = 1;
    }
  }
  const int n = beta.system().n();
  std::function<void(Blade, const Dense &)> visit = [&](Blade T,
                                                         const Dense &val) {
    if (coef[T] != 0.0)
      for (std::size_t i = 0; i < N; ++i)
        out[i] += coef[T] * val[i];
    int top = T ? std::countr_zero(T) : n;
    for (int i = top - 1; i >= 0; --i) {
      Blade key = T | (Blade(1) << i);
      if (!reach[key])
        continue;
      Dense next(N, 0.0);
      op(i, val, next);
      visit(key, next);
    }
  };
  visit(0, seed);
  return out;
}

inline Dense unit(std::size_t N, Blade b) {
  Dense d(N, 0.0);
  d[b] = 1.0;
  return d;
}

} // namespace kernel

inline MultiVector wedge(const MultiVector &x, const MultiVector &y) {
  require_same(x.system(), y.system());
  Dense out(x.system().blade_count(), 0.0);
  for (auto &a : x.terms())
    for (auto &b : y.terms()) {
      if (a.blade & b.blade)
        continue;
      out[a.blade | b.blade] +=
          kernel::reorder_sign(a.blade, b.blade) * a.coeff * b.coeff;
    }
  return MultiVector::from_dense(x.system_ptr(), out);
}

// i_v x, v a vector in generator coordinates, paired through B
inline MultiVector contract_vector(const Eigen::VectorXd &v,
                                   const MultiVector &x) {
  const auto &s = x.system();
  if (v.size() != s.n())
    throw StructuralError("contract_vector: dimension mismatch");
  Eigen::VectorXd w = s.bilinear() * v;
  Dense out(s.blade_count(), 0.0);
  kernel::contract_cov(w.data(), x.dense(), out);
  return MultiVector::from_dense(x.system_ptr(), out);
}

// plain contraction with a covector alpha (alpha(e_i) = alpha[i]), no pairing
inline MultiVector contract_covector(const Eigen::VectorXd &alpha,
                                     const MultiVector &x) {
  const auto &s = x.system();
  if (alpha.size() != s.n())
    throw StructuralError("contract_covector: dimension mismatch");
  Dense out(s.blade_count(), 0.0);
  kernel::contract_cov(alpha.data(), x.dense(), out);
  return MultiVector::from_dense(x.system_ptr(), out);
}

inline MultiVector
contract_multi(const MultiVector &beta, const MultiVector &x,
               ContractionOrder order = ContractionOrder::Natural) {
  require_same(beta.system(), x.system());
  const auto &s = x.system();
  if (order == ContractionOrder::Natural) {
    auto out = kernel::apply_words(
        beta,
        [&s](int j, const Dense &in, Dense &o) {
          kernel::contract_gen(s, j, in, o);
        },
        x.dense());
    return MultiVector::from_dense(x.system_ptr(), out);
  }
  Dense out(s.blade_count(), 0.0);
  Dense xd = x.dense();
  for (auto &t : beta.terms()) {
    Dense cur = xd;
    Blade rest = t.blade;
    while (rest) { // lowest index first
      int i = std::countr_zero(rest);
      rest &= rest - 1;
      Dense nxt(cur.size(), 0.0);
      kernel::contract_gen(s, i, cur, nxt);
      cur.swap(nxt);
    }
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] += t.coeff * cur[k];
  }
  return MultiVector::from_dense(x.system_ptr(), out);
}

inline MultiVector clifford_product(const MultiVector &x,
                                    const MultiVector &y) {
  require_same(x.system(), y.system());
  const auto &s = x.system();
  const std::size_t N = s.blade_count();
  if (s.is_diagonal()) {
    Dense half(N, 1.0); // product of B_ii / 2 over the blade
    for (std::size_t m = 1; m < N; ++m) {
      int i = std::countr_zero(Blade(m));
      half[m] = half[m & (m - 1)] * 0.5 * s.b(i, i);
    }
    Dense out(N, 0.0);
    for (auto &a : x.terms())
      for (auto &b : y.terms()) {
        Blade common = a.blade & b.blade;
        double h = half[common];
        if (h == 0.0)
          continue;
        out[a.blade ^ b.blade] +=
            kernel::reorder_sign(a.blade, b.blade) * h * a.coeff * b.coeff;
      }
    return MultiVector::from_dense(x.system_ptr(), out);
  }
  auto out = kernel::apply_words(
      x,
      [&s](int j, const Dense &in, Dense &o) { kernel::gen_left(s, j, in, o); },
      y.dense());
  return MultiVector::from_dense(x.system_ptr(), out);
}

// q^{-1}(x) = rho(x).1
inline MultiVector symbol(const MultiVector &x) {
  const auto &s = x.system();
  if (s.is_diagonal())
    return x;
  auto out = kernel::apply_words(
      x,
      [&s](int j, const Dense &in, Dense &o) { kernel::rho_gen(s, j, in, o); },
      kernel::unit(s.blade_count(), 0));
  return MultiVector::from_dense(x.system_ptr(), out);
}

// inverse of symbol, peeling off the top grade each round
inline MultiVector quantize(const MultiVector &x) {
  const auto &s = x.system();
  if (s.is_diagonal())
    return x;
  MultiVector rest = x;
  MultiVector out(x.system_ptr());
  for (int g = s.n(); g >= 0 && !rest.is_zero(); --g) {
    MultiVector top = rest.grade(g);
    if (top.is_zero())
      continue;
    out += top;
    rest -= symbol(top);
    rest -= rest.grade(g); // exact cancellation up to rounding
  }
  return out;
}

inline MultiVector exp_exterior(const MultiVector &x) {
  if (!x.is_even())
    throw DomainError("exp_exterior: argument must have even parity");
  double s = x.scalar_part();
  MultiVector nil = x - MultiVector::scalar(x.system_ptr(), s);
  MultiVector term = MultiVector::scalar(x.system_ptr(), 1.0);
  MultiVector sum = term;
  for (int k = 1; k <= x.system().n() / 2 + 1 && !term.is_zero(); ++k) {
    term = wedge(term, nil) / double(k);
    sum += term;
  }
  return sum * std::exp(s);
}

struct ExpOptions {
  double tol = 1e-16;
  int max_terms = 500;
};

inline MultiVector exp_clifford(const MultiVector &x, ExpOptions opt = {}) {
  if (!x.is_even())
    throw DomainError("exp_clifford: argument must have even parity");
  MultiVector term = MultiVector::scalar(x.system_ptr(), 1.0);
  MultiVector sum = term;
  int quiet = 0;
  for (int k = 1; k < opt.max_terms; ++k) {
    term = clifford_product(term, x) / double(k);
    sum += term;
    if (term.norm() < opt.tol * std::max(1.0, sum.norm())) {
      if (++quiet == 3)
        return sum;
    } else {
      quiet = 0;
    }
  }
  throw NumericError("exp_clifford: series did not converge within " +
                     std::to_string(opt.max_terms) + " terms");
}

// [x, y] = xy - (-1)^{|x||y|} yx, split over parity components
inline MultiVector graded_commutator(const MultiVector &x,
                                     const MultiVector &y) {
  MultiVector out(x.system_ptr());
  MultiVector xs[2] = {x.even_part(), x.odd_part()};
  MultiVector ys[2] = {y.even_part(), y.odd_part()};
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      if (xs[p].is_zero() || ys[q].is_zero())
        continue;
      out += clifford_product(xs[p], ys[q]);
      out.axpy(-double(kernel::parity_sign(p * q)),
               clifford_product(ys[q], xs[p]));
    }
  return out;
}

inline double skew_adjoint_residual(const GeneratorSystem &s,
                                    const Eigen::MatrixXd &A) {
  const auto &B = s.bilinear();
  double scale = std::max(A.norm() * B.norm(), 1e-300);
  return (A.transpose() * B + B * A).norm() / scale;
}

// lambda(A) = 1/2 sum_a A(e_a) ^ e^a
inline MultiVector lambda_of(const SystemPtr &sys, const Eigen::MatrixXd &A,
                             double tol = 1e-10) {
  const int n = sys->n();
  if (A.rows() != n || A.cols() != n)
    throw StructuralError("lambda_of: matrix size does not match system");
  if (A.norm() > 0 && skew_adjoint_residual(*sys, A) > tol)
    throw DomainError("lambda_of: map is not skew-adjoint (residual " +
                      std::to_string(skew_adjoint_residual(*sys, A)) + ")");
  Eigen::MatrixXd M = A * sys->dual();
  Dense out(sys->blade_count(), 0.0);
  for (int c = 0; c < n; ++c)
    for (int b = c + 1; b < n; ++b)
      out[(Blade(1) << c) | (Blade(1) << b)] = 0.5 * (M(c, b) - M(b, c));
  return MultiVector::from_dense(sys, out);
}

inline Eigen::MatrixXd lambda_inv(const MultiVector &l2) {
  if (!l2.is_homogeneous(2))
    throw DomainError("lambda_inv: argument is not of degree 2");
  const auto &s = l2.system();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(s.n(), s.n());
  for (auto &t : l2.terms()) {
    int c = std::countr_zero(t.blade);
    int b = 31 - std::countl_zero(t.blade);
    M(c, b) = t.coeff;
    M(b, c) = -t.coeff;
  }
  return M * s.bilinear();
}

inline MultiVector gamma_of(const SystemPtr &sys, const Eigen::MatrixXd &A) {
  return quantize(lambda_of(sys, A));
}

// inverse in the exterior algebra; needs a nonzero scalar part
inline MultiVector wedge_inverse(const MultiVector &x) {
  double s = x.scalar_part();
  if (s == 0.0)
    throw DomainError("wedge_inverse: scalar part vanishes");
  MultiVector nil = x / s - MultiVector::scalar(x.system_ptr(), 1.0);
  MultiVector term = MultiVector::scalar(x.system_ptr(), 1.0);
  MultiVector sum = term;
  for (int k = 1; k <= x.system().n() && !term.is_zero(); ++k) {
    term = -wedge(term, nil);
    sum += term;
  }
  return sum / s;
}

inline OperatorMatrix
operator_of(const SystemPtr &sys,
            const std::function<MultiVector(const MultiVector &)> &f) {
  const Eigen::Index N = Eigen::Index(sys->blade_count());
  OperatorMatrix M(N, N);
  for (Eigen::Index b = 0; b < N; ++b)
    M.col(b) = f(MultiVector::blade(sys, Blade(b))).eigen();
  return M;
}

inline OperatorMatrix
operator_of_dense(std::size_t N,
                  const std::function<void(const Dense &, Dense &)> &f) {
  OperatorMatrix M{Eigen::Index(N), Eigen::Index(N)};
  for (std::size_t b = 0; b < N; ++b) {
    Dense out(N, 0.0);
    f(kernel::unit(N, Blade(b)), out);
    M.col(Eigen::Index(b)) = Eigen::Map<Eigen::VectorXd>(out.data(), Eigen::Index(N));
  }
  return M;
}

inline OperatorMatrix wedge_operator(const MultiVector &x) {
  return operator_of(x.system_ptr(),
                     [&x](const MultiVector &b) { return wedge(x, b); });
}

inline OperatorMatrix contraction_operator(const MultiVector &beta) {
  const auto &s = beta.system();
  const std::size_t N = s.blade_count();
  OperatorMatrix M{Eigen::Index(N), Eigen::Index(N)};
  for (std::size_t b = 0; b < N; ++b) {
    auto col = kernel::apply_words(
        beta,
        [&s](int j, const Dense &in, Dense &o) {
          kernel::contract_gen(s, j, in, o);
        },
        kernel::unit(N, Blade(b)));
    M.col(Eigen::Index(b)) = Eigen::Map<Eigen::VectorXd>(col.data(), Eigen::Index(N));
  }
  return M;
}

inline OperatorMatrix clifford_left_operator(const MultiVector &x) {
  return operator_of(x.system_ptr(), [&x](const MultiVector &b) {
    return clifford_product(x, b);
  });
}

inline OperatorMatrix symbol_operator(const SystemPtr &sys) {
  return operator_of(sys, [](const MultiVector &b) { return symbol(b); });
}

inline OperatorMatrix quantize_operator(const SystemPtr &sys) {
  return operator_of(sys, [](const MultiVector &b) { return quantize(b); });
}

// the algebra automorphism of the exterior algebra induced by M
inline OperatorMatrix induced_action(const SystemPtr &sys,
                                     const Eigen::MatrixXd &M) {
  const int n = sys->n();
  if (M.rows() != n || M.cols() != n)
    throw StructuralError("induced_action: matrix size mismatch");
  const std::size_t N = sys->blade_count();
  OperatorMatrix out = OperatorMatrix::Zero(Eigen::Index(N), Eigen::Index(N));
  out(0, 0) = 1.0;
  for (std::size_t b = 1; b < N; ++b) {
    int i = std::countr_zero(Blade(b));
    std::size_t rest = b & (b - 1);
    // M e_i ^ image(rest)
    Dense prev(out.col(Eigen::Index(rest)).data(),
               out.col(Eigen::Index(rest)).data() + N);
    Dense acc(N, 0.0);
    for (int r = 0; r < n; ++r)
      if (M(r, i) != 0.0)
        kernel::wedge_gen(r, prev, acc, M(r, i));
    out.col(Eigen::Index(b)) = Eigen::Map<Eigen::VectorXd>(acc.data(), Eigen::Index(N));
  }
  return out;
}

// column M holds i_{e_M} G
inline OperatorMatrix contraction_column_matrix(const MultiVector &G) {
  const auto &s = G.system();
  const std::size_t N = s.blade_count();
  OperatorMatrix K{Eigen::Index(N), Eigen::Index(N)};
  Dense g = G.dense();
  for (std::size_t m = 0; m < N; ++m) {
    Dense cur = g;
    for (int i = s.n() - 1; i >= 0; --i) {
      if (!(m >> i & 1))
        continue;
      Dense nxt(N, 0.0);
      kernel::contract_gen(s, i, cur, nxt);
      cur.swap(nxt);
    }
    K.col(Eigen::Index(m)) = Eigen::Map<Eigen::VectorXd>(cur.data(), Eigen::Index(N));
  }
  return K;
}

// star operator of a volume-like form: *omega is the zeta with i_zeta G = omega
inline MultiVector star(const MultiVector &Gamma, const MultiVector &omega) {
  require_same(Gamma.system(), omega.system());
  const auto &s = Gamma.system();
  if (!s.is_nondegenerate())
    throw DomainError("star: needs a nondegenerate pairing on all generators");
  if (Gamma.coeff(s.full_mask()) == 0.0)
    throw DomainError("star: top-degree part of the form vanishes");
  OperatorMatrix K = contraction_column_matrix(Gamma);
  Eigen::FullPivLU<OperatorMatrix> lu(K);
  if (!lu.isInvertible())
    throw DomainError("star: contraction against the form is singular");
  Eigen::VectorXd z = lu.solve(omega.eigen());
  return MultiVector::from_eigen(Gamma.system_ptr(), z);
}

} // namespace cdyb
