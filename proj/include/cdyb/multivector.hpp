#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "generator_system.hpp"

namespace cdyb {

using Dense = std::vector<double>;

struct Term {
  Blade blade;
  double coeff;
};

inline int grade_of(Blade b) { return std::popcount(b); }

// Sparse element of the exterior / Clifford algebra over a system.
// Terms are kept sorted by blade and pruned.
class MultiVector {
public:
  explicit MultiVector(SystemPtr sys) : sys_(std::move(sys)) {
    if (!sys_)
      throw StructuralError("null generator system");
  }

  static MultiVector scalar(SystemPtr sys, double c) {
    return blade(std::move(sys), 0, c);
  }

  static MultiVector blade(SystemPtr sys, Blade mask, double c = 1.0) {
    MultiVector out(std::move(sys));
    if (std::size_t(mask) >= out.sys_->blade_count())
      throw StructuralError("blade index out of range");
    if (std::abs(c) >= out.sys_->prune_eps())
      out.terms_.push_back({mask, c});
    return out;
  }

  static MultiVector vector(SystemPtr sys, const Eigen::VectorXd &v) {
    if (v.size() != sys->n())
      throw StructuralError("vector has " + std::to_string(v.size()) +
                            " components, system has " +
                            std::to_string(sys->n()));
    Dense d(sys->blade_count(), 0.0);
    for (int i = 0; i < sys->n(); ++i)
      d[std::size_t(1) << i] = v[i];
    return from_dense(std::move(sys), d);
  }

  static MultiVector from_dense(SystemPtr sys, const Dense &d) {
    MultiVector out(std::move(sys));
    if (d.size() != out.sys_->blade_count())
      throw StructuralError("dense buffer size mismatch");
    double eps = out.sys_->prune_eps();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (std::abs(d[i]) >= eps)
        out.terms_.push_back({Blade(i), d[i]});
    return out;
  }

  static MultiVector from_eigen(SystemPtr sys, const Eigen::VectorXd &d) {
    return from_dense(std::move(sys), Dense(d.data(), d.data() + d.size()));
  }

  Dense dense() const {
    Dense d(sys_->blade_count(), 0.0);
    for (auto &t : terms_)
      d[t.blade] = t.coeff;
    return d;
  }

  Eigen::VectorXd eigen() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(Eigen::Index(sys_->blade_count()));
    for (auto &t : terms_)
      d[t.blade] = t.coeff;
    return d;
  }

  const GeneratorSystem &system() const { return *sys_; }
  const SystemPtr &system_ptr() const { return sys_; }
  const std::vector<Term> &terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  double coeff(Blade b) const {
    auto it = std::lower_bound(
        terms_.begin(), terms_.end(), b,
        [](const Term &t, Blade key) { return t.blade < key; });
    return (it != terms_.end() && it->blade == b) ? it->coeff : 0.0;
  }
  double scalar_part() const { return coeff(0); }

  MultiVector grade(int k) const {
    MultiVector out(sys_);
    for (auto &t : terms_)
      if (grade_of(t.blade) == k)
        out.terms_.push_back(t);
    return out;
  }
  MultiVector even_part() const { return parity_part(0); }
  MultiVector odd_part() const { return parity_part(1); }
  bool is_even() const { return all_parity(0); }
  bool is_odd() const { return all_parity(1); }
  bool is_homogeneous(int k) const {
    for (auto &t : terms_)
      if (grade_of(t.blade) != k)
        return false;
    return true;
  }
  int max_grade() const {
    int g = -1;
    for (auto &t : terms_)
      g = std::max(g, grade_of(t.blade));
    return g;
  }

  double norm() const {
    double s = 0;
    for (auto &t : terms_)
      s += t.coeff * t.coeff;
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0;
    for (auto &t : terms_)
      m = std::max(m, std::abs(t.coeff));
    return m;
  }

  // same coefficients over another system with the same generator count
  MultiVector rebased(SystemPtr other) const {
    if (other->n() != sys_->n())
      throw StructuralError("rebase needs equal generator counts");
    MultiVector out(std::move(other));
    out.terms_ = terms_;
    return out;
  }

  MultiVector &operator+=(const MultiVector &o) { return axpy(1.0, o); }
  MultiVector &operator-=(const MultiVector &o) { return axpy(-1.0, o); }
  MultiVector &operator*=(double s) {
    for (auto &t : terms_)
      t.coeff *= s;
    prune();
    return *this;
  }

  // this += a * o
  MultiVector &axpy(double a, const MultiVector &o) {
    require_same(*sys_, *o.sys_);
    std::vector<Term> merged;
    merged.reserve(terms_.size() + o.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < terms_.size() || j < o.terms_.size()) {
      if (j == o.terms_.size() ||
          (i < terms_.size() && terms_[i].blade < o.terms_[j].blade)) {
        merged.push_back(terms_[i++]);
      } else if (i == terms_.size() || o.terms_[j].blade < terms_[i].blade) {
        merged.push_back({o.terms_[j].blade, a * o.terms_[j].coeff});
        ++j;
      } else {
        merged.push_back(
            {terms_[i].blade, terms_[i].coeff + a * o.terms_[j].coeff});
        ++i;
        ++j;
      }
    }
    terms_ = std::move(merged);
    prune();
    return *this;
  }

  // "+1.5 e{0,2}" per line, ascending blade order
  std::string dump() const {
    std::string out;
    char buf[64];
    for (auto &t : terms_) {
      std::snprintf(buf, sizeof buf, "%+.17g e{", t.coeff);
      out += buf;
      bool first = true;
      for (int i = 0; i < sys_->n(); ++i) {
        if (!(t.blade >> i & 1))
          continue;
        if (!first)
          out += ",";
        out += std::to_string(i);
        first = false;
      }
      out += "}\n";
    }
    return out;
  }

private:
  MultiVector parity_part(int p) const {
    MultiVector out(sys_);
    for (auto &t : terms_)
      if ((grade_of(t.blade) & 1) == p)
        out.terms_.push_back(t);
    return out;
  }
  bool all_parity(int p) const {
    for (auto &t : terms_)
      if ((grade_of(t.blade) & 1) != p)
        return false;
    return true;
  }
  void prune() {
    double eps = sys_->prune_eps();
    std::erase_if(terms_, [eps](const Term &t) { return std::abs(t.coeff) < eps; });
  }

  SystemPtr sys_;
  std::vector<Term> terms_;
};

inline MultiVector operator+(MultiVector a, const MultiVector &b) {
  return a += b;
}
inline MultiVector operator-(MultiVector a, const MultiVector &b) {
  return a -= b;
}
inline MultiVector operator-(MultiVector a) { return a *= -1.0; }
inline MultiVector operator*(MultiVector a, double s) { return a *= s; }
inline MultiVector operator*(double s, MultiVector a) { return a *= s; }
inline MultiVector operator/(MultiVector a, double s) { return a *= 1.0 / s; }

// max |coefficient| of a - b
inline double distance(const MultiVector &a, const MultiVector &b) {
  return (a - b).max_abs();
}

} // namespace cdyb
