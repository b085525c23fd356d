#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace cdyb;
using namespace cdyb::testing;

namespace {

SystemPtr E(int n) { return GeneratorSystem::euclidean(n); }

TEST(Wedge, SortedIndicesArePositive) {
  auto s = E(2);
  auto x = wedge(e(s, 0), e(s, 1));
  EXPECT_EQ(x.size(), 1u);
  EXPECT_DOUBLE_EQ(x.coeff(0b11), 1.0);
}

TEST(Wedge, SwapFlipsSign) {
  auto s = E(2);
  EXPECT_DOUBLE_EQ(wedge(e(s, 1), e(s, 0)).coeff(0b11), -1.0);
}

TEST(Wedge, OnePlusVectorSquared) {
  auto s = E(2);
  auto one = MultiVector::scalar(s, 1);
  auto x = wedge(one + e(s, 0), one + e(s, 0));
  EXPECT_DOUBLE_EQ(x.scalar_part(), 1.0);
  EXPECT_DOUBLE_EQ(x.coeff(0b01), 2.0);
  EXPECT_EQ(x.size(), 2u);
}

TEST(Wedge, AssociativeAndGradedCommutative) {
  Rng rng(11);
  auto s = E(5);
  for (int it = 0; it < 20; ++it) {
    auto a = random_mv(s, rng), b = random_mv(s, rng), c = random_mv(s, rng);
    EXPECT_LT(distance(wedge(wedge(a, b), c), wedge(a, wedge(b, c))), 1e-12);
    auto v = a.grade(1), w = b.grade(2), u = c.grade(3);
    EXPECT_LT(distance(wedge(v, w), wedge(w, v)), 1e-12);
    EXPECT_LT(distance(wedge(v, u), -wedge(u, v)), 1e-12);
  }
}

TEST(Wedge, MismatchedSystemsThrow) {
  EXPECT_THROW(wedge(e(E(2), 0), e(E(3), 0)), StructuralError);
}

TEST(ContractVector, RemovesMatchingGenerator) {
  auto s = E(2);
  auto x = contract_vector(Eigen::Vector2d(1, 0), wedge(e(s, 0), e(s, 1)));
  EXPECT_LT(distance(x, e(s, 1)), 1e-15);
}

TEST(ContractVector, OrthogonalGeneratorGivesZero) {
  auto s = E(3);
  EXPECT_TRUE(contract_vector(Eigen::Vector3d(0, 0, 1), wedge(e(s, 0), e(s, 1))).is_zero());
}

TEST(ContractVector, SquaresToZeroAndIsAnOddDerivation) {
  Rng rng(12);
  Eigen::MatrixXd B = random_form(4, rng, 1);
  auto s = GeneratorSystem::create(B);
  for (int it = 0; it < 20; ++it) {
    Eigen::VectorXd v = rng.uniform_vector(4, -1, 1);
    auto x = random_mv(s, rng), a = random_mv(s, rng).grade(2), b = random_mv(s, rng);
    EXPECT_LT(contract_vector(v, contract_vector(v, x)).max_abs(), 1e-12);
    auto lhs = contract_vector(v, wedge(a, b));
    auto rhs = wedge(contract_vector(v, a), b) + wedge(a, contract_vector(v, b));
    EXPECT_LT(distance(lhs, rhs), 1e-12);
    Eigen::VectorXd w = rng.uniform_vector(4, -1, 1);
    EXPECT_NEAR(contract_vector(v, MultiVector::vector(s, w)).scalar_part(), v.dot(B * w), 1e-12);
  }
}

TEST(ContractMulti, ScalarActsByScaling) {
  Rng rng(13);
  auto s = E(3);
  auto x = random_mv(s, rng);
  EXPECT_LT(distance(contract_multi(MultiVector::scalar(s, 1), x), x), 1e-15);
  EXPECT_LT(distance(contract_multi(MultiVector::scalar(s, 2.5), x), 2.5 * x), 1e-15);
}

// locked by the key identity bootstrap (see test_harness)
TEST(ContractMulti, BivectorOnItselfGolden) {
  auto s = E(2);
  auto e12 = wedge(e(s, 0), e(s, 1));
  EXPECT_DOUBLE_EQ(contract_multi(e12, e12).scalar_part(), -1.0);
  EXPECT_DOUBLE_EQ(contract_multi(e12, e12, ContractionOrder::Reversed).scalar_part(), 1.0);
}

TEST(ContractMulti, NaturalOrderIsComposition) {
  Rng rng(14);
  auto s = E(4);
  for (int it = 0; it < 10; ++it) {
    auto x = random_mv(s, rng), y = random_mv(s, rng), z = random_mv(s, rng);
    auto lhs = contract_multi(wedge(x, y), z);
    auto rhs = contract_multi(x, contract_multi(y, z));
    EXPECT_LT(distance(lhs, rhs), 1e-12);
  }
}

TEST(Clifford, GeneratorSquaresToHalfForm) {
  auto s = E(2);
  auto x = clifford_product(e(s, 0), e(s, 0));
  EXPECT_DOUBLE_EQ(x.scalar_part(), 0.5);
  EXPECT_EQ(x.size(), 1u);
}

TEST(Clifford, OrthogonalGeneratorsGiveTheBlade) {
  auto s = E(2);
  EXPECT_LT(distance(clifford_product(e(s, 0), e(s, 1)), wedge(e(s, 0), e(s, 1))), 1e-15);
}

TEST(Clifford, BivectorSquaresToMinusQuarter) {
  auto s = E(2);
  auto e12 = MultiVector::blade(s, 0b11);
  auto x = clifford_product(e12, e12);
  EXPECT_DOUBLE_EQ(x.scalar_part(), -0.25);
  EXPECT_EQ(x.size(), 1u);
}

TEST(Clifford, GeneratorRelationNonDiagonal) {
  Rng rng(15);
  Eigen::MatrixXd B = random_form(4, rng, 2);
  auto s = GeneratorSystem::create(B);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      auto x = clifford_product(e(s, a), e(s, b)) + clifford_product(e(s, b), e(s, a));
      EXPECT_LT(distance(x, MultiVector::scalar(s, B(a, b))), 1e-13);
    }
}

TEST(Clifford, AssociativeNonDiagonal) {
  Rng rng(16);
  auto s = GeneratorSystem::create(random_form(4, rng, 1));
  for (int it = 0; it < 10; ++it) {
    auto a = random_mv(s, rng), b = random_mv(s, rng), c = random_mv(s, rng);
    auto l = clifford_product(clifford_product(a, b), c);
    auto r = clifford_product(a, clifford_product(b, c));
    EXPECT_LT(distance(l, r), 1e-12 * std::max(1.0, l.max_abs()));
  }
}

TEST(Clifford, VectorLeftProductIsWedgePlusHalfContraction) {
  Rng rng(17);
  auto s = GeneratorSystem::create(random_form(3, rng));
  Eigen::VectorXd v = rng.uniform_vector(3, -1, 1);
  auto x = random_mv(s, rng);
  auto vv = MultiVector::vector(s, v);
  // on ordered monomials the product reads as rho(v) on the symbol
  auto lhs = symbol(clifford_product(vv, quantize(x)));
  auto rhs = wedge(vv, x) + 0.5 * contract_vector(v, x);
  EXPECT_LT(distance(lhs, rhs), 1e-13);
}

TEST(Clifford, DegenerateBlockReducesToWedge) {
  auto base = E(2);
  auto s = GeneratorSystem::with_extension(*base, 2);
  auto a = e(s, 2) + 0.5 * e(s, 3), b = wedge(e(s, 2), e(s, 3)) - e(s, 3);
  EXPECT_LT(distance(clifford_product(a, b), wedge(a, b)), 1e-15);
}

TEST(Symbol, Goldens) {
  auto s = E(2);
  EXPECT_DOUBLE_EQ(symbol(MultiVector::scalar(s, 1)).scalar_part(), 1.0);
  auto e12 = clifford_product(e(s, 0), e(s, 1));
  EXPECT_LT(distance(symbol(e12), wedge(e(s, 0), e(s, 1))), 1e-15);
  EXPECT_DOUBLE_EQ(symbol(clifford_product(e(s, 0), e(s, 0))).scalar_part(), 0.5);
}

TEST(Symbol, NonOrthogonalPairPicksUpHalfForm) {
  Eigen::Matrix2d B;
  B << 1, 0.4, 0.4, 2;
  auto s = GeneratorSystem::create(B);
  // the ordered monomial e0 e1 has symbol e0^e1 + 1/2 B01
  auto x = symbol(MultiVector::blade(s, 0b11));
  EXPECT_NEAR(x.scalar_part(), 0.2, 1e-15);
  EXPECT_NEAR(x.coeff(0b11), 1.0, 1e-15);
}

TEST(Quantize, Goldens) {
  auto s = E(2);
  EXPECT_DOUBLE_EQ(quantize(MultiVector::scalar(s, 1)).scalar_part(), 1.0);
  EXPECT_LT(distance(quantize(wedge(e(s, 0), e(s, 1))), clifford_product(e(s, 0), e(s, 1))),
            1e-15);
}

TEST(Quantize, RoundTrip) {
  Rng rng(18);
  for (int n = 1; n <= 6; ++n) {
    auto s = GeneratorSystem::create(random_form(n, rng, n / 2));
    for (int it = 0; it < 40; ++it) {
      auto x = random_mv(s, rng);
      EXPECT_LT(distance(quantize(symbol(x)), x), 1e-12);
      EXPECT_LT(distance(symbol(quantize(x)), x), 1e-12);
    }
  }
}

TEST(Quantize, PreservesTopGrade) {
  Rng rng(19);
  auto s = GeneratorSystem::create(random_form(4, rng));
  auto x = random_mv(s, rng);
  EXPECT_NEAR(symbol(x).coeff(s->full_mask()), x.coeff(s->full_mask()), 1e-14);
}

TEST(ExpExterior, Goldens) {
  auto s = E(4);
  EXPECT_LT(distance(exp_exterior(MultiVector(s)), MultiVector::scalar(s, 1)), 1e-15);
  auto s2 = E(2);
  auto x = exp_exterior(0.7 * MultiVector::blade(s2, 0b11));
  EXPECT_LT(distance(x, MultiVector::scalar(s2, 1) + 0.7 * MultiVector::blade(s2, 0b11)), 1e-15);
  double a = 0.3, b = -1.2;
  auto y = exp_exterior(a * MultiVector::blade(s, 0b0011) + b * MultiVector::blade(s, 0b1100));
  EXPECT_DOUBLE_EQ(y.scalar_part(), 1.0);
  EXPECT_DOUBLE_EQ(y.coeff(0b0011), a);
  EXPECT_DOUBLE_EQ(y.coeff(0b1100), b);
  EXPECT_DOUBLE_EQ(y.coeff(0b1111), a * b);
}

TEST(ExpExterior, OddArgumentRejected) {
  auto s = E(2);
  EXPECT_THROW(exp_exterior(e(s, 0)), DomainError);
  EXPECT_THROW(exp_clifford(e(s, 0)), DomainError);
}

TEST(ExpClifford, RotationGolden) {
  auto s = E(2);
  for (double th : {0.0, 0.3, 1.0, 2.5}) {
    auto x = exp_clifford(-th * MultiVector::blade(s, 0b11));
    EXPECT_NEAR(x.scalar_part(), std::cos(th / 2), 1e-14);
    EXPECT_NEAR(x.coeff(0b11), -2 * std::sin(th / 2), 1e-14);
  }
}

TEST(Lambda, Goldens) {
  auto s = E(2);
  const double th = 0.8;
  Eigen::Matrix2d A;
  A << 0, -th, th, 0;
  EXPECT_TRUE(lambda_of(s, Eigen::Matrix2d::Zero()).is_zero());
  auto l = lambda_of(s, A);
  EXPECT_DOUBLE_EQ(l.coeff(0b11), -th);
  EXPECT_EQ(l.size(), 1u);
  EXPECT_LT(max_diff(lambda_inv(-th * MultiVector::blade(s, 0b11)), A), 1e-15);
  EXPECT_TRUE(lambda_inv(MultiVector(s).grade(2)).isZero());
}

TEST(Lambda, RoundTrip) {
  Rng rng(20);
  for (int n = 2; n <= 6; ++n) {
    auto s = GeneratorSystem::create(random_form(n, rng, n / 3));
    for (int it = 0; it < 20; ++it) {
      Eigen::MatrixXd A = random_skew_adjoint(*s, rng);
      EXPECT_LT(max_diff(lambda_inv(lambda_of(s, A)), A), 1e-12);
      auto l = random_mv(s, rng).grade(2);
      EXPECT_LT(distance(lambda_of(s, lambda_inv(l)), l), 1e-12);
    }
  }
}

TEST(Lambda, RejectsNonSkew) {
  auto s = E(2);
  EXPECT_THROW(lambda_of(s, Eigen::Matrix2d::Identity()), DomainError);
  EXPECT_THROW(lambda_inv(e(s, 0)), DomainError);
}

TEST(Gamma, CommutatorGeneratesTheAction) {
  Rng rng(21);
  for (int n = 2; n <= 6; ++n) {
    auto s = GeneratorSystem::create(random_form(n, rng, n / 2));
    for (int it = 0; it < 10; ++it) {
      Eigen::MatrixXd A = random_skew_adjoint(*s, rng);
      auto g = gamma_of(s, A);
      for (int b = 0; b < n; ++b) {
        auto lhs = graded_commutator(g, e(s, b));
        auto rhs = MultiVector::vector(s, A.col(b));
        EXPECT_LT(distance(lhs, rhs), 1e-12);
      }
    }
  }
}

TEST(Gamma, LieHomomorphism) {
  Rng rng(22);
  auto s = GeneratorSystem::create(random_form(4, rng, 1));
  for (int it = 0; it < 10; ++it) {
    Eigen::MatrixXd A = random_skew_adjoint(*s, rng), B = random_skew_adjoint(*s, rng);
    auto lhs = gamma_of(s, A * B - B * A);
    auto rhs = graded_commutator(gamma_of(s, A), gamma_of(s, B));
    EXPECT_LT(distance(lhs, rhs), 1e-12);
  }
  EXPECT_TRUE(gamma_of(s, Eigen::MatrixXd::Zero(4, 4)).is_zero());
}

TEST(Star, VolumeOnItselfGolden) {
  auto s = E(2);
  auto vol = MultiVector::blade(s, 0b11);
  auto x = star(vol, vol);
  EXPECT_DOUBLE_EQ(x.scalar_part(), 1.0);
  EXPECT_EQ(x.size(), 1u);
  EXPECT_TRUE(star(vol, MultiVector(s)).is_zero());
}

TEST(Star, InvertsContraction) {
  Rng rng(23);
  auto s = E(4);
  auto G = random_mv(s, rng) + 3.0 * MultiVector::blade(s, s->full_mask());
  auto z = random_mv(s, rng);
  EXPECT_LT(distance(star(G, contract_multi(z, G)), z), 1e-11);
}

TEST(Star, DegenerateFormRejected) {
  auto s = E(2);
  EXPECT_THROW(star(MultiVector::scalar(s, 1), MultiVector::scalar(s, 1)), DomainError);
}

TEST(OperatorOf, Basics) {
  Rng rng(24);
  auto s = GeneratorSystem::create(random_form(3, rng));
  auto id = operator_of(s, [](const MultiVector &x) { return x; });
  EXPECT_TRUE(id.isIdentity());
  auto w = wedge_operator(e(s, 0));
  EXPECT_TRUE((w * w).isZero());
  auto c = clifford_left_operator(e(s, 0));
  EXPECT_LT(max_diff(c * c, 0.5 * s->b(0, 0) * Eigen::MatrixXd::Identity(8, 8)), 1e-14);
}

TEST(OperatorOf, InducedActionIsAnAlgebraMap) {
  Rng rng(25);
  auto s = E(4);
  Eigen::MatrixXd M = rng.uniform_matrix(4, 4, -1, 1);
  auto T = induced_action(s, M);
  auto x = random_mv(s, rng), y = random_mv(s, rng);
  Eigen::VectorXd lhs = T * wedge(x, y).eigen();
  Eigen::VectorXd rhs =
      wedge(MultiVector::from_eigen(s, T * x.eigen()), MultiVector::from_eigen(s, T * y.eigen()))
          .eigen();
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(T(15, 15), M.determinant(), 1e-12);
}

TEST(WedgeInverse, Inverts) {
  Rng rng(26);
  auto s = E(4);
  auto x = random_mv(s, rng).even_part() + MultiVector::scalar(s, 2);
  EXPECT_LT(distance(wedge(x, wedge_inverse(x)), MultiVector::scalar(s, 1)), 1e-13);
  EXPECT_THROW(wedge_inverse(e(s, 0)), DomainError);
}

} // namespace
