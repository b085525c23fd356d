#include <gtest/gtest.h>

#include <cmath>

#include "cdyb/harness/identities.hpp"
#include "cdyb/spinor_rep.hpp"
#include "support.hpp"

using namespace cdyb;
using namespace cdyb::testing;

namespace {

MultiVector act(const OperatorMatrix &M, const MultiVector &x) {
  return MultiVector::from_eigen(x.system_ptr(), M * x.eigen());
}

MultiVector one(const SystemPtr &s) { return MultiVector::scalar(s, 1); }

Eigen::MatrixXd rot2(double th) {
  Eigen::MatrixXd A(2, 2);
  A << 0, -th, th, 0;
  return A;
}

TEST(Doubled, KappaIsAnIsometry) {
  Rng rng(81);
  for (int n = 1; n <= 5; ++n) {
    DoubledSpace ds(GeneratorSystem::create(random_form(n, rng, n / 2)));
    EXPECT_LT(ds.kappa_isometry_residual(), 1e-13);
    EXPECT_EQ(ds.doubled()->n(), 2 * n);
  }
}

TEST(Doubled, RejectsDegenerateBase) {
  auto deg = GeneratorSystem::with_extension(*GeneratorSystem::euclidean(1), 1);
  EXPECT_THROW(DoubledSpace ds(deg), StructuralError);
}

TEST(PiAction, OnTheUnit) {
  DoubledSpace ds(GeneratorSystem::euclidean(3));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(6);
  w.head(3) << 0.3, -1.0, 2.0;
  EXPECT_LT(distance(act(pi_action(ds, w), one(ds.base())),
                     MultiVector::vector(ds.base(), w.head(3))),
            1e-15);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(6);
  a.tail(3) << 1.0, 0.5, -0.25;
  EXPECT_TRUE(act(pi_action(ds, a), one(ds.base())).is_zero());
}

TEST(PiAction, SquareIsThePairing) {
  Rng rng(82);
  for (int n = 1; n <= 4; ++n) {
    DoubledSpace ds(GeneratorSystem::create(random_form(n, rng, 0)));
    Eigen::VectorXd w = rng.uniform_vector(2 * n, -1, 1);
    OperatorMatrix P = pi_action(ds, w);
    double av = w.tail(n).dot(w.head(n));
    const auto N = P.rows();
    EXPECT_LT((P * P - av * OperatorMatrix::Identity(N, N)).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(PiAction, IsAnAlgebraMap) {
  Rng rng(83);
  DoubledSpace ds(GeneratorSystem::create(random_form(2, rng, 1)));
  for (int it = 0; it < 5; ++it) {
    auto x = random_mv(ds.doubled(), rng), y = random_mv(ds.doubled(), rng);
    OperatorMatrix lhs = pi_action(ds, clifford_product(x, y));
    OperatorMatrix rhs = pi_action(ds, x) * pi_action(ds, y);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(Rho, UnitIsIdentity) {
  auto s = GeneratorSystem::euclidean(3);
  OperatorMatrix R = rho_embed(one(s));
  EXPECT_TRUE(R.isIdentity(0));
}

TEST(Rho, VectorSquaresToHalfQ) {
  Rng rng(84);
  for (int n = 1; n <= 5; ++n) {
    Eigen::MatrixXd B = random_form(n, rng, n / 2);
    auto s = GeneratorSystem::create(B);
    Eigen::VectorXd v = rng.uniform_vector(n, -1, 1);
    OperatorMatrix R = rho_embed(MultiVector::vector(s, v));
    const auto N = R.rows();
    EXPECT_LT((R * R - 0.5 * v.dot(B * v) * OperatorMatrix::Identity(N, N))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-13);
  }
}

TEST(Rho, ActionOnUnitIsTheSymbol) {
  Rng rng(85);
  for (int n = 1; n <= 6; ++n) {
    auto s = GeneratorSystem::create(random_form(n, rng, n % 3));
    for (int it = 0; it < 5; ++it) {
      auto x = random_mv(s, rng);
      EXPECT_LT(distance(act(rho_embed(x), one(s)), symbol(x)), 1e-12) << n;
    }
  }
}

TEST(Rho, Homomorphism) {
  Rng rng(86);
  for (int n = 2; n <= 4; ++n) {
    auto s = GeneratorSystem::create(random_form(n, rng, 1));
    auto x = random_mv(s, rng), y = random_mv(s, rng);
    OperatorMatrix lhs = rho_embed(clifford_product(x, y));
    EXPECT_LT((lhs - rho_embed(x) * rho_embed(y)).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(GaussF1, E1VanishesForTanhD) {
  auto s = GeneratorSystem::euclidean(2);
  Eigen::MatrixXd A = rot2(0.7);
  Eigen::MatrixXd C = eval_matrix_function(AnalyticFunctionId::EXPM, A);
  Eigen::MatrixXd D = 2.0 * eval_matrix_function(AnalyticFunctionId::TANH_HALF, A);
  auto g = factorize_f1(s, C, D);
  EXPECT_LT(g.E1.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(f1_block_residual(s, C, D, g), 1e-13);
}

TEST(GaussF1, BlockIdentityOnRandomPairs) {
  Rng rng(87);
  for (int n : {2, 4}) {
    auto s = GeneratorSystem::create(random_form(n, rng, n == 4 ? 2 : 0));
    int done = 0;
    for (int it = 0; it < 20 && done < 5; ++it) {
      Eigen::MatrixXd A = random_skew_adjoint(*s, rng, 1.0);
      Eigen::MatrixXd C = eval_matrix_function(AnalyticFunctionId::EXPM, A);
      Eigen::MatrixXd D = 0.8 * A + 0.05 * A * A * A;
      Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      if (mf_detail::sigma_min(C - I) < 0.2 || mf_detail::sigma_min(D) < 0.2)
        continue;
      ++done;
      auto g = factorize_f1(s, C, D);
      EXPECT_LT(f1_block_residual(s, C, D, g), 1e-10);
      EXPECT_LT(skew_adjoint_residual(*s, g.E1), 1e-10);
      EXPECT_LT(skew_adjoint_residual(*s, g.E2), 1e-10);
    }
    EXPECT_GE(done, 3);
  }
}

TEST(GaussF1, PerturbedFactorFails) {
  auto s = GeneratorSystem::euclidean(2);
  Eigen::MatrixXd A = rot2(0.9);
  Eigen::MatrixXd C = eval_matrix_function(AnalyticFunctionId::EXPM, A);
  auto g = factorize_f1(s, C, A);
  g.E2 += 1e-3 * rot2(1.0);
  EXPECT_GT(f1_block_residual(s, C, A, g), 1e-5);
}

TEST(GaussF1, Rejections) {
  auto s = GeneratorSystem::euclidean(2);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(factorize_f1(s, I, rot2(1)), DomainError); // C - I singular
  Eigen::MatrixXd C = eval_matrix_function(AnalyticFunctionId::EXPM, rot2(1));
  EXPECT_THROW(factorize_f1(s, 2 * C, rot2(1)), DomainError);
  Eigen::MatrixXd notskew = Eigen::Vector2d(1, 2).asDiagonal();
  EXPECT_THROW(factorize_f1(s, C, notskew), DomainError);
}

TEST(RhoFactor, MainAndFac2AtSevenTenths) {
  auto s = GeneratorSystem::euclidean(2);
  Eigen::MatrixXd A = rot2(0.7);
  auto m = rho_factorization_main(s, A, A);
  EXPECT_LT(m.residual, 1e-9);
  EXPECT_NEAR(std::abs(m.scale), m.magnitude, 1e-15);
  EXPECT_LT(rho_factorization_fac2(s, A), 1e-9);
}

TEST(RhoFactor, Fac2StarAndDirectOnRandomForms) {
  Rng rng(88);
  for (int n = 2; n <= 4; ++n) {
    auto s = GeneratorSystem::create(random_form(n, rng, n == 4 ? 1 : 0));
    Eigen::MatrixXd A = random_skew_adjoint(*s, rng, 0.8);
    EXPECT_LT(rho_factorization_fac2(s, A, SPath::Star), 1e-9);
    EXPECT_LT(rho_factorization_fac2(s, A, SPath::Direct), 1e-9);
  }
}

TEST(RhoFactor, WrongDFails) {
  auto s = GeneratorSystem::euclidean(2);
  Eigen::MatrixXd A = rot2(0.7);
  // D must commute with C; an unrelated skew map in 4D does not
  auto s4 = GeneratorSystem::euclidean(4);
  Eigen::MatrixXd A4 = Eigen::MatrixXd::Zero(4, 4), D4 = Eigen::MatrixXd::Zero(4, 4);
  A4.topLeftCorner(2, 2) = rot2(0.7);
  A4.bottomRightCorner(2, 2) = rot2(1.1);
  D4(2, 0) = 1;
  D4(0, 2) = -1;
  D4(3, 1) = 1;
  D4(1, 3) = -1;
  EXPECT_THROW(rho_factorization_main(s4, A4, D4), DomainError);
  EXPECT_LT(rho_factorization_main(s, A, 1.5 * A).residual, 1e-9);
}

TEST(SymbolFormulas, RotationGolden) {
  auto s = GeneratorSystem::euclidean(2);
  for (double th : {0.3, 1.0, 2.0}) {
    auto x = symbol(exp_clifford(gamma_of(s, rot2(th))));
    EXPECT_NEAR(x.scalar_part(), std::cos(th / 2), 1e-13);
    EXPECT_NEAR(std::abs(x.coeff(0b11)), 2 * std::sin(th / 2), 1e-13);
    EXPECT_EQ(x.size(), 2u);
  }
}

TEST(SymbolFormulas, C1AndC2AgainstSeries) {
  Rng rng(89);
  for (int n = 2; n <= 6; ++n) {
    auto s = GeneratorSystem::create(random_form(n, rng, 0));
    for (int it = 0; it < 3; ++it) {
      SkewAdjointMap A(s, random_skew_adjoint(*s, rng, 0.9), 1e-8);
      auto r = verify_exp_formulas(A);
      EXPECT_LT(r.c1, 1e-9) << n;
      EXPECT_EQ(r.c2.has_value(), n % 2 == 0);
      if (r.c2) {
        EXPECT_LT(*r.c2, 1e-9) << n;
      }
    }
  }
}

TEST(SymbolFormulas, C1OnIndefiniteForms) {
  Rng rng(90);
  auto s = GeneratorSystem::create(random_form(4, rng, 2));
  SkewAdjointMap A(s, random_skew_adjoint(*s, rng, 0.5), 1e-8);
  auto r = verify_exp_formulas(A);
  EXPECT_LT(r.c1, 1e-9);
  EXPECT_FALSE(r.c2.has_value());
  EXPECT_THROW(symbol_formula_II(A), DomainError);
}

TEST(SymbolFormulas, TopDegreeIsThePfaffianPrefactor) {
  Rng rng(91);
  for (int n : {2, 4, 6}) {
    auto s = GeneratorSystem::create(random_form(n, rng, 0));
    Eigen::MatrixXd A = random_skew_adjoint(*s, rng, 1.0);
    auto series = symbol(exp_clifford(gamma_of(s, A)));
    double pf = pfaffian_sqrt_det(SkewAdjointMap(s, 2.0 * sinh_half(A), 1e-8)) *
                volume_form(s).coeff(s->full_mask());
    EXPECT_NEAR(series.coeff(s->full_mask()), pf, 1e-10) << n;
    EXPECT_NEAR(symbol_formula_II(SkewAdjointMap(s, A, 1e-8)).coeff(s->full_mask()), pf, 1e-10);
  }
}

TEST(SymbolFormulas, OddDimensionRejectedForC2) {
  auto s = GeneratorSystem::euclidean(3);
  SkewAdjointMap A(s, Eigen::MatrixXd::Zero(3, 3));
  EXPECT_THROW(symbol_formula_II(A), DomainError);
}

TEST(PinLift, MinusIdentity) {
  auto s = GeneratorSystem::euclidean(2);
  Eigen::MatrixXd c = -Eigen::MatrixXd::Identity(2, 2);
  auto lift = pin_lift(s, c);
  EXPECT_LT(twisted_adjoint_residual(lift, c), 1e-14);
  EXPECT_TRUE(lift.is_homogeneous(2));
  // |e0 e1|^2 scaled so that each reflection vector has |u^2| = 1
  EXPECT_NEAR(std::abs(lift.coeff(0b11)), 2.0, 1e-14);
}

TEST(PinLift, RandomOrthogonal) {
  Rng rng(92);
  for (int n = 2; n <= 5; ++n) {
    Eigen::MatrixXd X(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        X(a, b) = rng.normal();
    Eigen::MatrixXd Q = X.householderQr().householderQ();
    auto s = GeneratorSystem::euclidean(n);
    EXPECT_LT(twisted_adjoint_residual(pin_lift(s, Q), Q), 1e-10) << n;
  }
  EXPECT_THROW(pin_lift(GeneratorSystem::euclidean(2), 2 * Eigen::MatrixXd::Identity(2, 2)),
               DomainError);
}

TEST(C3, MinusIdentityUpToSign) {
  auto s = GeneratorSystem::euclidean(2);
  Eigen::MatrixXd c = -Eigen::MatrixXd::Identity(2, 2);
  for (double th : {0.4, 1.3}) {
    EXPECT_LT(verify_c3(s, c, rot2(th)), 1e-12);
  }
  // c = -I, A = 0: the lift itself, |det(-2I)|^{1/2} dVol
  auto x = symbol(pin_lift(s, c));
  EXPECT_LT(distance_up_to_sign(x, symbol_formula_II(s, c, Eigen::MatrixXd::Zero(2, 2))), 1e-14);
}

TEST(C3, FourDimensionalRotation) {
  auto s = GeneratorSystem::euclidean(4);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(4, 4), A = Eigen::MatrixXd::Zero(4, 4);
  c.topLeftCorner(2, 2) = eval_matrix_function(AnalyticFunctionId::EXPM, rot2(2.0));
  c.bottomRightCorner(2, 2) = -Eigen::MatrixXd::Identity(2, 2);
  A.topLeftCorner(2, 2) = rot2(0.5);
  A.bottomRightCorner(2, 2) = rot2(-0.8);
  EXPECT_LT(verify_c3(s, c, A), 1e-10);
}

} // namespace
