#include <gtest/gtest.h>

#include <cmath>

#include "cdyb/matrix_functions.hpp"
#include "support.hpp"

using namespace cdyb;
using namespace cdyb::testing;
using F = AnalyticFunctionId;

namespace {

Eigen::MatrixXd rot_gen(double th) {
  Eigen::MatrixXd A(2, 2);
  A << 0, -th, th, 0;
  return A;
}

Eigen::MatrixXd blocks(const std::vector<double> &th) {
  const int n = int(2 * th.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < th.size(); ++i)
    A.block(2 * i, 2 * i, 2, 2) = rot_gen(th[i]);
  return A;
}

const F all_ids[] = {F::J_SINHC, F::F_LOGDERIV, F::G_AUX, F::JL, F::JR,
                     F::TANH_HALF, F::COTH_HALF, F::EXPM, F::INV};

// scalar value of id at z
std::complex<double> scalar(F id, std::complex<double> z) {
  switch (id) {
  case F::J_SINHC: return std::sinh(z / 2.0) / (z / 2.0);
  case F::F_LOGDERIV: return 0.5 / std::tanh(z / 2.0) - 1.0 / z;
  case F::G_AUX: return (std::sinh(z) - z) / (z * z);
  case F::JL: return (1.0 - std::exp(-z)) / z;
  case F::JR: return (std::exp(z) - 1.0) / z;
  case F::TANH_HALF: return std::tanh(z / 2.0);
  case F::COTH_HALF: return 1.0 / std::tanh(z / 2.0);
  case F::EXPM: return std::exp(z);
  case F::INV: return 1.0 / z;
  }
  return 0;
}

TEST(Eval, AtZero) {
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_TRUE(eval_matrix_function(F::J_SINHC, Z).isIdentity(1e-15));
  EXPECT_TRUE(eval_matrix_function(F::F_LOGDERIV, Z).isZero(1e-15));
  EXPECT_TRUE(eval_matrix_function(F::EXPM, Z).isIdentity(1e-15));
  EXPECT_TRUE(eval_matrix_function(F::JR, Z).isIdentity(1e-15));
}

TEST(Eval, LogDerivativeGoldenAtThetaOne) {
  Eigen::MatrixXd f = eval_matrix_function(F::F_LOGDERIV, rot_gen(1.0));
  // f(i) = -i (cot(1/2)/2 - 1)
  EXPECT_NEAR(f(1, 0), 0.08475613914377411, 1e-14);
  EXPECT_NEAR(f(0, 1), -0.08475613914377411, 1e-14);
  EXPECT_NEAR(f(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(f(1, 0), -(0.5 / std::tan(0.5) - 1.0), 1e-14);
}

TEST(Eval, BlockScalarConsistency) {
  std::vector<double> th = {0.4, -1.3, 2.2};
  Eigen::MatrixXd A = blocks(th);
  for (F id : all_ids) {
    Eigen::MatrixXd M = eval_matrix_function(id, A);
    for (std::size_t i = 0; i < th.size(); ++i) {
      // on a block z = i theta acts as theta J; f(J theta) = Re f + Im f J
      auto v = scalar(id, std::complex<double>(0, th[i]));
      Eigen::MatrixXd blk = M.block(2 * i, 2 * i, 2, 2);
      EXPECT_NEAR(blk(0, 0), v.real(), 1e-12) << function_name(id);
      EXPECT_NEAR(blk(1, 0), v.imag(), 1e-12) << function_name(id);
    }
  }
}

TEST(Eval, CommutesWithArgumentAndIsEquivariant) {
  Rng rng(31);
  for (int n : {3, 4, 5}) {
    auto s = GeneratorSystem::create(random_form(n, rng));
    Eigen::MatrixXd A = random_skew_adjoint(*s, rng, 0.8);
    Eigen::MatrixXd Q = rng.uniform_matrix(n, n, -1, 1).householderQr().householderQ();
    for (F id : all_ids) {
      if ((id == F::INV || id == F::COTH_HALF) && n % 2)
        continue; // zero eigenvalue
      Eigen::MatrixXd f = eval_matrix_function(id, A);
      double sc = f.norm() * A.norm();
      EXPECT_LT((f * A - A * f).norm(), 1e-10 * sc) << function_name(id);
      Eigen::MatrixXd lhs = eval_matrix_function(id, Eigen::MatrixXd(Q * A * Q.transpose()));
      EXPECT_LT((lhs - Q * f * Q.transpose()).norm(), 1e-10 * std::max(1.0, f.norm()))
          << function_name(id);
    }
  }
}

TEST(Eval, LogDerivativeIsOdd) {
  Rng rng(32);
  auto s = GeneratorSystem::euclidean(4);
  Eigen::MatrixXd A = random_skew_adjoint(*s, rng);
  EXPECT_LT(max_diff(eval_matrix_function(F::F_LOGDERIV, Eigen::MatrixXd(-A)),
                     -eval_matrix_function(F::F_LOGDERIV, A)),
            1e-13);
}

TEST(Eval, LeftRightJRelations) {
  Rng rng(33);
  auto s = GeneratorSystem::create(random_form(4, rng, 2));
  Eigen::MatrixXd A = random_skew_adjoint(*s, rng);
  Eigen::MatrixXd jl = eval_matrix_function(F::JL, A);
  EXPECT_LT(max_diff(jl, eval_matrix_function(F::JR, Eigen::MatrixXd(-A))), 1e-13);
  EXPECT_LT(max_diff(jl, eval_matrix_function(F::EXPM, Eigen::MatrixXd(-A)) *
                             eval_matrix_function(F::JR, A)),
            1e-13);
}

TEST(Eval, PoleGuardNamesEigenvalue) {
  Eigen::MatrixXd A = rot_gen(2 * std::numbers::pi - 0.01);
  try {
    eval_matrix_function(F::F_LOGDERIV, A);
    FAIL() << "no domain error";
  } catch (const DomainError &e) {
    EXPECT_NE(std::string(e.what()).find("eigenvalue"), std::string::npos) << e.what();
  }
  EXPECT_THROW(eval_matrix_function(F::INV, Eigen::MatrixXd::Zero(2, 2)), DomainError);
  EXPECT_THROW(eval_matrix_function(F::COTH_HALF, Eigen::MatrixXd::Zero(2, 2)), DomainError);
}

TEST(JDetSqrt, Goldens) {
  EXPECT_DOUBLE_EQ(j_det_sqrt(Eigen::MatrixXd::Zero(3, 3)), 1.0);
  for (double th : {0.3, -1.7, 4.0})
    EXPECT_NEAR(j_det_sqrt(rot_gen(th)), std::abs(std::sin(th / 2) / (th / 2)), 1e-13);
}

TEST(JDetSqrt, SquaresToDeterminant) {
  Rng rng(34);
  for (int n = 2; n <= 6; ++n) {
    auto s = GeneratorSystem::create(random_form(n, rng, n / 2));
    Eigen::MatrixXd A = random_skew_adjoint(*s, rng, 0.7);
    double J = j_det_sqrt(A);
    double d = eval_matrix_function(F::J_SINHC, A).determinant();
    EXPECT_LT(std::abs(J * J - d), 1e-10 * d);
  }
  EXPECT_THROW(j_det_sqrt(rot_gen(2 * std::numbers::pi)), DomainError);
}

TEST(Pfaffian, Goldens) {
  EXPECT_DOUBLE_EQ(pfaffian(-rot_gen(2.5)), 2.5);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4, 4);
  M(0, 1) = 2;
  M(1, 0) = -2;
  M(2, 3) = -3;
  M(3, 2) = 3;
  EXPECT_DOUBLE_EQ(pfaffian(M), -6.0);
  auto s = GeneratorSystem::euclidean(2);
  EXPECT_DOUBLE_EQ(pfaffian_sqrt_det(SkewAdjointMap(s, -rot_gen(1.5))), 1.5);
}

TEST(Pfaffian, SquaresToDeterminant) {
  Rng rng(35);
  for (int n : {2, 4, 6})
    for (int it = 0; it < 50; ++it) {
      Eigen::MatrixXd X = rng.uniform_matrix(n, n, -1, 1);
      Eigen::MatrixXd M = X - X.transpose();
      double p = pfaffian(M), d = M.determinant();
      EXPECT_LT(std::abs(p * p - d), 1e-10 * std::max(1.0, std::abs(d)));
    }
}

TEST(Pfaffian, NonEuclideanDefiniteForm) {
  Rng rng(36);
  auto s = GeneratorSystem::create(random_form(4, rng));
  Eigen::MatrixXd A = random_skew_adjoint(*s, rng);
  double p = pfaffian_sqrt_det(SkewAdjointMap(s, A));
  EXPECT_LT(std::abs(p * p - A.determinant()), 1e-10 * std::max(1.0, std::abs(A.determinant())));
}

TEST(Pfaffian, RejectsBadInput) {
  auto s3 = GeneratorSystem::euclidean(3);
  EXPECT_THROW(pfaffian_sqrt_det(SkewAdjointMap(s3, Eigen::MatrixXd::Zero(3, 3))), DomainError);
  Eigen::Matrix2d B;
  B << 1, 0, 0, -1;
  auto ind = GeneratorSystem::create(B);
  Eigen::Matrix2d A;
  A << 0, 1, 1, 0; // B-skew for the split form
  EXPECT_THROW(pfaffian_sqrt_det(SkewAdjointMap(ind, A)), DomainError);
}

TEST(Cayley, Goldens) {
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_TRUE(cayley_like(-I, Eigen::MatrixXd::Zero(2, 2)).isZero(1e-15));
  Eigen::MatrixXd A = rot_gen(0.9);
  EXPECT_LT(max_diff(cayley_like(I, A), eval_matrix_function(F::COTH_HALF, A)), 1e-13);
}

TEST(Cayley, SkewAdjointOutput) {
  Rng rng(37);
  auto s = GeneratorSystem::euclidean(4);
  for (int it = 0; it < 20; ++it) {
    Eigen::MatrixXd A = blocks({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    Eigen::MatrixXd c = eval_matrix_function(F::EXPM, blocks({rng.uniform(0.5, 3), rng.uniform(0.5, 3)}));
    Eigen::MatrixXd M = c * eval_matrix_function(F::EXPM, A) - Eigen::MatrixXd::Identity(4, 4);
    if (mf_detail::sigma_min(M) < 0.1)
      continue;
    Eigen::MatrixXd K = cayley_like(c, SkewAdjointMap(s, A));
    EXPECT_LT(skew_adjoint_residual(*s, K), 1e-10);
  }
}

TEST(Cayley, RejectsNonCommuting) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(3, 3);
  c(0, 0) = -1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  A(1, 0) = 1;
  A(0, 1) = -1;
  EXPECT_THROW(cayley_like(c, A), DomainError);
}

TEST(Frechet, Trivial) {
  Rng rng(38);
  auto s = GeneratorSystem::euclidean(3);
  Eigen::MatrixXd A = random_skew_adjoint(*s, rng);
  EXPECT_TRUE(frechet_derivative(F::EXPM, A, Eigen::MatrixXd::Zero(3, 3)).isZero(1e-15));
  Eigen::MatrixXd H = rng.uniform_matrix(3, 3, -1, 1);
  EXPECT_LT(max_diff(frechet_derivative(F::EXPM, Eigen::MatrixXd::Zero(3, 3), H), H), 1e-14);
}

TEST(Frechet, MatchesCentralDifferences) {
  Rng rng(39);
  auto s = GeneratorSystem::create(random_form(4, rng, 1));
  const double h = 1e-5;
  for (F id : all_ids) {
    Eigen::MatrixXd A = blocks({0.9, -1.7});
    Eigen::MatrixXd H = random_skew_adjoint(*GeneratorSystem::euclidean(4), rng);
    Eigen::MatrixXd an = frechet_derivative(id, A, H);
    Eigen::MatrixXd fd = (eval_matrix_function(id, Eigen::MatrixXd(A + h * H)) -
                          eval_matrix_function(id, Eigen::MatrixXd(A - h * H))) /
                         (2 * h);
    EXPECT_LT(max_diff(an, fd), 1e-7) << function_name(id);
  }
}

TEST(Cayley, DerivativeMatchesCentralDifferences) {
  Rng rng(40);
  Eigen::MatrixXd A = blocks({0.4, 1.1});
  Eigen::MatrixXd c = eval_matrix_function(F::EXPM, blocks({1.5, -2.0}));
  Eigen::MatrixXd H = blocks({0.3, -0.7});
  const double h = 1e-5;
  Eigen::MatrixXd fd = (cayley_like(c, Eigen::MatrixXd(A + h * H)) -
                        cayley_like(c, Eigen::MatrixXd(A - h * H))) /
                       (2 * h);
  EXPECT_LT(max_diff(cayley_derivative(c, A, H), fd), 1e-7);
}

TEST(FrameNorm, OrthonormalFrameAndFallback) {
  Rng rng(41);
  auto s = GeneratorSystem::create(random_form(3, rng));
  Eigen::MatrixXd P = orthonormal_frame(*s);
  EXPECT_TRUE((P.transpose() * s->bilinear() * P).isIdentity(1e-12));
  // a B-unit vector has frame norm 1
  EXPECT_NEAR(frame_norm(MultiVector::vector(s, P.col(1))), 1.0, 1e-12);
  Eigen::Matrix2d B;
  B << 1, 0, 0, -1;
  auto ind = GeneratorSystem::create(B);
  auto x = MultiVector::vector(ind, Eigen::Vector2d(3, 4));
  EXPECT_DOUBLE_EQ(frame_norm(x), 5.0);
  EXPECT_STREQ(frame_norm_name(*ind), "coefficient-l2");
  EXPECT_STREQ(frame_norm_name(*s), "orthonormal-frame-l2");
}

} // namespace
