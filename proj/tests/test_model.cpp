#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ladmm/model.hpp"
#include "oracles.hpp"

using ladmm::Matrix;
using ladmm::Vector;

TEST(Shrink, ZeroIsFixedPoint) {
  EXPECT_EQ(ladmm::shrink(Vector::Zero(2), 1.0), Vector::Zero(2));
}

TEST(Shrink, DirectFormula) {
  Vector v(3);
  v << 2.0, -0.3, 0.5;
  Vector expected(3);
  expected << 1.5, 0.0, 0.0;
  EXPECT_EQ(ladmm::shrink(v, 0.5), expected);
}

TEST(Shrink, ZeroThresholdIsIdentity) {
  std::mt19937 rng(3);
  const Vector v = oracle::random_vector(17, rng);
  EXPECT_EQ(ladmm::shrink(v, 0.0), v);
}

TEST(Shrink, NegativeThresholdRejected) {
  EXPECT_THROW(ladmm::shrink(Vector::Ones(2), -1e-3), std::domain_error);
}

TEST(Shrink, MagnitudeAndSign) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector v = oracle::random_vector(9, rng);
    const double kappa = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const Vector out = ladmm::shrink(v, kappa);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      EXPECT_DOUBLE_EQ(std::abs(out(i)), std::max(std::abs(v(i)) - kappa, 0.0));
      EXPECT_TRUE(out(i) == 0.0 || std::signbit(out(i)) == std::signbit(v(i)));
    }
  }
}

TEST(Shrink, Nonexpansive) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector u = oracle::random_vector(12, rng, 3.0);
    const Vector v = oracle::random_vector(12, rng, 3.0);
    const double kappa = std::uniform_real_distribution<double>(0.0, 4.0)(rng);
    EXPECT_LE((ladmm::shrink(u, kappa) - ladmm::shrink(v, kappa)).norm(), (u - v).norm() + 1e-15);
  }
}

TEST(Shrink, MatchesBruteForceProx) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> uv(-3.0, 3.0), uk(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double v = uv(rng);
    const double kappa = uk(rng);
    Vector one(1);
    one << v;
    const double z = ladmm::shrink(one, kappa)(0);
    // Grid spacing 2*4/80000 = 1e-4.
    EXPECT_NEAR(z, oracle::scalar_l1_prox_by_scan(v, kappa, 4.0, 80000), 1.0001e-4);
  }
}

TEST(SpectralNorm, Identity) {
  EXPECT_NEAR(ladmm::spectral_norm(Matrix::Identity(3, 3)), 1.0, 1e-12);
}

TEST(SpectralNorm, Diagonal) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  EXPECT_NEAR(ladmm::spectral_norm(m), 9.0, 1e-8);
}

TEST(SpectralNorm, MatchesDenseEigenOracle) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Matrix m = oracle::random_matrix(20, 50, seed);
    const double ref = oracle::dense_gram_lambda_max(m);
    EXPECT_NEAR(ladmm::spectral_norm(m) / ref, 1.0, 1e-6) << "seed " << seed;
  }
}

TEST(SpectralNorm, RayleighLowerBound) {
  std::mt19937 rng(21);
  const Matrix m = oracle::random_matrix(30, 40, 21);
  const double norm = ladmm::spectral_norm(m);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector u = oracle::random_vector(40, rng);
    EXPECT_LE((m * u).squaredNorm() / u.squaredNorm(), norm * (1.0 + 1e-9));
  }
}

TEST(SpectralNorm, EmptyRejected) {
  EXPECT_THROW(ladmm::spectral_norm(Matrix(0, 0)), std::invalid_argument);
}

TEST(SpectralNorm, IterationCapReportsBestEstimate) {
  const Matrix m = oracle::random_matrix(20, 30, 4);
  ladmm::PowerIterationOptions opts;
  opts.max_iterations = 2;
  opts.rel_tolerance = 0.0;
  try {
    ladmm::spectral_norm(m, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ladmm::ConvergenceError& e) {
    EXPECT_GT(e.best_estimate(), 0.0);
    EXPECT_LE(e.best_estimate(), oracle::dense_gram_lambda_max(m) * (1.0 + 1e-12));
  }
}

TEST(LinearBlock, ScaledSharedMatchesDense) {
  std::mt19937 rng(2);
  const Matrix a = oracle::random_matrix(6, 4, 2);
  const auto block = ladmm::LinearBlock::dense(a, -2.0);
  const Vector u = oracle::random_vector(4, rng);
  const Vector w = oracle::random_vector(6, rng);
  EXPECT_LT((block.apply(u) - (-2.0 * a * u)).norm(), 1e-13);
  EXPECT_LT((block.apply_transpose(w) - (-2.0 * a.transpose() * w)).norm(), 1e-13);
  EXPECT_EQ(block.to_dense(), -2.0 * a);
  EXPECT_NEAR(ladmm::spectral_norm(block) / oracle::dense_gram_lambda_max(-2.0 * a), 1.0, 1e-8);
  EXPECT_NEAR(block.gram_frobenius_norm(), (4.0 * a.transpose() * a).norm(), 1e-12);
}

TEST(LinearBlock, Identity) {
  const auto eye = ladmm::LinearBlock::identity(5);
  EXPECT_TRUE(eye.is_identity());
  EXPECT_EQ(eye.to_dense(), Matrix::Identity(5, 5));
  EXPECT_DOUBLE_EQ(ladmm::spectral_norm(eye), 1.0);
  EXPECT_DOUBLE_EQ(eye.gram_frobenius_norm(), std::sqrt(5.0));
}

TEST(LinearBlock, FrobeniusUsesSmallerGram) {
  for (auto [r, c] : {std::pair{7, 3}, std::pair{3, 7}}) {
    const Matrix a = oracle::random_matrix(r, c, 8);
    EXPECT_NEAR(ladmm::LinearBlock::dense(a).gram_frobenius_norm(), (a.transpose() * a).norm(),
                1e-11);
  }
}

namespace {

ladmm::SplitProblem tiny_problem() {
  ladmm::SplitProblem p;
  p.mat_a = ladmm::LinearBlock::identity(2);
  Matrix b(2, 2);
  b << 2.0, 0.0, 0.0, 1.0;
  p.mat_b = ladmm::LinearBlock::dense(b);
  p.rhs_b = Vector::Zero(2);
  p.x_oracle = [](const Vector&, const Vector& by, const Vector& lambda, double beta) {
    return Vector((lambda - beta * by) / (1.0 + beta));
  };
  p.y_prox_oracle = [](const Vector& point, double) { return point; };
  return p;
}

}  // namespace

TEST(SplitProblem, ValidateFillsNorms) {
  auto p = tiny_problem();
  p.validate();
  EXPECT_NEAR(p.btb_norm, 4.0, 1e-8);
  EXPECT_NEAR(p.btb_frobenius, std::sqrt(17.0), 1e-12);
  EXPECT_EQ(p.gram_scale(ladmm::GramNorm::spectral), p.btb_norm);
  EXPECT_EQ(p.gram_scale(ladmm::GramNorm::frobenius), p.btb_frobenius);
}

TEST(SplitProblem, ValidateRejectsShapeMismatch) {
  auto p = tiny_problem();
  p.rhs_b = Vector::Zero(3);
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(SplitProblem, ValidateRejectsMissingOracle) {
  auto p = tiny_problem();
  p.y_prox_oracle = nullptr;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(SplitProblem, RankDeficiency) {
  auto p = tiny_problem();
  EXPECT_EQ(p.column_rank_deficiency(), (std::pair<ladmm::Index, ladmm::Index>{0, 0}));
  p.mat_b = ladmm::LinearBlock::dense(Matrix::Ones(2, 3));
  EXPECT_EQ(p.column_rank_deficiency().second, 2);
}

TEST(Iterate, InitialIterate) {
  auto p = tiny_problem();
  p.validate();
  const auto it = ladmm::make_initial_iterate(p, 1.0);
  EXPECT_TRUE(it.all_finite());
  EXPECT_EQ(it.y, Vector::Zero(2));
  EXPECT_EQ(it.lambda, Vector::Zero(2));
  EXPECT_EQ(it.x, Vector::Zero(2));
}
