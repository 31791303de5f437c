#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ladmm/instance_io.hpp"
#include "ladmm/lasso.hpp"
#include "ladmm/solvers.hpp"
#include "oracles.hpp"

using ladmm::Matrix;
using ladmm::Vector;
namespace lasso = ladmm::lasso;

TEST(Generate, Invariants) {
  const auto inst = lasso::generate(40, 150, 12);
  EXPECT_EQ(inst.m(), 40);
  EXPECT_EQ(inst.n(), 150);
  for (Eigen::Index j = 0; j < inst.n(); ++j) {
    EXPECT_NEAR(inst.a().col(j).norm(), 1.0, 1e-12);
  }
  EXPECT_EQ((inst.y_true.array() != 0.0).count(), 100);
  const Vector atb = inst.a().transpose() * inst.labels;
  EXPECT_DOUBLE_EQ(inst.sigma, 0.1 * atb.cwiseAbs().maxCoeff());
  EXPECT_NEAR(inst.ata_norm / oracle::dense_gram_lambda_max(inst.a()), 1.0, 1e-6);
  EXPECT_NEAR(inst.ata_frobenius, (inst.a().transpose() * inst.a()).norm(), 1e-10);
  // Noise is small: b is close to A y_true.
  EXPECT_LT((inst.labels - inst.a() * inst.y_true).norm(), 10.0 * std::sqrt(40 * 1e-3));
}

TEST(Generate, SmallSupportWhenFewColumns) {
  const auto inst = lasso::generate(10, 30, 1);
  EXPECT_EQ((inst.y_true.array() != 0.0).count(), 30);
}

TEST(Generate, Deterministic) {
  const auto a = lasso::generate(25, 60, 99);
  const auto b = lasso::generate(25, 60, 99);
  const auto c = lasso::generate(25, 60, 100);
  EXPECT_EQ(a.a(), b.a());
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.y_true, b.y_true);
  EXPECT_NE(a.labels, c.labels);
}

TEST(Generate, RejectsBadDims) {
  EXPECT_THROW(lasso::generate(0, 5, 1), std::domain_error);
  EXPECT_THROW(lasso::generate(5, -1, 1), std::domain_error);
}

TEST(MakeInstance, Validation) {
  EXPECT_THROW(lasso::make_instance(Matrix::Ones(2, 3), Vector::Zero(3), 1.0),
               std::invalid_argument);
  EXPECT_THROW(lasso::make_instance(Matrix::Ones(2, 3), Vector::Zero(2), 0.0),
               std::invalid_argument);
}

TEST(XUpdate, StationaryPoint) {
  const auto inst = lasso::generate(15, 30, 5);
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector y = oracle::random_vector(30, rng);
    const Vector lambda = oracle::random_vector(15, rng);
    const double beta = 0.3 + trial;
    const Vector x = lasso::x_update_closed_form(inst, y, lambda, beta);
    // Gradient of 1/2||x-b||^2 - lambda^T x + beta/2 ||x - A y||^2.
    const Vector grad = (x - inst.labels) - lambda + beta * (x - inst.a() * y);
    EXPECT_LE(grad.norm(), 1e-12 * (1.0 + inst.labels.norm() + lambda.norm() + beta * y.norm()));
  }
  EXPECT_THROW(lasso::x_update_closed_form(inst, Vector::Zero(30), Vector::Zero(15), 0.0),
               std::invalid_argument);
}

TEST(SplitForm, Structure) {
  const auto inst = lasso::generate(8, 12, 3);
  const auto p = lasso::to_split_form(inst);
  EXPECT_TRUE(p.mat_a.is_identity());
  EXPECT_EQ(p.mat_b.to_dense(), -inst.a());
  EXPECT_EQ(p.rhs_b, Vector::Zero(8));
  EXPECT_EQ(p.btb_norm, inst.ata_norm);
  EXPECT_EQ(p.btb_frobenius, inst.ata_frobenius);
  std::mt19937 rng(1);
  const Vector y = oracle::random_vector(12, rng);
  const Vector lambda = oracle::random_vector(8, rng);
  const Vector by = p.mat_b.apply(y);
  EXPECT_LT((p.x_oracle(y, by, lambda, 1.7) - lasso::x_update_closed_form(inst, y, lambda, 1.7))
                .norm(),
            1e-13);
  EXPECT_NEAR(p.objective(Vector(), y, by), lasso::objective(inst, y), 1e-12);
}

TEST(Kkt, OneDimensionalExample) {
  Matrix a(1, 1);
  a << 1.0;
  Vector b(1);
  b << 2.0;
  const auto inst = lasso::make_instance(a, b, 0.5);
  // Brute-force scan of 1/2 (y - 2)^2 + 0.5 |y|.
  double best = 1e300, best_y = 0.0;
  for (int i = 0; i <= 400000; ++i) {
    const double y = -4.0 + 8.0 * i / 400000;
    const double f = 0.5 * (y - 2.0) * (y - 2.0) + 0.5 * std::abs(y);
    if (f < best) {
      best = f;
      best_y = y;
    }
  }
  EXPECT_NEAR(best_y, 1.5, 2e-5);
  Vector y(1);
  y << 1.5;
  EXPECT_NEAR(lasso::kkt_residual(inst, y), 0.0, 1e-15);
  y << 1.0;
  EXPECT_NEAR(lasso::kkt_residual(inst, y), 0.5, 1e-15);
  y << 0.0;
  EXPECT_NEAR(lasso::kkt_residual(inst, y), 1.5, 1e-15);
  const auto run = ladmm::solve_adaptive(lasso::to_split_form(inst),
                                         ladmm::SolverConfig{.eps_abs = 1e-10, .eps_rel = 1e-10});
  ASSERT_EQ(run.reason, ladmm::Termination::converged);
  EXPECT_NEAR(run.final_iterate.y(0), 1.5, 1e-6);
}

TEST(Kkt, ZeroSolutionAboveThreshold) {
  // sigma >= ||A^T b||_inf makes y = 0 optimal.
  const Matrix a = oracle::random_matrix(6, 4, 2);
  std::mt19937 rng(2);
  const Vector b = oracle::random_vector(6, rng);
  const double sigma = (a.transpose() * b).cwiseAbs().maxCoeff();
  const auto inst = lasso::make_instance(a, b, sigma);
  EXPECT_EQ(lasso::kkt_residual(inst, Vector::Zero(4)), 0.0);
}

TEST(Solve, MatchesCoordinateDescentOracle) {
  for (std::uint64_t seed : {1, 2}) {
    const auto inst = lasso::generate(20, 50, seed);
    const Vector y_ref = oracle::lasso_coordinate_descent(inst.a(), inst.labels, inst.sigma);
    const double f_ref = lasso::objective(inst, y_ref);
    ASSERT_LE(lasso::kkt_residual(inst, y_ref), 1e-10 * inst.sigma);
    ladmm::SolverConfig c;
    c.eps_abs *= 1e-3;
    c.eps_rel *= 1e-3;
    for (const auto& run : {ladmm::solve_adaptive(lasso::to_split_form(inst), c),
                            ladmm::solve_oladmm(lasso::to_split_form(inst), c)}) {
      ASSERT_EQ(run.reason, ladmm::Termination::converged);
      const double f = lasso::objective(inst, run.final_iterate.y);
      EXPECT_LE(std::abs(f - f_ref) / std::abs(f_ref), 1e-4);
      EXPECT_LE(lasso::kkt_residual(inst, run.final_iterate.y), 1e-3 * inst.sigma);
      // The oracle's optimum is a lower bound on every objective value the solver visits.
      for (const auto& rec : run.trace) {
        EXPECT_GE(rec.objective, f_ref - 1e-9 * std::abs(f_ref));
      }
    }
  }
}

TEST(InstanceIo, RoundTrip) {
  const auto inst = lasso::generate(7, 11, 42);
  std::stringstream ss;
  lasso::write_instance(ss, inst);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 40u + 8u * (7 * 11 + 7 + 11));
  EXPECT_EQ(bytes.substr(0, 8), "LADMMLI1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 7u);   // m, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 11u);  // n
  EXPECT_EQ(static_cast<unsigned char>(bytes[24]), 42u);  // seed
  std::istringstream in(bytes);
  const auto back = lasso::read_instance(in);
  EXPECT_EQ(back.a(), inst.a());
  EXPECT_EQ(back.labels, inst.labels);
  EXPECT_EQ(back.y_true, inst.y_true);
  EXPECT_EQ(back.sigma, inst.sigma);
  EXPECT_EQ(back.seed, inst.seed);
  EXPECT_NEAR(back.ata_norm, inst.ata_norm, 1e-12 * inst.ata_norm);
}

TEST(InstanceIo, FileRoundTripAndErrors) {
  const auto path = (std::filesystem::temp_directory_path() / "ladmm_io_test.bin").string();
  const auto inst = lasso::generate(5, 9, 3);
  lasso::save_instance(path, inst);
  EXPECT_EQ(lasso::load_instance(path).labels, inst.labels);
  std::filesystem::remove(path);
  EXPECT_THROW(lasso::load_instance(path), std::runtime_error);
  std::istringstream bad("NOTMAGIC");
  EXPECT_THROW(lasso::read_instance(bad), std::runtime_error);
  std::stringstream ss;
  lasso::write_instance(ss, inst);
  std::istringstream truncated(ss.str().substr(0, 60));
  EXPECT_THROW(lasso::read_instance(truncated), std::runtime_error);
}
