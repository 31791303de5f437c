#ifndef LADMM_LASSO_HPP_
#define LADMM_LASSO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ladmm/model.hpp"
#include "ladmm/rng.hpp"

namespace ladmm::lasso {

//! min 1/2 ||A y - b||^2 + sigma ||y||_1.
struct LassoInstance {
  std::shared_ptr<const Matrix> design;
  Vector labels;
  double sigma = 0.0;
  Vector y_true;
  double ata_norm = 0.0;       //!< ||A^T A||_2
  double ata_frobenius = 0.0;  //!< ||A^T A||_F
  std::uint64_t seed = 0;

  const Matrix& a() const { return *design; }
  Index m() const { return design->rows(); }
  Index n() const { return design->cols(); }
};

inline double gram_frobenius(const Matrix& a) {
  return a.rows() < a.cols() ? (a * a.transpose()).norm() : (a.transpose() * a).norm();
}

//! Wraps user data; computes both Gram norms.
inline LassoInstance make_instance(Matrix design, Vector labels, double sigma,
                                   Vector y_true = Vector()) {
  if (design.rows() != labels.size()) {
    throw std::invalid_argument("make_instance: labels length must equal rows of design");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("make_instance: sigma must be > 0");
  }
  LassoInstance inst;
  inst.ata_norm = spectral_norm(design);
  inst.ata_frobenius = gram_frobenius(design);
  inst.design = std::make_shared<const Matrix>(std::move(design));
  inst.labels = std::move(labels);
  inst.sigma = sigma;
  inst.y_true = y_true.size() == 0 ? Vector::Zero(inst.n()) : std::move(y_true);
  return inst;
}

//! Random instance. Draw order from one PortableRng(seed):
//!  1. A entries, column-major, N(0, 1); columns then scaled to unit norm.
//!  2. support of y_true: min(n, 100) indices by partial Fisher-Yates over 0..n-1.
//!  3. support values N(0, 1), in the order the indices were drawn.
//!  4. noise, m entries N(0, 1e-3).
//! b = A y_true + noise, sigma = 0.1 ||A^T b||_inf.
inline LassoInstance generate(Index m, Index n, std::uint64_t seed) {
  if (m <= 0 || n <= 0) {
    throw std::domain_error("generate: m and n must be positive");
  }
  PortableRng rng(seed);
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      a(i, j) = rng.normal();
    }
  }
  for (Index j = 0; j < n; ++j) {
    const double norm = a.col(j).norm();
    if (norm > 0.0) {
      a.col(j) /= norm;
    }
  }

  const Index support = std::min<Index>(n, 100);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < support; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Vector y_true = Vector::Zero(n);
  for (Index i = 0; i < support; ++i) {
    y_true(idx[static_cast<std::size_t>(i)]) = rng.normal();
  }

  const double noise_sd = std::sqrt(1e-3);
  Vector b = a * y_true;
  for (Index i = 0; i < m; ++i) {
    b(i) += noise_sd * rng.normal();
  }

  LassoInstance inst;
  inst.sigma = 0.1 * (a.transpose() * b).cwiseAbs().maxCoeff();
  inst.ata_norm = spectral_norm(a);
  inst.ata_frobenius = gram_frobenius(a);
  inst.design = std::make_shared<const Matrix>(std::move(a));
  inst.labels = std::move(b);
  inst.y_true = std::move(y_true);
  inst.seed = seed;
  return inst;
}

inline double objective(const LassoInstance& inst, const Vector& y) {
  return 0.5 * (inst.a() * y - inst.labels).squaredNorm() + inst.sigma * y.lpNorm<1>();
}

//! x = (b + lambda + beta A y) / (1 + beta), with `ay` = A y already formed.
inline Vector x_update_from_product(const LassoInstance& inst, const Vector& ay,
                                    const Vector& lambda, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("x_update: beta must be > 0");
  }
  return (inst.labels + lambda + beta * ay) / (1.0 + beta);
}

//! Minimizer of 1/2 ||x - b||^2 - lambda^T x + (beta/2) ||x - A y||^2.
inline Vector x_update_closed_form(const LassoInstance& inst, const Vector& y,
                                   const Vector& lambda, double beta) {
  return x_update_from_product(inst, inst.a() * y, lambda, beta);
}

//! y+ = shrink(y - (1/(delta beta)) A^T [lambda - beta (x+ - A y)], sigma / (delta beta)).
inline Vector y_update_shrink(const LassoInstance& inst, const Vector& x_new, const Vector& y,
                              const Vector& lambda, double beta, double delta) {
  if (!(delta > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("y_update_shrink: delta and beta must be > 0");
  }
  const double weight = delta * beta;
  const Vector bracket = lambda - beta * (x_new - inst.a() * y);
  return shrink(y - inst.a().transpose() * bracket / weight, inst.sigma / weight);
}

//! Split form  min 1/2 ||x - b||^2 + sigma ||y||_1  s.t.  x - A y = 0.
//! The x-block is I_m, the y-block is -A (sharing the design matrix), rhs is zero.
inline SplitProblem to_split_form(const LassoInstance& inst) {
  SplitProblem p;
  p.mat_a = LinearBlock::identity(inst.m());
  p.mat_b = LinearBlock::shared(inst.design, -1.0);
  p.rhs_b = Vector::Zero(inst.m());
  p.btb_norm = inst.ata_norm;
  p.btb_frobenius = inst.ata_frobenius;
  const Vector labels = inst.labels;
  const double sigma = inst.sigma;
  p.x_oracle = [labels](const Vector&, const Vector& by, const Vector& lambda, double beta) {
    // A y = -(B y)
    return Vector((labels + lambda - beta * by) / (1.0 + beta));
  };
  p.y_prox_oracle = [sigma](const Vector& point, double weight) {
    return shrink(point, sigma / weight);
  };
  p.objective = [labels, sigma](const Vector&, const Vector& y, const Vector& by) {
    return 0.5 * (by + labels).squaredNorm() + sigma * y.lpNorm<1>();
  };
  p.validate();
  return p;
}

//! Violation of 0 in A^T (A y - b) + sigma d||y||_1, in the max norm. With g = A^T (A y - b):
//! |g_i + sigma sign(y_i)| where y_i != 0, max(0, |g_i| - sigma) where y_i = 0.
inline double kkt_residual(const LassoInstance& inst, const Vector& y) {
  const Vector g = inst.a().transpose() * (inst.a() * y - inst.labels);
  double worst = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    double r;
    if (y(i) != 0.0) {
      r = std::abs(g(i) + std::copysign(inst.sigma, y(i)));
    } else {
      r = std::max(0.0, std::abs(g(i)) - inst.sigma);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace ladmm::lasso

#endif  // LADMM_LASSO_HPP_
