//
// Copyright 2026 The Behavior Cloak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "cloak/numerics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "cloak/errors.h"

namespace cloak {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

using Svd = Eigen::BDCSVD<MatrixXd>;

Svd ThinSvd(const Eigen::Ref<const MatrixXd>& m) {
  return Svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

Svd FullVSvd(const Eigen::Ref<const MatrixXd>& m) {
  return Svd(m, Eigen::ComputeThinU | Eigen::ComputeFullV);
}

Index RankFromSingularValues(const Eigen::Ref<const MatrixXd>& m,
                             const VectorXd& sigma,
                             const ToleranceConfig& tol) {
  if (sigma.size() == 0) return 0;
  const double threshold = RankThreshold(m, sigma(0), tol);
  Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > threshold) ++rank;
  return rank;
}

}  // namespace

void ToleranceConfig::Validate() const {
  if (!(rank_tol_factor >= 1.0) || !std::isfinite(rank_tol_factor)) {
    ThrowInvalidInput("rank_tol_factor must be finite and >= 1");
  }
  if (!(residual_tol > 0.0) || !std::isfinite(residual_tol)) {
    ThrowInvalidInput("residual_tol must be finite and > 0");
  }
  if (!(schur_margin > 0.0) || !(schur_margin < 1.0)) {
    ThrowInvalidInput("schur_margin must lie in (0, 1)");
  }
}

void RequireFinite(const Eigen::Ref<const MatrixXd>& m, const char* what) {
  if (!m.allFinite()) {
    ThrowInvalidInput(std::string(what) + " has non-finite entries");
  }
}

double RankThreshold(const Eigen::Ref<const MatrixXd>& m, double sigma_max,
                     const ToleranceConfig& tol) {
  const double max_dim =
      static_cast<double>(std::max<Index>(std::max(m.rows(), m.cols()), 1));
  return sigma_max * max_dim * std::numeric_limits<double>::epsilon() *
         tol.rank_tol_factor;
}

Index NumericalRank(const Eigen::Ref<const MatrixXd>& m,
                    const ToleranceConfig& tol) {
  RequireFinite(m, "matrix");
  if (m.size() == 0) return 0;
  Svd svd(m);
  return RankFromSingularValues(m, svd.singularValues(), tol);
}

MatrixXd PseudoInverse(const Eigen::Ref<const MatrixXd>& m,
                       const ToleranceConfig& tol) {
  RequireFinite(m, "matrix");
  if (m.size() == 0) return MatrixXd::Zero(m.cols(), m.rows());
  const Svd svd = ThinSvd(m);
  const VectorXd& sigma = svd.singularValues();
  const Index rank = RankFromSingularValues(m, sigma, tol);
  if (rank == 0) return MatrixXd::Zero(m.cols(), m.rows());
  const VectorXd inv = sigma.head(rank).cwiseInverse();
  return svd.matrixV().leftCols(rank) * inv.asDiagonal() *
         svd.matrixU().leftCols(rank).transpose();
}

MatrixXd NullspaceBasis(const Eigen::Ref<const MatrixXd>& m,
                        const ToleranceConfig& tol) {
  RequireFinite(m, "matrix");
  if (m.cols() == 0) return MatrixXd::Zero(0, 0);
  if (m.rows() == 0) return MatrixXd::Identity(m.cols(), m.cols());
  const Svd svd = FullVSvd(m);
  const Index rank = RankFromSingularValues(m, svd.singularValues(), tol);
  return svd.matrixV().rightCols(m.cols() - rank);
}

MatrixXd RangeBasis(const Eigen::Ref<const MatrixXd>& m,
                    const ToleranceConfig& tol) {
  RequireFinite(m, "matrix");
  if (m.size() == 0) return MatrixXd::Zero(m.rows(), 0);
  const Svd svd = ThinSvd(m);
  const Index rank = RankFromSingularValues(m, svd.singularValues(), tol);
  return svd.matrixU().leftCols(rank);
}

LeastSquaresResult LstsqMinNorm(const Eigen::Ref<const MatrixXd>& m,
                                const Eigen::Ref<const VectorXd>& b,
                                const ToleranceConfig& tol) {
  if (m.rows() != b.size()) {
    ThrowInvalidInput("lstsq: matrix has " + std::to_string(m.rows()) +
                      " rows but right-hand side has " +
                      std::to_string(b.size()));
  }
  RequireFinite(m, "lstsq matrix");
  RequireFinite(b, "lstsq right-hand side");
  LeastSquaresResult result;
  if (m.size() == 0) {
    result.x = VectorXd::Zero(m.cols());
    result.residual_norm = b.norm();
    return result;
  }
  const Svd svd = ThinSvd(m);
  const VectorXd& sigma = svd.singularValues();
  const Index rank = RankFromSingularValues(m, sigma, tol);
  const VectorXd coeffs = svd.matrixU().leftCols(rank).transpose() * b;
  result.x = svd.matrixV().leftCols(rank) *
             coeffs.cwiseQuotient(sigma.head(rank));
  result.residual_norm = (m * result.x - b).norm();
  return result;
}

IterativeLeastSquaresResult IterativeLstsq(
    const LinearOperator& op, const Eigen::Ref<const VectorXd>& b,
    const IterativeLeastSquaresOptions& options) {
  if (b.size() != op.rows) {
    ThrowInvalidInput("iterative lstsq: right-hand side size mismatch");
  }
  IterativeLeastSquaresResult result;
  result.x = VectorXd::Zero(op.cols);

  const double b_norm = b.norm();
  if (b_norm == 0.0 || op.cols == 0) {
    result.residual_norm = b_norm;
    return result;
  }

  VectorXd u = b / b_norm;
  VectorXd v = op.apply_adjoint(u);
  double alpha = v.norm();
  if (alpha == 0.0) {
    // b is orthogonal to the range; x = 0 is already the minimizer.
    result.residual_norm = b_norm;
    return result;
  }
  v /= alpha;
  VectorXd w = v;
  double phi_bar = b_norm;
  double rho_bar = alpha;
  double a_norm_sq = alpha * alpha;

  for (int it = 1; it <= options.max_iterations; ++it) {
    result.iterations = it;
    u = op.apply(v) - alpha * u;
    const double beta = u.norm();
    if (beta > 0.0) u /= beta;
    v = op.apply_adjoint(u) - beta * v;
    alpha = v.norm();
    if (alpha > 0.0) v /= alpha;
    a_norm_sq += alpha * alpha + beta * beta;

    const double rho = std::hypot(rho_bar, beta);
    const double c = rho_bar / rho;
    const double s = beta / rho;
    const double theta = s * alpha;
    rho_bar = -c * alpha;
    const double phi = c * phi_bar;
    phi_bar = s * phi_bar;

    result.x += (phi / rho) * w;
    w = v - (theta / rho) * w;

    // phi_bar estimates ||r||; phi_bar * alpha * |c| estimates ||A^T r||.
    const double normal_residual = phi_bar * alpha * std::abs(c);
    if (phi_bar <= options.relative_tolerance * b_norm) break;
    if (normal_residual <=
        options.relative_tolerance * std::sqrt(a_norm_sq) * phi_bar) {
      break;
    }
    if (alpha == 0.0 || beta == 0.0) break;
  }
  result.residual_norm = (op.apply(result.x) - b).norm();
  return result;
}

Eigen::VectorXcd Eigenvalues(const Eigen::Ref<const MatrixXd>& m) {
  if (m.rows() != m.cols()) {
    ThrowInvalidInput("eigenvalues: matrix is " + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()) + ", not square");
  }
  RequireFinite(m, "matrix");
  if (m.size() == 0) return Eigen::VectorXcd(0);
  Eigen::EigenSolver<MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    ThrowInvalidInput("eigenvalue iteration did not converge");
  }
  return solver.eigenvalues();
}

double SpectralRadius(const Eigen::Ref<const MatrixXd>& m) {
  const Eigen::VectorXcd lambda = Eigenvalues(m);
  return lambda.size() == 0 ? 0.0 : lambda.cwiseAbs().maxCoeff();
}

bool IsSchur(const Eigen::Ref<const MatrixXd>& m, const ToleranceConfig& tol) {
  return SpectralRadius(m) <= 1.0 - tol.schur_margin;
}

MatrixXd MatrixExponential(const Eigen::Ref<const MatrixXd>& m) {
  if (m.rows() != m.cols()) {
    ThrowInvalidInput("matrix exponential of a non-square matrix");
  }
  RequireFinite(m, "matrix");
  if (m.size() == 0) return MatrixXd(0, 0);
  const MatrixXd dense = m;
  return dense.exp();
}

VectorXd GaussianVector(Index size, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(size);
  for (Index i = 0; i < size; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace cloak
