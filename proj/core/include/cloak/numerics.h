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

#ifndef CLOAK_NUMERICS_H_
#define CLOAK_NUMERICS_H_

#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Core>

namespace cloak {

// Tolerances that turn the exact equalities of the method into floating-point
// decisions.
struct ToleranceConfig {
  // Multiplier on sigma_max * max(rows, cols) * machine_epsilon.
  double rank_tol_factor = 1.0;
  // Absolute threshold for "equation satisfied".
  double residual_tol = 1e-9;
  // Stability requires spectral radius <= 1 - schur_margin.
  double schur_margin = 1e-9;

  // Throws kInvalidInput unless every field is strictly positive and
  // rank_tol_factor >= 1.
  void Validate() const;
};

// Singular values at or below this threshold count as zero.
double RankThreshold(const Eigen::Ref<const Eigen::MatrixXd>& m,
                     double sigma_max, const ToleranceConfig& tol);

Eigen::Index NumericalRank(const Eigen::Ref<const Eigen::MatrixXd>& m,
                           const ToleranceConfig& tol = {});

Eigen::MatrixXd PseudoInverse(const Eigen::Ref<const Eigen::MatrixXd>& m,
                              const ToleranceConfig& tol = {});

// Orthonormal columns spanning Ker[m]. Zero columns when the kernel is
// trivial.
Eigen::MatrixXd NullspaceBasis(const Eigen::Ref<const Eigen::MatrixXd>& m,
                               const ToleranceConfig& tol = {});

// Orthonormal columns spanning Im[m].
Eigen::MatrixXd RangeBasis(const Eigen::Ref<const Eigen::MatrixXd>& m,
                           const ToleranceConfig& tol = {});

struct LeastSquaresResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
};

// Minimum-2-norm minimizer of ||m x - b||. Infeasibility is not an error
// here; callers compare residual_norm against their own threshold.
LeastSquaresResult LstsqMinNorm(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                const Eigen::Ref<const Eigen::VectorXd>& b,
                                const ToleranceConfig& tol = {});

// A linear operator known only through its action and its adjoint.
struct LinearOperator {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_adjoint;
};

struct IterativeLeastSquaresOptions {
  double relative_tolerance = 1e-15;
  int max_iterations = 20000;
};

struct IterativeLeastSquaresResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  int iterations = 0;
};

// LSQR (Paige-Saunders) started from zero, which converges to the
// minimum-norm least-squares solution. Used where the dense matrix would not
// fit in memory.
IterativeLeastSquaresResult IterativeLstsq(
    const LinearOperator& op, const Eigen::Ref<const Eigen::VectorXd>& b,
    const IterativeLeastSquaresOptions& options = {});

Eigen::VectorXcd Eigenvalues(const Eigen::Ref<const Eigen::MatrixXd>& m);

double SpectralRadius(const Eigen::Ref<const Eigen::MatrixXd>& m);

// True iff the spectral radius is at most 1 - tol.schur_margin.
bool IsSchur(const Eigen::Ref<const Eigen::MatrixXd>& m,
             const ToleranceConfig& tol = {});

Eigen::MatrixXd MatrixExponential(const Eigen::Ref<const Eigen::MatrixXd>& m);

// Throws kInvalidInput if any entry is NaN or infinite.
void RequireFinite(const Eigen::Ref<const Eigen::MatrixXd>& m,
                   const char* what);

// Standard-normal draws from caller-owned generator state.
Eigen::VectorXd GaussianVector(Eigen::Index size, std::mt19937_64& rng);

}  // namespace cloak

#endif  // CLOAK_NUMERICS_H_
