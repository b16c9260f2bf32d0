#pragma once

#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace polygrid::solvers {

enum class SolverVariant { Lstsq, LstsqSym, LstsqUni, Ridge };

std::string to_string(SolverVariant v);
SolverVariant parse_solver(const std::string& s);

struct SolverKind {
  SolverVariant variant = SolverVariant::Lstsq;
  /// L2 strength on non-intercept weights; used by Ridge only.
  double ridge_lambda = 1.0;
  bool operator==(const SolverKind&) const = default;
};

/// Weights for one target plus its constant term.
///
/// `intercept` is the constant added to every prediction. For Ridge it is
/// fitted; for LstsqSym it is the fixed 0.5 that maps the {-1, +1} encoding
/// back onto the 0/1 scale (the stored weights are already halved), and
/// `intercept_fitted` is false.
struct LinearFit {
  Eigen::VectorXd weights;
  std::optional<double> intercept;
  bool intercept_fitted = false;
};

/// Same as LinearFit, one row of W per target column.
struct MultiFit {
  Eigen::MatrixXd W;  // targets x features
  std::optional<Eigen::VectorXd> intercepts;
  bool intercepts_fitted = false;
};

/// Feature rows as the solver consumes them. LstsqUni divides each row by its
/// L1 norm (area shares instead of absolute areas); other variants pass through.
Eigen::MatrixXd prepare_features(const Eigen::MatrixXd& S, const SolverKind& kind);
Eigen::VectorXd prepare_row(std::span<const double> s, const SolverKind& kind);

/// Solves S w = y in the sense selected by `kind`.
///
/// lstsq, lstsqsym, lstsquni: minimum-norm least squares via complete
/// orthogonal decomposition (column-pivoted QR). ridge: augmented QR of
/// [S 1; sqrt(lambda) I 0] so the intercept is not penalised.
LinearFit solve_weights(const Eigen::MatrixXd& S, const Eigen::VectorXd& y, const SolverKind& kind);

/// Column-wise solve_weights sharing one factorization.
MultiFit solve_weights(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Y, const SolverKind& kind);

double predict_linear(std::span<const double> row, std::span<const double> weights,
                      std::optional<double> intercept);

}  // namespace polygrid::solvers
