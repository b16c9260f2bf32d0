#include "polygrid/solvers.hpp"

#include <cmath>

#include "polygrid/error.hpp"

namespace polygrid::solvers {

std::string to_string(SolverVariant v) {
  switch (v) {
    case SolverVariant::Lstsq: return "lstsq";
    case SolverVariant::LstsqSym: return "lstsqsym";
    case SolverVariant::LstsqUni: return "lstsquni";
    case SolverVariant::Ridge: return "ridge";
  }
  return "?";
}

SolverVariant parse_solver(const std::string& s) {
  if (s == "lstsq") return SolverVariant::Lstsq;
  if (s == "lstsqsym") return SolverVariant::LstsqSym;
  if (s == "lstsquni") return SolverVariant::LstsqUni;
  if (s == "ridge") return SolverVariant::Ridge;
  throw InvalidInput("unknown solver '" + s + "'");
}

Eigen::MatrixXd prepare_features(const Eigen::MatrixXd& S, const SolverKind& kind) {
  if (kind.variant != SolverVariant::LstsqUni) return S;
  Eigen::MatrixXd out = S;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double total = out.row(i).lpNorm<1>();
    if (total > 0.0) out.row(i) /= total;
  }
  return out;
}

Eigen::VectorXd prepare_row(std::span<const double> s, const SolverKind& kind) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  if (kind.variant == SolverVariant::LstsqUni) {
    const double total = v.lpNorm<1>();
    if (total > 0.0) v /= total;
  }
  return v;
}

namespace {

void check_system(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Y) {
  if (S.rows() < 1 || S.cols() < 1) throw InvalidInput("solver needs at least one row and one column");
  if (S.rows() != Y.rows()) {
    throw DimensionMismatch("feature rows (" + std::to_string(S.rows()) + ") != target rows (" +
                            std::to_string(Y.rows()) + ")");
  }
  if (!S.allFinite() || !Y.allFinite()) throw InvalidInput("solver input contains non-finite entries");
}

}  // namespace

MultiFit solve_weights(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Y, const SolverKind& kind) {
  check_system(S, Y);
  const Eigen::MatrixXd A = prepare_features(S, kind);
  const Eigen::Index m = A.rows();
  const Eigen::Index f = A.cols();
  MultiFit fit;

  switch (kind.variant) {
    case SolverVariant::Lstsq:
    case SolverVariant::LstsqUni: {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
      fit.W = cod.solve(Y).transpose();
      break;
    }
    case SolverVariant::LstsqSym: {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
      const Eigen::MatrixXd Ysym = (2.0 * Y.array() - 1.0).matrix();
      // y01 = (ysym + 1) / 2, folded into halved weights plus a fixed 0.5.
      fit.W = 0.5 * cod.solve(Ysym).transpose();
      fit.intercepts = Eigen::VectorXd::Constant(Y.cols(), 0.5);
      break;
    }
    case SolverVariant::Ridge: {
      if (!(kind.ridge_lambda > 0.0)) throw InvalidInput("ridge_lambda must be > 0");
      Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(m + f, f + 1);
      aug.topLeftCorner(m, f) = A;
      aug.topRightCorner(m, 1).setOnes();
      aug.bottomLeftCorner(f, f).diagonal().setConstant(std::sqrt(kind.ridge_lambda));
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m + f, Y.cols());
      rhs.topRows(m) = Y;
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aug);
      const Eigen::MatrixXd sol = qr.solve(rhs);
      fit.W = sol.topRows(f).transpose();
      fit.intercepts = sol.row(f).transpose();
      fit.intercepts_fitted = true;
      break;
    }
  }
  return fit;
}

LinearFit solve_weights(const Eigen::MatrixXd& S, const Eigen::VectorXd& y, const SolverKind& kind) {
  const MultiFit multi = solve_weights(S, Eigen::MatrixXd(y), kind);
  LinearFit fit;
  fit.weights = multi.W.row(0).transpose();
  if (multi.intercepts) fit.intercept = (*multi.intercepts)(0);
  fit.intercept_fitted = multi.intercepts_fitted;
  return fit;
}

double predict_linear(std::span<const double> row, std::span<const double> weights,
                      std::optional<double> intercept) {
  if (row.size() != weights.size()) {
    throw DimensionMismatch("row has " + std::to_string(row.size()) + " features, weights have " +
                            std::to_string(weights.size()));
  }
  double acc = 0.0;
  for (std::size_t r = 0; r < row.size(); ++r) acc += weights[r] * row[r];
  return intercept ? acc + *intercept : acc;
}

}  // namespace polygrid::solvers
