#include "polygrid/metrics.hpp"

#include <algorithm>

#include "polygrid/error.hpp"

namespace polygrid::eval {

const std::vector<std::string>& multilabel_metrics() {
  static const std::vector<std::string> names{"accuracy", "hammingl", "f1.micro", "f1.macro", "f1.weigh", "jaccsim"};
  return names;
}

const std::vector<std::string>& ranking_metrics() {
  static const std::vector<std::string> names{"ktau", "lracc", "lrloss"};
  return names;
}

Direction direction(const std::string& metric) {
  if (metric == "hammingl" || metric == "jaccsim" || metric == "lrloss") return Direction::LowerBetter;
  const auto& ml = multilabel_metrics();
  const auto& lr = ranking_metrics();
  if (std::find(ml.begin(), ml.end(), metric) == ml.end() && std::find(lr.begin(), lr.end(), metric) == lr.end())
    throw InvalidInput("unknown metric '" + metric + "'");
  return Direction::HigherBetter;
}

bool is_ranking_metric(const std::string& metric) {
  const auto& lr = ranking_metrics();
  return std::find(lr.begin(), lr.end(), metric) != lr.end();
}

bool better(const std::string& metric, double a, double b) {
  return direction(metric) == Direction::HigherBetter ? a > b : a < b;
}

namespace {

void same_shape(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P) {
  if (Y.rows() != P.rows() || Y.cols() != P.cols())
    throw DimensionMismatch("truth is " + std::to_string(Y.rows()) + "x" + std::to_string(Y.cols()) +
                            ", prediction is " + std::to_string(P.rows()) + "x" + std::to_string(P.cols()));
  if (Y.rows() == 0) throw InvalidInput("metric needs at least one row");
}

struct Counts {
  double tp = 0, fp = 0, fn = 0;
};

Counts counts(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P, Eigen::Index j) {
  Counts c;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    const bool g = Y(i, j) > 0.5;
    const bool p = P(i, j) > 0.5;
    c.tp += g && p;
    c.fp += !g && p;
    c.fn += g && !p;
  }
  return c;
}

double f1(const Counts& c) {
  const double denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 1.0 : 2 * c.tp / denom;
}

}  // namespace

double accuracy(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P) {
  same_shape(Y, P);
  int hits = 0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i)
    hits += ((Y.row(i).array() > 0.5) == (P.row(i).array() > 0.5)).all();
  return static_cast<double>(hits) / Y.rows();
}

double hamming_loss(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P) {
  same_shape(Y, P);
  if (Y.cols() == 0) return 0.0;
  const auto wrong = ((Y.array() > 0.5) != (P.array() > 0.5)).count();
  return static_cast<double>(wrong) / static_cast<double>(Y.size());
}

double f1_micro(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P) {
  same_shape(Y, P);
  Counts total;
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    const auto c = counts(Y, P, j);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return f1(total);
}

double f1_macro(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P) {
  same_shape(Y, P);
  if (Y.cols() == 0) return 1.0;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < Y.cols(); ++j) acc += f1(counts(Y, P, j));
  return acc / Y.cols();
}

double f1_weighted(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& P) {
  same_shape(Y, P);
  double acc = 0.0, support = 0.0;
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    const auto c = counts(Y, P, j);
    const double s = c.tp + c.fn;
    acc += s * f1(c);
    support += s;
  }
  return support > 0.0 ? acc / support : f1_macro(Y, P);
}

double interval_jaccard(const std::vector<double>& negatives, const std::vector<double>& positives) {
  if (negatives.empty() || positives.empty()) return 0.0;
  const auto [nlo, nhi] = std::minmax_element(negatives.begin(), negatives.end());
  const auto [plo, phi] = std::minmax_element(positives.begin(), positives.end());
  const double lo = std::max(*nlo, *plo);
  const double hi = std::min(*nhi, *phi);
  const bool touching = lo <= hi;
  const double inter = touching ? hi - lo : 0.0;
  const double uni = (*nhi - *nlo) + (*phi - *plo) - inter;
  if (uni <= 0.0) return touching ? 1.0 : 0.0;
  return inter / uni;
}

double jaccsim(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& scores) {
  same_shape(Y, scores);
  if (Y.cols() == 0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    std::vector<double> neg, pos;
    for (Eigen::Index i = 0; i < Y.rows(); ++i) (Y(i, j) > 0.5 ? pos : neg).push_back(scores(i, j));
    acc += interval_jaccard(neg, pos);
  }
  return acc / Y.cols();
}

namespace {

std::vector<int> listed(const RankMatrix& R, Eigen::Index i) {
  std::vector<int> out;
  for (Eigen::Index p = 0; p < R.cols() && R(i, p) >= 0; ++p) out.push_back(R(i, p));
  return out;
}

void same_rank_shape(const RankMatrix& T, const RankMatrix& P) {
  if (T.rows() != P.rows() || T.cols() != P.cols()) throw DimensionMismatch("ranking matrices differ in shape");
  if (T.rows() == 0) throw InvalidInput("metric needs at least one row");
}

}  // namespace

double kendall_tau(const RankMatrix& truth, const RankMatrix& predicted) {
  same_rank_shape(truth, predicted);
  double total = 0.0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    const auto g = listed(truth, i);
    const auto p = listed(predicted, i);
    if (g.empty()) {
      total += p.empty() ? 1.0 : -1.0;
      continue;
    }
    if (g.size() == 1) {
      total += (!p.empty() && p[0] == g[0]) ? 1.0 : -1.0;
      continue;
    }
    auto pos = [&p](int label) {
      const auto it = std::find(p.begin(), p.end(), label);
      return it == p.end() ? -1 : static_cast<int>(it - p.begin());
    };
    double concordant = 0, discordant = 0;
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = a + 1; b < g.size(); ++b) {
        const int pa = pos(g[a]);
        const int pb = pos(g[b]);
        if (pa >= 0 && pb >= 0 && pa < pb)
          ++concordant;
        else
          ++discordant;
      }
    total += (concordant - discordant) / (concordant + discordant);
  }
  return total / truth.rows();
}

double lr_accuracy(const RankMatrix& truth, const RankMatrix& predicted) {
  same_rank_shape(truth, predicted);
  int hits = 0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) hits += (truth.row(i).array() == predicted.row(i).array()).all();
  return static_cast<double>(hits) / truth.rows();
}

double lr_loss(const RankMatrix& truth, const RankMatrix& predicted) {
  same_rank_shape(truth, predicted);
  if (truth.cols() == 0) return 0.0;
  return static_cast<double>((truth.array() != predicted.array()).count()) / static_cast<double>(truth.size());
}

double metric(const std::string& name, const Outcome& o) {
  if (name == "accuracy") return accuracy(o.Y, o.P);
  if (name == "hammingl") return hamming_loss(o.Y, o.P);
  if (name == "f1.micro") return f1_micro(o.Y, o.P);
  if (name == "f1.macro") return f1_macro(o.Y, o.P);
  if (name == "f1.weigh") return f1_weighted(o.Y, o.P);
  if (name == "jaccsim") return jaccsim(o.Y, o.scores);
  if (name == "ktau") return kendall_tau(o.truth_ranks, o.predicted_ranks);
  if (name == "lracc") return lr_accuracy(o.truth_ranks, o.predicted_ranks);
  if (name == "lrloss") return lr_loss(o.truth_ranks, o.predicted_ranks);
  throw InvalidInput("unknown metric '" + name + "'");
}

}  // namespace polygrid::eval
