#include "polygrid/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "polygrid/cart.hpp"
#include "polygrid/error.hpp"
#include "polygrid/features.hpp"
#include "polygrid/solvers.hpp"

namespace polygrid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void check_ranking(const RankMatrix& ranks, int n_labels) {
  for (Eigen::Index i = 0; i < ranks.rows(); ++i) {
    std::vector<bool> seen(n_labels, false);
    bool filler = false;
    for (Eigen::Index p = 0; p < ranks.cols(); ++p) {
      const int label = ranks(i, p);
      const std::string at = "ranking row " + std::to_string(i) + ", position " + std::to_string(p);
      if (label == -1) {
        filler = true;
        continue;
      }
      if (label < 0 || label >= n_labels) throw InvalidInput(at + ": label " + std::to_string(label) + " out of range");
      if (filler) throw InvalidInput(at + ": label after a -1 filler");
      if (seen[label]) throw InvalidInput(at + ": duplicate label " + std::to_string(label));
      seen[label] = true;
    }
  }
}

Eigen::MatrixXd downgrade(const RankMatrix& ranks) {
  const auto n = static_cast<int>(ranks.cols());
  check_ranking(ranks, n);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ranks.rows(), n);
  for (Eigen::Index i = 0; i < ranks.rows(); ++i)
    for (Eigen::Index p = 0; p < n; ++p)
      if (ranks(i, p) >= 0) out(i, ranks(i, p)) = 1.0;
  return out;
}

Eigen::MatrixXd logranks(const RankMatrix& ranks) {
  const auto n = static_cast<int>(ranks.cols());
  check_ranking(ranks, n);
  const double denom = std::ldexp(1.0, n) - 1.0;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ranks.rows(), n);
  for (Eigen::Index i = 0; i < ranks.rows(); ++i) {
    for (int p = 0; p < n; ++p)
      if (ranks(i, p) >= 0) out(i, ranks(i, p)) = std::ldexp(1.0, n - 1 - p) / denom;
    const double total = out.row(i).sum();
    if (total > 0.0) out.row(i) /= total;
  }
  return out;
}

std::vector<std::vector<int>> cyclic_arrangements(int d) {
  if (d < 3) throw InvalidInput("cyclic arrangements need d >= 3");
  std::vector<int> tail(d - 1);
  std::iota(tail.begin(), tail.end(), 1);
  std::vector<std::vector<int>> out;
  do {
    if (tail.front() < tail.back()) {
      std::vector<int> a{0};
      a.insert(a.end(), tail.begin(), tail.end());
      out.push_back(std::move(a));
    }
  } while (std::next_permutation(tail.begin(), tail.end()));
  return out;
}

namespace {

Eigen::MatrixXd correlations(const Eigen::MatrixXd& X) {
  const Eigen::Index d = X.cols();
  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      const double scale = std::sqrt(cov(a, a) * cov(b, b));
      rho(a, b) = scale > 0.0 ? cov(a, b) / scale : 0.0;
    }
  return rho;
}

double cycle_score(const std::vector<int>& cycle, const Eigen::MatrixXd& rho) {
  double s = 0.0;
  for (std::size_t k = 0; k < cycle.size(); ++k) s += rho(cycle[k], cycle[(k + 1) % cycle.size()]);
  return s;
}

std::vector<int> descending_by(const Eigen::VectorXd& key) {
  std::vector<int> order(key.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) > key(b); });
  return order;
}

}  // namespace

std::vector<int> order_vertices(const Eigen::MatrixXd& X, VertexOrder vorder) {
  const auto d = static_cast<int>(X.cols());
  std::vector<int> identity(d);
  std::iota(identity.begin(), identity.end(), 0);
  if (X.rows() == 0) return identity;

  switch (vorder) {
    case VertexOrder::Original:
      return identity;
    case VertexOrder::Averages:
      return descending_by(X.colwise().mean().transpose());
    case VertexOrder::Measures: {
      const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
      return descending_by(centered.colwise().squaredNorm().transpose());
    }
    case VertexOrder::Rho: {
      if (d < 3) return identity;
      const Eigen::MatrixXd rho = correlations(X);
      if (d <= 6) {
        std::vector<int> best;
        double best_score = -kInf;
        for (const auto& cycle : cyclic_arrangements(d)) {
          const double s = cycle_score(cycle, rho);
          if (s > best_score) {
            best_score = s;
            best = cycle;
          }
        }
        return best;
      }
      std::vector<int> cycle{0};
      std::vector<bool> used(d, false);
      used[0] = true;
      while (static_cast<int>(cycle.size()) < d) {
        int next = -1;
        for (int c = 0; c < d; ++c)
          if (!used[c] && (next < 0 || rho(cycle.back(), c) > rho(cycle.back(), next))) next = c;
        used[next] = true;
        cycle.push_back(next);
      }
      return cycle;
    }
  }
  return identity;
}

std::vector<double> tree_radii(const Eigen::MatrixXd& X, const Eigen::VectorXd& target, int n_a) {
  if (n_a <= 1) return {};
  cart::TreeParams params;
  params.max_depth = static_cast<int>(std::ceil(std::log2(static_cast<double>(n_a))));
  const auto tree = cart::fit_tree(X, Eigen::MatrixXd(target), params);

  std::vector<double> kept;
  for (const auto& split : tree.splits()) {
    if (static_cast<int>(kept.size()) == n_a - 1) break;
    const double t = std::round(split.threshold * 100.0) / 100.0;
    if (t < 0.02 || t > 0.98) continue;
    const bool crowded = std::any_of(kept.begin(), kept.end(), [t](double k) { return std::abs(k - t) < 0.02 - 1e-12; });
    if (!crowded) kept.push_back(t);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<int> decide(std::span<const double> yhat, const Eigen::VectorXd& thresholds, Task task) {
  std::vector<int> labels(yhat.size(), 0);
  bool any = false;
  for (std::size_t j = 0; j < yhat.size(); ++j) {
    labels[j] = yhat[j] >= thresholds(static_cast<Eigen::Index>(j)) ? 1 : 0;
    any = any || labels[j];
  }
  if (task == Task::Multiclass && !any && !yhat.empty()) {
    const auto best = std::max_element(yhat.begin(), yhat.end()) - yhat.begin();
    labels[best] = 1;
  }
  return labels;
}

std::vector<int> rank_present(std::span<const int> labels, std::span<const double> membership) {
  std::vector<int> present;
  for (std::size_t j = 0; j < labels.size(); ++j)
    if (labels[j]) present.push_back(static_cast<int>(j));
  std::stable_sort(present.begin(), present.end(),
                   [&](int a, int b) { return membership[a] > membership[b]; });
  return present;
}

namespace {

// Index in the middle of the first run of candidates reaching the best score.
template <class Score>
std::size_t pick_candidate(std::size_t count, Score score) {
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) values[k] = score(k);
  const double best = *std::max_element(values.begin(), values.end());
  std::size_t lo = 0;
  while (values[lo] != best) ++lo;
  std::size_t hi = lo;
  while (hi + 1 < count && values[hi + 1] == best) ++hi;
  return lo + (hi - lo) / 2;
}

double f1_at(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y, double t) {
  int tp = 0, fp = 0, fn = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const bool p = yhat(i) >= t;
    const bool g = y(i) > 0.5;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  const int denom = 2 * tp + fp + fn;
  return denom == 0 ? 1.0 : 2.0 * tp / denom;
}

}  // namespace

ThresholdChoice select_thresholds(const Eigen::MatrixXd& Yhat, const Eigen::MatrixXd& Y,
                                  CutoffScheme scheme, int granularity, Task task) {
  if (Yhat.rows() != Y.rows() || Yhat.cols() != Y.cols()) throw DimensionMismatch("Yhat and Y differ in shape");
  if (granularity < 2) throw InvalidInput("threshold_granularity must be >= 2");
  const Eigen::Index m = Y.rows();
  const Eigen::Index n = Y.cols();

  ThresholdChoice out;
  out.thresholds = Eigen::VectorXd::Zero(n);
  std::vector<bool> live(n, true);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double positives = (Y.col(j).array() > 0.5).count();
    if (positives == 0) out.thresholds(j) = kInf;
    if (positives == m) out.thresholds(j) = -kInf;
    if (positives == 0 || positives == m) {
      live[j] = false;
      out.degenerate_labels.push_back(static_cast<int>(j));
    }
  }
  if (m == 0) return out;

  const double lo = Yhat.minCoeff();
  const double hi = Yhat.maxCoeff();
  std::vector<double> candidates(granularity);
  for (int k = 0; k < granularity; ++k) candidates[k] = lo + (hi - lo) * k / (granularity - 1);
  candidates.back() = hi;

  if (scheme == CutoffScheme::Multiple) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!live[j]) continue;
      const Eigen::VectorXd yh = Yhat.col(j);
      const Eigen::VectorXd y = Y.col(j);
      out.thresholds(j) = candidates[pick_candidate(candidates.size(), [&](std::size_t k) { return f1_at(yh, y, candidates[k]); })];
    }
    return out;
  }

  Eigen::VectorXd trial = out.thresholds;
  std::vector<double> row(n);
  auto subset_accuracy = [&](std::size_t k) {
    for (Eigen::Index j = 0; j < n; ++j)
      if (live[j]) trial(j) = candidates[k];
    int hits = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) row[j] = Yhat(i, j);
      const auto labels = decide(row, trial, task);
      bool match = true;
      for (Eigen::Index j = 0; j < n && match; ++j) match = labels[j] == (Y(i, j) > 0.5 ? 1 : 0);
      hits += match;
    }
    return static_cast<double>(hits);
  };
  const double shared = candidates[pick_candidate(candidates.size(), subset_accuracy)];
  for (Eigen::Index j = 0; j < n; ++j)
    if (live[j]) out.thresholds(j) = shared;
  return out;
}

namespace {

Eigen::MatrixXd reorder_columns(const Eigen::MatrixXd& X, const std::vector<int>& order) {
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (std::size_t k = 0; k < order.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(order[k]);
  return out;
}

// Score of one row, accumulated term by term so the sum matches the contributions.
double score_row(const Eigen::Ref<const Eigen::RowVectorXd>& f, const Eigen::Ref<const Eigen::RowVectorXd>& w,
                 double intercept) {
  double acc = 0.0;
  for (Eigen::Index r = 0; r < f.size(); ++r) acc += w(r) * f(r);
  return acc + intercept;
}

Eigen::MatrixXd score_matrix(const Eigen::MatrixXd& F, const Eigen::MatrixXd& W,
                             const std::optional<Eigen::VectorXd>& intercepts) {
  Eigen::MatrixXd out(F.rows(), W.rows());
  for (Eigen::Index i = 0; i < F.rows(); ++i)
    for (Eigen::Index j = 0; j < W.rows(); ++j)
      out(i, j) = score_row(F.row(i), W.row(j), intercepts ? (*intercepts)(j) : 0.0);
  return out;
}

PolygridInstance fit_core(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const PolygridConfig& cfg,
                          Task task, Eigen::MatrixXd* features_out) {
  if (X.rows() != Y.rows())
    throw DimensionMismatch("score rows (" + std::to_string(X.rows()) + ") != label rows (" + std::to_string(Y.rows()) + ")");
  if (X.rows() == 0) throw InvalidInput("cannot fit on zero rows");
  if (Y.cols() == 0) throw InvalidInput("need at least one label");
  geom::check_unit_scores(X);
  if (((Y.array() != 0.0) && (Y.array() != 1.0)).any()) throw InvalidInput("label matrix must be 0/1");

  PolygridInstance inst;
  inst.config = cfg;
  inst.task = task;
  inst.domains = static_cast<int>(X.cols());
  inst.vertex_order = order_vertices(X, cfg.vorder);
  const Eigen::MatrixXd Xo = reorder_columns(X, inst.vertex_order);

  geom::PartitionSpec spec;
  spec.domains = inst.domains;
  spec.n_s = cfg.ns_per_domain * inst.domains;
  spec.n_a = cfg.n_a;
  spec.annulus = cfg.annulus;
  spec.sector = cfg.sector;
  spec.arc_resolution = cfg.arc_resolution;
  if (cfg.annulus == geom::AnnulusType::Tree) {
    spec.tree_radii = tree_radii(Xo, Y.col(0), cfg.n_a);
    spec.n_a = static_cast<int>(spec.tree_radii.size()) + 1;
  }
  inst.partition = geom::partition_ud(spec);

  const auto mapped = geom::uh_to_ud(Xo);
  const Eigen::MatrixXd S = feature_matrix(mapped.polygons, inst.partition);
  Eigen::MatrixXd F = solvers::prepare_features(S, cfg.solver);
  const auto fit = solvers::solve_weights(F, Y, cfg.solver);
  inst.W = fit.W;
  inst.intercepts = fit.intercepts;
  inst.intercepts_fitted = fit.intercepts_fitted;

  const Eigen::MatrixXd Yhat = score_matrix(F, inst.W, inst.intercepts);
  auto choice = select_thresholds(Yhat, Y, cfg.cutoff, cfg.threshold_granularity, task);
  inst.thresholds = std::move(choice.thresholds);
  inst.degenerate_labels = std::move(choice.degenerate_labels);

  inst.prototypes = Eigen::MatrixXd::Zero(Y.cols(), X.cols());
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    double count = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      if (Y(i, j) > 0.5) {
        inst.prototypes.row(j) += X.row(i);
        count += 1.0;
      }
    if (count > 0.0) inst.prototypes.row(j) /= count;
  }

  for (Eigen::Index k = 0; k < X.cols(); ++k) inst.domain_names.push_back("domain" + std::to_string(k));
  for (Eigen::Index j = 0; j < Y.cols(); ++j) inst.label_names.push_back("label" + std::to_string(j));
  if (features_out) *features_out = std::move(F);
  return inst;
}

}  // namespace

PolygridInstance fit_multilabel(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const PolygridConfig& cfg,
                                Task task) {
  if (task == Task::LabelRanking) throw InvalidInput("use fit_labelranking for ranking data");
  return fit_core(X, Y, cfg, task, nullptr);
}

PolygridInstance fit_labelranking(const Eigen::MatrixXd& X, const RankMatrix& ranks, const PolygridConfig& cfg) {
  const Eigen::MatrixXd presence = downgrade(ranks);
  const Eigen::MatrixXd membership = logranks(ranks);
  Eigen::MatrixXd F;
  PolygridInstance inst = fit_core(X, presence, cfg, Task::LabelRanking, &F);
  const auto fit = solvers::solve_weights(F, membership, cfg.solver);
  inst.membership_W = fit.W;
  inst.membership_intercepts = fit.intercepts;
  inst.membership_intercepts_fitted = fit.intercepts_fitted;
  return inst;
}

int PolygridInstance::size() const {
  const int n = labels();
  int total = n * cells() + (intercepts_fitted ? n : 0);
  if (membership_W) total += n * cells() + (membership_intercepts_fitted ? n : 0);
  return total;
}

geom::Polygon PolygridInstance::polygon(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != domains)
    throw DimensionMismatch("expected " + std::to_string(domains) + " scores, got " + std::to_string(x.size()));
  std::vector<double> ordered(domains);
  for (int k = 0; k < domains; ++k) {
    const double v = x[vertex_order[k]];
    if (!(v > 0.0 && v <= 1.0))
      throw InvalidInput("score " + std::to_string(vertex_order[k]) + " = " + std::to_string(v) +
                         " is outside (0, 1]; scores must be strictly positive and unit-scaled");
    ordered[k] = v;
  }
  return geom::assessment_polygon(ordered, roots());
}

Prediction PolygridInstance::predict(std::span<const double> x) const {
  const geom::Polygon p = polygon(x);
  Prediction out;
  out.area = geom::polygon_area(p);
  std::vector<double> cov(cells());
  geom::cell_coverage_into(p, partition, cov);
  out.coverage = Eigen::Map<const Eigen::VectorXd>(cov.data(), cells());
  out.features = solvers::prepare_row(cov, config.solver);

  const int n = labels();
  out.contributions.resize(n, cells());
  out.scores.resize(n);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int r = 0; r < cells(); ++r) {
      out.contributions(j, r) = W(j, r) * out.features(r);
      acc += out.contributions(j, r);
    }
    out.scores(j) = acc + (intercepts ? (*intercepts)(j) : 0.0);
  }
  out.labels = decide(std::span<const double>(out.scores.data(), n), thresholds, task);

  if (membership_W) {
    Eigen::VectorXd u(n);
    for (int j = 0; j < n; ++j)
      u(j) = score_row(out.features.transpose(), membership_W->row(j),
                       membership_intercepts ? (*membership_intercepts)(j) : 0.0);
    out.ranking = rank_present(out.labels, std::span<const double>(u.data(), n));
    out.membership = std::move(u);
  }
  return out;
}

std::vector<Prediction> PolygridInstance::predict_batch(const Eigen::MatrixXd& X) const {
  std::vector<Prediction> out;
  out.reserve(X.rows());
  std::vector<double> row(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) row[k] = X(i, k);
    out.push_back(predict(row));
  }
  return out;
}

Eigen::MatrixXd PolygridInstance::decide_batch(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out(X.rows(), labels());
  const auto preds = predict_batch(X);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (int j = 0; j < labels(); ++j) out(i, j) = preds[i].labels[j];
  return out;
}

RankMatrix PolygridInstance::rank_batch(const Eigen::MatrixXd& X) const {
  if (!membership_W) throw InvalidInput("instance was not fitted for label ranking");
  RankMatrix out = RankMatrix::Constant(X.rows(), labels(), -1);
  const auto preds = predict_batch(X);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto& r = *preds[i].ranking;
    for (std::size_t p = 0; p < r.size(); ++p) out(i, static_cast<Eigen::Index>(p)) = r[p];
  }
  return out;
}

}  // namespace polygrid
