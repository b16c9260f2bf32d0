#include "polygrid/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include "polygrid/cart.hpp"
#include "polygrid/error.hpp"
#include "polygrid/solvers.hpp"

namespace polygrid::baselines {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Linear: return "linear";
    case Variant::Ridge: return "ridge";
    case Variant::Random: return "random";
    case Variant::DT: return "dt";
    case Variant::BRDT: return "brdt";
    case Variant::RF: return "rf";
    case Variant::BRRF: return "brrf";
    case Variant::MLP: return "mlp";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  for (Variant v : all_variants())
    if (to_string(v) == s) return v;
  throw InvalidInput("unknown baseline '" + s + "'");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v{Variant::Linear, Variant::Ridge, Variant::Random, Variant::DT,
                                      Variant::BRDT,   Variant::RF,    Variant::BRRF,   Variant::MLP};
  return v;
}

int mlp_size(int hidden, int d, int n) { return hidden * (d + 1) + n * (hidden + 1); }

namespace {

// ceil(a / b) on even steps, floor(a / b) on odd steps, for b > 0.
long long alternate_round(long long a, long long b, int step) {
  const long long fl = a >= 0 ? a / b : -((-a + b - 1) / b);
  const bool exact = fl * b == a;
  return (step % 2 == 0 && !exact) ? fl + 1 : fl;
}

}  // namespace

std::vector<int> mlp_size_schedule(int target, int d, int n, int repetitions) {
  if (d < 1 || n < 1 || repetitions < 0) throw InvalidInput("mlp schedule needs d, n >= 1");
  if (target <= n) std::cerr << "warning: MLP weight target " << target << " is not above n=" << n << "; using h=1\n";
  std::vector<int> out;
  long long realized = 0;
  for (int k = 0; k < repetitions; ++k) {
    const long long needed = static_cast<long long>(target) * (k + 1) - realized;
    const long long h = std::max<long long>(1, alternate_round(needed - n, d + n + 1, k));
    out.push_back(static_cast<int>(h));
    realized += mlp_size(static_cast<int>(h), d, n);
  }
  return out;
}

std::vector<int> tree_split_schedule(int target, int trees, int repetitions) {
  if (trees < 1) throw InvalidInput("tree schedule needs at least one tree");
  if (target < 4 * trees)
    std::cerr << "warning: weight target " << target << " cannot hold " << trees << " trees of depth 1; using depth 1\n";
  std::vector<int> out;
  long long realized = 0;
  for (int k = 0; k < repetitions; ++k) {
    const long long needed = static_cast<long long>(target) * (k + 1) - realized;
    const long long s = std::max<long long>(trees, alternate_round(needed - trees, 3, k));
    out.push_back(static_cast<int>(s));
    realized += 3 * s + trees;
  }
  return out;
}

namespace {

// Maps X to a block of continuous outputs.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const = 0;
  virtual int size() const = 0;
};

class LinearRegressor : public Regressor {
 public:
  LinearRegressor(const Eigen::MatrixXd& X, const Eigen::MatrixXd& T, bool ridge, double lambda) {
    solvers::SolverKind kind{ridge ? solvers::SolverVariant::Ridge : solvers::SolverVariant::Lstsq, lambda};
    fit_ = solvers::solve_weights(X, T, kind);
  }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const override {
    Eigen::MatrixXd out = X * fit_.W.transpose();
    if (fit_.intercepts) out.rowwise() += fit_.intercepts->transpose();
    return out;
  }
  int size() const override {
    return static_cast<int>(fit_.W.size()) + (fit_.intercepts_fitted ? static_cast<int>(fit_.W.rows()) : 0);
  }

 private:
  solvers::MultiFit fit_;
};

// Groups of trees; each group averages its trees and writes one block of columns.
class TreeRegressor : public Regressor {
 public:
  struct Group {
    std::vector<int> columns;
    std::vector<cart::RegressionTree> trees;
  };

  TreeRegressor(int outputs, std::vector<Group> groups) : outputs_(outputs), groups_(std::move(groups)) {}

  Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const override {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), outputs_);
    std::vector<double> row(X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index k = 0; k < X.cols(); ++k) row[k] = X(i, k);
      for (const auto& g : groups_) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.columns.size()));
        for (const auto& t : g.trees) acc += t.predict(row);
        acc /= static_cast<double>(g.trees.size());
        for (std::size_t c = 0; c < g.columns.size(); ++c) out(i, g.columns[c]) = acc(static_cast<Eigen::Index>(c));
      }
    }
    return out;
  }

  int size() const override {
    int total = 0;
    for (const auto& g : groups_)
      for (const auto& t : g.trees) total += t.size();
    return total;
  }

 private:
  int outputs_;
  std::vector<Group> groups_;
};

class MlpRegressor : public Regressor {
 public:
  MlpRegressor(const Eigen::MatrixXd& X, const Eigen::MatrixXd& T, int hidden, int epochs, double lr,
               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> init(-0.5, 0.5);
    auto fill = [&](Eigen::MatrixXd& M) {
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index k = 0; k < M.cols(); ++k) M(i, k) = init(rng);
    };
    W1_.resize(hidden, X.cols());
    b1_.resize(hidden, 1);
    W2_.resize(T.cols(), hidden);
    b2_.resize(T.cols(), 1);
    fill(W1_);
    fill(b1_);
    fill(W2_);
    fill(b2_);

    // Gradient of the summed squared error over all rows.
    for (int e = 0; e < epochs; ++e) {
      const Eigen::MatrixXd H = hidden_layer(X);
      const Eigen::MatrixXd O = output_layer(H);
      const Eigen::MatrixXd dO = ((O - T).array() * O.array() * (1.0 - O.array())).matrix();
      const Eigen::MatrixXd dH = ((dO * W2_).array() * H.array() * (1.0 - H.array())).matrix();
      W2_ -= lr * dO.transpose() * H;
      b2_ -= lr * dO.colwise().sum().transpose();
      W1_ -= lr * dH.transpose() * X;
      b1_ -= lr * dH.colwise().sum().transpose();
    }
  }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& X) const override { return output_layer(hidden_layer(X)); }
  int size() const override { return static_cast<int>(W1_.size() + b1_.size() + W2_.size() + b2_.size()); }

 private:
  static Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& Z) { return (1.0 / (1.0 + (-Z.array()).exp())).matrix(); }
  Eigen::MatrixXd hidden_layer(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd Z = X * W1_.transpose();
    Z.rowwise() += b1_.col(0).transpose();
    return sigmoid(Z);
  }
  Eigen::MatrixXd output_layer(const Eigen::MatrixXd& H) const {
    Eigen::MatrixXd Z = H * W2_.transpose();
    Z.rowwise() += b2_.col(0).transpose();
    return sigmoid(Z);
  }

  Eigen::MatrixXd W1_, b1_, W2_, b2_;
};

std::vector<int> spread(int total, int parts) {
  std::vector<int> out(parts, total / parts);
  for (int p = 0; p < total % parts; ++p) ++out[p];
  return out;
}

std::unique_ptr<Regressor> fit_trees(Variant v, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T, int target,
                                     int repetition, int repetitions, std::uint64_t seed) {
  const auto q = static_cast<int>(T.cols());
  const auto d = static_cast<int>(X.cols());
  std::mt19937_64 rng(seed);

  std::vector<std::vector<int>> group_cols;
  int trees_per_group = 1;
  bool bagged = false;
  std::vector<int> every(q);
  for (int c = 0; c < q; ++c) every[c] = c;
  switch (v) {
    case Variant::DT:
      group_cols = {every};
      break;
    case Variant::BRDT:
      for (int c = 0; c < q; ++c) group_cols.push_back({c});
      break;
    case Variant::RF:
      group_cols = {every};
      trees_per_group = std::clamp(target / 4, 1, q);
      bagged = true;
      break;
    case Variant::BRRF:
      for (int c = 0; c < q; ++c) group_cols.push_back({c});
      trees_per_group = std::clamp(target / q / 4, 1, 10);
      bagged = true;
      break;
    default:
      throw InvalidInput("not a tree baseline");
  }
  const int trees = static_cast<int>(group_cols.size()) * trees_per_group;
  const auto schedule = tree_split_schedule(target, trees, repetitions);
  const auto splits = spread(schedule.at(repetition), trees);

  cart::TreeParams params;
  if (bagged) params.max_features = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  std::uniform_int_distribution<int> draw(0, static_cast<int>(X.rows()) - 1);
  std::vector<TreeRegressor::Group> groups;
  int t = 0;
  for (const auto& cols : group_cols) {
    TreeRegressor::Group g;
    g.columns = cols;
    Eigen::MatrixXd sub(T.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = T.col(cols[c]);
    for (int k = 0; k < trees_per_group; ++k, ++t) {
      params.max_splits = splits[t];
      std::vector<int> rows;
      if (bagged) {
        rows.resize(X.rows());
        for (auto& r : rows) r = draw(rng);
      }
      g.trees.push_back(cart::fit_tree(X, sub, params, rows, &rng));
    }
    groups.push_back(std::move(g));
  }
  return std::make_unique<TreeRegressor>(q, std::move(groups));
}

std::unique_ptr<Regressor> fit_regressor(const FitRequest& req, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T,
                                         int target, std::uint64_t seed) {
  switch (req.variant) {
    case Variant::Linear: return std::make_unique<LinearRegressor>(X, T, false, req.ridge_lambda);
    case Variant::Ridge: return std::make_unique<LinearRegressor>(X, T, true, req.ridge_lambda);
    case Variant::MLP: {
      const auto h = mlp_size_schedule(target, static_cast<int>(X.cols()), static_cast<int>(T.cols()), req.repetitions);
      return std::make_unique<MlpRegressor>(X, T, h.at(req.repetition), req.mlp_epochs, req.mlp_learning_rate, seed);
    }
    default: return fit_trees(req.variant, X, T, target, req.repetition, req.repetitions, seed);
  }
}

class RegressionModel : public Model {
 public:
  RegressionModel(Task task, std::unique_ptr<Regressor> presence, Eigen::VectorXd thresholds,
                  std::unique_ptr<Regressor> membership)
      : task_(task), presence_(std::move(presence)), thresholds_(std::move(thresholds)), membership_(std::move(membership)) {}

  Output predict(const Eigen::MatrixXd& X) const override {
    Output out;
    out.scores = presence_->predict(X);
    const auto n = out.scores.cols();
    out.labels.resize(X.rows(), n);
    std::vector<double> row(n);
    const Eigen::MatrixXd U = membership_ ? membership_->predict(X) : Eigen::MatrixXd();
    if (membership_) out.ranks = RankMatrix::Constant(X.rows(), n, -1);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < n; ++j) row[j] = out.scores(i, j);
      const auto labels = decide(row, thresholds_, task_);
      for (Eigen::Index j = 0; j < n; ++j) out.labels(i, j) = labels[j];
      if (membership_) {
        std::vector<double> u(n);
        for (Eigen::Index j = 0; j < n; ++j) u[j] = U(i, j);
        const auto r = rank_present(labels, u);
        for (std::size_t p = 0; p < r.size(); ++p) out.ranks(i, static_cast<Eigen::Index>(p)) = r[p];
      }
    }
    return out;
  }

  int size() const override { return presence_->size() + (membership_ ? membership_->size() : 0); }

 private:
  Task task_;
  std::unique_ptr<Regressor> presence_;
  Eigen::VectorXd thresholds_;
  std::unique_ptr<Regressor> membership_;
};

class RandomModel : public Model {
 public:
  RandomModel(Task task, Eigen::VectorXd prevalence, Eigen::VectorXd weight, std::uint64_t seed)
      : task_(task), prevalence_(std::move(prevalence)), weight_(std::move(weight)), seed_(seed) {}

  Output predict(const Eigen::MatrixXd& X) const override {
    std::mt19937_64 rng(seed_ ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto n = prevalence_.size();
    Output out;
    out.scores.resize(X.rows(), n);
    out.labels = Eigen::MatrixXd::Zero(X.rows(), n);
    if (task_ == Task::LabelRanking) out.ranks = RankMatrix::Constant(X.rows(), n, -1);
    const double mass = prevalence_.sum();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (task_ == Task::Multiclass) {
        double u = unit(rng) * mass;
        Eigen::Index pick = n - 1;
        for (Eigen::Index j = 0; j < n; ++j) {
          if (u < prevalence_(j)) {
            pick = j;
            break;
          }
          u -= prevalence_(j);
        }
        out.labels(i, pick) = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) out.scores(i, j) = j == pick ? 1.0 : 0.0;
        continue;
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        const double u = unit(rng);
        out.scores(i, j) = 1.0 - u;
        out.labels(i, j) = u < prevalence_(j) ? 1.0 : 0.0;
      }
      if (task_ == Task::LabelRanking) {
        // Weighted order without replacement: sort by u^(1/w) descending.
        std::vector<std::pair<double, int>> keys;
        for (Eigen::Index j = 0; j < n; ++j)
          if (out.labels(i, j) > 0.5) keys.emplace_back(std::pow(unit(rng), 1.0 / std::max(weight_(j), 1e-9)), static_cast<int>(j));
        std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t p = 0; p < keys.size(); ++p) out.ranks(i, static_cast<Eigen::Index>(p)) = keys[p].second;
      }
    }
    return out;
  }

  int size() const override { return static_cast<int>(prevalence_.size()); }

 private:
  Task task_;
  Eigen::VectorXd prevalence_;
  Eigen::VectorXd weight_;
  std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<Model> fit_baseline(const FitRequest& req, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const RankMatrix* ranks) {
  if (req.repetition < 0 || req.repetition >= std::max(1, req.repetitions))
    throw InvalidInput("repetition index outside the schedule");
  const bool ranking = req.task == Task::LabelRanking;
  if (ranking && !ranks) throw InvalidInput("label ranking needs the ranking matrix");
  const Eigen::MatrixXd presence = ranking ? downgrade(*ranks) : Y;
  if (X.rows() != presence.rows()) throw DimensionMismatch("scores and labels differ in rows");
  if (X.rows() == 0 || presence.cols() == 0) throw InvalidInput("baseline needs rows and labels");

  if (req.variant == Variant::Random) {
    Eigen::VectorXd prevalence = presence.colwise().mean().transpose();
    Eigen::VectorXd weight = ranking ? Eigen::VectorXd(logranks(*ranks).colwise().mean().transpose()) : prevalence;
    return std::make_unique<RandomModel>(req.task, std::move(prevalence), std::move(weight), req.seed);
  }

  FitRequest plan = req;
  plan.repetitions = std::max(1, req.repetitions);
  const int presence_target = ranking ? req.target / 2 : req.target;
  auto presence_model = fit_regressor(plan, X, presence, presence_target, req.seed);

  Eigen::VectorXd thresholds;
  if (req.variant == Variant::Linear || req.variant == Variant::Ridge) {
    thresholds = select_thresholds(presence_model->predict(X), presence, CutoffScheme::Single, 101, req.task).thresholds;
  } else {
    thresholds = Eigen::VectorXd::Constant(presence.cols(), 0.5);
  }

  std::unique_ptr<Regressor> membership;
  if (ranking) membership = fit_regressor(plan, X, logranks(*ranks), req.target - presence_target, req.seed + 1);
  return std::make_unique<RegressionModel>(req.task, std::move(presence_model), std::move(thresholds),
                                           std::move(membership));
}

}  // namespace polygrid::baselines
