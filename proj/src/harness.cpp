#include "polygrid/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "polygrid/error.hpp"
#include "polygrid/metrics.hpp"
#include "polygrid/model.hpp"

namespace polygrid::eval {

double mean(const std::vector<double>& sample) {
  if (sample.empty()) return 0.0;
  return std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
}

Interval t_interval(const std::vector<double>& sample, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  Interval ci;
  ci.alpha = alpha;
  const double mu = mean(sample);
  if (sample.size() < 2) {
    ci.lo = ci.hi = mu;
    ci.degenerate = true;
    return ci;
  }
  double ss = 0.0;
  for (double v : sample) ss += (v - mu) * (v - mu);
  const double n = static_cast<double>(sample.size());
  const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  const boost::math::students_t dist(n - 1.0);
  const double half = boost::math::quantile(dist, 1.0 - alpha / 2.0) * se;
  ci.lo = mu - half;
  ci.hi = mu + half;
  return ci;
}

Split make_split(const data::Dataset& ds, double train_ratio, std::uint64_t seed, int repetition) {
  const int m = ds.rows();
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw InvalidInput("train ratio must lie in (0, 1)");
  const int n_train = static_cast<int>(std::lround(m * train_ratio));
  if (n_train < 1 || n_train >= m) throw InvalidInput("split leaves an empty train or test set");

  std::vector<bool> present(ds.labels(), false);
  for (int j = 0; j < ds.labels(); ++j) present[j] = ds.Y.col(j).sum() > 0.0;

  Split split;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(repetition), static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    split.train.assign(order.begin(), order.begin() + n_train);
    split.test.assign(order.begin() + n_train, order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());

    bool ok = true;
    for (int j = 0; j < ds.labels() && ok; ++j) {
      if (!present[j]) continue;
      ok = std::any_of(split.train.begin(), split.train.end(), [&](int i) { return ds.Y(i, j) > 0.5; });
    }
    if (ok) {
      split.redraws = attempt;
      return split;
    }
  }
  throw InvalidInput("could not draw a split with every label present in training");
}

ModelSpec ModelSpec::polygrid(const PolygridConfig& cfg, std::string id) {
  ModelSpec s;
  s.id = std::move(id);
  s.is_polygrid = true;
  s.config = cfg;
  return s;
}

ModelSpec ModelSpec::baseline(baselines::Variant v, int target, double ridge_lambda) {
  ModelSpec s;
  s.id = baselines::to_string(v);
  s.is_polygrid = false;
  s.variant = v;
  s.target = target;
  s.ridge_lambda = ridge_lambda;
  return s;
}

std::vector<std::string> metrics_for(Task task) {
  return task == Task::LabelRanking ? ranking_metrics() : multilabel_metrics();
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& M, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = M.row(rows[i]);
  return out;
}

RankMatrix take_rows(const RankMatrix& M, const std::vector<int>& rows) {
  RankMatrix out(static_cast<Eigen::Index>(rows.size()), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = M.row(rows[i]);
  return out;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t rep) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (rep + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct RepOutcome {
  std::vector<double> values;
  double size = 0.0;
  int redraws = 0;
};

RepOutcome run_repetition(const data::Dataset& ds, const ModelSpec& spec, const ExperimentOptions& opt,
                          const std::vector<std::string>& metrics, int rep) {
  const Split split = make_split(ds, opt.train_ratio, opt.seed, rep);
  const bool ranking = ds.task == Task::LabelRanking;
  const Eigen::MatrixXd Xtr = take_rows(ds.X, split.train);
  const Eigen::MatrixXd Xte = take_rows(ds.X, split.test);
  const Eigen::MatrixXd Ytr = take_rows(ds.Y, split.train);

  Outcome o;
  o.Y = take_rows(ds.Y, split.test);
  if (ranking) o.truth_ranks = take_rows(ds.ranks, split.test);
  RepOutcome out;
  out.redraws = split.redraws;

  if (spec.is_polygrid) {
    PolygridConfig cfg = spec.config;
    cfg.seed = mix(opt.seed, static_cast<std::uint64_t>(rep));
    const PolygridInstance inst = ranking ? fit_labelranking(Xtr, take_rows(ds.ranks, split.train), cfg)
                                          : fit_multilabel(Xtr, Ytr, cfg, ds.task);
    const auto preds = inst.predict_batch(Xte);
    o.P.resize(Xte.rows(), inst.labels());
    o.scores.resize(Xte.rows(), inst.labels());
    if (ranking) o.predicted_ranks = RankMatrix::Constant(Xte.rows(), inst.labels(), -1);
    for (Eigen::Index i = 0; i < Xte.rows(); ++i) {
      for (int j = 0; j < inst.labels(); ++j) {
        o.P(i, j) = preds[i].labels[j];
        o.scores(i, j) = preds[i].scores(j);
      }
      if (ranking)
        for (std::size_t p = 0; p < preds[i].ranking->size(); ++p)
          o.predicted_ranks(i, static_cast<Eigen::Index>(p)) = (*preds[i].ranking)[p];
    }
    out.size = inst.size();
  } else {
    baselines::FitRequest req;
    req.variant = spec.variant;
    req.task = ds.task;
    req.target = spec.target;
    req.repetition = rep;
    req.repetitions = opt.ss;
    req.ridge_lambda = spec.ridge_lambda;
    req.seed = mix(opt.seed, static_cast<std::uint64_t>(rep));
    RankMatrix rtr;
    if (ranking) rtr = take_rows(ds.ranks, split.train);
    const auto model = baselines::fit_baseline(req, Xtr, Ytr, ranking ? &rtr : nullptr);
    auto pred = model->predict(Xte);
    o.P = std::move(pred.labels);
    o.scores = std::move(pred.scores);
    if (ranking) o.predicted_ranks = std::move(pred.ranks);
    out.size = model->size();
  }
  for (const auto& name : metrics) out.values.push_back(metric(name, o));
  return out;
}

std::vector<RunResult> collect(const data::Dataset& ds, const ModelSpec& spec, const ExperimentOptions& opt,
                               const std::vector<std::string>& metrics, const std::vector<RepOutcome>& reps) {
  std::vector<RunResult> results;
  double size = 0.0;
  int redraws = 0;
  for (const auto& r : reps) {
    size += r.size;
    redraws += r.redraws;
  }
  size /= static_cast<double>(reps.size());
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    RunResult rr;
    rr.dataset = ds.name;
    rr.model = spec.id;
    rr.config = spec.is_polygrid ? describe(spec.config) : "target=" + std::to_string(spec.target);
    rr.metric = metrics[k];
    for (const auto& r : reps) rr.sample.push_back(r.values[k]);
    rr.estimate = mean(rr.sample);
    rr.ci = t_interval(rr.sample, opt.alpha);
    rr.size = size;
    rr.redraws = redraws;
    results.push_back(std::move(rr));
  }
  return results;
}

}  // namespace

std::vector<RunResult> run_experiment(const data::Dataset& ds, const ModelSpec& spec, const ExperimentOptions& opt) {
  if (opt.ss < 1) throw InvalidInput("ss must be >= 1");
  if (ds.labels() == 0) throw InvalidInput("dataset has no labels");
  const auto metrics = opt.metrics.empty() ? metrics_for(ds.task) : opt.metrics;
  std::vector<RepOutcome> reps(opt.ss);
  std::vector<std::string> errors(opt.ss);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (int rep = 0; rep < opt.ss; ++rep) {
    try {
      reps[rep] = run_repetition(ds, spec, opt, metrics, rep);
    } catch (const std::exception& e) {
      errors[rep] = e.what();
    }
  }
  for (int rep = 0; rep < opt.ss; ++rep)
    if (!errors[rep].empty()) throw InvalidInput("repetition " + std::to_string(rep) + ": " + errors[rep]);
  return collect(ds, spec, opt, metrics, reps);
}

GridOutcome grid_search(const data::Dataset& ds, const GridSpec& grid, const ExperimentOptions& opt) {
  const auto metrics = opt.metrics.empty() ? metrics_for(ds.task) : opt.metrics;
  ExperimentOptions inner = opt;
  inner.metrics = metrics;
  inner.parallel = false;

  GridOutcome out;
  out.entries.resize(grid.size());
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (std::size_t i = 0; i < grid.size(); ++i) {
    GridEntry& e = out.entries[i];
    e.index = i;
    e.config = grid.at(i);
    try {
      e.results = run_experiment(ds, ModelSpec::polygrid(e.config), inner);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
  }

  for (std::size_t k = 0; k < metrics.size(); ++k) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
      const auto& e = out.entries[i];
      if (!e.error.empty()) continue;
      if (!best) {
        best = i;
        continue;
      }
      const auto& cur = e.results[k];
      const auto& top = out.entries[*best].results[k];
      if (better(metrics[k], cur.estimate, top.estimate) || (cur.estimate == top.estimate && cur.size < top.size))
        best = i;
    }
    if (best) out.best[metrics[k]] = *best;
  }
  return out;
}

std::vector<RunResult> compare_models(const data::Dataset& ds, const GridOutcome& grid,
                                      const std::vector<baselines::Variant>& variants, const ExperimentOptions& opt) {
  const auto metrics = opt.metrics.empty() ? metrics_for(ds.task) : opt.metrics;
  std::vector<RunResult> out;
  std::map<std::pair<int, int>, std::vector<RunResult>> cache;  // (variant, target) -> per-metric results
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    const auto it = grid.best.find(metrics[k]);
    if (it == grid.best.end()) continue;
    const auto& entry = grid.entries[it->second];
    RunResult pg = entry.results[k];
    pg.model = "polygrid";
    out.push_back(pg);
    const int target = static_cast<int>(std::lround(entry.results[k].size));
    for (auto v : variants) {
      const auto key = std::make_pair(static_cast<int>(v), target);
      if (!cache.count(key)) {
        ExperimentOptions o = opt;
        o.metrics = metrics;
        cache[key] = run_experiment(ds, ModelSpec::baseline(v, target, entry.config.solver.ridge_lambda), o);
      }
      out.push_back(cache[key][k]);
    }
  }
  return out;
}

std::vector<Echelon> form_echelons(const std::vector<std::string>& models, const std::vector<double>& average_ranks,
                                   const std::vector<std::vector<int>>& counts) {
  const std::size_t n = models.size();
  if (average_ranks.size() != n || counts.size() != n) throw DimensionMismatch("echelon inputs differ in size");
  std::vector<bool> placed(n, false);
  std::vector<Echelon> out;
  for (std::size_t done = 0; done < n;) {
    std::size_t lead = n;
    for (std::size_t j = 0; j < n; ++j)
      if (!placed[j] && (lead == n || average_ranks[j] < average_ranks[lead])) lead = j;
    Echelon e;
    e.leader = models[lead];
    e.members.push_back(models[lead]);
    placed[lead] = true;
    ++done;
    for (std::size_t j = 0; j < n; ++j) {
      if (placed[j]) continue;
      if (std::abs(counts[lead][j] - counts[j][lead]) <= 1) {
        e.members.push_back(models[j]);
        placed[j] = true;
        ++done;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

Ranking dominance_and_echelons(const std::vector<RunResult>& results, const std::string& metric) {
  Ranking r;
  r.dominance.metric = metric;
  std::map<std::pair<std::string, std::string>, const RunResult*> cell;
  for (const auto& rr : results) {
    if (rr.metric != metric) continue;
    if (std::find(r.dominance.models.begin(), r.dominance.models.end(), rr.model) == r.dominance.models.end())
      r.dominance.models.push_back(rr.model);
    if (std::find(r.dominance.datasets.begin(), r.dominance.datasets.end(), rr.dataset) == r.dominance.datasets.end())
      r.dominance.datasets.push_back(rr.dataset);
    cell[{rr.model, rr.dataset}] = &rr;
  }
  const auto& models = r.dominance.models;
  const auto& datasets = r.dominance.datasets;
  const std::size_t n = models.size();
  for (const auto& m : models)
    for (const auto& d : datasets)
      if (!cell.count({m, d})) throw InvalidInput("no result for model '" + m + "' on dataset '" + d + "'");

  r.dominance.counts.assign(n, std::vector<int>(n, 0));
  r.average_ranks.assign(n, 0.0);
  for (const auto& d : datasets) {
    for (std::size_t a = 0; a < n; ++a) {
      const RunResult& ra = *cell[{models[a], d}];
      // Rank 1 is best; ties share the mean of their positions.
      double above = 0, tied = 0;
      for (std::size_t b = 0; b < n; ++b) {
        const RunResult& rb = *cell[{models[b], d}];
        if (better(metric, rb.estimate, ra.estimate)) ++above;
        else if (rb.estimate == ra.estimate) ++tied;
      }
      r.average_ranks[a] += above + (tied + 1.0) / 2.0;
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        const RunResult& rb = *cell[{models[b], d}];
        const bool disjoint = ra.ci.lo > rb.ci.hi || ra.ci.hi < rb.ci.lo;
        if (disjoint && better(metric, ra.estimate, rb.estimate)) ++r.dominance.counts[a][b];
      }
    }
  }
  for (auto& v : r.average_ranks) v /= static_cast<double>(datasets.size());
  r.echelons = form_echelons(models, r.average_ranks, r.dominance.counts);
  return r;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<RunResult>& results) {
  out << "dataset,model,config,metric,ss,estimate,ci_lo,ci_hi,alpha,degenerate,size,redraws,sample\n";
  for (const auto& r : results) {
    std::string sample;
    for (std::size_t i = 0; i < r.sample.size(); ++i) sample += (i ? ";" : "") + num(r.sample[i]);
    out << quote(r.dataset) << ',' << quote(r.model) << ',' << quote(r.config) << ',' << r.metric << ','
        << r.sample.size() << ',' << num(r.estimate) << ',' << num(r.ci.lo) << ',' << num(r.ci.hi) << ','
        << num(r.ci.alpha) << ',' << (r.ci.degenerate ? 1 : 0) << ',' << num(r.size) << ',' << r.redraws << ','
        << sample << '\n';
  }
}

std::vector<RunResult> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("results table is empty");
  std::vector<RunResult> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = data::split_csv_line(line);
    if (f.size() != 13) throw InvalidInput("results line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields");
    try {
      RunResult r;
      r.dataset = f[0];
      r.model = f[1];
      r.config = f[2];
      r.metric = f[3];
      r.estimate = std::stod(f[5]);
      r.ci.lo = std::stod(f[6]);
      r.ci.hi = std::stod(f[7]);
      r.ci.alpha = std::stod(f[8]);
      r.ci.degenerate = f[9] == "1";
      r.size = std::stod(f[10]);
      r.redraws = std::stoi(f[11]);
      std::stringstream ss(f[12]);
      for (std::string v; std::getline(ss, v, ';');) r.sample.push_back(std::stod(v));
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InvalidInput("results line " + std::to_string(lineno) + " has a malformed number");
    }
  }
  return out;
}

nlohmann::json to_json(const Ranking& r) {
  nlohmann::json echelons = nlohmann::json::array();
  for (const auto& e : r.echelons) echelons.push_back({{"leader", e.leader}, {"members", e.members}});
  return {{"metric", r.dominance.metric},
          {"models", r.dominance.models},
          {"datasets", r.dominance.datasets},
          {"dominance", r.dominance.counts},
          {"average_ranks", r.average_ranks},
          {"echelons", echelons}};
}

}  // namespace polygrid::eval
