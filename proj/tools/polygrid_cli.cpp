#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polygrid/baselines.hpp"
#include "polygrid/config.hpp"
#include "polygrid/datasets.hpp"
#include "polygrid/diagram.hpp"
#include "polygrid/error.hpp"
#include "polygrid/harness.hpp"
#include "polygrid/serialize.hpp"
#include "polygrid/service.hpp"

using nlohmann::json;
using namespace polygrid;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& field : data::split_csv_line(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw InvalidInput("not a number: '" + field + "'");
    }
  }
  return out;
}

/// Plain numeric rows; a first line that does not parse is treated as a header.
std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  for (int ln = 1; std::getline(in, line); ++ln) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      rows.push_back(parse_numbers(line));
    } catch (const InvalidInput& e) {
      if (ln == 1) continue;
      throw InvalidInput(path + ":" + std::to_string(ln) + ": " + e.what());
    }
  }
  return rows;
}

/// Settings from --config; flags given on the command line win.
struct Settings {
  json doc = json::object();
  json section(const char* key) const { return doc.contains(key) ? doc[key] : json::object(); }
};

struct ConfigFlags {
  int nspd = 1, na = 1, granularity = 101;
  std::string vorder, annulus, sector, solver, cutoff;
  double lambda = 1.0;
  CLI::Option *o_nspd{}, *o_na{}, *o_gran{}, *o_vorder{}, *o_annulus{}, *o_sector{}, *o_solver{}, *o_cutoff{},
      *o_lambda{};

  void attach(CLI::App* app) {
    o_nspd = app->add_option("--nspd", nspd, "sectors per domain");
    o_na = app->add_option("--na", na, "annulus count");
    o_vorder = app->add_option("--vorder", vorder, "original | rho | averages | measures");
    o_annulus = app->add_option("--annulus", annulus, "s-invariant | r-invariant | tree");
    o_sector = app->add_option("--sector", sector, "miss | cover");
    o_solver = app->add_option("--solver", solver, "lstsq | lstsqsym | lstsquni | ridge");
    o_lambda = app->add_option("--lambda", lambda, "ridge penalty");
    o_cutoff = app->add_option("--cutoff", cutoff, "single | multiple");
    o_gran = app->add_option("--granularity", granularity, "threshold candidates");
  }

  PolygridConfig apply(PolygridConfig c) const {
    if (o_nspd->count()) c.ns_per_domain = nspd;
    if (o_na->count()) c.n_a = na;
    if (o_vorder->count()) c.vorder = parse_vertex_order(vorder);
    if (o_annulus->count()) c.annulus = geom::parse_annulus(annulus);
    if (o_sector->count()) c.sector = geom::parse_sector(sector);
    if (o_solver->count()) c.solver.variant = solvers::parse_solver(solver);
    if (o_lambda->count()) c.solver.ridge_lambda = lambda;
    if (o_cutoff->count()) c.cutoff = parse_cutoff(cutoff);
    if (o_gran->count()) c.threshold_granularity = granularity;
    return c;
  }
};

struct HarnessFlags {
  int ss = 50;
  double ratio = 0.8, alpha = 0.05;
  std::vector<std::string> metrics;
  CLI::Option *o_ss{}, *o_ratio{}, *o_alpha{}, *o_metrics{};

  void attach(CLI::App* app) {
    o_ss = app->add_option("--ss", ss, "repetitions per model");
    o_ratio = app->add_option("--train-ratio", ratio, "training fraction");
    o_alpha = app->add_option("--alpha", alpha, "confidence level complement");
    o_metrics = app->add_option("--metric", metrics, "metrics to report (repeatable)");
  }

  eval::ExperimentOptions apply(const json& h, std::uint64_t seed) const {
    eval::ExperimentOptions o;
    o.ss = h.value("ss", o.ss);
    o.train_ratio = h.value("train_ratio", o.train_ratio);
    o.alpha = h.value("alpha", o.alpha);
    o.metrics = h.value("metrics", o.metrics);
    if (o_ss->count()) o.ss = ss;
    if (o_ratio->count()) o.train_ratio = ratio;
    if (o_alpha->count()) o.alpha = alpha;
    if (o_metrics->count()) o.metrics = metrics;
    o.seed = seed;
    return o;
  }
};

json prepare_request(const std::vector<std::string>& scores, const std::string& input, const std::string& scale) {
  json rows = json::array();
  for (const auto& s : scores) rows.push_back(parse_numbers(s));
  if (!input.empty())
    for (auto& r : read_rows(input)) rows.push_back(r);
  if (rows.empty()) throw InvalidInput("no assessments given; use --scores or --input");
  return {{"assessments", rows}, {"scale", scale}};
}

service::Response checked(service::Response r) {
  if (r.status != 200) throw CliError(r.body.dump());
  return r;
}

std::vector<eval::RunResult> read_results(const std::vector<std::string>& paths) {
  std::vector<eval::RunResult> all;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw InvalidInput("cannot read " + p);
    auto r = eval::read_results_csv(in);
    all.insert(all.end(), r.begin(), r.end());
  }
  return all;
}

json rank_report(const std::vector<eval::RunResult>& results, std::vector<std::string> metrics) {
  if (metrics.empty())
    for (const auto& r : results)
      if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
  json out = json::object();
  for (const auto& m : metrics) out[m] = eval::to_json(eval::dominance_and_echelons(results, m));
  return out;
}

std::string results_csv(const std::vector<eval::RunResult>& results) {
  std::ostringstream os;
  eval::write_results_csv(os, results);
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polygrid: interpretable multilabel classifier and label ranker over assessment polygons"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::string config_path;
  auto* o_seed = app.add_option("--seed", seed, "seed for every stochastic step");
  app.add_option("--config", config_path, "JSON settings document")->check(CLI::ExistingFile);

  Settings settings;
  auto load_settings = [&] {
    if (!config_path.empty()) settings.doc = read_json(config_path);
    if (!o_seed->count() && settings.doc.contains("seed")) seed = settings.doc["seed"].get<std::uint64_t>();
  };
  auto base_config = [&] {
    PolygridConfig c = config_from_json(settings.section("config"));
    c.seed = seed;
    return c;
  };

  // prep
  auto* prep = app.add_subcommand("prep", "CSV to prepared dataset document");
  std::string prep_in, prep_out, prep_task, prep_name;
  double prep_eps = 1e-6;
  prep->add_option("--input", prep_in)->required();
  prep->add_option("--output", prep_out)->required();
  prep->add_option("--task", prep_task, "multiclass | multilabel | ranking (inferred if absent)");
  prep->add_option("--name", prep_name, "dataset name (default: file name)");
  prep->add_option("--epsilon", prep_eps, "replacement for zero scores");
  prep->callback([&] {
    load_settings();
    auto ds = data::load_csv(prep_in, prep_task.empty() ? std::nullopt : std::optional<Task>(parse_task(prep_task)));
    if (prep_eps != 1e-6) data::prepare(ds, prep_eps);
    ds.name = prep_name.empty() ? std::filesystem::path(prep_in).stem().string() : prep_name;
    data::save_dataset(ds, prep_out);
  });

  // synth
  auto* synth = app.add_subcommand("synth", "synthetic congeneric dataset with generated labels");
  std::string synth_out, synth_mode, synth_name = "synthetic";
  int synth_d = 0, synth_m = 0, synth_labels = 0, synth_topk = 0;
  double synth_card = 0, synth_cutoff = 0, synth_err = -1;
  auto* o_sd = synth->add_option("--d", synth_d, "domains");
  auto* o_sm = synth->add_option("--m", synth_m, "rows");
  auto* o_smode = synth->add_option("--mode", synth_mode, "sumscore-cutoff | fuzzy-multilabel | fuzzy-ranking");
  auto* o_sl = synth->add_option("--labels", synth_labels, "label count for fuzzy modes");
  auto* o_sc = synth->add_option("--cardinality", synth_card, "target mean labels per row");
  auto* o_scut = synth->add_option("--cutoff", synth_cutoff, "sum-score cutoff");
  auto* o_stk = synth->add_option("--top-k", synth_topk, "ranking length cap");
  auto* o_se = synth->add_option("--error-variance", synth_err, "error variance for every domain");
  synth->add_option("--name", synth_name);
  synth->add_option("--output", synth_out)->required();
  synth->callback([&] {
    load_settings();
    const json sj = settings.section("synth");
    auto cs = data::congeneric_from_json(sj.contains("congeneric") ? sj["congeneric"] : json::object());
    auto as = data::assignment_from_json(sj.contains("assignment") ? sj["assignment"] : json::object());
    if (o_sd->count() && synth_d != cs.d) {
      cs.d = synth_d;
      cs.loadings.assign(synth_d, 1.0);
      cs.error_variances.assign(synth_d, 1.0);
      cs.ranges.assign(synth_d, {4.0, 20.0});
    }
    if (o_sm->count()) cs.m = synth_m;
    if (o_se->count()) cs.error_variances.assign(cs.d, synth_err);
    if (o_smode->count()) as.mode = data::parse_assign_mode(synth_mode);
    if (o_sl->count()) as.n_labels = synth_labels;
    if (o_sc->count()) as.target_cardinality = synth_card;
    if (o_scut->count()) as.cutoff = synth_cutoff;
    if (o_stk->count()) as.top_k = synth_topk;
    as.seed = seed + 1;
    auto ds = data::synth_congeneric(cs, seed);
    data::attach_assignment(ds, data::synth_assignment(ds, as), as);
    ds.name = synth_name;
    data::save_dataset(ds, synth_out);
  });

  // fit
  auto* fit = app.add_subcommand("fit", "fit an instance on a whole dataset");
  std::string fit_data, fit_out;
  ConfigFlags fit_flags;
  fit->add_option("--data", fit_data)->required();
  fit->add_option("--output", fit_out)->required();
  fit_flags.attach(fit);
  fit->callback([&] {
    load_settings();
    const auto ds = data::load_dataset(fit_data);
    save_instance(data::fit_dataset(ds, fit_flags.apply(base_config())), fit_out);
  });

  // predict / explain share their input handling
  std::string pr_inst, pr_input, pr_scale = "unit", pr_out;
  std::vector<std::string> pr_scores;
  auto* predict = app.add_subcommand("predict", "score assessments with a fitted instance");
  predict->add_option("--instance", pr_inst)->required();
  predict->add_option("--scores", pr_scores, "comma-separated scores of one assessment (repeatable)");
  predict->add_option("--input", pr_input, "CSV of assessments, one per line");
  predict->add_option("--scale", pr_scale, "unit | raw");
  predict->add_option("--output", pr_out, "prediction document (default stdout)");
  predict->callback([&] {
    load_settings();
    service::Service svc(load_instance(pr_inst));
    json req = prepare_request(pr_scores, pr_input, pr_scale);
    req["diagram"] = false;
    write_json(pr_out, checked(svc.post_predict(req.dump())).body);
  });

  auto* explain = app.add_subcommand("explain", "diagram for assessments: SVG and/or diagram document");
  std::string ex_data, ex_svg, ex_json;
  std::vector<int> ex_rows;
  explain->add_option("--instance", pr_inst)->required();
  explain->add_option("--scores", pr_scores, "comma-separated scores of one assessment (repeatable)");
  explain->add_option("--input", pr_input, "CSV of assessments, one per line");
  explain->add_option("--data", ex_data, "dataset whose unit-scaled rows are explained");
  explain->add_option("--rows", ex_rows, "row indices of --data")->delimiter(',');
  explain->add_option("--scale", pr_scale, "unit | raw");
  explain->add_option("--svg", ex_svg, "SVG output path");
  explain->add_option("--json", ex_json, "diagram document output path");
  explain->callback([&] {
    load_settings();
    if (ex_svg.empty() && ex_json.empty()) throw InvalidInput("nothing to write; give --svg and/or --json");
    service::Service svc(load_instance(pr_inst));
    json req;
    if (!ex_data.empty()) {
      const auto ds = data::load_dataset(ex_data);
      json rows = json::array();
      if (ex_rows.empty())
        for (int i = 0; i < ds.rows(); ++i) ex_rows.push_back(i);
      for (int i : ex_rows) {
        if (i < 0 || i >= ds.rows()) throw InvalidInput("row " + std::to_string(i) + " out of range");
        std::vector<double> r(ds.domains());
        for (int k = 0; k < ds.domains(); ++k) r[k] = ds.X(i, k);
        rows.push_back(r);
      }
      req = {{"assessments", rows}, {"scale", "unit"}};
    } else {
      req = prepare_request(pr_scores, pr_input, pr_scale);
    }
    req["diagram"] = true;
    const json dj = checked(svc.post_predict(req.dump())).body["diagram"];
    if (!ex_json.empty()) write_json(ex_json, dj);
    if (!ex_svg.empty()) write_text(ex_svg, diagram::render_svg(diagram::diagram_from_json(dj)));
  });

  // gridsearch / evaluate / rank
  std::vector<std::string> h_data;
  std::string h_grid, h_results, h_report;
  HarnessFlags h_flags;
  auto grid_spec = [&] {
    GridSpec g = !h_grid.empty() ? grid_from_json(read_json(h_grid))
                 : settings.doc.contains("grid") ? grid_from_json(settings.doc["grid"])
                                                 : default_grid();
    g.base.seed = seed;
    return g;
  };

  auto* gs = app.add_subcommand("gridsearch", "evaluate every config of a grid on each dataset");
  gs->add_option("--data", h_data, "dataset (repeatable)")->required();
  gs->add_option("--grid", h_grid, "grid document (default: full grid)");
  gs->add_option("--results", h_results, "results CSV (default stdout)");
  gs->add_option("--report", h_report, "best config per dataset and metric");
  h_flags.attach(gs);
  gs->callback([&] {
    load_settings();
    const auto opt = h_flags.apply(settings.section("harness"), seed);
    const GridSpec grid = grid_spec();
    std::vector<eval::RunResult> all;
    json report = json::object();
    for (const auto& path : h_data) {
      const auto ds = data::load_dataset(path);
      const auto out = eval::grid_search(ds, grid, opt);
      for (const auto& e : out.entries) all.insert(all.end(), e.results.begin(), e.results.end());
      for (const auto& [metric, pos] : out.best) {
        const auto& e = out.entries[pos];
        const auto it = std::find_if(e.results.begin(), e.results.end(),
                                     [&](const eval::RunResult& r) { return r.metric == metric; });
        report[ds.name][metric] = {{"index", e.index}, {"config", to_json(e.config)}, {"tag", describe(e.config)},
                                   {"estimate", it->estimate}, {"size", it->size}};
      }
    }
    write_text(h_results, results_csv(all));
    if (!h_report.empty()) write_json(h_report, report);
  });

  auto* ev = app.add_subcommand("evaluate", "grid search then compare the best configs with baselines");
  std::vector<std::string> ev_baselines;
  ev->add_option("--data", h_data, "dataset (repeatable)")->required();
  ev->add_option("--grid", h_grid, "grid document (default: full grid)");
  ev->add_option("--baseline", ev_baselines, "baseline name (repeatable; default all)");
  ev->add_option("--results", h_results, "results CSV (default stdout)");
  ev->add_option("--report", h_report, "ranking report per metric");
  h_flags.attach(ev);
  ev->callback([&] {
    load_settings();
    const auto opt = h_flags.apply(settings.section("harness"), seed);
    std::vector<baselines::Variant> variants;
    auto names = ev_baselines;
    if (names.empty()) names = settings.section("harness").value("baselines", std::vector<std::string>{});
    if (names.empty())
      variants = baselines::all_variants();
    else
      for (const auto& b : names) variants.push_back(baselines::parse_variant(b));
    const GridSpec grid = grid_spec();
    std::vector<eval::RunResult> all;
    for (const auto& path : h_data) {
      const auto ds = data::load_dataset(path);
      const auto r = eval::compare_models(ds, eval::grid_search(ds, grid, opt), variants, opt);
      all.insert(all.end(), r.begin(), r.end());
    }
    write_text(h_results, results_csv(all));
    if (!h_report.empty()) write_json(h_report, rank_report(all, opt.metrics));
  });

  auto* rk = app.add_subcommand("rank", "dominance matrices, average ranks and echelons from results CSVs");
  std::vector<std::string> rk_results, rk_metrics;
  rk->add_option("--results", rk_results, "results CSV (repeatable)")->required();
  rk->add_option("--metric", rk_metrics, "metric (repeatable; default every metric present)");
  rk->add_option("--output", h_report, "report path (default stdout)");
  rk->callback([&] {
    load_settings();
    write_json(h_report, rank_report(read_results(rk_results), rk_metrics));
  });

  // validate
  auto* va = app.add_subcommand("validate", "reliability, covariance signs and sum-area violations");
  std::string va_data, va_out;
  int va_max = 0;
  va->add_option("--data", va_data)->required();
  va->add_option("--max-arrangements", va_max, "sample this many arrangements (0: all)");
  va->add_option("--output", va_out, "report path (default stdout)");
  va->callback([&] {
    load_settings();
    write_json(va_out, data::validate(data::load_dataset(va_data), va_max, seed));
  });

  // serve
  auto* sv = app.add_subcommand("serve", "HTTP service: GET /model, POST /predict, GET /healthz");
  std::string sv_inst, sv_host = "127.0.0.1";
  int sv_port = 8080;
  sv->add_option("--instance", sv_inst)->required();
  sv->add_option("--host", sv_host);
  sv->add_option("--port", sv_port, "0 picks a free port");
  sv->callback([&] {
    load_settings();
    service::Service svc(load_instance(sv_inst));
    const auto ready = [&](int port, const std::function<void()>&) {
      std::cerr << "listening on " << sv_host << ':' << port << std::endl;
    };
    if (!service::serve(svc, sv_host, sv_port, ready)) throw CliError("cannot bind " + sv_host + ":" + std::to_string(sv_port));
  });

  auto fail = [](const std::string& kind, const std::string& message, int code) {
    json err{{"error", kind}, {"message", message}};
    if (kind == "request") {
      try {
        err = json::parse(message);
      } catch (...) {
      }
    }
    std::cerr << err.dump() << '\n';
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  } catch (const DimensionMismatch& e) {
    return fail("dimension_mismatch", e.what(), 3);
  } catch (const InvalidInput& e) {
    return fail("invalid_input", e.what(), 3);
  } catch (const CliError& e) {
    return fail("request", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
