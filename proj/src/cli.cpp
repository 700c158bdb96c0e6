#include "irgld/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "irgld/branching.hpp"
#include "irgld/experiments.hpp"
#include "irgld/graph.hpp"
#include "irgld/ldp.hpp"

namespace irgld {

using nlohmann::json;

namespace {

// Failures that are the caller's fault map to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Knobs {
  double alpha = 3.5;
  double sigma = 1.0;
  double q = 1.0;
  double w_min = 1.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  std::string store;
  bool no_timestamp = false;
  std::string path = "bucketed";

  std::string pool;
  std::string pool_out;
  std::size_t M = 20000;
  std::uint32_t cap = 10000;
  std::uint32_t store_cap = 0;

  std::vector<double> rho;
  double margin = 0.05;
  std::size_t draws = 20000;
  double phi_override = 0.0;
  std::string plot_csv;

  std::size_t n = 0;
  std::size_t reps = 10;
  std::size_t ell_max = 5;
  double eps = 0.5;
  double R = 4.0;
  double delta = 0.05;
  std::string coupling_weights = "conditioned";

  std::string mode = "sample";
  std::size_t h = 0;
  std::size_t sample_h = 0;
  double scale = 1.0;
  std::vector<double> y;

  std::vector<double> weights;
  std::size_t n_model = 0;
};

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json interval(const Interval& i) { return json::array({i.lo, i.hi}); }

json finite_or_inf(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

ModelParams params_of(const Knobs& k) { return {k.alpha, k.sigma, k.q, k.w_min}; }

TreePool pool_of(const Knobs& k) {
  if (!k.pool.empty()) return load_pool(k.pool);
  return build_pool(params_of(k), k.M, k.cap, k.seed, {k.store_cap, k.threads});
}

double single_rho(const Knobs& k) {
  if (k.rho.size() != 1) throw ValidationError("exactly one --rho value is required");
  return k.rho.front();
}

ExperimentConfig config_of(const Knobs& k, const ModelParams& params) {
  ExperimentConfig c;
  c.params = params;
  if (k.n < 1) throw ValidationError("--n must be given and >= 1");
  c.n = k.n;
  c.replications = k.reps;
  c.rho = k.rho.empty() ? 0.5 : k.rho.front();
  c.margin = k.margin;
  c.seed = k.seed;
  c.eps = k.eps;
  c.R = k.R;
  c.ell_max = k.ell_max;
  c.path = parse_generator_path(k.path);
  c.threads = k.threads;
  c.validate();
  return c;
}

void store_replications(const Knobs& k, const std::string& cmd, const RunRecord& rec) {
  if (k.store.empty()) return;
  for (const auto& r : rec.replications) {
    json line = to_json(r);
    line["schema"] = kResultSchema;
    line["subcommand"] = cmd;
    append_jsonl(k.store, line);
  }
}

json theta_json(const TreePool& pool) {
  const auto t = estimate_theta(pool);
  json j = {{"theta_hat", t.theta},
            {"ci", interval(t.ci)},
            {"se", t.se},
            {"cap_bracket", interval(t.cap_bracket)},
            {"M", pool.count()},
            {"size_cap", pool.size_cap()}};
  if (pool.params().sigma() == 1.0) j["theta_rank_one_oracle"] = theta_rank_one_oracle(pool.params());
  return j;
}

PlotData ldp_sweep_plot(const std::vector<LdpQuantities>& sweep) {
  PlotData d;
  d.comments = {"rho: target giant fraction",
                "hubs_value: real hub count solving E[(1-q)^{|T| h}] = 1 - rho",
                "hubs_ceil: number of hubs needed",
                "rate: rate function (alpha - 1) ceil(hubs)",
                "C_estimate, C_lo, C_hi: leading constant of the upper tail with its 95% interval"};
  d.columns = {"rho", "hubs_value", "hubs_ceil", "rate", "C_estimate", "C_lo", "C_hi"};
  for (const auto& l : sweep)
    d.rows.push_back({l.rho, l.hubs_value, static_cast<double>(l.hubs_ceil), l.rate, l.C, l.C_ci.lo, l.C_ci.hi});
  return d;
}

json run_command(const std::string& cmd, const Knobs& k, ModelParams& params) {
  if (cmd == "pool") {
    if (k.pool_out.empty()) throw ValidationError("pool requires --pool-out");
    const TreePool pool = build_pool(params, k.M, k.cap, k.seed, {k.store_cap, k.threads});
    save_pool(pool, k.pool_out);
    json j = theta_json(pool);
    j["file"] = k.pool_out;
    j["weight_store_cap"] = pool.weight_store_cap();
    return j;
  }
  if (cmd == "oracle") {
    if (k.weights.empty()) throw ValidationError("oracle requires --weights");
    if (k.n != 0 && k.n != k.weights.size()) throw ValidationError("--n does not match the number of weights");
    const std::size_t n_model = k.n_model ? k.n_model : k.weights.size();
    const auto law = exact_small_oracle(k.weights, params, n_model);
    json by_size = json::object();
    for (std::size_t s = 1; s < law.size(); ++s) by_size[std::to_string(s)] = law[s];
    return {{"law", law}, {"largest_component_law", by_size}, {"n_model", n_model}};
  }
  if (cmd == "couple") {
    const auto cfg = config_of(k, params);
    CouplingWeights mode;
    if (k.coupling_weights == "iid") mode = CouplingWeights::iid;
    else if (k.coupling_weights == "conditioned") mode = CouplingWeights::conditioned;
    else throw ValidationError("--coupling-weights must be iid or conditioned");
    std::optional<std::map<ComponentType, double>> types;
    if (!k.pool.empty()) types = type_distribution(load_pool(k.pool), k.eps, k.R, k.ell_max);
    const auto r = run_coupling_check(cfg, k.delta, mode, types ? &*types : nullptr);
    if (r.unavailable == r.runs) throw CouplingUnavailable("coupling unavailable for every replication after retries");
    json j = {{"delta", r.delta},
              {"runs", r.runs},
              {"violations", r.violations},
              {"unavailable", r.unavailable},
              {"regular", r.regular},
              {"mean_edge_difference_over_n", r.mean_edge_difference},
              {"mean_giant_difference_over_n", r.mean_giant_difference},
              {"max_giant_difference_over_n", r.max_giant_difference}};
    if (types) {
      j["type_sum_full"] = r.type_sum_full;
      j["type_sum_approx"] = r.type_sum_approx;
    }
    return j;
  }

  // everything below consumes a pool
  const TreePool pool = pool_of(k);
  params = pool.params();

  if (cmd == "theta") return theta_json(pool);
  if (cmd == "hubs") {
    const double rho = single_rho(k);
    const auto r = hubs(rho, pool);
    json j = {{"hubs_value", r.value},
              {"hubs_ceil", r.ceil},
              {"theta_hat", r.theta.theta},
              {"theta_ci", interval(r.theta.ci)},
              {"status", to_string(r.status)},
              {"hubs_via_inverse", hubs_via_inverse(rho, pool)}};
    if (params.q() < 1.0 && rho > 0.0) {
      j["hubs_asymptotic"] = hubs_asymptotic(rho, params.q());
      j["hubs_asymptotic_refined"] = hubs_asymptotic_refined(rho, params);
    }
    return j;
  }
  if (cmd == "rate") {
    if (k.rho.empty()) throw ValidationError("rate requires --rho");
    json arr = json::array();
    for (double rho : k.rho) arr.push_back({{"rho", rho}, {"rate", finite_or_inf(rate_function(rho, pool))}});
    return {{"rates", arr}};
  }
  if (cmd == "constant") {
    if (k.rho.empty()) throw ValidationError("constant requires --rho");
    std::vector<LdpQuantities> sweep;
    json arr = json::array();
    for (double rho : k.rho) {
      sweep.push_back(compute_ldp(rho, pool, {k.draws, k.seed, k.threads, k.phi_override}));
      json j = to_json(sweep.back());
      if (k.n > 0 && sweep.back().hubs_ceil >= 1 && sweep.back().phi_found) {
        const auto t = upper_tail_prediction(rho, k.n, params, sweep.back());
        j["tail_prediction"] = t.value;
        j["tail_prediction_bounds_only"] = t.bounds_only;
      }
      arr.push_back(j);
    }
    if (!k.plot_csv.empty()) emit_plot_data(ldp_sweep_plot(sweep), k.plot_csv);
    return arr.size() == 1 ? arr.front() : json{{"sweep", arr}};
  }
  if (cmd == "lln") {
    const auto cfg = config_of(k, params);
    const auto r = run_lln(cfg, pool);
    store_replications(k, cmd, r.record);
    json sp = json::object();
    for (auto [ell, p] : r.size_probability) sp[std::to_string(ell)] = p;
    json j = {{"record", to_json(r.record)},
              {"theta_hat", r.theta_hat},
              {"size_probability", sp},
              {"mean_abs_error", r.mean_abs_error},
              {"mean_giant_fraction", r.record.mean_giant()}};
    if (r.theta_oracle) j["theta_rank_one_oracle"] = *r.theta_oracle;
    return j;
  }
  if (cmd == "plant") {
    const auto cfg = config_of(k, params);
    PlantSpec spec;
    if (k.mode == "none") spec.mode = HubMode::none;
    else if (k.mode == "explicit") spec.mode = HubMode::explicit_list;
    else if (k.mode == "sample") spec.mode = HubMode::sample_in_y;
    else throw ValidationError("--mode must be none, explicit or sample");
    spec.h = spec.mode == HubMode::explicit_list ? k.y.size() : k.h;
    spec.y = k.y;
    spec.sample_h = k.sample_h;
    spec.scale = k.scale;
    if (spec.mode == HubMode::sample_in_y && spec.h == 0 && spec.sample_h == 0)
      spec.h = hubs(cfg.rho + cfg.margin, pool).ceil;
    const auto r = run_planted_hubs(cfg, pool, spec);
    store_replications(k, cmd, r);
    return {{"record", to_json(r)}, {"h", spec.h}, {"success_fraction", r.success_fraction}};
  }
  if (cmd == "conditional") {
    const auto cfg = config_of(k, params);
    const auto r = run_conditional(cfg, pool, k.draws);
    store_replications(k, cmd, r.record);
    if (!k.plot_csv.empty()) {
      PlotData d;
      d.comments = {"s: threshold on the giant fraction |C1|/n",
                    "empirical_survival: fraction of planted runs with |C1|/n > s",
                    "C_ratio: C_s_over_C_rho, ratio of leading constants (conditional survival of the giant)"};
      d.columns = {"s", "empirical_survival", "C_ratio"};
      for (std::size_t i = 0; i < r.s_grid.size(); ++i) d.rows.push_back({r.s_grid[i], r.empirical_survival[i], r.c_ratio[i]});
      emit_plot_data(d, k.plot_csv);
    }
    return {{"record", to_json(r.record)},
            {"h", r.h},
            {"phi", r.phi},
            {"max_density_error", r.max_density_error},
            {"ks_distance", r.ks_distance},
            {"support_fraction", r.support_fraction},
            {"s", r.s_grid},
            {"empirical_survival", r.empirical_survival},
            {"C_ratio", r.c_ratio}};
  }
  throw std::logic_error("unhandled subcommand " + cmd);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Knobs k;
  CLI::App app{"Large deviations of the giant in scale-free inhomogeneous random graphs", "irgld"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--alpha", k.alpha, "Pareto tail exponent (alpha > 1)");
  app.add_option("--sigma", k.sigma, "kernel exponent (sigma < 2 alpha - 1)");
  app.add_option("--q", k.q, "percolation parameter in (0, 1]");
  app.add_option("--w-min", k.w_min, "minimal weight");
  app.add_option("--seed", k.seed, "master seed");
  app.add_option("--threads", k.threads, "worker cap; results do not depend on it")->check(CLI::PositiveNumber);
  app.add_option("--out", k.out, "write the JSON result here instead of stdout");
  app.add_option("--store", k.store, "append per-replication records to this JSONL file");
  app.add_flag("--no-timestamp", k.no_timestamp, "omit the timestamp key");
  app.add_option("--path", k.path, "edge generator: pairwise or bucketed");

  auto pool_file = [&](CLI::App* s) {
    s->add_option("--pool", k.pool, "progeny pool file")->check(CLI::ExistingFile);
    s->add_option("--M", k.M, "pool size when no --pool is given");
    s->add_option("--cap", k.cap, "size cap when no --pool is given");
    s->add_option("--store-cap", k.store_cap, "weight store cap (0: cap)");
  };
  auto experiment = [&](CLI::App* s) {
    s->add_option("--n", k.n, "number of vertices");
    s->add_option("--reps", k.reps, "replications");
    s->add_option("--ell-max", k.ell_max, "largest component size tracked");
    s->add_option("--eps", k.eps, "type grid width");
    s->add_option("--R", k.R, "type truncation");
  };

  auto* pool = app.add_subcommand("pool", "build a progeny pool and save it");
  pool->add_option("--M", k.M, "number of trees");
  pool->add_option("--cap", k.cap, "size cap");
  pool->add_option("--store-cap", k.store_cap, "weight store cap (0: cap)");
  pool->add_option("--pool-out", k.pool_out, "output file")->required();

  auto* theta = app.add_subcommand("theta", "survival probability of the branching process");
  pool_file(theta);

  auto* hubs_cmd = app.add_subcommand("hubs", "hubs(rho, q) on a pool");
  pool_file(hubs_cmd);
  hubs_cmd->add_option("--rho", k.rho, "target giant fraction")->required();

  auto* constant = app.add_subcommand("constant", "hubs, rate, phi threshold and leading constant");
  pool_file(constant);
  constant->add_option("--rho", k.rho, "one or more target fractions")->required()->delimiter(',');
  constant->add_option("--draws", k.draws, "importance-sampling draws");
  constant->add_option("--phi-override", k.phi_override, "replace the phi threshold");
  constant->add_option("--plot-csv", k.plot_csv, "write the sweep as CSV");
  constant->add_option("--n", k.n, "also predict the upper tail at this n");

  auto* rate = app.add_subcommand("rate", "rate function");
  pool_file(rate);
  rate->add_option("--rho", k.rho, "one or more target fractions")->required()->delimiter(',');

  auto* lln = app.add_subcommand("lln", "law of large numbers runs");
  pool_file(lln);
  experiment(lln);
  lln->add_option("--rho", k.rho, "success threshold");

  auto* plant = app.add_subcommand("plant", "planted-hub experiment");
  pool_file(plant);
  experiment(plant);
  plant->add_option("--rho", k.rho, "target giant fraction")->required();
  plant->add_option("--margin", k.margin, "slack: hubs are sampled in Y at rho + margin");
  plant->add_option("--mode", k.mode, "none, explicit or sample");
  plant->add_option("--keep", k.h, "number of hubs kept (0: ceil hubs(rho + margin))");
  plant->add_option("--sample-h", k.sample_h, "number of hubs sampled (0: same as --keep)");
  plant->add_option("--scale", k.scale, "multiply kept hub weights");
  plant->add_option("--y", k.y, "explicit rescaled hub weights")->delimiter(',');

  auto* conditional = app.add_subcommand("conditional", "conditional component sizes and giant law");
  pool_file(conditional);
  experiment(conditional);
  conditional->add_option("--rho", k.rho, "target giant fraction")->required();
  conditional->add_option("--draws", k.draws, "importance-sampling draws for the constant curve");
  conditional->add_option("--plot-csv", k.plot_csv, "write (s, empirical_survival, C_ratio)");

  auto* couple = app.add_subcommand("couple", "coupling of the graph with its discretised approximation");
  experiment(couple);
  couple->add_option("--delta", k.delta, "discretisation step");
  couple->add_option("--coupling-weights", k.coupling_weights, "iid or conditioned");
  couple->add_option("--pool", k.pool, "pool for type probabilities")->check(CLI::ExistingFile);

  auto* oracle = app.add_subcommand("oracle", "exact law of the largest component for n <= 6");
  oracle->add_option("--n", k.n, "number of vertices (must match --weights)");
  oracle->add_option("--weights", k.weights, "vertex weights")->required()->delimiter(',');
  oracle->add_option("--n-model", k.n_model, "denominator of the connection probability (default n)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  json doc;
  try {
    ModelParams params = params_of(k);
    (void)parse_generator_path(k.path);
    json result = run_command(cmd, k, params);
    doc = {{"schema", kResultSchema}, {"subcommand", cmd}, {"seed", k.seed}, {"params", to_json(params)},
           {"result", std::move(result)}};
    if (!k.no_timestamp) doc["timestamp"] = timestamp();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }

  const std::string text = doc.dump(2) + "\n";
  if (k.out.empty()) {
    out << text;
  } else {
    std::ofstream os(k.out);
    if (!(os << text)) {
      err << "error: cannot write '" << k.out << "'\n";
      return 3;
    }
  }
  return 0;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

void emit_plot_data(const PlotData& data, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const auto& c : data.comments) os << "# " << c << '\n';
  for (std::size_t i = 0; i < data.columns.size(); ++i) os << (i ? "," : "") << data.columns[i];
  os << '\n';
  char buf[40];
  for (const auto& row : data.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

PlotData read_plot_data(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  PlotData d;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) == 0) {
      d.comments.push_back(line.substr(2));
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!header) {
      while (std::getline(ss, cell, ',')) d.columns.push_back(cell);
      header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != d.columns.size()) throw std::runtime_error("plot data: ragged row");
    d.rows.push_back(std::move(row));
  }
  return d;
}

}  // namespace irgld
