#pragma once

// Command-line harness: JSON experiment configs, scalar overrides, config
// hashing, atomic output files and the five subcommands.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "nvp/experiment.hpp"

namespace nvp::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Raised for bad invocations and invalid configs; exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config.

inline json default_config() {
  return json::parse(R"({
    "seed": 0,
    "source": {"type": "simulated", "model": "complex", "n": 2000, "price_range": [7, 40]},
    "economics": {"c": 6, "s": 2, "gamma": 0, "p_ref": 0, "p_bounds": [7, 40], "q_bounds": [0, 120]},
    "query": [0.5, 0.5, 0.5, 0.5],
    "profit": {"form": "plain", "price_only": false, "frozen_q": 60},
    "weights": {"family": "kernel", "n_estimators": 50, "bootstrap": true},
    "step": {"rule": "armijo", "alpha0": 0.05, "beta": 0.5, "sigma": 0, "eps": 1e-8},
    "agd": {"max_iters": 500, "grad_tol": 1e-6, "tie_rule": "lower"},
    "oracle": {"mc_samples": 20000, "p_points": 331, "q_points": 481, "seed": 0},
    "simulate": {"scaled": false},
    "compare": {"families": ["knn", "kernel", "cart", "forest"]},
    "sweep": {"type": "sample_size", "sizes": [100, 200, 500, 1000, 2000, 5000], "draws": 5,
              "alpha0": [0.01, 0.05, 0.1, 0.5, 1.0], "sigma": [0, 0.1, 0.2, 0.5, 0.9]},
    "ingest": {"scaled": false}
  })");
}

/// Applies `a.b.c=value`; the value is parsed as JSON when possible and kept
/// as a string otherwise.
inline void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  if (value.is_object() || value.is_array()) throw UsageError("override '" + key + "' must be a scalar");
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError("override key '" + key + "' has an empty component");
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw UsageError("override key '" + key + "' does not name an object field");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

/// FNV-1a over the canonical (sorted-key, compact) JSON text.
inline std::string config_hash(const json& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : cfg.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  json j = json::parse(in, nullptr, false, true);
  if (j.is_discarded() || !j.is_object()) throw UsageError("config '" + path + "' is not a JSON object");
  return j;
}

/// Defaults overlaid with the user's config (objects merge recursively).
inline json effective_config(const json& user) {
  json cfg = default_config();
  cfg.merge_patch(user);
  return cfg;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j[key].is_null() ? j[key].get<T>() : fallback;
}

inline Interval interval_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw UsageError(std::string(what) + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline NewsvendorParams params_from(const json& cfg) {
  const json& e = cfg.at("economics");
  NewsvendorParams p;
  p.c = get_or(e, "c", p.c);
  p.s = get_or(e, "s", p.s);
  p.gamma = get_or(e, "gamma", p.gamma);
  p.p_ref = get_or(e, "p_ref", p.p_ref);
  if (e.contains("p_bounds")) p.p_bounds = interval_from(e["p_bounds"], "economics.p_bounds");
  if (e.contains("q_bounds")) p.q_bounds = interval_from(e["q_bounds"], "economics.q_bounds");
  try {
    p.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  return p;
}

inline Vec4 vec4_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != kSimFeatureDim) throw UsageError(std::string(what) + " must have 4 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline DemandModel model_from(const json& src) {
  const std::string name = get_or<std::string>(src, "model", "complex");
  const json mp = src.contains("model_params") ? src["model_params"] : json::object();
  if (name == "complex") {
    ComplexSim m;
    if (mp.contains("a")) m.a = vec4_from(mp["a"], "model_params.a");
    if (mp.contains("b")) m.b = vec4_from(mp["b"], "model_params.b");
    m.intercept = get_or(mp, "intercept", m.intercept);
    m.price_slope = get_or(mp, "price_slope", m.price_slope);
    m.a_scale = get_or(mp, "a_scale", m.a_scale);
    m.phi_scale = get_or(mp, "phi_scale", m.phi_scale);
    m.theta_scale = get_or(mp, "theta_scale", m.theta_scale);
    return m;
  }
  if (name == "linear") {
    LinearSim m;
    if (mp.contains("slopes")) m.slopes = vec4_from(mp["slopes"], "model_params.slopes");
    m.intercept = get_or(mp, "intercept", m.intercept);
    m.price_slope = get_or(mp, "price_slope", m.price_slope);
    m.noise_std = get_or(mp, "noise_std", m.noise_std);
    return m;
  }
  throw UsageError("unknown demand model '" + name + "' (expected complex or linear)");
}

inline json model_to_json(const DemandModel& model) {
  if (const auto* m = std::get_if<ComplexSim>(&model))
    return {{"model", "complex"},
            {"a", m->a}, {"b", m->b}, {"intercept", m->intercept}, {"price_slope", m->price_slope},
            {"a_scale", m->a_scale}, {"phi_scale", m->phi_scale}, {"theta_scale", m->theta_scale}};
  const auto& m = std::get<LinearSim>(model);
  return {{"model", "linear"}, {"slopes", m.slopes}, {"intercept", m.intercept},
          {"price_slope", m.price_slope}, {"noise_std", m.noise_std}};
}

inline WeightSpec weight_spec_from(const json& cfg) {
  const json& w = cfg.at("weights");
  WeightSpec spec;
  try {
    spec.family = parse_weight_family(get_or<std::string>(w, "family", "kernel"));
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  if (w.contains("k") && !w["k"].is_null()) spec.k = w["k"].get<std::size_t>();
  if (w.contains("bandwidth") && !w["bandwidth"].is_null()) spec.bandwidth = w["bandwidth"].get<double>();
  if (w.contains("max_depth") || w.contains("min_samples_leaf")) {
    TreeHyper t;
    t.max_depth = get_or<std::size_t>(w, "max_depth", t.max_depth);
    t.min_samples_leaf = get_or<std::size_t>(w, "min_samples_leaf", t.min_samples_leaf);
    t.max_features = get_or<std::size_t>(w, "max_features", 0);
    spec.tree = t;
  }
  spec.n_estimators = get_or<std::size_t>(w, "n_estimators", spec.n_estimators);
  spec.bootstrap = get_or(w, "bootstrap", spec.bootstrap);
  if (spec.k && *spec.k < 1) throw UsageError("weights.k must be >= 1");
  if (spec.bandwidth && !(*spec.bandwidth > 0.0)) throw UsageError("weights.bandwidth must be positive");
  if (spec.n_estimators < 1) throw UsageError("weights.n_estimators must be >= 1");
  return spec;
}

inline ProfitKind kind_from(const json& cfg) {
  const json& p = cfg.at("profit");
  const std::string form = get_or<std::string>(p, "form", "plain");
  if (form != "plain" && form != "adjusted") throw UsageError("profit.form must be plain or adjusted");
  ProfitKind k;
  k.form = form == "plain" ? ProfitForm::plain : ProfitForm::adjusted;
  k.price_only = get_or(p, "price_only", false);
  k.frozen_q = get_or(p, "frozen_q", 0.0);
  return k;
}

inline AgdConfig agd_from(const json& cfg) {
  const json& s = cfg.at("step");
  const json& a = cfg.at("agd");
  AgdConfig out;
  const std::string rule = get_or<std::string>(s, "rule", "armijo");
  if (rule == "armijo") {
    ArmijoStep st;
    st.alpha0 = get_or(s, "alpha0", st.alpha0);
    st.beta = get_or(s, "beta", st.beta);
    st.sigma = get_or(s, "sigma", st.sigma);
    st.eps = get_or(s, "eps", st.eps);
    out.step = st;
  } else if (rule == "diminishing") {
    out.step = DiminishingStep{get_or(s, "C", DiminishingStep{}.C)};
  } else if (rule == "constant") {
    out.step = ConstantStep{get_or(s, "eta", ConstantStep{}.eta)};
  } else {
    throw UsageError("step.rule must be armijo, diminishing or constant");
  }
  const auto iters = get_or<long long>(a, "max_iters", 500);
  if (iters < 1) throw UsageError("agd.max_iters must be >= 1");
  out.max_iters = static_cast<std::size_t>(iters);
  out.grad_tol = get_or(a, "grad_tol", out.grad_tol);
  try {
    out.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  return out;
}

inline OracleConfig oracle_from(const json& cfg) {
  const json& o = cfg.at("oracle");
  OracleConfig out;
  out.mc_samples = get_or<std::size_t>(o, "mc_samples", out.mc_samples);
  out.p_points = get_or<std::size_t>(o, "p_points", out.p_points);
  out.q_points = get_or<std::size_t>(o, "q_points", out.q_points);
  out.seed = get_or<std::uint64_t>(o, "seed", out.seed);
  try {
    out.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  return out;
}

inline SolveSetup setup_from(const json& cfg, const NewsvendorParams& params) {
  SolveSetup s;
  s.params = params;
  s.kind = kind_from(cfg);
  s.weights = weight_spec_from(cfg);
  s.agd = agd_from(cfg);
  const std::string tie = get_or<std::string>(cfg.at("agd"), "tie_rule", "lower");
  if (tie != "lower" && tie != "upper") throw UsageError("agd.tie_rule must be lower or upper");
  s.rule = tie == "lower" ? TieRule::lower : TieRule::upper;
  if (cfg.at("agd").contains("x0") && !cfg["agd"]["x0"].is_null()) {
    const auto x0 = interval_from(cfg["agd"]["x0"], "agd.x0");
    s.x0 = Decision{x0.lo, x0.hi};
  }
  s.seed = cfg.at("seed").get<std::uint64_t>();
  return s;
}

inline std::vector<double> query_from(const json& cfg, std::size_t dim) {
  const auto z = cfg.at("query").get<std::vector<double>>();
  if (z.size() != dim)
    throw UsageError("query has " + std::to_string(z.size()) + " entries; the dataset has " +
                     std::to_string(dim) + " features");
  return z;
}

// ---------------------------------------------------------------------------
// Output.

/// Writes via a temporary file in the same directory and renames it into place.
inline void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.parent_path() / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

inline json decision_json(const Decision& x) { return {{"p", x.p}, {"q", x.q}}; }

/// JSON cannot hold inf/nan; such values become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Data sources.

struct LoadedData {
  Dataset data;
  std::optional<DemandModel> model;  ///< set for simulated sources
  std::optional<RealData> real;      ///< set for the electricity schema
  json provenance;
};

inline PricePolicy policy_from(const json& src) {
  PricePolicy p;
  if (src.contains("price_range")) p.range = interval_from(src["price_range"], "source.price_range");
  return p;
}

inline LoadedData load_source(const json& cfg) {
  const json& src = cfg.at("source");
  const std::string type = get_or<std::string>(src, "type", "simulated");
  LoadedData out;
  if (type == "simulated") {
    const auto n = get_or<long long>(src, "n", 0);
    if (n < 1) throw UsageError("source.n must be >= 1");
    const auto model = model_from(src);
    const auto seed = get_or<std::uint64_t>(src, "seed", cfg.at("seed").get<std::uint64_t>());
    const auto policy = policy_from(src);
    out.data = gen_dataset(model, static_cast<std::size_t>(n), policy, seed);
    out.model = model;
    out.provenance = {{"type", "simulated"}, {"demand_model", model_to_json(model)}, {"n", n},
                      {"seed", seed}, {"price_policy", {{"uniform", {policy.range.lo, policy.range.hi}}}}};
  } else if (type == "csv") {
    const auto path = get_or<std::string>(src, "path", "");
    out.data = read_dataset_csv(path);
    out.provenance = {{"type", "csv"}, {"path", path}};
  } else if (type == "real") {
    const auto path = get_or<std::string>(src, "path", "");
    out.real = load_real_csv(path);
    out.data = out.real->train;
    out.provenance = {{"type", "real"}, {"path", path}};
  } else {
    throw UsageError("source.type must be simulated, csv or real");
  }
  return out;
}

/// Economics for the electricity data when the config gives none: prices
/// and quantities from the training rows, cost and salvage below the lowest
/// price so that the box is valid.
inline NewsvendorParams real_params(const Dataset& train) {
  NewsvendorParams p;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, dmax = 0.0;
  for (const auto& s : train.samples()) {
    lo = std::min(lo, s.price);
    hi = std::max(hi, s.price);
    dmax = std::max(dmax, s.demand);
  }
  p.p_bounds = {std::max(lo, 1.0), std::max(hi, std::max(lo, 1.0))};
  p.c = 0.5 * p.p_bounds.lo;
  p.s = 0.25 * p.p_bounds.lo;
  p.q_bounds = {0.0, 1.2 * dmax};
  p.validate();
  return p;
}

inline json params_json(const NewsvendorParams& p) {
  return {{"c", p.c}, {"s", p.s}, {"gamma", p.gamma}, {"p_ref", p.p_ref},
          {"p_bounds", {p.p_bounds.lo, p.p_bounds.hi}}, {"q_bounds", {p.q_bounds.lo, p.q_bounds.hi}}};
}

// ---------------------------------------------------------------------------
// Commands. Each returns the list of files written.

struct RunContext {
  json user;    ///< config as given (after overrides), hashed
  json cfg;     ///< with defaults filled in
  fs::path out;
  std::string hash;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  [[nodiscard]] double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  [[nodiscard]] json summary_base() const {
    return {{"config_hash", hash}, {"seed", cfg.at("seed")}, {"wall_time_s", elapsed()}};
  }
};

inline std::vector<fs::path> cmd_simulate(const RunContext& ctx) {
  const json& src = ctx.cfg.at("source");
  if (get_or<std::string>(src, "type", "simulated") != "simulated")
    throw UsageError("simulate needs source.type = simulated");
  const auto loaded = load_source(ctx.cfg);
  const bool scaled = get_or(ctx.cfg.at("simulate"), "scaled", false);
  std::ostringstream csv;
  write_dataset_csv(csv, loaded.data, scaled);
  json prov = loaded.provenance;
  prov["config_hash"] = ctx.hash;
  prov["scaled"] = scaled;
  const auto& sc = loaded.data.scaling();
  prov["scaling"] = {{"price", {sc.price.lo, sc.price.hi}}};
  for (const auto& r : sc.features) prov["scaling"]["features"].push_back({r.lo, r.hi});
  const auto a = ctx.out / "dataset.csv";
  const auto b = ctx.out / "dataset.provenance.json";
  atomic_write(a, csv.str());
  atomic_write(b, prov.dump(2) + "\n");
  return {a, b};
}

inline std::string trace_csv(const AgdTrace& t) {
  std::ostringstream os;
  os << "iter,p,q,objective,step\n";
  for (std::size_t r = 0; r < t.iterates.size(); ++r)
    os << r << ',' << fmt(t.iterates[r].p) << ',' << fmt(t.iterates[r].q) << ',' << fmt(t.objectives[r]) << ','
       << fmt(t.steps[r]) << '\n';
  return os.str();
}

inline std::vector<fs::path> cmd_solve(const RunContext& ctx) {
  const auto loaded = load_source(ctx.cfg);
  const bool user_econ = ctx.user.contains("economics");
  const NewsvendorParams params = loaded.real && !user_econ ? real_params(loaded.data) : params_from(ctx.cfg);
  const SolveSetup setup = setup_from(ctx.cfg, params);
  std::vector<fs::path> written;

  json summary = ctx.summary_base();
  summary["source"] = loaded.provenance;
  summary["economics"] = params_json(params);

  if (loaded.real) {
    // One AGD run per held-out day, queried at that day's features.
    const Dataset& train = loaded.real->train;
    const Dataset& test = loaded.real->test;
    const auto wm = WeightModel::fit(train, setup.weights, QuerySpace::joined, setup.seed);
    std::ostringstream dev;
    dev << "row,p_hist,p_alg,q_alg,demand,rel_deviation,within_5pct,stop_reason\n";
    std::size_t within = 0;
    std::map<std::string, std::size_t> reasons;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const Problem pb{wm, train, params, setup.kind, test[i].features, setup.rule};
      const auto tr = setup.x0 ? run_agd(pb, *setup.x0, setup.agd) : run_agd(pb, setup.agd);
      const double ph = test[i].price;
      const double pa = tr.final_decision().p;
      const double rel = ph != 0.0 ? std::abs(pa - ph) / std::abs(ph) : std::numeric_limits<double>::infinity();
      within += rel <= 0.05;
      ++reasons[to_string(tr.stop_reason)];
      dev << i << ',' << fmt(ph) << ',' << fmt(pa) << ',' << fmt(tr.final_decision().q) << ','
          << fmt(test[i].demand) << ',' << fmt(rel) << ',' << (rel <= 0.05 ? 1 : 0) << ','
          << to_string(tr.stop_reason) << '\n';
    }
    summary["weights"] = wm.describe();
    summary["test_rows"] = test.size();
    summary["fraction_within_5pct"] = test.size() ? static_cast<double>(within) / test.size() : 0.0;
    summary["stop_reason"] = reasons;
    summary["deviation_metric"] = "|p_alg - p_hist| / p_hist";
    const auto d = ctx.out / "deviation.csv";
    atomic_write(d, dev.str());
    written.push_back(d);
  } else {
    const auto z = query_from(ctx.cfg, loaded.data.feature_dim());
    const auto sol = solve_agd(loaded.data, setup, z);
    const auto& tr = sol.trace;
    summary["weights"] = sol.weights;
    summary["query"] = z;
    summary["stop_reason"] = to_string(tr.stop_reason);
    summary["iterations"] = tr.iterations();
    summary["final_decision"] = decision_json(tr.final_decision());
    summary["approx_objective"] = tr.objectives.back();
    if (loaded.model) {
      const TruthReference truth(*loaded.model, z, params, setup.kind, oracle_from(ctx.cfg));
      const auto e = truth.evaluate(tr.final_decision());
      summary["true_profit"] = e.profit;
      summary["true_profit_stderr"] = e.stderr_;
      summary["oracle_optimum"] = {{"p", truth.optimum().x_star.p}, {"q", truth.optimum().x_star.q},
                                   {"profit", truth.optimum().f_star}};
      summary["gap"] = e.gap;
    }
    const auto t = ctx.out / "trace.csv";
    atomic_write(t, trace_csv(tr));
    written.push_back(t);
  }
  summary["wall_time_s"] = ctx.elapsed();
  const auto s = ctx.out / "summary.json";
  atomic_write(s, summary.dump(2) + "\n");
  written.push_back(s);
  return written;
}

inline std::vector<WeightFamily> families_from(const json& cfg) {
  std::vector<WeightFamily> out;
  for (const auto& f : cfg.at("compare").at("families")) {
    try {
      out.push_back(parse_weight_family(f.get<std::string>()));
    } catch (const std::invalid_argument& ex) {
      throw UsageError(ex.what());
    }
  }
  return out;
}

inline void require_simulated(const LoadedData& d, const char* cmd) {
  if (!d.model) throw UsageError(std::string(cmd) + " needs a simulated source (true gaps required)");
}

inline std::vector<fs::path> cmd_compare(const RunContext& ctx) {
  const auto loaded = load_source(ctx.cfg);
  require_simulated(loaded, "compare");
  const auto params = params_from(ctx.cfg);
  const auto setup = setup_from(ctx.cfg, params);
  const auto z = query_from(ctx.cfg, loaded.data.feature_dim());
  const auto families = families_from(ctx.cfg);
  const TruthReference truth(*loaded.model, z, params, setup.kind, oracle_from(ctx.cfg));
  const auto rows = compare_methods(loaded.data, setup, families, z, truth);

  std::map<std::string, double> indep_gap;
  for (const auto& r : rows)
    if (r.method == "independent") indep_gap[r.family] = r.gap;
  std::ostringstream os;
  os << "method,family,p,q,true_profit,stderr,gap,gap_reduction,iterations,detail\n";
  json stops = json::object();
  for (const auto& r : rows) {
    const bool agd = r.method == "agd";
    os << r.method << ',' << r.family << ',' << fmt(r.x.p) << ',' << fmt(r.x.q) << ',' << fmt(r.true_profit) << ','
       << fmt(r.stderr_) << ',' << fmt(r.gap) << ',' << (agd && indep_gap[r.family] > 0.0 ? fmt(1.0 - r.gap / indep_gap[r.family]) : "") << ','
       << r.iterations << ',' << r.detail << '\n';
    if (agd) stops[r.family] = r.detail.substr(r.detail.find(';') + 1);
  }
  json summary = ctx.summary_base();
  summary["source"] = loaded.provenance;
  summary["query"] = z;
  summary["stop_reason"] = stops;
  summary["oracle_optimum"] = {{"p", truth.optimum().x_star.p}, {"q", truth.optimum().x_star.q},
                               {"profit", truth.optimum().f_star}};
  for (const auto& r : rows)
    summary["gaps"][r.method + (r.family.empty() ? "" : ":" + r.family)] = r.gap;
  summary["wall_time_s"] = ctx.elapsed();
  const auto c = ctx.out / "compare.csv";
  const auto s = ctx.out / "summary.json";
  atomic_write(c, os.str());
  atomic_write(s, summary.dump(2) + "\n");
  return {c, s};
}

inline std::vector<fs::path> cmd_sweep(const RunContext& ctx) {
  const json& sw = ctx.cfg.at("sweep");
  const std::string type = get_or<std::string>(sw, "type", "sample_size");
  const auto params = params_from(ctx.cfg);
  const auto setup = setup_from(ctx.cfg, params);
  const json& src = ctx.cfg.at("source");
  if (get_or<std::string>(src, "type", "simulated") != "simulated")
    throw UsageError("sweep needs a simulated source (true gaps required)");
  const auto model = model_from(src);
  const auto z = query_from(ctx.cfg, kSimFeatureDim);
  const TruthReference truth(model, z, params, setup.kind, oracle_from(ctx.cfg));
  const auto seed = ctx.cfg.at("seed").get<std::uint64_t>();

  json summary = ctx.summary_base();
  summary["sweep"] = type;
  summary["query"] = z;
  std::map<std::string, std::size_t> reasons;
  std::vector<fs::path> written;
  std::ostringstream os;
  if (type == "sample_size") {
    const auto sizes = sw.at("sizes").get<std::vector<std::size_t>>();
    const auto draws = sw.at("draws").get<std::size_t>();
    if (sizes.empty() || draws < 1) throw UsageError("sweep.sizes must be non-empty and sweep.draws >= 1");
    for (auto n : sizes)
      if (n < 1) throw UsageError("sweep.sizes entries must be >= 1");
    const auto cells = sweep_sample_size(model, policy_from(src), sizes, draws, setup, z, truth, seed);
    os << "n,draw,p,q,true_profit,gap,iterations\n";
    for (const auto& c : cells)
      os << c.n << ',' << c.draw << ',' << fmt(c.x.p) << ',' << fmt(c.x.q) << ',' << fmt(c.true_profit) << ','
         << fmt(c.gap) << ',' << c.iterations << '\n';
    std::ostringstream agg;
    agg << "n,mean_gap,max_gap,min_gap,mean_iterations\n";
    for (const auto& r : summarize_sample_size(cells)) {
      agg << r.n << ',' << fmt(r.mean_gap) << ',' << fmt(r.max_gap) << ',' << fmt(r.min_gap) << ','
          << fmt(r.mean_iterations) << '\n';
      summary["mean_gap"][std::to_string(r.n)] = r.mean_gap;
    }
    summary["stop_reason"] = "per-run reasons not recorded for sample-size sweeps";
    const auto a = ctx.out / "sweep_summary.csv";
    atomic_write(a, agg.str());
    written.push_back(a);
  } else if (type == "step_grid") {
    const auto data = load_source(ctx.cfg).data;
    const auto alphas = sw.at("alpha0").get<std::vector<double>>();
    const auto sigmas = sw.at("sigma").get<std::vector<double>>();
    const auto cells = sweep_step_grid(data, setup, alphas, sigmas, z, truth);
    os << "alpha0,sigma,p,q,true_profit,gap,iterations,stop_reason\n";
    for (const auto& c : cells) {
      os << fmt(c.alpha0) << ',' << fmt(c.sigma) << ',' << fmt(c.x.p) << ',' << fmt(c.x.q) << ','
         << fmt(c.true_profit) << ',' << fmt(c.gap) << ',' << c.iterations << ',' << c.stop_reason << '\n';
      ++reasons[c.stop_reason];
    }
    summary["stop_reason"] = reasons;
  } else {
    throw UsageError("sweep.type must be sample_size or step_grid");
  }
  summary["oracle_optimum"] = {{"p", truth.optimum().x_star.p}, {"q", truth.optimum().x_star.q},
                               {"profit", truth.optimum().f_star}};
  summary["wall_time_s"] = ctx.elapsed();
  const auto c = ctx.out / "sweep.csv";
  const auto s = ctx.out / "summary.json";
  atomic_write(c, os.str());
  atomic_write(s, summary.dump(2) + "\n");
  written.push_back(c);
  written.push_back(s);
  return written;
}

inline std::vector<fs::path> cmd_ingest(const RunContext& ctx) {
  const json& in = ctx.cfg.at("ingest");
  if (!in.contains("path")) throw UsageError("ingest needs ingest.path");
  const auto path = in["path"].get<std::string>();
  const auto rd = load_real_csv(path);
  const bool scaled = get_or(in, "scaled", false);
  for (const auto& d : rd.diagnostics) std::cerr << "warning: " << path << ": " << d << "\n";

  std::ostringstream train, test;
  write_dataset_csv(train, rd.train, scaled);
  write_dataset_csv(test, rd.test, scaled);
  json manifest = {{"config_hash", ctx.hash}, {"source", path}, {"rows_read", rd.rows_read},
                   {"dropped_missing", rd.dropped_missing}, {"dropped_invalid", rd.dropped_invalid},
                   {"diagnostics", rd.diagnostics}, {"train_rows", rd.train.size()},
                   {"test_rows", rd.test.size()}, {"split", "chronological 90/10"},
                   {"feature_names", real_feature_names()}, {"scaled", scaled}};
  const auto& sc = rd.train.scaling();
  manifest["scaling"] = {{"price", {sc.price.lo, sc.price.hi}}, {"fitted_on", "train"}};
  for (const auto& r : sc.features) manifest["scaling"]["features"].push_back({r.lo, r.hi});
  const auto a = ctx.out / "train.csv";
  const auto b = ctx.out / "test.csv";
  const auto c = ctx.out / "manifest.json";
  atomic_write(a, train.str());
  atomic_write(b, test.str());
  atomic_write(c, manifest.dump(2) + "\n");
  std::cerr << "ingest: " << rd.rows_read << " rows read, " << rd.train.size() << " train, " << rd.test.size()
            << " test, " << (rd.dropped_missing + rd.dropped_invalid) << " dropped\n";
  return {a, b, c};
}

// ---------------------------------------------------------------------------
// Entry point.

inline int run(int argc, char** argv) {
  CLI::App app{"Decision-dependent newsvendor pricing experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"simulate", "generate a simulated dataset"},
      {"solve", "run AGD on a dataset"},
      {"compare", "compare AGD with the baseline methods"},
      {"sweep", "sample-size or step-size sweep"},
      {"ingest", "load and split an electricity-market CSV"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,config_path", config_path, "config file (JSON), also accepted positionally");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--set", sets, "override a scalar config field, e.g. --set source.n=500")
        ->allow_extra_args(false);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    RunContext ctx;
    ctx.user = config_path.empty() ? json::object() : load_config(config_path);
    if (seed) ctx.user["seed"] = *seed;
    for (const auto& s : sets) apply_override(ctx.user, s);
    ctx.cfg = effective_config(ctx.user);
    if (!ctx.cfg["seed"].is_number_unsigned() && !(ctx.cfg["seed"].is_number_integer() && ctx.cfg["seed"].get<long long>() >= 0))
      throw UsageError("seed must be a non-negative integer");
    ctx.hash = config_hash(ctx.cfg);
    ctx.out = out_dir;

    std::vector<fs::path> written;
    if (cmd == "simulate") written = cmd_simulate(ctx);
    else if (cmd == "solve") written = cmd_solve(ctx);
    else if (cmd == "compare") written = cmd_compare(ctx);
    else if (cmd == "sweep") written = cmd_sweep(ctx);
    else written = cmd_ingest(ctx);
    for (const auto& p : written) std::cout << p.string() << "\n";
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "nvp " << cmd << ": " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "nvp " << cmd << ": config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "nvp " << cmd << ": error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace nvp::cli
