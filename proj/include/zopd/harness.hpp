#pragma once

// Experiment orchestration: resolve a plain-text config into a concrete
// problem + policy + step sizes, run the learner, evaluate the model-aware
// baselines on common seeds, and persist traces, figure data and a summary.
// All output is deterministic in (config, seed): identical inputs produce
// byte-identical files.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "zopd/baselines.hpp"
#include "zopd/channels.hpp"
#include "zopd/config.hpp"
#include "zopd/duality.hpp"
#include "zopd/policy.hpp"
#include "zopd/primal_dual.hpp"
#include "zopd/problem.hpp"

namespace zopd {

// Role-tagged sub-seeds; a pure function of (seed, role). The learning loop
// derives its streams with the same tags.
struct SubSeeds {
  std::uint64_t fading;
  std::uint64_t gauss_s;
  std::uint64_t gauss_r;
  std::uint64_t weights;
  std::uint64_t baseline;
};

inline SubSeeds seed_everything(std::uint64_t seed) {
  return {derive_seed(seed, "fading"), derive_seed(seed, "gauss-s"),
          derive_seed(seed, "gauss-r"), derive_seed(seed, "weights"),
          derive_seed(seed, "baseline-mc")};
}

// Shortest round-trip decimal form; locale-independent, so CSV output is
// byte-stable.
inline std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct ExperimentConfig {
  std::string kind;  // awgn | mai | toy | diag
  std::uint64_t seed = 1;
  long n_iters = 0;
  std::string out_dir = "runs/out";

  int n_users = 0;
  double p_max = 20.0;
  double noise = 1.0;
  bool random_weights = true;
  Vec weights;  // used when !random_weights
  std::string fading_kind = "exponential";
  double fading_rate = 0.5;
  Vec fading_values;  // fixture mode

  std::string policy_kind;  // per_user | joint | clamp
  std::vector<int> hidden;
  std::string theta_init = "zero";  // zero | uniform
  double init_radius = 0.1;
  double output_scale = 0.0;  // 0 means p_max
  double clamp_lo = 0.0, clamp_hi = 1.0;

  double gamma_x = 0.0, gamma_theta = 0.0, gamma_lambda = 0.0, gamma_lambda_budget = 0.0;
  double decay = 0.0;

  double mu_s = 0.0, mu_r = 1e-9;
  double slack_scale = 0.0;

  double x_init = 0.0;
  double lambda_init = 1.0;
  long window = 2000;

  int baseline_mc = 200000;
  int wmmse_mc = 4000;
  double wf_tol = 1e-6;

  Vec diag_mus{0.1, 0.01, 0.001};

  std::string raw;  // config file text, embedded verbatim in outputs

  static ExperimentConfig from_file(const std::string& path) {
    return from_config(ConfigFile::load(path));
  }

  static ExperimentConfig from_text(const std::string& text) {
    return from_config(ConfigFile::parse(text));
  }

  static ExperimentConfig from_config(const ConfigFile& file) {
    ExperimentConfig c;
    c.raw = file.raw();
    c.kind = file.require_string("experiment", "kind");
    if (c.kind != "awgn" && c.kind != "mai" && c.kind != "toy" && c.kind != "diag")
      throw ConfigError("config key [experiment] kind: must be awgn, mai, toy or diag");

    // Kind-dependent defaults mirror the reference experiment settings.
    const bool awgn = c.kind == "awgn";
    const bool mai = c.kind == "mai";
    const bool toy = c.kind == "toy";
    c.seed = file.get_seed("experiment", "seed", 1);
    c.n_iters = file.get_long("experiment", "n_iters", awgn ? 100000 : (mai ? 300000 : 100000));
    c.out_dir = file.get_string("experiment", "out", "runs/" + c.kind);

    c.n_users = static_cast<int>(file.get_long("channel", "n_users", awgn ? 10 : (mai ? 5 : 1)));
    if (c.n_users <= 0) throw ConfigError("config key [channel] n_users: must be positive");
    c.p_max = file.get_double("channel", "p_max", 20.0);
    c.noise = file.get_double("channel", "noise", 1.0);
    const std::string weights = file.get_string("channel", "weights", toy ? "uniform" : "random");
    if (weights == "random") {
      c.random_weights = true;
    } else if (weights == "uniform") {
      c.random_weights = false;
      c.weights = constant(static_cast<std::size_t>(c.n_users), 1.0 / c.n_users);
    } else {
      c.random_weights = false;
      c.weights = file.get_vec("channel", "weights", {});
      if (static_cast<int>(c.weights.size()) != c.n_users)
        throw ConfigError("config key [channel] weights: expected n_users entries");
    }
    c.fading_kind = file.get_string("channel", "fading", toy ? "fixed" : "exponential");
    if (c.fading_kind != "exponential" && c.fading_kind != "fixed")
      throw ConfigError("config key [channel] fading: must be exponential or fixed");
    c.fading_rate = file.get_double("channel", "fading_rate", 0.5);
    c.fading_values = file.get_vec("channel", "fading_values",
                                   constant(static_cast<std::size_t>(c.n_users), 1.0));
    if (c.fading_values.size() == 1 && c.n_users > 1)
      c.fading_values = constant(static_cast<std::size_t>(c.n_users), c.fading_values[0]);

    c.policy_kind =
        file.get_string("policy", "kind", awgn ? "per_user" : (mai ? "joint" : "clamp"));
    if (c.policy_kind != "per_user" && c.policy_kind != "joint" && c.policy_kind != "clamp")
      throw ConfigError("config key [policy] kind: must be per_user, joint or clamp");
    c.hidden = file.get_int_list("policy", "hidden",
                                 mai ? std::vector<int>{32, 16} : std::vector<int>{8, 4});
    c.theta_init = file.get_string("policy", "init", "zero");
    if (c.theta_init != "zero" && c.theta_init != "uniform")
      throw ConfigError("config key [policy] init: must be zero or uniform");
    c.init_radius = file.get_double("policy", "init_radius", 0.1);
    c.output_scale = file.get_double("policy", "output_scale", 0.0);
    c.clamp_lo = file.get_double("policy", "clamp_lo", 0.0);
    c.clamp_hi = file.get_double("policy", "clamp_hi", 1.0);

    c.gamma_x = file.get_double("steps", "gamma_x", mai ? 0.0008 : 0.001);
    c.gamma_theta = file.get_double("steps", "gamma_theta", mai ? 0.0005 : 0.0008);
    c.gamma_lambda = file.get_double("steps", "gamma_lambda", mai ? 0.005 : 0.008);
    c.gamma_lambda_budget = file.get_double("steps", "gamma_lambda_budget", 0.0001);
    c.decay = file.get_double("steps", "decay", 0.0);

    c.mu_s = file.get_double("smoothing", "mu_s", 0.0);
    c.mu_r = file.get_double("smoothing", "mu_r", 1e-9);
    c.slack_scale = file.get_double("smoothing", "slack_scale", 0.0);

    c.x_init = file.get_double("init", "x", awgn ? 1.0 : 0.0);
    c.lambda_init = file.get_double("init", "lambda", 1.0);
    // The toy's saddle oscillation has a ~2200-iteration period; averaging
    // over many periods is needed to read off its ergodic value.
    c.window = file.get_long("trace", "window", toy ? 50000 : 2000);
    if (c.window < 1) throw ConfigError("config key [trace] window: must be >= 1");

    c.baseline_mc = static_cast<int>(file.get_long("baselines", "mc", 200000));
    c.wmmse_mc = static_cast<int>(file.get_long("baselines", "wmmse_mc", 4000));
    c.wf_tol = file.get_double("baselines", "tol", 1e-6);

    c.diag_mus = file.get_vec("diag", "mus", Vec{0.1, 0.01, 0.001});

    file.reject_unknown_keys();
    return c;
  }

  // Canonical serialization; parse(to_text(c)) reproduces the struct.
  std::string to_text() const {
    std::string s;
    const auto line = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
    const auto num = [&](const std::string& k, double v) { line(k, fmt_double(v)); };
    s += "[experiment]\n";
    line("kind", kind);
    line("seed", std::to_string(seed));
    line("n_iters", std::to_string(n_iters));
    line("out", out_dir);
    s += "\n[channel]\n";
    line("n_users", std::to_string(n_users));
    num("p_max", p_max);
    num("noise", noise);
    if (random_weights) {
      line("weights", "random");
    } else {
      std::string w;
      for (std::size_t i = 0; i < weights.size(); ++i)
        w += (i ? "," : "") + fmt_double(weights[i]);
      line("weights", w);
    }
    line("fading", fading_kind);
    num("fading_rate", fading_rate);
    {
      std::string fv;
      for (std::size_t i = 0; i < fading_values.size(); ++i)
        fv += (i ? "," : "") + fmt_double(fading_values[i]);
      line("fading_values", fv);
    }
    s += "\n[policy]\n";
    line("kind", policy_kind);
    {
      std::string hl;
      for (std::size_t i = 0; i < hidden.size(); ++i)
        hl += (i ? "," : "") + std::to_string(hidden[i]);
      if (!hidden.empty()) line("hidden", hl);
    }
    line("init", theta_init);
    num("init_radius", init_radius);
    num("output_scale", output_scale);
    num("clamp_lo", clamp_lo);
    num("clamp_hi", clamp_hi);
    s += "\n[steps]\n";
    num("gamma_x", gamma_x);
    num("gamma_theta", gamma_theta);
    num("gamma_lambda", gamma_lambda);
    num("gamma_lambda_budget", gamma_lambda_budget);
    num("decay", decay);
    s += "\n[smoothing]\n";
    num("mu_s", mu_s);
    num("mu_r", mu_r);
    num("slack_scale", slack_scale);
    s += "\n[init]\n";
    num("x", x_init);
    num("lambda", lambda_init);
    s += "\n[trace]\n";
    line("window", std::to_string(window));
    s += "\n[baselines]\n";
    line("mc", std::to_string(baseline_mc));
    line("wmmse_mc", std::to_string(wmmse_mc));
    num("tol", wf_tol);
    s += "\n[diag]\n";
    {
      std::string m;
      for (std::size_t i = 0; i < diag_mus.size(); ++i) m += (i ? "," : "") + fmt_double(diag_mus[i]);
      line("mus", m);
    }
    return s;
  }
};

// A fully assembled experiment, ready to run.
struct Experiment {
  std::string kind;
  SurrogateProblem surrogate;
  StepSizes steps;
  PdState init;
  std::vector<std::string> labels;  // one per service constraint
  ChannelParams params;
  Vec weights;  // objective weights over the free metrics
  bool has_budget_row = false;
  long n_iters = 0;
  std::uint64_t seed = 0;
  long window = 2000;
};

inline Experiment build_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind == "diag")
    throw ConfigError("config key [experiment] kind: diag configs drive the diag command");

  Experiment ex;
  ex.kind = cfg.kind;
  ex.seed = cfg.seed;
  ex.n_iters = cfg.n_iters;
  ex.window = cfg.window;
  const int n = cfg.n_users;
  const SubSeeds seeds = seed_everything(cfg.seed);

  ex.params.noise = constant(static_cast<std::size_t>(n), cfg.noise);
  ex.params.p_max = cfg.p_max;
  ex.params.weights =
      cfg.random_weights ? simplex_weights(n, seeds.weights) : cfg.weights;
  ex.params.validate();
  ex.weights = ex.params.weights;

  ErgodicProblem prob;
  prob.n_x = n;
  prob.n_g = 0;

  if (cfg.fading_kind == "fixed") {
    if (static_cast<int>(cfg.fading_values.size()) != n)
      throw ConfigError("config key [channel] fading_values: expected n_users entries");
    prob.fading = FadingSampler::fixed(cfg.fading_values);
  } else {
    prob.fading = FadingSampler::exponential(n, cfg.fading_rate, seeds.fading);
  }

  // Policy
  if (cfg.policy_kind == "clamp") {
    auto policy = std::make_shared<ClampPolicy>(n, cfg.clamp_lo, cfg.clamp_hi);
    prob.theta_dim = policy->theta_dim();
    prob.policy_forward = [policy](const Vec& h, const Vec& th) { return policy->forward(h, th); };
  } else {
    const double scale = cfg.output_scale > 0.0 ? cfg.output_scale : cfg.p_max;
    std::vector<LayerSpec> layers;
    int in_dim = cfg.policy_kind == "per_user" ? 1 : n;
    for (int width : cfg.hidden) {
      layers.push_back({in_dim, width, Activation::Rectifier});
      in_dim = width;
    }
    layers.push_back({in_dim, cfg.policy_kind == "per_user" ? 1 : n, Activation::Sigmoid});
    auto policy = std::make_shared<DnnPolicy>(
        layers,
        cfg.policy_kind == "per_user" ? DnnPolicy::Structure::PerUser
                                      : DnnPolicy::Structure::Joint,
        n, scale);
    prob.theta_dim = policy->theta_dim();
    prob.policy_forward = [policy](const Vec& h, const Vec& th) { return policy->forward(h, th); };
  }

  // Service composition and constraint labels
  const ChannelParams params = ex.params;
  if (cfg.kind == "toy") {
    ex.has_budget_row = false;
    prob.n_service = n;
    prob.service = [](const Vec& p, const Vec& h) { return hadamard(h, p); };
    for (int i = 0; i < n; ++i) ex.labels.push_back("f_" + std::to_string(i + 1));
  } else {
    ex.has_budget_row = true;
    prob.n_service = n + 1;
    if (cfg.kind == "awgn") {
      prob.service = [params](const Vec& p, const Vec& h) {
        return service_with_budget(awgn_rates, h, p, params);
      };
    } else {
      prob.service = [params](const Vec& p, const Vec& h) {
        return service_with_budget(mai_rates, h, p, params);
      };
    }
    for (int i = 0; i < n; ++i) ex.labels.push_back("rate_" + std::to_string(i + 1));
    ex.labels.push_back("power");
  }

  const Vec w = ex.weights;
  prob.objective = [w](const Vec& x) { return dot(w, x); };
  prob.objective_grad = [w](const Vec&) { return w; };
  prob.x_lower = zeros(static_cast<std::size_t>(n));
  prob.x_upper = constant(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  ex.surrogate.base = prob;
  ex.surrogate.smoothing.mu_s = cfg.mu_s;
  ex.surrogate.smoothing.mu_r = cfg.mu_r;
  ex.surrogate.smoothing.slack_scale =
      constant(static_cast<std::size_t>(prob.n_service), cfg.slack_scale);
  ex.surrogate.validate();

  ex.steps.gamma_x = constant(static_cast<std::size_t>(n), cfg.gamma_x);
  ex.steps.gamma_theta = constant(static_cast<std::size_t>(prob.theta_dim), cfg.gamma_theta);
  ex.steps.gamma_lambda_s = Vec{};
  ex.steps.gamma_lambda_r = constant(static_cast<std::size_t>(n), cfg.gamma_lambda);
  if (ex.has_budget_row) ex.steps.gamma_lambda_r.push_back(cfg.gamma_lambda_budget);
  ex.steps.decay = cfg.decay;

  ex.init.x = constant(static_cast<std::size_t>(n), cfg.x_init);
  if (cfg.theta_init == "uniform") {
    SplitMix64 rng(derive_seed(cfg.seed, "theta-init"));
    ex.init.theta.resize(static_cast<std::size_t>(prob.theta_dim));
    for (double& v : ex.init.theta) v = rng.uniform(-cfg.init_radius, cfg.init_radius);
  } else {
    ex.init.theta = zeros(static_cast<std::size_t>(prob.theta_dim));
  }
  ex.init.lambda_s = Vec{};
  ex.init.lambda_r =
      constant(static_cast<std::size_t>(prob.n_service), cfg.lambda_init);
  return ex;
}

// --- trace persistence ------------------------------------------------------

namespace detail {

inline std::vector<double> inst_sumrate_series(const RunTrace& trace, const Vec& weights,
                                               int n_x) {
  std::vector<double> out;
  out.reserve(trace.rows.size());
  for (const IterRecord& r : trace.rows) {
    double v = 0.0;
    for (int i = 0; i < n_x; ++i)
      v += weights[static_cast<std::size_t>(i)] * r.service[static_cast<std::size_t>(i)];
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

inline void write_trace_csv(const std::string& path, const RunTrace& trace,
                            const std::vector<std::string>& labels, const Vec& weights, int n_x,
                            long window) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw std::runtime_error("cannot open trace output: " + path);

  out << "iter,objective,sumrate_inst,sumrate_erg";
  for (const std::string& l : labels) out << ",viol_inst_" << l;
  for (const std::string& l : labels) out << ",viol_erg_" << l;
  for (const std::string& l : labels) out << ",lambda_" << l;
  out << ",probes\n";

  const std::vector<double> inst = detail::inst_sumrate_series(trace, weights, n_x);
  const std::vector<double> erg = ergodic_average(inst, window);
  std::vector<std::vector<double>> viol_erg(labels.size());
  for (std::size_t c = 0; c < labels.size(); ++c) {
    viol_erg[c] = ergodic_average(
        trace.column([c](const IterRecord& r) { return r.violation[c]; }), window);
  }

  for (std::size_t t = 0; t < trace.rows.size(); ++t) {
    const IterRecord& r = trace.rows[t];
    out << r.iter << ',' << fmt_double(r.objective) << ',' << fmt_double(inst[t]) << ','
        << fmt_double(erg[t]);
    for (std::size_t c = 0; c < labels.size(); ++c) out << ',' << fmt_double(r.violation[c]);
    for (std::size_t c = 0; c < labels.size(); ++c) out << ',' << fmt_double(viol_erg[c][t]);
    for (std::size_t c = 0; c < labels.size(); ++c) out << ',' << fmt_double(r.lambda_r[c]);
    out << ',' << r.probes << '\n';
  }
}

// Long-format figure data: iter,series,value. `which` selects the panel.
inline void emit_figure_data(const std::string& path, const RunTrace& trace,
                             const std::string& which, const Vec& weights, long window, int n_x,
                             bool has_budget_row) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open figure output: " + path);
  out << "iter,series,value\n";
  const auto emit = [&](const char* series, const std::vector<double>& vals) {
    for (std::size_t t = 0; t < vals.size(); ++t)
      out << trace.rows[t].iter << ',' << series << ',' << fmt_double(vals[t]) << '\n';
  };

  if (which == "sumrate") {
    const std::vector<double> inst = detail::inst_sumrate_series(trace, weights, n_x);
    emit("objective", trace.column([](const IterRecord& r) { return r.objective; }));
    emit("instantaneous", inst);
    emit("ergodic", ergodic_average(inst, window));
    return;
  }
  if (which == "rate_violation") {
    for (int i = 0; i < n_x; ++i) {
      const std::size_t c = static_cast<std::size_t>(i);
      const std::vector<double> inst =
          trace.column([c](const IterRecord& r) { return r.violation[c]; });
      const std::string tag = "rate_" + std::to_string(i + 1);
      emit((tag + "_inst").c_str(), inst);
      emit((tag + "_erg").c_str(), ergodic_average(inst, window));
    }
    emit("zero", std::vector<double>(trace.rows.size(), 0.0));
    return;
  }
  if (which == "power_violation") {
    if (!has_budget_row)
      throw std::invalid_argument("emit_figure_data: no power constraint in this experiment");
    const std::size_t c = static_cast<std::size_t>(n_x);
    const std::vector<double> inst =
        trace.column([c](const IterRecord& r) { return r.violation[c]; });
    emit("power_inst", inst);
    emit("power_erg", ergodic_average(inst, window));
    emit("zero", std::vector<double>(trace.rows.size(), 0.0));
    return;
  }
  throw std::invalid_argument("emit_figure_data: unknown series name: " + which);
}

// --- full experiment run ------------------------------------------------------

struct RunSummary {
  std::string kind;
  std::uint64_t seed = 0;
  long n_iters = 0;
  std::uint64_t probes = 0;
  Vec weights;
  std::vector<std::string> labels;

  double learned_sumrate = std::numeric_limits<double>::quiet_NaN();
  double final_objective = std::numeric_limits<double>::quiet_NaN();
  double clairvoyant = std::numeric_limits<double>::quiet_NaN();
  double clairvoyant_se = 0.0;
  double uniform_val = std::numeric_limits<double>::quiet_NaN();
  double uniform_se = 0.0;
  double wmmse_val = std::numeric_limits<double>::quiet_NaN();
  double wmmse_se = 0.0;
  double toy_optimum = std::numeric_limits<double>::quiet_NaN();

  Vec violation_final;  // per constraint: mean violation over the final 10%
  double violation_final_max_abs = 0.0;

  bool aborted = false;
  long abort_iter = -1;
  std::string out_dir;
};

namespace detail {

inline void write_summary(const std::string& path, const RunSummary& s,
                          const ExperimentConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open summary output: " + path);
  const SubSeeds seeds = seed_everything(cfg.seed);
  out << "# zopd run summary\n";
  out << "kind = " << s.kind << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "sub_seed.fading = " << seeds.fading << "\n";
  out << "sub_seed.gauss_s = " << seeds.gauss_s << "\n";
  out << "sub_seed.gauss_r = " << seeds.gauss_r << "\n";
  out << "sub_seed.weights = " << seeds.weights << "\n";
  out << "sub_seed.baseline = " << seeds.baseline << "\n";
  out << "n_iters = " << s.n_iters << "\n";
  out << "probes = " << s.probes << "\n";
  {
    std::string w;
    for (std::size_t i = 0; i < s.weights.size(); ++i) w += (i ? "," : "") + fmt_double(s.weights[i]);
    out << "weights = " << w << "\n";
  }
  out << "status = " << (s.aborted ? "aborted_at_iter_" + std::to_string(s.abort_iter) : "ok")
      << "\n";
  out << "learned_ergodic_sumrate = " << fmt_double(s.learned_sumrate) << "\n";
  out << "final_objective = " << fmt_double(s.final_objective) << "\n";
  if (!std::isnan(s.clairvoyant))
    out << "clairvoyant_sumrate = " << fmt_double(s.clairvoyant) << " (se "
        << fmt_double(s.clairvoyant_se) << ")\n";
  if (!std::isnan(s.uniform_val))
    out << "uniform_sumrate = " << fmt_double(s.uniform_val) << " (se "
        << fmt_double(s.uniform_se) << ")\n";
  if (!std::isnan(s.wmmse_val))
    out << "wmmse_sumrate = " << fmt_double(s.wmmse_val) << " (se " << fmt_double(s.wmmse_se)
        << ")\n";
  if (!std::isnan(s.toy_optimum)) out << "known_optimum = " << fmt_double(s.toy_optimum) << "\n";
  for (std::size_t c = 0; c < s.labels.size(); ++c)
    out << "violation_final10pct." << s.labels[c] << " = " << fmt_double(s.violation_final[c])
        << "\n";
  out << "violation_final10pct.max_abs = " << fmt_double(s.violation_final_max_abs) << "\n";
  out << "\n# --- config (verbatim) ---\n";
  out << cfg.raw;
  if (!cfg.raw.empty() && cfg.raw.back() != '\n') out << "\n";
}

inline void finish_summary_from_trace(RunSummary& s, const Experiment& ex,
                                      const RunTrace& trace) {
  s.violation_final = zeros(ex.labels.size());
  if (trace.rows.empty()) return;
  const std::vector<double> inst =
      inst_sumrate_series(trace, ex.weights, ex.surrogate.base.n_x);
  const std::vector<double> erg = ergodic_average(inst, ex.window);
  s.learned_sumrate = erg.back();
  const std::vector<double> obj_erg = ergodic_average(
      trace.column([](const IterRecord& r) { return r.objective; }), ex.window);
  s.final_objective = obj_erg.back();
  s.probes = trace.rows.back().probes;

  const std::size_t n_rows = trace.rows.size();
  const std::size_t tail = std::max<std::size_t>(1, n_rows / 10);
  for (std::size_t c = 0; c < ex.labels.size(); ++c) {
    double acc = 0.0;
    for (std::size_t t = n_rows - tail; t < n_rows; ++t) acc += trace.rows[t].violation[c];
    s.violation_final[c] = acc / static_cast<double>(tail);
  }
  s.violation_final_max_abs = max_abs(s.violation_final);
}

}  // namespace detail

// Build, run, evaluate baselines, persist. On a numerical abort the partial
// trace and summary are persisted before the abort is rethrown.
inline RunSummary run_experiment(const ExperimentConfig& cfg) {
  const Experiment ex = build_experiment(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  RunSummary summary;
  summary.kind = ex.kind;
  summary.seed = cfg.seed;
  summary.n_iters = ex.n_iters;
  summary.weights = ex.weights;
  summary.labels = ex.labels;
  summary.out_dir = cfg.out_dir;

  RunTrace trace;
  RunTrace partial;
  try {
    trace = run(ex.surrogate, ex.steps, ex.init, ex.n_iters, cfg.seed, &partial);
  } catch (const NumericalAbort& abort) {
    summary.aborted = true;
    summary.abort_iter = abort.iteration();
    detail::finish_summary_from_trace(summary, ex, partial);
    if (!partial.rows.empty())
      write_trace_csv(cfg.out_dir + "/trace.csv", partial, ex.labels, ex.weights,
                      ex.surrogate.base.n_x, ex.window);
    detail::write_summary(cfg.out_dir + "/summary.txt", summary, cfg);
    throw;
  }

  detail::finish_summary_from_trace(summary, ex, trace);

  // Model-aware baselines, evaluated on common seeds.
  const SubSeeds seeds = seed_everything(cfg.seed);
  if (ex.kind == "awgn") {
    FadingSampler fading = ex.surrogate.base.fading;
    fading.reseed(seeds.baseline);
    const WaterfillingSolution wf = clairvoyant_awgn(ex.params, fading, cfg.baseline_mc, cfg.wf_tol);
    summary.clairvoyant = wf.ergodic.sumrate;
    summary.clairvoyant_se = wf.ergodic.sumrate_se;
    fading.reseed(seeds.baseline);
    const Vec uni = uniform_policy(ex.params);
    const ErgodicEstimate ue = ergodic_eval([&uni](const Vec&) { return uni; }, awgn_rates,
                                            ex.params, fading, cfg.baseline_mc);
    summary.uniform_val = ue.sumrate;
    summary.uniform_se = ue.sumrate_se;
  } else if (ex.kind == "mai") {
    FadingSampler fading = ex.surrogate.base.fading;
    fading.reseed(seeds.baseline);
    const Vec uni = uniform_policy(ex.params);
    const ErgodicEstimate ue = ergodic_eval([&uni](const Vec&) { return uni; }, mai_rates,
                                            ex.params, fading, cfg.baseline_mc);
    summary.uniform_val = ue.sumrate;
    summary.uniform_se = ue.sumrate_se;
    fading.reseed(seeds.baseline);
    const ChannelParams params = ex.params;
    const ErgodicEstimate we = ergodic_eval(
        [&params](const Vec& h) { return wmmse_powers(h, params).powers; }, mai_rates, ex.params,
        fading, cfg.wmmse_mc);
    summary.wmmse_val = we.sumrate;
    summary.wmmse_se = we.sumrate_se;
  } else if (ex.kind == "toy") {
    summary.toy_optimum = 1.0;
  }

  write_trace_csv(cfg.out_dir + "/trace.csv", trace, ex.labels, ex.weights,
                  ex.surrogate.base.n_x, ex.window);
  emit_figure_data(cfg.out_dir + "/fig_sumrate.csv", trace, "sumrate", ex.weights, ex.window,
                   ex.surrogate.base.n_x, ex.has_budget_row);
  emit_figure_data(cfg.out_dir + "/fig_rate_violation.csv", trace, "rate_violation", ex.weights,
                   ex.window, ex.surrogate.base.n_x, ex.has_budget_row);
  if (ex.has_budget_row)
    emit_figure_data(cfg.out_dir + "/fig_power_violation.csv", trace, "power_violation",
                     ex.weights, ex.window, ex.surrogate.base.n_x, ex.has_budget_row);
  detail::write_summary(cfg.out_dir + "/summary.txt", summary, cfg);
  return summary;
}

// Baseline-only evaluation (the `baselines` command).
struct BaselineReport {
  double clairvoyant = std::numeric_limits<double>::quiet_NaN();
  double clairvoyant_se = 0.0;
  double clairvoyant_lambda = std::numeric_limits<double>::quiet_NaN();
  double uniform_val = std::numeric_limits<double>::quiet_NaN();
  double uniform_se = 0.0;
  double wmmse_val = std::numeric_limits<double>::quiet_NaN();
  double wmmse_se = 0.0;
};

inline BaselineReport run_baselines(const ExperimentConfig& cfg) {
  const Experiment ex = build_experiment(cfg);
  const SubSeeds seeds = seed_everything(cfg.seed);
  BaselineReport rep;
  FadingSampler fading = ex.surrogate.base.fading;
  const Vec uni = uniform_policy(ex.params);
  if (ex.kind == "awgn") {
    fading.reseed(seeds.baseline);
    const WaterfillingSolution wf = clairvoyant_awgn(ex.params, fading, cfg.baseline_mc, cfg.wf_tol);
    rep.clairvoyant = wf.ergodic.sumrate;
    rep.clairvoyant_se = wf.ergodic.sumrate_se;
    rep.clairvoyant_lambda = wf.lambda_star;
    fading.reseed(seeds.baseline);
    const ErgodicEstimate ue = ergodic_eval([&uni](const Vec&) { return uni; }, awgn_rates,
                                            ex.params, fading, cfg.baseline_mc);
    rep.uniform_val = ue.sumrate;
    rep.uniform_se = ue.sumrate_se;
  } else if (ex.kind == "mai") {
    fading.reseed(seeds.baseline);
    const ErgodicEstimate ue = ergodic_eval([&uni](const Vec&) { return uni; }, mai_rates,
                                            ex.params, fading, cfg.baseline_mc);
    rep.uniform_val = ue.sumrate;
    rep.uniform_se = ue.sumrate_se;
    fading.reseed(seeds.baseline);
    const ChannelParams params = ex.params;
    const ErgodicEstimate we = ergodic_eval(
        [&params](const Vec& h) { return wmmse_powers(h, params).powers; }, mai_rates, ex.params,
        fading, cfg.wmmse_mc);
    rep.wmmse_val = we.sumrate;
    rep.wmmse_se = we.sumrate_se;
  } else {
    throw ConfigError("baselines command supports awgn and mai experiments");
  }
  return rep;
}

// Dual-domain diagnostics on the analytic fixtures (the `diag` command).
struct DiagOutcome {
  SandwichResult affine;
  SandwichResult quadratic;
  GapStudy gap_zero_slack;      // C = 0
  GapStudy gap_covering_slack;  // C >= c_r
  bool ok = false;
};

inline DiagOutcome run_diag(const ExperimentConfig& cfg) {
  DiagOutcome out;
  SmoothingConfig sm;
  sm.mu_s = 0.1;
  sm.mu_r = 0.1;

  const AnalyticFixture affine = affine_fixture();
  sm.slack_scale = constant(static_cast<std::size_t>(affine.n_service), 0.3);
  out.affine = check_sandwich(affine, sm, 1000, cfg.seed);

  const AnalyticFixture quad = quadratic_fixture();
  sm.slack_scale = constant(static_cast<std::size_t>(quad.n_service), 0.3);
  out.quadratic = check_sandwich(quad, sm, 1000, cfg.seed);

  const AnalyticFixture toy = clamp_toy_fixture();
  std::vector<Vec> lambda_grid;
  for (int k = 0; k <= 200; ++k) lambda_grid.push_back(Vec{k * 0.01});
  GridSpec grid;
  grid.x_points = 201;
  grid.theta_points = 101;
  out.gap_zero_slack = dual_gap_study(toy, Vec{0.0}, cfg.diag_mus, lambda_grid, grid);
  out.gap_covering_slack = dual_gap_study(toy, Vec{1.5}, cfg.diag_mus, lambda_grid, grid);

  bool gaps_ok = true;
  for (const GapReport& r : out.gap_zero_slack.reports) gaps_ok = gaps_ok && r.sandwich_ok;
  for (const GapReport& r : out.gap_covering_slack.reports)
    gaps_ok = gaps_ok && r.sandwich_ok && r.gap <= 1e-9;
  out.ok = out.affine.ok && out.quadratic.ok && gaps_ok &&
           out.gap_zero_slack.r_squared >= 0.9;

  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream csv(cfg.out_dir + "/gap_report.csv", std::ios::binary);
  csv << "slack,mu,d_mu_star,d_star,gap,gamma_l,gamma_r,within_bracket\n";
  const auto dump = [&](const char* tag, const GapStudy& study) {
    for (const GapReport& r : study.reports) {
      csv << tag << ',' << fmt_double(r.mu) << ',' << fmt_double(r.d_mu_star) << ','
          << fmt_double(r.d_star) << ',' << fmt_double(r.gap) << ',' << fmt_double(r.gamma_l)
          << ',' << fmt_double(r.gamma_r) << ',' << (r.sandwich_ok ? 1 : 0) << '\n';
    }
  };
  dump("zero", out.gap_zero_slack);
  dump("covering", out.gap_covering_slack);
  return out;
}

}  // namespace zopd
