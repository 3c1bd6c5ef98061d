// zopd — zeroth-order primal-dual resource allocation harness.
//
//   zopd run       --config <path> [--seed N] [--out DIR] [--replicates K]
//   zopd diag      --config <path> [--seed N] [--out DIR]
//   zopd baselines --config <path> [--seed N]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical abort.

#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "zopd/zopd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
};

zopd::ExperimentConfig load_config(const CommonOpts& opts) {
  zopd::ExperimentConfig cfg = zopd::ExperimentConfig::from_file(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  return cfg;
}

void print_summary(const zopd::RunSummary& s) {
  std::printf("experiment %s: %ld iterations, %llu probes\n", s.kind.c_str(), s.n_iters,
              static_cast<unsigned long long>(s.probes));
  std::printf("  learned ergodic sumrate  %.6f\n", s.learned_sumrate);
  if (!std::isnan(s.clairvoyant))
    std::printf("  clairvoyant sumrate      %.6f (se %.2g)\n", s.clairvoyant, s.clairvoyant_se);
  if (!std::isnan(s.uniform_val))
    std::printf("  uniform sumrate          %.6f (se %.2g)\n", s.uniform_val, s.uniform_se);
  if (!std::isnan(s.wmmse_val))
    std::printf("  wmmse sumrate            %.6f (se %.2g)\n", s.wmmse_val, s.wmmse_se);
  if (!std::isnan(s.toy_optimum)) std::printf("  known optimum            %.6f\n", s.toy_optimum);
  std::printf("  |violation| over final 10%%: max %.4g\n", s.violation_final_max_abs);
  std::printf("  outputs in %s\n", s.out_dir.c_str());
}

int cmd_run(const CommonOpts& opts, int replicates) {
  const zopd::ExperimentConfig base = load_config(opts);
  if (replicates <= 1) {
    print_summary(zopd::run_experiment(base));
    return kExitOk;
  }
  // Independent replicate seeds, isolated state, one output dir per seed.
  std::vector<zopd::ExperimentConfig> cfgs;
  for (int k = 0; k < replicates; ++k) {
    zopd::ExperimentConfig c = base;
    c.seed = base.seed + static_cast<std::uint64_t>(k);
    c.out_dir = base.out_dir + "_r" + std::to_string(k);
    cfgs.push_back(std::move(c));
  }
  std::vector<zopd::RunSummary> summaries(cfgs.size());
  std::vector<std::exception_ptr> errors(cfgs.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < cfgs.size(); ++k) {
    pool.emplace_back([&, k] {
      try {
        summaries[k] = zopd::run_experiment(cfgs[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (std::size_t k = 0; k < cfgs.size(); ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    std::printf("[replicate %zu, seed %llu]\n", k,
                static_cast<unsigned long long>(cfgs[k].seed));
    print_summary(summaries[k]);
  }
  return kExitOk;
}

int cmd_diag(const CommonOpts& opts) {
  zopd::ExperimentConfig cfg = load_config(opts);
  const zopd::DiagOutcome diag = zopd::run_diag(cfg);
  std::printf("sandwich (affine):    %s  worst margins %.3g / %.3g\n",
              diag.affine.ok ? "ok" : "VIOLATED", diag.affine.worst_left_margin,
              diag.affine.worst_right_margin);
  std::printf("sandwich (quadratic): %s  worst margins %.3g / %.3g\n",
              diag.quadratic.ok ? "ok" : "VIOLATED", diag.quadratic.worst_left_margin,
              diag.quadratic.worst_right_margin);
  const auto print_study = [](const char* tag, const zopd::GapStudy& study) {
    std::printf("dual gap study (%s slack): d* = %.6f, fit slope %.4f, R^2 %.4f\n", tag,
                study.d_star, study.fit_slope, study.r_squared);
    for (const zopd::GapReport& r : study.reports)
      std::printf("  mu %-8g gap %-12.6g bracket [%.6g, %.6g] %s\n", r.mu, r.gap, -r.gamma_l,
                  r.gamma_r, r.sandwich_ok ? "ok" : "VIOLATED");
  };
  print_study("zero", diag.gap_zero_slack);
  print_study("covering", diag.gap_covering_slack);
  std::printf("gap report written to %s/gap_report.csv\n", cfg.out_dir.c_str());
  std::printf("diagnostics %s\n", diag.ok ? "PASS" : "FAIL");
  return diag.ok ? kExitOk : 1;
}

int cmd_baselines(const CommonOpts& opts) {
  const zopd::ExperimentConfig cfg = load_config(opts);
  const zopd::BaselineReport rep = zopd::run_baselines(cfg);
  if (!std::isnan(rep.clairvoyant))
    std::printf("clairvoyant sumrate %.6f (se %.2g), dual price %.6g\n", rep.clairvoyant,
                rep.clairvoyant_se, rep.clairvoyant_lambda);
  if (!std::isnan(rep.uniform_val))
    std::printf("uniform sumrate     %.6f (se %.2g)\n", rep.uniform_val, rep.uniform_se);
  if (!std::isnan(rep.wmmse_val))
    std::printf("wmmse sumrate       %.6f (se %.2g)\n", rep.wmmse_val, rep.wmmse_se);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model-free zeroth-order primal-dual resource allocation"};
  app.require_subcommand(1);

  CommonOpts opts;
  int replicates = 1;

  const auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--config", opts.config_path, "experiment config file")->required();
    cmd->add_option("--seed", opts.seed, "override the config seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    if (with_out) cmd->add_option("--out", opts.out_dir, "override the output directory");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run a learning experiment");
  add_common(run_cmd, true);
  run_cmd->add_option("--replicates", replicates, "run K seeds concurrently")
      ->check(CLI::PositiveNumber);

  CLI::App* diag_cmd = app.add_subcommand("diag", "dual-domain diagnostics suite");
  add_common(diag_cmd, true);

  CLI::App* base_cmd = app.add_subcommand("baselines", "evaluate model-aware baselines");
  add_common(base_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(opts, replicates);
    if (diag_cmd->parsed()) return cmd_diag(opts);
    if (base_cmd->parsed()) return cmd_baselines(opts);
  } catch (const zopd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const zopd::NumericalAbort& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
