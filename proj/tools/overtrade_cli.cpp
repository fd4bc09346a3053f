// Command-line front end: one subcommand per pipeline stage, plus `run` for
// the whole chain and `synth` for a seeded synthetic dataset.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "overtrade/pipeline.hpp"
#include "overtrade/synth.hpp"

namespace fs = std::filesystem;
using namespace overtrade;

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("-c,--config", flags.config, "pipeline config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", flags.overrides, "override a config key, as key=value (repeatable)");
  cmd->add_option("--seed", flags.seed, "random seed");
  cmd->add_option("--out-dir", flags.out_dir, "artifact directory");
  cmd->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
}

pipeline::PipelineConfig resolve_config(const CommonFlags& flags) {
  auto config = pipeline::load_config(flags.config);
  const auto cwd = fs::current_path();
  for (const auto& o : flags.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Config, "--set expects key=value, got " + o);
    config.set(o.substr(0, eq), o.substr(eq + 1), cwd);
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out_dir) config.set("out_dir", *flags.out_dir, cwd);
  if (flags.threads) config.threads = *flags.threads;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forum sentiment and intraday excess turnover pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;
  using Stage = std::function<void(const pipeline::PipelineConfig&)>;
  const std::vector<std::tuple<std::string, std::string, Stage>> stages = {
      {"ingest", "load and clean posts, trades and reference data", pipeline::run_ingest},
      {"sentiment", "score posts and build the hourly sentiment index", pipeline::run_sentiment},
      {"metrics", "slot turnover and excess turnover per investor class", pipeline::run_metrics},
      {"regimes", "date bull and bear phases of both exchange indices", pipeline::run_regimes},
      {"panel", "join sentiment, turnover, regimes and fundamentals", pipeline::run_panel},
      {"regress", "fit every table cell and write the reports", pipeline::run_regress},
      {"describe", "descriptive statistics of the panel", pipeline::run_describe},
      {"run", "all stages in order", pipeline::run_pipeline},
  };
  Stage chosen;
  for (const auto& [name, help, fn] : stages) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, flags);
    cmd->callback([&chosen, fn = fn] { chosen = fn; });
  }

  synth::SynthConfig synth_cfg;
  std::string synth_out;
  std::optional<double> beta;
  std::optional<double> alpha;
  bool no_cleaning_rows = false;
  auto* synth_cmd = app.add_subcommand("synth", "write a seeded synthetic dataset and its config");
  synth_cmd->add_option("--out-dir", synth_out, "dataset directory")->required();
  synth_cmd->add_option("--seed", synth_cfg.seed, "random seed")->capture_default_str();
  synth_cmd->add_option("--stocks", synth_cfg.stocks, "regular stocks")->capture_default_str();
  synth_cmd->add_option("--days", synth_cfg.days, "trading days")->capture_default_str();
  synth_cmd->add_option("--beta", beta, "planted slope for both investor classes");
  synth_cmd->add_option("--beta-inst", synth_cfg.beta_inst, "planted institutional slope")->capture_default_str();
  synth_cmd->add_option("--beta-retail", synth_cfg.beta_retail, "planted retail slope")->capture_default_str();
  synth_cmd->add_option("--alpha", alpha, "planted intercept for both investor classes");
  synth_cmd->add_option("--noise", synth_cfg.noise, "excess turnover noise scale")->capture_default_str();
  synth_cmd->add_option("--threads", synth_cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  synth_cmd->add_flag("--no-cleaning-rows", no_cleaning_rows, "omit rows meant to be rejected or filtered");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      if (beta) synth_cfg.beta_inst = synth_cfg.beta_retail = *beta;
      if (alpha) synth_cfg.alpha_inst = synth_cfg.alpha_retail = *alpha;
      synth_cfg.cleaning_rows = !no_cleaning_rows;
      const auto summary = synth::generate_synthetic(synth_cfg, synth_out);
      fmt::print("wrote {} posts and {} trades; config {}\n", summary.posts, summary.trades,
                 summary.config.string());
      return 0;
    }
    pipeline::PipelineConfig config;
    try {
      config = resolve_config(flags);
    } catch (const Error& e) {
      throw pipeline::StageError("config", e);
    }
    chosen(config);
    fmt::print("artifacts in {}\n", config.out_dir.string());
    return 0;
  } catch (const pipeline::StageError& e) {
    fmt::print(stderr, "overtrade: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "overtrade: {}\n", e.what());
    return 1;
  }
}
