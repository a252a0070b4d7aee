#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "broadbeam/config.hpp"
#include "broadbeam/pipeline.hpp"

namespace fs = std::filesystem;
using namespace broadbeam;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "INI configuration file");
  app->add_option("--out", c.out_dir, "Output directory (overrides output.dir)");
  app->add_option("--seed", c.seed, "Seed for the PAPR, P4 and outage streams");
  app->add_option("--set", c.overrides, "Override a key, e.g. --set array.antennas=32")->take_all();
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg;
  try {
    if (!c.config_path.empty()) cfg = load_config(c.config_path);
    for (const auto& o : c.overrides) apply_override(cfg, o);
    if (c.seed) cfg.papr_seed = cfg.p4_seed = cfg.outage_seed = *c.seed;
    if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
    validate(cfg);
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  return cfg;
}

// "label=path" or "path" (label = file stem).
LabelledWeights parse_weights(const std::string& spec) {
  const auto eq = spec.find('=');
  const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
  const std::string label = eq == std::string::npos ? fs::path(path).stem().string() : spec.substr(0, eq);
  try {
    return {label, load_weights(path)};
  } catch (const std::exception& e) {
    throw StageError("input", e.what());
  }
}

void check_length(const PipelineConfig& cfg, const CVector& w) {
  if (w.size() != cfg.antennas)
    throw StageError("input", fmt::format("weights have {} entries but array.antennas is {}", w.size(), cfg.antennas));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broadbeam beamformer synthesis for massive-MIMO public channels"};
  app.require_subcommand(1);

  Common common;
  bool timing = false;
  std::string weights_path;
  std::vector<std::string> weight_specs;

  auto* ideal = app.add_subcommand("ideal", "Write ideal_level.json");
  add_common(ideal, common);

  auto* synth = app.add_subcommand("synthesize", "Run the transition-width search and the random-start P4 baseline");
  add_common(synth, common);
  synth->add_flag("--timing", timing, "Add wall-clock times to synthesis_trace.csv");

  auto* zc = app.add_subcommand("baseline-zc", "Write the Zadoff-Chu beamformer to zc.csv");
  add_common(zc, common);

  auto* papr = app.add_subcommand("papr", "Root-flip PAPR reduction of a beamformer");
  add_common(papr, common);
  papr->add_option("--weights", weights_path, "Input weights CSV (index,re,im)")->required();

  auto* hybrid = app.add_subcommand("hybrid", "Hybrid analog/digital decomposition");
  add_common(hybrid, common);
  hybrid->add_option("--weights", weights_path, "Input weights CSV (index,re,im)")->required();

  auto* outage = app.add_subcommand("outage", "Worst-case outage and minimum power");
  add_common(outage, common);
  outage->add_option("--weights", weight_specs, "[label=]path, repeatable")->required();

  auto* pattern = app.add_subcommand("beampattern", "Dense-grid beampattern table");
  add_common(pattern, common);
  pattern->add_option("--weights", weight_specs, "[label=]path, repeatable")->required();

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage");
  add_common(pipeline, common);
  pipeline->add_flag("--timing", timing, "Add wall-clock times to synthesis_trace.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg = resolve(common);
    const fs::path dir = cfg.out_dir;
    if (ideal->parsed()) {
      stage_ideal(cfg, dir);
    } else if (synth->parsed()) {
      const auto s = stage_synthesize(cfg, dir, timing);
      std::cout << fmt::format("g_min {:.6f} at delta_t {:.6f}\n", s.report.g_min, s.report.best_delta_t);
    } else if (zc->parsed()) {
      stage_baseline_zc(cfg, dir);
    } else if (papr->parsed()) {
      const CVector w = parse_weights(weights_path).weights;
      check_length(cfg, w);
      const auto s = stage_papr(cfg, w, dir);
      std::cout << fmt::format("papr {:.6f} -> {:.6f}\n", s.original_papr, s.best.papr);
    } else if (hybrid->parsed()) {
      const CVector w = parse_weights(weights_path).weights;
      check_length(cfg, w);
      stage_hybrid(cfg, w, dir);
    } else if (outage->parsed() || pattern->parsed()) {
      std::vector<LabelledWeights> ws;
      for (const auto& s : weight_specs) {
        ws.push_back(parse_weights(s));
        check_length(cfg, ws.back().weights);
      }
      if (outage->parsed())
        stage_outage(cfg, ws, dir);
      else
        stage_beampattern(cfg, ws, dir);
    } else if (pipeline->parsed()) {
      const auto s = run_pipeline(cfg, dir, timing);
      std::cout << fmt::format("xi* {:.6f}  g_min proposed {:.6f}  zc {:.6f}", s.xi_star, s.g_min_proposed,
                               s.g_min_zc);
      if (s.g_min_p4) std::cout << fmt::format("  p4 {:.6f}", *s.g_min_p4);
      std::cout << fmt::format("\nstop max {:.6g}  papr {:.4f} -> {:.4f}  hybrid error {:.3g}\n", s.stop_max,
                               s.papr_w1, s.papr_w2, s.hybrid_error);
    }
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
