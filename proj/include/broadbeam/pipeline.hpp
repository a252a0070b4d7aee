#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "broadbeam/config.hpp"
#include "broadbeam/hybrid.hpp"
#include "broadbeam/papr.hpp"
#include "broadbeam/synthesis.hpp"

namespace broadbeam {

/// A pipeline stage failed; `stage()` names it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct LabelledWeights {
  std::string label;
  CVector weights;
};

/// index,re,im with 17 significant digits.
void write_weights_csv(std::ostream& os, const CVector& w);
CVector read_weights_csv(std::istream& is);
void save_weights(const std::filesystem::path& path, const CVector& w);
CVector load_weights(const std::filesystem::path& path);

/// Each stage writes its artifacts into `dir` and returns the in-memory result.
void stage_ideal(const PipelineConfig& c, const std::filesystem::path& dir);

struct SynthesisStage {
  SynthesisReport report;
  std::optional<P4SearchResult> p4;
};
/// w1.csv, synthesis_trace.csv and, when p4_inits > 0, p4.csv. The trace
/// carries wall-clock times only when `timing` is set.
SynthesisStage stage_synthesize(const PipelineConfig& c, const std::filesystem::path& dir, bool timing = false);
/// synthesis_trace.csv body: delta_t,sigma,g_min,inner_iters[,wall_ms].
void write_trace_csv(std::ostream& os, const SynthesisReport& r, bool timing);

CVector stage_baseline_zc(const PipelineConfig& c, const std::filesystem::path& dir);

/// papr_candidates.csv and w2.csv. Q is capped at M - 1.
PaprSearch stage_papr(const PipelineConfig& c, const CVector& w, const std::filesystem::path& dir);

/// hybrid.json.
HybridFactorization stage_hybrid(const PipelineConfig& c, const CVector& w, const std::filesystem::path& dir);

/// outage_report.csv (worst case per PAS family with a Monte Carlo check at
/// rho*) and outage_sweep.csv (closed-form outage over the rho grid).
void stage_outage(const PipelineConfig& c, const std::vector<LabelledWeights>& ws, const std::filesystem::path& dir);

/// beampattern.csv: x then one column per beamformer on the dense grid over
/// the whole spatial-frequency range.
void stage_beampattern(const PipelineConfig& c, const std::vector<LabelledWeights>& ws,
                       const std::filesystem::path& dir);

struct PipelineSummary {
  double xi_star = 0.0;
  double g_min_proposed = 0.0;
  double g_min_zc = 0.0;
  std::optional<double> g_min_p4;
  double stop_max = 0.0;
  double papr_w1 = 0.0;
  double papr_w2 = 0.0;
  double hybrid_error = 0.0;
};

/// Runs every stage in order. Failures surface as StageError.
PipelineSummary run_pipeline(const PipelineConfig& c, const std::filesystem::path& dir, bool timing = false);

}  // namespace broadbeam
