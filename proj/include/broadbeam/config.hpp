#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "broadbeam/array_geometry.hpp"
#include "broadbeam/outage.hpp"
#include "broadbeam/synthesis.hpp"

namespace broadbeam {

/// Flat configuration for the whole pipeline. Angles are degrees here and
/// are converted once by the accessors below.
struct PipelineConfig {
  // [array]
  int antennas = 64;
  double spacing = 0.5;
  double radiating_lo_deg = -90.0;
  double radiating_hi_deg = 90.0;
  double sector_lo_deg = -30.0;
  double sector_hi_deg = 30.0;
  int rf_chains = 4;

  // [synthesis]
  int grid_density = 3;
  double r_s_ratio = 1e-3;
  double delta_t_max_deg = 4.0;
  double delta_t_step_deg = 0.5;
  double inner_tol = 1e-5;
  int max_inner = 50;
  int eval_density = 10;
  unsigned threads = 1;
  int p4_inits = 10;  ///< 0 skips the random-start P4 baseline
  std::uint64_t p4_seed = 1;

  // [papr]
  int q = 8;
  std::uint64_t papr_seed = 1;

  // [outage]
  double rate = 1.0;
  double max_outage = 0.01;
  std::int64_t trials = 100000;
  std::uint64_t outage_seed = 1;
  double window_deg = 5.0;
  double rho_db_min = -10.0;
  double rho_db_max = 30.0;
  double rho_db_step = 1.0;
  unsigned workers = 1;

  // [output]
  std::string out_dir = "out";

  bool operator==(const PipelineConfig&) const = default;
};

/// Throws std::invalid_argument whose message starts with "section.key".
void validate(const PipelineConfig& c);

/// Reads INI text. Missing keys keep their defaults; unknown keys are errors.
PipelineConfig read_config(std::istream& is);
PipelineConfig load_config(const std::string& path);
void write_config(std::ostream& os, const PipelineConfig& c);

/// Applies "section.key=value".
void apply_override(PipelineConfig& c, const std::string& assignment);

ArrayConfig array_config(const PipelineConfig& c);
/// Converts the angular transition parameters to spatial frequency: the
/// maximum via angular_to_spatial_width, the step in the same proportion.
SynthesisProblem synthesis_problem(const PipelineConfig& c);
SynthesisOptions synthesis_options(const PipelineConfig& c);

}  // namespace broadbeam
