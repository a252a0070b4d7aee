#include "broadbeam/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "broadbeam/papr.hpp"

namespace broadbeam {

namespace {

namespace pt = boost::property_tree;

struct Field {
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  is >> v;
  if (!is || !(is >> std::ws).eof()) throw std::invalid_argument(fmt::format("{}: cannot parse '{}'", key, text));
  return v;
}

template <class T>
Field field(T PipelineConfig::*member, const std::string& key) {
  return {[member, key](PipelineConfig& c, const std::string& text) {
            if constexpr (std::is_same_v<T, std::string>) {
              c.*member = text;
            } else if constexpr (std::is_unsigned_v<T>) {
              if (text.find('-') != std::string::npos) throw std::invalid_argument(key + ": must be non-negative");
              c.*member = parse_value<T>(key, text);
            } else {
              c.*member = parse_value<T>(key, text);
            }
          },
          [member](const PipelineConfig& c) {
            if constexpr (std::is_same_v<T, std::string>)
              return c.*member;
            else if constexpr (std::is_floating_point_v<T>)
              return fmt::format("{:.17g}", c.*member);
            else
              return fmt::format("{}", c.*member);
          }};
}

// Ordered by section for writing.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"array.antennas", field(&PipelineConfig::antennas, "array.antennas")},
      {"array.spacing", field(&PipelineConfig::spacing, "array.spacing")},
      {"array.radiating_lo_deg", field(&PipelineConfig::radiating_lo_deg, "array.radiating_lo_deg")},
      {"array.radiating_hi_deg", field(&PipelineConfig::radiating_hi_deg, "array.radiating_hi_deg")},
      {"array.sector_lo_deg", field(&PipelineConfig::sector_lo_deg, "array.sector_lo_deg")},
      {"array.sector_hi_deg", field(&PipelineConfig::sector_hi_deg, "array.sector_hi_deg")},
      {"array.rf_chains", field(&PipelineConfig::rf_chains, "array.rf_chains")},
      {"synthesis.grid_density", field(&PipelineConfig::grid_density, "synthesis.grid_density")},
      {"synthesis.r_s_ratio", field(&PipelineConfig::r_s_ratio, "synthesis.r_s_ratio")},
      {"synthesis.delta_t_max_deg", field(&PipelineConfig::delta_t_max_deg, "synthesis.delta_t_max_deg")},
      {"synthesis.delta_t_step_deg", field(&PipelineConfig::delta_t_step_deg, "synthesis.delta_t_step_deg")},
      {"synthesis.inner_tol", field(&PipelineConfig::inner_tol, "synthesis.inner_tol")},
      {"synthesis.max_inner", field(&PipelineConfig::max_inner, "synthesis.max_inner")},
      {"synthesis.eval_density", field(&PipelineConfig::eval_density, "synthesis.eval_density")},
      {"synthesis.threads", field(&PipelineConfig::threads, "synthesis.threads")},
      {"synthesis.p4_inits", field(&PipelineConfig::p4_inits, "synthesis.p4_inits")},
      {"synthesis.p4_seed", field(&PipelineConfig::p4_seed, "synthesis.p4_seed")},
      {"papr.q", field(&PipelineConfig::q, "papr.q")},
      {"papr.seed", field(&PipelineConfig::papr_seed, "papr.seed")},
      {"outage.rate", field(&PipelineConfig::rate, "outage.rate")},
      {"outage.max_outage", field(&PipelineConfig::max_outage, "outage.max_outage")},
      {"outage.trials", field(&PipelineConfig::trials, "outage.trials")},
      {"outage.seed", field(&PipelineConfig::outage_seed, "outage.seed")},
      {"outage.window_deg", field(&PipelineConfig::window_deg, "outage.window_deg")},
      {"outage.rho_db_min", field(&PipelineConfig::rho_db_min, "outage.rho_db_min")},
      {"outage.rho_db_max", field(&PipelineConfig::rho_db_max, "outage.rho_db_max")},
      {"outage.rho_db_step", field(&PipelineConfig::rho_db_step, "outage.rho_db_step")},
      {"outage.workers", field(&PipelineConfig::workers, "outage.workers")},
      {"output.dir", field(&PipelineConfig::out_dir, "output.dir")},
  };
  return table;
}

const Field& lookup(const std::string& key) {
  for (const auto& [k, f] : fields())
    if (k == key) return f;
  throw std::invalid_argument(fmt::format("{}: unknown configuration key", key));
}

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw std::invalid_argument(fmt::format("{}: {}", key, what));
}

}  // namespace

void validate(const PipelineConfig& c) {
  require(c.antennas >= 1, "array.antennas", "must be at least 1");
  require(c.spacing > 0.0, "array.spacing", "must be positive");
  require(c.radiating_lo_deg < c.radiating_hi_deg, "array.radiating_lo_deg", "must be below radiating_hi_deg");
  require(c.radiating_lo_deg >= -90.0 && c.radiating_hi_deg <= 90.0, "array.radiating_lo_deg",
          "radiating interval must lie in [-90, 90]");
  require(c.sector_lo_deg < c.sector_hi_deg, "array.sector_lo_deg", "must be below sector_hi_deg");
  require(c.sector_lo_deg >= c.radiating_lo_deg && c.sector_hi_deg <= c.radiating_hi_deg, "array.sector_lo_deg",
          "sector must lie inside the radiating interval");
  require(c.rf_chains >= 1, "array.rf_chains", "must be at least 1");
  require(c.grid_density >= 2, "synthesis.grid_density", "must be at least 2");
  require(c.r_s_ratio > 0.0 && c.r_s_ratio < 1.0, "synthesis.r_s_ratio", "must lie in (0, 1)");
  require(c.delta_t_max_deg > 0.0, "synthesis.delta_t_max_deg", "must be positive");
  require(c.delta_t_step_deg > 0.0 && c.delta_t_step_deg <= c.delta_t_max_deg, "synthesis.delta_t_step_deg",
          "must lie in (0, delta_t_max_deg]");
  require(c.inner_tol > 0.0, "synthesis.inner_tol", "must be positive");
  require(c.max_inner >= 1, "synthesis.max_inner", "must be at least 1");
  require(c.eval_density >= 1, "synthesis.eval_density", "must be at least 1");
  require(c.p4_inits >= 0, "synthesis.p4_inits", "must be non-negative");
  require(c.q >= 0 && c.q <= kMaxEnumeratedRoots, "papr.q", "must lie in [0, 24]");
  require(c.rate > 0.0, "outage.rate", "must be positive");
  require(c.max_outage > 0.0 && c.max_outage < 1.0, "outage.max_outage", "must lie in (0, 1)");
  require(c.trials >= 1000, "outage.trials", "must be at least 1000");
  require(c.window_deg > 0.0 && c.window_deg < c.sector_hi_deg - c.sector_lo_deg, "outage.window_deg",
          "must be positive and narrower than the sector");
  require(c.rho_db_step > 0.0 && c.rho_db_min <= c.rho_db_max, "outage.rho_db_step", "sweep range is empty");
  require(!c.out_dir.empty(), "output.dir", "must not be empty");
  array_config(c);
}

PipelineConfig read_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(fmt::format("config: {}", e.message()));
  }
  PipelineConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw std::invalid_argument(fmt::format("{}: key outside a section", section));
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      lookup(full).set(c, value.data());
    }
  }
  validate(c);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument(fmt::format("config: cannot open {}", path));
  return read_config(f);
}

void write_config(std::ostream& os, const PipelineConfig& c) {
  std::string section;
  for (const auto& [key, f] : fields()) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) os << '\n';
      os << '[' << s << "]\n";
      section = s;
    }
    os << key.substr(dot + 1) << " = " << f.get(c) << '\n';
  }
}

void apply_override(PipelineConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw std::invalid_argument(fmt::format("{}: expected section.key=value", assignment));
  lookup(assignment.substr(0, eq)).set(c, assignment.substr(eq + 1));
}

ArrayConfig array_config(const PipelineConfig& c) {
  return make_array_config(c.antennas, c.spacing, {deg2rad(c.radiating_lo_deg), deg2rad(c.radiating_hi_deg)},
                           {deg2rad(c.sector_lo_deg), deg2rad(c.sector_hi_deg)}, c.rf_chains);
}

SynthesisProblem synthesis_problem(const PipelineConfig& c) {
  const ArrayConfig cfg = array_config(c);
  const double dt_max = angular_to_spatial_width(cfg, deg2rad(c.delta_t_max_deg));
  return build_problem(cfg, c.r_s_ratio, c.grid_density, dt_max, dt_max * c.delta_t_step_deg / c.delta_t_max_deg);
}

SynthesisOptions synthesis_options(const PipelineConfig& c) {
  SynthesisOptions o;
  o.inner_tol = c.inner_tol;
  o.max_inner = c.max_inner;
  o.eval_density = c.eval_density;
  o.threads = c.threads;
  return o;
}

}  // namespace broadbeam
