#include "broadbeam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "broadbeam/ideal_beampattern.hpp"
#include "broadbeam/outage.hpp"

namespace broadbeam {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return f;
}

template <class F>
auto guarded(const char* stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

void write_weights_csv(std::ostream& os, const CVector& w) {
  os << "index,re,im\n";
  for (Eigen::Index m = 0; m < w.size(); ++m) os << m << ',' << num(w[m].real()) << ',' << num(w[m].imag()) << '\n';
}

CVector read_weights_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "index,re,im") throw std::invalid_argument("weights: expected header index,re,im");
  std::vector<cdouble> vals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string idx, re, im;
    if (!std::getline(ls, idx, ',') || !std::getline(ls, re, ',') || !std::getline(ls, im))
      throw std::invalid_argument(fmt::format("weights: malformed row '{}'", line));
    if (std::stoul(idx) != vals.size()) throw std::invalid_argument("weights: indices must run 0, 1, 2, ...");
    vals.emplace_back(std::stod(re), std::stod(im));
  }
  if (vals.empty()) throw std::invalid_argument("weights: no rows");
  CVector w(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) w[static_cast<Eigen::Index>(i)] = vals[i];
  return w;
}

void save_weights(const fs::path& path, const CVector& w) {
  auto f = open_out(path);
  write_weights_csv(f, w);
}

CVector load_weights(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument(fmt::format("cannot open {}", path.string()));
  return read_weights_csv(f);
}

void stage_ideal(const PipelineConfig& c, const fs::path& dir) {
  guarded("ideal", [&] {
    const auto cfg = array_config(c);
    const auto ideal = ideal_level(cfg);
    nlohmann::ordered_json j;
    j["xi_star"] = ideal.xi_star;
    j["xi_star_db"] = ideal.xi_star_db();
    j["pass_lo"] = ideal.pass_lo;
    j["pass_hi"] = ideal.pass_hi;
    j["spacing"] = cfg.spacing;
    auto f = open_out(dir / "ideal_level.json");
    f << j.dump(2) << '\n';
    return 0;
  });
}

void write_trace_csv(std::ostream& os, const SynthesisReport& r, bool timing) {
  os << "delta_t,sigma,g_min,inner_iters" << (timing ? ",wall_ms" : "") << '\n';
  for (const auto& e : r.trace) {
    os << num(e.delta_t) << ',' << num(e.sigma) << ',' << num(e.g_min) << ',' << e.iterations;
    if (timing) os << ',' << fmt::format("{:.3f}", e.wall_ms);
    os << '\n';
  }
}

SynthesisStage stage_synthesize(const PipelineConfig& c, const fs::path& dir, bool timing) {
  return guarded("synthesize", [&] {
    const auto p = synthesis_problem(c);
    auto opts = synthesis_options(c);
    SynthesisStage out;
    out.report = run_algorithm1(p, opts);
    save_weights(dir / "w1.csv", out.report.best_w1.weights());
    {
      auto f = open_out(dir / "synthesis_trace.csv");
      write_trace_csv(f, out.report, timing);
    }
    if (c.p4_inits > 0) {
      // Each start gets at least the whole width-search alternation budget.
      int budget = 0;
      for (const auto& e : out.report.trace) budget += e.iterations;
      opts.max_inner = std::max(opts.max_inner, budget);
      out.p4 = run_p4_random(p, c.p4_inits, c.p4_seed, opts, {out.report.best_delta_t});
      save_weights(dir / "p4.csv", out.p4->best.weights());
    }
    return out;
  });
}

CVector stage_baseline_zc(const PipelineConfig& c, const fs::path& dir) {
  return guarded("baseline-zc", [&] {
    const CVector w = zc_baseline(array_config(c)).weights();
    save_weights(dir / "zc.csv", w);
    return w;
  });
}

PaprSearch stage_papr(const PipelineConfig& c, const CVector& w, const fs::path& dir) {
  return guarded("papr", [&] {
    // Small arrays have fewer than Q roots; enumerate all of them then.
    const int q = std::min<int>(c.q, static_cast<int>(w.size()) - 1);
    auto s = enumerate_flips(w, q, c.papr_seed);
    {
      auto f = open_out(dir / "papr_candidates.csv");
      write_candidates_csv(f, s);
    }
    save_weights(dir / "w2.csv", s.best.weights);
    return s;
  });
}

HybridFactorization stage_hybrid(const PipelineConfig& c, const CVector& w, const fs::path& dir) {
  return guarded("hybrid", [&] {
    auto h = decompose(w, c.rf_chains);
    const Eigen::MatrixXd ph = h.phases();
    nlohmann::ordered_json j;
    j["rf_chains"] = c.rf_chains;
    j["b"] = h.b;
    j["max_abs_error"] = (h.reconstruct() - w).cwiseAbs().maxCoeff();
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < ph.rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < ph.cols(); ++k) row.push_back(ph(i, k));
      rows.push_back(row);
    }
    j["analog_phases_rad"] = rows;
    auto f = open_out(dir / "hybrid.json");
    f << j.dump(2) << '\n';
    return h;
  });
}

void stage_outage(const PipelineConfig& c, const std::vector<LabelledWeights>& ws, const fs::path& dir) {
  guarded("outage", [&] {
    const auto cfg = array_config(c);
    OutageSpec spec{c.rate, c.max_outage, 1.0};
    auto report = open_out(dir / "outage_report.csv");
    report << "beamformer,family,q_star,theta_star_deg,rho_star,rho_star_db,outage_closed_form,outage_monte_carlo,"
              "ci_lo,ci_hi\n";
    auto sweep = open_out(dir / "outage_sweep.csv");
    sweep << "beamformer,family,rho_db,outage\n";
    const PasFamily families[] = {PasFamily::dirac_grid(), PasFamily::uniform_windows(deg2rad(c.window_deg))};
    for (const auto& [label, w] : ws) {
      const auto b = Beamformer::normalized(w);
      for (const auto& fam : families) {
        const auto rep = min_power(b, cfg, spec, fam);
        std::string mc_cols = ",,,";
        double closed = 1.0;
        if (rep.finite()) {
          spec.rho = rep.rho_star;
          closed = outage_closed_form(rep.q_star, spec);
          const PASpec pas = fam.kind == PasFamily::Kind::dirac_grid
                                 ? dirac_pas(rep.theta_star)
                                 : uniform_pas(rep.theta_star - deg2rad(c.window_deg) / 2,
                                               rep.theta_star + deg2rad(c.window_deg) / 2);
          const auto mc = outage_monte_carlo(b.weights(), covariance(pas, cfg), spec, c.trials, c.outage_seed,
                                             c.workers);
          mc_cols = fmt::format("{},{},{}", num(mc.estimate), num(mc.ci_lo), num(mc.ci_hi));
        }
        report << fmt::format("{},{},{},{},{},{},{},{}\n", label, to_string(fam.kind), num(rep.q_star),
                              num(rad2deg(rep.theta_star)), num(rep.rho_star), num(10 * std::log10(rep.rho_star)),
                              num(closed), mc_cols);
        const int steps = static_cast<int>(std::floor((c.rho_db_max - c.rho_db_min) / c.rho_db_step + 1e-9));
        for (int k = 0; k <= steps; ++k) {
          const double db = c.rho_db_min + k * c.rho_db_step;
          const OutageSpec s{c.rate, c.max_outage, std::pow(10.0, db / 10)};
          sweep << fmt::format("{},{},{},{}\n", label, to_string(fam.kind), num(db),
                               num(outage_closed_form(rep.q_star, s)));
        }
      }
    }
    return 0;
  });
}

void stage_beampattern(const PipelineConfig& c, const std::vector<LabelledWeights>& ws, const fs::path& dir) {
  guarded("beampattern", [&] {
    const auto cfg = array_config(c);
    const auto p = synthesis_problem(c);
    const double step = p.grid_step() / c.eval_density;
    const int count = static_cast<int>(std::ceil((cfg.x_hi() - cfg.x_lo()) / step)) + 1;
    auto xs = linspace(cfg.x_lo(), cfg.x_hi(), count);
    // Include the pass-band edges exactly.
    xs.push_back(cfg.pass_lo());
    xs.push_back(cfg.pass_hi());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    auto f = open_out(dir / "beampattern.csv");
    f << 'x';
    for (const auto& lw : ws) f << ',' << lw.label;
    f << '\n';
    for (double x : xs) {
      f << num(x);
      for (const auto& lw : ws) f << ',' << num(pattern_at(lw.weights, cfg.spacing, x) / lw.weights.squaredNorm());
      f << '\n';
    }
    return 0;
  });
}

PipelineSummary run_pipeline(const PipelineConfig& c, const fs::path& dir, bool timing) {
  guarded("config", [&] {
    validate(c);
    return 0;
  });
  PipelineSummary s;
  stage_ideal(c, dir);
  s.xi_star = ideal_level(array_config(c)).xi_star;
  const auto syn = stage_synthesize(c, dir, timing);
  const CVector w1 = syn.report.best_w1.weights();
  const CVector zc = stage_baseline_zc(c, dir);
  const auto p = synthesis_problem(c);
  s.g_min_proposed = syn.report.g_min;
  s.g_min_zc = pass_band_min(Beamformer::normalized(zc), p, c.eval_density);
  s.stop_max = stop_band_max(syn.report.best_w1, p, syn.report.best_delta_t);
  std::vector<LabelledWeights> patterns{{"proposed", w1}, {"zc", zc}};
  if (syn.p4) {
    s.g_min_p4 = syn.p4->g_min;
    patterns.push_back({"p4", syn.p4->best.weights()});
  }
  stage_beampattern(c, patterns, dir);
  const auto ps = stage_papr(c, w1, dir);
  s.papr_w1 = ps.original_papr;
  s.papr_w2 = ps.best.papr;
  const auto h = stage_hybrid(c, ps.best.weights, dir);
  s.hybrid_error = (h.reconstruct() - ps.best.weights).cwiseAbs().maxCoeff();
  stage_outage(c, {{"proposed", ps.best.weights}, {"zc", zc}}, dir);
  return s;
}

}  // namespace broadbeam
