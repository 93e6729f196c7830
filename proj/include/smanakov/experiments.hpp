#ifndef SMANAKOV_EXPERIMENTS_HPP
#define SMANAKOV_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "smanakov/errors.hpp"
#include "smanakov/format.hpp"
#include "smanakov/grid.hpp"
#include "smanakov/integrators.hpp"
#include "smanakov/model.hpp"
#include "smanakov/noise.hpp"
#include "smanakov/observables.hpp"
#include "smanakov/propagator.hpp"

#ifndef SMANAKOV_VERSION_STRING
#define SMANAKOV_VERSION_STRING "0.1.0"
#endif

namespace smanakov {

inline constexpr const char* version_tag = SMANAKOV_VERSION_STRING;

// ---------------------------------------------------------------------------
// Result records

/// One experiment datum. Error fields hold means over samples of squared norms.
struct ResultRecord {
  std::string scheme;
  double h = 0.0;
  double dx = 0.0;
  double gamma = 0.0;
  std::int64_t samples = 0;
  double err_l2_final = 0.0;
  double err_h1_final = 0.0;
  double err_h1_sup = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string version = version_tag;

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

inline constexpr const char* result_csv_header =
    "scheme,h,dx,gamma,samples,err_l2_final,err_h1_final,err_h1_sup,wall_seconds,seed,version";

inline void write_records_csv(std::ostream& os, const std::vector<ResultRecord>& records) {
  os << result_csv_header << '\n';
  for (const auto& r : records) {
    os << r.scheme << ',' << format_double(r.h) << ',' << format_double(r.dx) << ','
       << format_double(r.gamma) << ',' << r.samples << ',' << format_double(r.err_l2_final) << ','
       << format_double(r.err_h1_final) << ',' << format_double(r.err_h1_sup) << ','
       << format_double(r.wall_seconds) << ',' << r.seed << ',' << r.version << '\n';
  }
}

inline std::vector<ResultRecord> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != result_csv_header) {
    throw ConfigError("result CSV header mismatch");
  }
  std::vector<ResultRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) c.push_back(f);
    if (c.size() != 11) throw ConfigError("result CSV row must have 11 columns: " + line);
    ResultRecord r;
    r.scheme = c[0];
    r.h = parse_double(c[1]);
    r.dx = parse_double(c[2]);
    r.gamma = parse_double(c[3]);
    r.samples = std::stoll(c[4]);
    r.err_l2_final = parse_double(c[5]);
    r.err_h1_final = parse_double(c[6]);
    r.err_h1_sup = parse_double(c[7]);
    r.wall_seconds = parse_double(c[8]);
    r.seed = std::stoull(c[9]);
    r.version = c[10];
    out.push_back(std::move(r));
  }
  return out;
}

inline void to_json(nlohmann::json& j, const ResultRecord& r) {
  j = nlohmann::json{{"scheme", r.scheme},
                     {"h", r.h},
                     {"dx", r.dx},
                     {"gamma", r.gamma},
                     {"samples", r.samples},
                     {"err_l2_final", r.err_l2_final},
                     {"err_h1_final", r.err_h1_final},
                     {"err_h1_sup", r.err_h1_sup},
                     {"wall_seconds", r.wall_seconds},
                     {"seed", r.seed},
                     {"version", r.version}};
}

inline void from_json(const nlohmann::json& j, ResultRecord& r) {
  j.at("scheme").get_to(r.scheme);
  j.at("h").get_to(r.h);
  j.at("dx").get_to(r.dx);
  j.at("gamma").get_to(r.gamma);
  j.at("samples").get_to(r.samples);
  j.at("err_l2_final").get_to(r.err_l2_final);
  j.at("err_h1_final").get_to(r.err_h1_final);
  j.at("err_h1_sup").get_to(r.err_h1_sup);
  j.at("wall_seconds").get_to(r.wall_seconds);
  j.at("seed").get_to(r.seed);
  j.at("version").get_to(r.version);
}

inline void write_records_json(std::ostream& os, const std::vector<ResultRecord>& records) {
  nlohmann::json j = records;
  os << j.dump(2) << '\n';
}

inline std::vector<ResultRecord> read_records_json(std::istream& is) {
  return nlohmann::json::parse(is).get<std::vector<ResultRecord>>();
}

// ---------------------------------------------------------------------------
// Least squares

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  /// False for exactly two points, where the standard error is undefined (reported as 0).
  bool has_stderr = false;
};

/// Ordinary least squares y = intercept + slope x.
inline SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 2) throw DegenerateFit("a slope needs at least two points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFit("all abscissae coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (const auto& [x, y] : points) {
      const double r = y - (fit.intercept + fit.slope * x);
      ssr += r * r;
    }
    fit.stderr_slope = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    fit.has_stderr = true;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Coupled Monte Carlo studies

/// Strong-convergence / work-precision study on dyadic steps h = 2^{-k}.
struct ConvergenceStudyConfig {
  double a = 20.0;
  double dx = 0.4;
  double T = 0.5;
  double gamma = 1.0;
  std::vector<int> coarse_exponents{6, 7, 8, 9, 10};
  int k_ref = 13;
  std::size_t samples = 50;
  SchemeId scheme = SchemeId::SEXP;
  Backend backend = Backend::FiniteDifference;
  ErrorNorm norm = ErrorNorm::H1;
  std::uint64_t base_seed = 42;
  FixedPointConfig fp{};
  double blowup_threshold = 1e8;
  SolitonParams soliton{};
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;

  std::size_t reference_steps() const {
    return static_cast<std::size_t>(std::llround(T * std::ldexp(1.0, k_ref)));
  }

  void validate() const {
    if (!(T > 0.0)) throw ConfigError("time horizon must be > 0");
    if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
    if (coarse_exponents.empty()) throw ConfigError("at least one coarse step is required");
    if (samples < 1) throw ConfigError("sample count must be >= 1");
    fp.validate();
    const int k_max = *std::max_element(coarse_exponents.begin(), coarse_exponents.end());
    if (k_ref <= k_max) throw ConfigError("reference exponent must exceed every coarse exponent");
    if (k_ref > 40) throw ConfigError("reference exponent is too large");
    for (int k : coarse_exponents) {
      const double n = T * std::ldexp(1.0, k);
      if (std::abs(n - std::round(n)) > 1e-9 * n || std::round(n) < 1.0) {
        throw ConfigError("step 2^-" + std::to_string(k) + " does not divide the horizon");
      }
    }
    make_grid(a, dx, boundary_for(backend));
  }
};

struct SampleAbort {
  std::size_t sample_index = 0;
  std::string kind;
  std::string message;
};

/// Per-sample squared errors against the reference, one entry per coarse exponent.
struct SampleOutcome {
  bool aborted = false;
  SampleAbort abort;
  std::vector<double> sq_l2_final;
  std::vector<double> sq_h1_final;
  std::vector<double> sq_h1_sup;
  std::vector<double> seconds;
};

/// One Monte Carlo sample: a fine path at h_ref, the reference run on it, and one
/// run per coarse step on the dyadically coarsened path.
inline SampleOutcome study_sample(const ConvergenceStudyConfig& cfg, std::size_t index) {
  SampleOutcome out;
  const Grid grid = make_grid(cfg.a, cfg.dx, boundary_for(cfg.backend));
  const FieldState X0 = soliton_initial_condition(grid, cfg.soliton);
  SchemeConfig scheme{cfg.scheme, cfg.backend, cfg.gamma, cfg.fp, Nonlinearity::cubic(),
                      cfg.blowup_threshold};
  const int k_max = *std::max_element(cfg.coarse_exponents.begin(), cfg.coarse_exponents.end());
  try {
    const BrownianPath fine =
        sample_path({cfg.base_seed, index}, cfg.reference_steps(), std::ldexp(1.0, -cfg.k_ref));
    const auto ref =
        run_trajectory(X0, fine, scheme, std::size_t{1} << (cfg.k_ref - k_max)).trajectory;
    for (int k : cfg.coarse_exponents) {
      const BrownianPath coarse = coarsen(fine, std::size_t{1} << (cfg.k_ref - k));
      const auto run = run_trajectory(X0, coarse, scheme, 1);
      const auto h1 = error_vs_reference(run.trajectory, ref, ErrorNorm::H1);
      const auto l2 = error_vs_reference(run.trajectory, ref, ErrorNorm::L2);
      out.sq_h1_final.push_back(h1.final * h1.final);
      out.sq_h1_sup.push_back(h1.sup * h1.sup);
      out.sq_l2_final.push_back(l2.final * l2.final);
      out.seconds.push_back(run.stepping_seconds);
    }
  } catch (const NumericalError& e) {
    out = SampleOutcome{};
    out.aborted = true;
    out.abort = {index, e.kind(), e.what()};
  }
  return out;
}

/// Runs study_sample for every index on a pool of workers; outcomes are returned
/// in index order regardless of scheduling.
inline std::vector<SampleOutcome> run_samples(const ConvergenceStudyConfig& cfg) {
  std::vector<SampleOutcome> outcomes(cfg.samples);
  unsigned workers = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cfg.samples)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.samples; i = next++) outcomes[i] = study_sample(cfg, i);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return outcomes;
}

struct ConvergenceResult {
  std::vector<ResultRecord> records;  // one per coarse step, in config order
  SlopeFit fit_final;                 // log2 RMS error at T vs log2 h, in cfg.norm
  SlopeFit fit_sup;                   // same for the sup over time (H1)
  std::vector<SampleAbort> aborted;
  double abort_rate = 0.0;
};

/// Reduces outcomes in sample-index order.
inline ConvergenceResult aggregate(const ConvergenceStudyConfig& cfg,
                                   const std::vector<SampleOutcome>& outcomes) {
  const std::size_t levels = cfg.coarse_exponents.size();
  std::vector<double> l2(levels, 0.0), h1(levels, 0.0), sup(levels, 0.0), secs(levels, 0.0);
  ConvergenceResult res;
  std::size_t good = 0;
  for (const auto& o : outcomes) {
    if (o.aborted) {
      res.aborted.push_back(o.abort);
      continue;
    }
    ++good;
    for (std::size_t i = 0; i < levels; ++i) {
      l2[i] += o.sq_l2_final[i];
      h1[i] += o.sq_h1_final[i];
      sup[i] += o.sq_h1_sup[i];
      secs[i] += o.seconds[i];
    }
  }
  res.abort_rate = static_cast<double>(res.aborted.size()) / static_cast<double>(outcomes.size());
  if (res.abort_rate > 0.05) {
    throw StudyFailed(std::to_string(res.aborted.size()) + " of " +
                      std::to_string(outcomes.size()) + " samples aborted (first: " +
                      res.aborted.front().kind + ")");
  }
  const Grid grid = make_grid(cfg.a, cfg.dx, boundary_for(cfg.backend));
  std::vector<std::pair<double, double>> pts_final, pts_sup;
  for (std::size_t i = 0; i < levels; ++i) {
    const double n = static_cast<double>(good);
    ResultRecord r;
    r.scheme = std::string(to_string(cfg.scheme));
    r.h = std::ldexp(1.0, -cfg.coarse_exponents[i]);
    r.dx = grid.dx();
    r.gamma = cfg.gamma;
    r.samples = static_cast<std::int64_t>(good);
    r.err_l2_final = l2[i] / n;
    r.err_h1_final = h1[i] / n;
    r.err_h1_sup = sup[i] / n;
    r.wall_seconds = secs[i];
    r.seed = cfg.base_seed;
    const double final_ms = cfg.norm == ErrorNorm::H1 ? r.err_h1_final : r.err_l2_final;
    pts_final.emplace_back(std::log2(r.h), 0.5 * std::log2(final_ms));
    pts_sup.emplace_back(std::log2(r.h), 0.5 * std::log2(r.err_h1_sup));
    res.records.push_back(std::move(r));
  }
  if (levels >= 2) {
    res.fit_final = fit_slope(pts_final);
    res.fit_sup = fit_slope(pts_sup);
  }
  return res;
}

/// Mean-square errors at T against a fine reference of the same scheme on coupled
/// paths; slope of log2 RMS error vs log2 h.
inline ConvergenceResult run_strong_convergence(const ConvergenceStudyConfig& cfg) {
  cfg.validate();
  return aggregate(cfg, run_samples(cfg));
}

struct WorkPrecisionPoint {
  double h = 0.0;
  double error = 0.0;    // RMS final error in the study norm
  double seconds = 0.0;  // stepping time summed over samples
};

struct WorkPrecisionResult {
  std::vector<ResultRecord> records;
  /// Per scheme: points sorted by decreasing error with strictly increasing cost.
  std::map<std::string, std::vector<WorkPrecisionPoint>> curves;
};

/// Keeps only points that are not dominated (more accurate must mean more expensive).
inline std::vector<WorkPrecisionPoint> monotone_curve(std::vector<WorkPrecisionPoint> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const auto& x, const auto& y) { return x.error > y.error; });
  std::vector<WorkPrecisionPoint> out;
  for (const auto& p : pts) {
    while (!out.empty() && out.back().seconds >= p.seconds) out.pop_back();
    out.push_back(p);
  }
  return out;
}

/// Cost at a given error by log-log interpolation along a curve (linear extrapolation
/// from the end segments outside its range).
inline double seconds_at_error(const std::vector<WorkPrecisionPoint>& curve, double error) {
  if (curve.size() < 2) throw DegenerateFit("a work-precision curve needs two points");
  std::size_t i = 0;
  while (i + 2 < curve.size() && curve[i + 1].error > error) ++i;
  const auto& p = curve[i];
  const auto& q = curve[i + 1];
  const double t = (std::log(error) - std::log(p.error)) / (std::log(q.error) - std::log(p.error));
  return std::exp(std::log(p.seconds) + t * (std::log(q.seconds) - std::log(p.seconds)));
}

/// Cost versus accuracy for several schemes, each against its own fine reference.
inline WorkPrecisionResult run_work_precision(ConvergenceStudyConfig cfg,
                                              const std::vector<SchemeId>& schemes) {
  if (schemes.size() < 2) throw ConfigError("work-precision needs at least two schemes");
  if (cfg.coarse_exponents.size() < 2) throw ConfigError("work-precision needs at least two steps");
  cfg.norm = ErrorNorm::L2;
  WorkPrecisionResult out;
  for (SchemeId s : schemes) {
    cfg.scheme = s;
    const ConvergenceResult r = run_strong_convergence(cfg);
    std::vector<WorkPrecisionPoint> pts;
    for (const auto& rec : r.records) {
      pts.push_back({rec.h, std::sqrt(rec.err_l2_final), rec.wall_seconds});
      out.records.push_back(rec);
    }
    out.curves[std::string(to_string(s))] = monotone_curve(std::move(pts));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single-path runs

struct EvolutionConfig {
  double a = 50.0;
  double dx = 0.25;
  double T = 3.0;
  double h = 3.0 / 625.0;
  double gamma = 1.0;
  SchemeId scheme = SchemeId::SEXP;
  Backend backend = Backend::FiniteDifference;
  std::size_t stride = 5;  // snapshot every `stride` steps
  std::uint64_t seed = 1;
  std::uint64_t sample_index = 0;
  FixedPointConfig fp{};
  double blowup_threshold = 1e8;
  SolitonParams soliton{};

  std::size_t steps() const {
    const double n = T / h;
    if (!(h > 0.0) || !(T > 0.0) || std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n) ||
        std::round(n) < 1.0) {
      throw ConfigError("time step does not divide the horizon");
    }
    return static_cast<std::size_t>(std::llround(n));
  }
};

struct EvolutionRow {
  double t, x, i1, i2;
};

struct EvolutionDataset {
  std::vector<EvolutionRow> rows;
  std::vector<double> l2;  // per snapshot
};

inline EvolutionDataset run_evolution(const EvolutionConfig& cfg, const FieldState& X0) {
  const std::size_t N = cfg.steps();
  const BrownianPath path = sample_path({cfg.seed, cfg.sample_index}, N, cfg.h);
  SchemeConfig sc{cfg.scheme, cfg.backend, cfg.gamma, cfg.fp, Nonlinearity::cubic(),
                  cfg.blowup_threshold};
  const auto run = run_trajectory(X0, path, sc, std::max<std::size_t>(1, cfg.stride));
  EvolutionDataset ds;
  const auto& traj = run.trajectory;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const auto [i1, i2] = intensities(traj.states[s]);
    for (std::size_t j = 0; j < i1.size(); ++j) {
      ds.rows.push_back({traj.times[s], X0.grid().x(j), i1[j], i2[j]});
    }
    ds.l2.push_back(l2_norm(traj.states[s]));
  }
  return ds;
}

inline EvolutionDataset run_evolution(const EvolutionConfig& cfg) {
  const Grid grid = make_grid(cfg.a, cfg.dx, boundary_for(cfg.backend));
  return run_evolution(cfg, soliton_initial_condition(grid, cfg.soliton));
}

inline void write_evolution_csv(std::ostream& os, const EvolutionDataset& ds) {
  os << "t,x,i1,i2\n";
  for (const auto& r : ds.rows) {
    os << format_double(r.t) << ',' << format_double(r.x) << ',' << format_double(r.i1) << ','
       << format_double(r.i2) << '\n';
  }
}

inline void write_evolution_json(std::ostream& os, const EvolutionDataset& ds) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : ds.rows) arr.push_back({{"t", r.t}, {"x", r.x}, {"i1", r.i1}, {"i2", r.i2}});
  os << arr.dump() << '\n';
}

struct ConservationConfig {
  double a = 50.0;
  double dx = 0.25;
  double T = 3.0;
  double h = 0.006;
  double gamma = 1.0;
  std::vector<SchemeId> schemes{all_schemes, all_schemes + 5};
  Backend backend = Backend::FiniteDifference;
  std::uint64_t seed = 1;
  std::uint64_t sample_index = 0;
  FixedPointConfig fp{};
  double blowup_threshold = 1e8;
  SolitonParams soliton{};
};

struct ConservationSeries {
  std::string scheme;
  std::vector<double> times;
  std::vector<double> l2;
  double max_relative_drift = 0.0;  // max_n | |X^n| / |X^0| - 1 |
  double wall_seconds = 0.0;
};

/// L2 norm after every step, for each scheme on one shared path.
inline std::vector<ConservationSeries> run_conservation(const ConservationConfig& cfg) {
  EvolutionConfig ev;
  ev.T = cfg.T;
  ev.h = cfg.h;
  const std::size_t N = ev.steps();
  const Grid grid = make_grid(cfg.a, cfg.dx, boundary_for(cfg.backend));
  const FieldState X0 = soliton_initial_condition(grid, cfg.soliton);
  const BrownianPath path = sample_path({cfg.seed, cfg.sample_index}, N, cfg.h);
  std::vector<ConservationSeries> out;
  for (SchemeId s : cfg.schemes) {
    SchemeConfig sc{s, cfg.backend, cfg.gamma, cfg.fp, Nonlinearity::cubic(), cfg.blowup_threshold};
    const auto run = run_trajectory(X0, path, sc, 1);
    ConservationSeries series;
    series.scheme = std::string(to_string(s));
    series.times = run.trajectory.times;
    series.wall_seconds = run.stepping_seconds;
    const double n0 = l2_norm(X0);
    for (const auto& X : run.trajectory.states) {
      const double n = l2_norm(X);
      series.l2.push_back(n);
      series.max_relative_drift = std::max(series.max_relative_drift, std::abs(n / n0 - 1.0));
    }
    out.push_back(std::move(series));
  }
  return out;
}

inline void write_conservation_csv(std::ostream& os, const std::vector<ConservationSeries>& all) {
  os << "scheme,t,l2\n";
  for (const auto& s : all) {
    for (std::size_t i = 0; i < s.l2.size(); ++i) {
      os << s.scheme << ',' << format_double(s.times[i]) << ',' << format_double(s.l2[i]) << '\n';
    }
  }
}

inline void write_conservation_json(std::ostream& os, const std::vector<ConservationSeries>& all) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : all) {
    arr.push_back({{"scheme", s.scheme},
                   {"t", s.times},
                   {"l2", s.l2},
                   {"max_relative_drift", s.max_relative_drift}});
  }
  os << arr.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Presets

namespace presets {

/// Scaled strong-convergence study that runs in minutes.
inline ConvergenceStudyConfig desk_convergence() { return {}; }

/// Full-size strong-convergence study (hours to days).
inline ConvergenceStudyConfig full_convergence() {
  ConvergenceStudyConfig c;
  c.a = 50.0;
  c.dx = 0.4;
  c.T = 1.0;
  c.coarse_exponents = {13, 14, 15, 16, 17, 18};
  c.k_ref = 19;
  c.samples = 250;
  return c;
}

/// Full-size cost comparison: a=50, dx=0.2, T=0.5, reference step 2^-16, 500 samples.
inline ConvergenceStudyConfig full_work_precision() {
  ConvergenceStudyConfig c;
  c.a = 50.0;
  c.dx = 0.2;
  c.T = 0.5;
  c.coarse_exponents = {8, 9, 10, 11, 12};
  c.k_ref = 16;
  c.samples = 500;
  c.norm = ErrorNorm::L2;
  return c;
}

inline EvolutionConfig full_evolution() { return {}; }

inline ConservationConfig full_conservation() { return {}; }

} // namespace presets

} // namespace smanakov

#endif // SMANAKOV_EXPERIMENTS_HPP
