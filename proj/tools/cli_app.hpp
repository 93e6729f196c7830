#ifndef SMANAKOV_TOOLS_CLI_APP_HPP
#define SMANAKOV_TOOLS_CLI_APP_HPP

#include <CLI11.hpp>

#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "selftest.hpp"
#include "smanakov/experiments.hpp"

namespace smanakov::cli {

enum ExitCode : int { Ok = 0, UsageError = 2, ConfigFailure = 3, NumericalFailure = 4 };

/// Raw flag values; unset optionals fall back to the selected preset.
struct CliConfig {
  std::string subcommand;
  std::string preset = "desk";
  std::optional<double> a, dx, dt, tfinal, gamma, fp_tol, blowup;
  std::optional<int> fp_maxiter, levels, ref_refine;
  std::optional<std::size_t> samples, stride;
  std::vector<std::string> schemes;
  std::optional<std::string> backend;
  std::uint64_t seed = 42;
  std::optional<std::string> out;
  std::string format = "csv";
  unsigned threads = 0;
};

namespace detail {

inline void check_step_divides(double dt, double T) {
  if (!(dt > 0.0) || !(T > 0.0)) throw ConfigError("--dt and --tfinal must be > 0");
  const double n = T / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n) || std::round(n) < 1.0) {
    throw ConfigError("step --dt " + format_short(dt) + " does not divide horizon --tfinal " +
                      format_short(T));
  }
}

inline Backend parse_backend(const std::string& s) {
  if (s == "fd") return Backend::FiniteDifference;
  if (s == "spectral") return Backend::Spectral;
  throw ConfigError("unknown backend '" + s + "'");
}

inline FixedPointConfig fixed_point(const CliConfig& c) {
  FixedPointConfig fp;
  if (c.fp_tol) fp.tol = *c.fp_tol;
  if (c.fp_maxiter) fp.max_iter = *c.fp_maxiter;
  fp.validate();
  return fp;
}

inline std::vector<SchemeId> schemes_or(const CliConfig& c, std::vector<SchemeId> fallback) {
  if (c.schemes.empty()) return fallback;
  std::vector<SchemeId> out;
  for (const auto& s : c.schemes) out.push_back(parse_scheme(s));
  return out;
}

inline void validate_grid(double a, double dx, Backend backend) {
  make_grid(a, dx, boundary_for(backend));
}

/// Study config from preset plus overrides; --dt is the coarsest step 2^-k.
inline ConvergenceStudyConfig study_config(const CliConfig& c, bool work_precision) {
  ConvergenceStudyConfig s;
  if (c.preset == "desk") {
    s = presets::desk_convergence();
  } else if (!work_precision && c.preset == "paper-4.2") {
    s = presets::full_convergence();
  } else if (work_precision && c.preset == "paper-4.3") {
    s = presets::full_work_precision();
  } else {
    throw ConfigError("unknown preset '" + c.preset + "' for " + c.subcommand);
  }
  const int k_min_preset = *std::min_element(s.coarse_exponents.begin(), s.coarse_exponents.end());
  const int k_max_preset = *std::max_element(s.coarse_exponents.begin(), s.coarse_exponents.end());
  int levels = static_cast<int>(s.coarse_exponents.size());
  int refine = s.k_ref - k_max_preset;
  int k_min = k_min_preset;
  if (c.a) s.a = *c.a;
  if (c.dx) s.dx = *c.dx;
  if (c.tfinal) s.T = *c.tfinal;
  if (c.gamma) s.gamma = *c.gamma;
  if (c.samples) s.samples = *c.samples;
  if (c.backend) s.backend = parse_backend(*c.backend);
  if (c.blowup) s.blowup_threshold = *c.blowup;
  if (c.levels) levels = *c.levels;
  if (c.ref_refine) refine = *c.ref_refine;
  const double dt = c.dt ? *c.dt : std::ldexp(1.0, -k_min);
  check_step_divides(dt, s.T);
  const double k = -std::log2(dt);
  if (std::abs(k - std::round(k)) > 1e-12) throw ConfigError("--dt must be a power of two for " + c.subcommand);
  k_min = static_cast<int>(std::round(k));
  if (levels < 1) throw ConfigError("--levels must be >= 1");
  if (refine < 1) throw ConfigError("--ref-refine must be >= 1");
  s.coarse_exponents.clear();
  for (int i = 0; i < levels; ++i) s.coarse_exponents.push_back(k_min + i);
  s.k_ref = k_min + levels - 1 + refine;
  s.fp = fixed_point(c);
  s.base_seed = c.seed;
  s.threads = c.threads;
  if (!c.schemes.empty()) s.scheme = parse_scheme(c.schemes.front());
  s.validate();
  return s;
}

inline EvolutionConfig evolution_config(const CliConfig& c) {
  EvolutionConfig e;
  if (c.preset == "desk") {
    e.a = 20.0;
    e.dx = 0.4;
    e.T = 0.5;
    e.h = 1.0 / 256.0;
    e.stride = 8;
  } else if (c.preset == "paper-4.1") {
    e = presets::full_evolution();
  } else {
    throw ConfigError("unknown preset '" + c.preset + "' for evolve");
  }
  if (c.a) e.a = *c.a;
  if (c.dx) e.dx = *c.dx;
  if (c.tfinal) e.T = *c.tfinal;
  if (c.dt) e.h = *c.dt;
  if (c.gamma) e.gamma = *c.gamma;
  if (c.backend) e.backend = parse_backend(*c.backend);
  if (c.blowup) e.blowup_threshold = *c.blowup;
  if (c.stride) e.stride = *c.stride;
  if (!c.schemes.empty()) e.scheme = parse_scheme(c.schemes.front());
  check_step_divides(e.h, e.T);
  if (e.stride < 1) throw ConfigError("--stride must be >= 1");
  e.fp = fixed_point(c);
  e.seed = c.seed;
  validate_grid(e.a, e.dx, e.backend);
  return e;
}

inline ConservationConfig conservation_config(const CliConfig& c) {
  ConservationConfig k;
  if (c.preset == "desk") {
    k.a = 20.0;
    k.dx = 0.4;
    k.T = 0.5;
    k.h = 1.0 / 256.0;
  } else if (c.preset == "paper-4.4") {
    k = presets::full_conservation();
  } else if (c.preset == "paper-4.5") {
    k = presets::full_conservation();
    k.schemes = {SchemeId::SEXP, SchemeId::ModEXP};
  } else {
    throw ConfigError("unknown preset '" + c.preset + "' for conserve");
  }
  if (c.a) k.a = *c.a;
  if (c.dx) k.dx = *c.dx;
  if (c.tfinal) k.T = *c.tfinal;
  if (c.dt) k.h = *c.dt;
  if (c.gamma) k.gamma = *c.gamma;
  if (c.backend) k.backend = parse_backend(*c.backend);
  if (c.blowup) k.blowup_threshold = *c.blowup;
  k.schemes = schemes_or(c, k.schemes);
  check_step_divides(k.h, k.T);
  k.fp = fixed_point(c);
  k.seed = c.seed;
  validate_grid(k.a, k.dx, k.backend);
  if (k.backend == Backend::Spectral) {
    for (SchemeId s : k.schemes) {
      if (s == SchemeId::Relax) throw UnsupportedBackend("relax requires --backend fd");
    }
  }
  return k;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  return f;
}

inline std::string output_path(const CliConfig& c) {
  return c.out ? *c.out : c.subcommand + "." + c.format;
}

inline void write_records(const CliConfig& c, const std::vector<ResultRecord>& recs) {
  auto f = open_output(output_path(c));
  if (c.format == "json") {
    write_records_json(f, recs);
  } else {
    write_records_csv(f, recs);
  }
}

} // namespace detail

inline int dispatch(const CliConfig& c, std::ostream& out, std::ostream& err) {
  using namespace detail;
  if (c.subcommand == "selftest") {
    const auto s = selftest::run(out);
    return s.failed == 0 ? Ok : NumericalFailure;
  }
  if (c.subcommand == "evolve") {
    const auto cfg = evolution_config(c);
    err << "evolve: " << cfg.steps() << " steps of " << to_string(cfg.scheme) << '\n';
    const auto ds = run_evolution(cfg);
    auto f = open_output(output_path(c));
    if (c.format == "json") {
      write_evolution_json(f, ds);
    } else {
      write_evolution_csv(f, ds);
    }
    return Ok;
  }
  if (c.subcommand == "converge") {
    const auto cfg = study_config(c, false);
    err << "converge: " << to_string(cfg.scheme) << ", " << cfg.samples << " samples, k_ref "
        << cfg.k_ref << '\n';
    const auto res = run_strong_convergence(cfg);
    write_records(c, res.records);
    err << "slope (final, " << to_string(cfg.norm) << "): " << res.fit_final.slope << " +- "
        << res.fit_final.stderr_slope << "; slope (sup, h1): " << res.fit_sup.slope
        << "; aborted samples: " << res.aborted.size() << '\n';
    return Ok;
  }
  if (c.subcommand == "bench") {
    const auto cfg = study_config(c, true);
    const auto schemes =
        schemes_or(c, {SchemeId::SEXP, SchemeId::CN, SchemeId::LT, SchemeId::Relax});
    if (cfg.backend == Backend::Spectral) {
      for (SchemeId s : schemes) {
        if (s == SchemeId::Relax) throw UnsupportedBackend("relax requires --backend fd");
      }
    }
    err << "bench: " << schemes.size() << " schemes, " << cfg.samples << " samples\n";
    const auto res = run_work_precision(cfg, schemes);
    write_records(c, res.records);
    const std::string path = output_path(c);
    auto curve = open_output(path + ".curve.csv");
    curve << "scheme,h,error,seconds\n";
    for (const auto& [name, pts] : res.curves) {
      for (const auto& p : pts) {
        curve << name << ',' << format_double(p.h) << ',' << format_double(p.error) << ','
              << format_double(p.seconds) << '\n';
      }
    }
    return Ok;
  }
  if (c.subcommand == "conserve") {
    const auto cfg = conservation_config(c);
    const auto series = run_conservation(cfg);
    auto f = open_output(output_path(c));
    if (c.format == "json") {
      write_conservation_json(f, series);
    } else {
      write_conservation_csv(f, series);
    }
    for (const auto& s : series) {
      err << s.scheme << ": max relative L2 drift " << s.max_relative_drift << '\n';
    }
    return Ok;
  }
  throw ConfigError("unknown subcommand");
}

/// Builds the parser. `c` receives the flag values.
inline void build_app(CLI::App& app, CliConfig& c) {
  app.description("Stochastic Manakov equation: exponential integrator and comparison schemes");
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // Desk preset values shown in help; the full-size presets are listed under --preset.
  struct Defaults {
    const char* presets;
    const char* a;
    const char* dx;
    const char* dt;
    const char* tfinal;
  };
  auto add_common = [&](CLI::App* sub, const Defaults& d) {
    sub->add_option("--preset", c.preset,
                    std::string("Named parameter set: ") + d.presets + " [default: desk]");
    sub->add_option("--a", c.a,
                    std::string("Domain half-width a, domain [-a,a] (space units) [desk: ") + d.a + "]");
    sub->add_option("--dx", c.dx, std::string("Mesh size (space units) [desk: ") + d.dx + "]");
    sub->add_option("--dt", c.dt, std::string(d.dt));
    sub->add_option("--tfinal", c.tfinal,
                    std::string("Final time T (time units) [desk: ") + d.tfinal + "]");
    sub->add_option("--gamma", c.gamma, "Noise intensity gamma >= 0 (dimensionless) [default: 1]");
    sub->add_option("--backend", c.backend, "Spatial backend: fd (Dirichlet) or spectral (periodic) [default: fd]")
        ->check(CLI::IsMember({"fd", "spectral"}));
    sub->add_option("--seed", c.seed, "Base random seed (integer) [default: 42]");
    sub->add_option("--out", c.out, "Output file path [default: <subcommand>.<format>]");
    sub->add_option("--format", c.format, "Output format: csv or json [default: csv]")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--fp-tol", c.fp_tol, "Fixed-point tolerance, absolute discrete L2 [default: 1e-12]");
    sub->add_option("--fp-maxiter", c.fp_maxiter, "Fixed-point iteration cap (count) [default: 50]");
    sub->add_option("--blowup-threshold", c.blowup,
                    "Abort when the H1 norm exceeds this (dimensionless) [default: 1e8]");
  };
  const Defaults single_path{"desk, paper-4.1", "20", "0.4",
                             "Time step h (time units) [desk: 0.00390625]", "0.5"};
  const Defaults conserve_defaults{"desk, paper-4.4, paper-4.5", "20", "0.4",
                                   "Time step h (time units) [desk: 0.00390625]", "0.5"};
  const Defaults study{"desk, paper-4.2", "20", "0.4",
                       "Coarsest time step h, a power of two (time units) [desk: 0.015625]", "0.5"};
  const Defaults bench_defaults{"desk, paper-4.3", "20", "0.4",
                                "Coarsest time step h, a power of two (time units) [desk: 0.015625]",
                                "0.5"};
  auto add_scheme = [&](CLI::App* sub, const std::string& help, bool repeatable) {
    auto* opt = sub->add_option("--scheme", c.schemes, help)
                    ->check(CLI::IsMember({"sexp", "modexp", "cn", "lt", "relax"}));
    if (!repeatable) opt->multi_option_policy(CLI::MultiOptionPolicy::Throw)->expected(1);
  };
  auto add_study = [&](CLI::App* sub) {
    sub->add_option("--samples", c.samples, "Monte Carlo sample count [desk: 50]");
    sub->add_option("--levels", c.levels, "Number of coarse steps dt, dt/2, ... (count) [desk: 5]");
    sub->add_option("--ref-refine", c.ref_refine,
                    "Halvings from the finest coarse step to the reference step (count) [desk: 3]");
    sub->add_option("--threads", c.threads, "Worker threads, 0 = all cores [default: 0]");
  };

  auto* evolve = app.add_subcommand("evolve", "Space-time intensity snapshots along one sample path");
  add_common(evolve, single_path);
  add_scheme(evolve, "Time integrator: sexp, modexp, cn, lt, relax [default: sexp]", false);
  evolve->add_option("--stride", c.stride, "Snapshot every N steps (count) [desk: 8]");

  auto* converge = app.add_subcommand("converge", "Strong convergence study on coupled paths (--dt = coarsest step, a power of two)");
  add_common(converge, study);
  add_scheme(converge, "Time integrator: sexp, modexp, cn, lt, relax [default: sexp]", false);
  add_study(converge);

  auto* conserve = app.add_subcommand("conserve", "L2 norm after every step, per scheme, one shared path");
  add_common(conserve, conserve_defaults);
  add_scheme(conserve, "Schemes to run, repeatable [default: all five]", true);

  auto* bench = app.add_subcommand("bench", "Work-precision comparison (--dt = coarsest step, a power of two)");
  add_common(bench, bench_defaults);
  add_scheme(bench, "Schemes to compare, repeatable [default: sexp cn lt relax]", true);
  add_study(bench);

  app.add_subcommand("selftest", "Unitarity, conservation, path-coupling and dense-oracle checks");

  for (auto* sub : app.get_subcommands({})) {
    sub->callback([&c, sub] { c.subcommand = sub->get_name(); });
  }
}

/// Parses argv (without the program name handled by CLI11) and runs the subcommand.
inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out,
                              std::ostream& err) {
  CLI::App app{"", "smanakov"};
  CliConfig c;
  build_app(app, c);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return Ok;
    }
    err << "smanakov: UsageError: " << e.get_name() << ": " << e.what() << '\n';
    return UsageError;
  }
  try {
    return dispatch(c, out, err);
  } catch (const Error& e) {
    const bool config = e.category() == ErrorCategory::Config;
    err << "smanakov: " << (config ? "ConfigError" : "NumericalFailure") << ": " << e.kind() << ": "
        << e.what() << '\n';
    return config ? ConfigFailure : NumericalFailure;
  } catch (const std::exception& e) {
    err << "smanakov: NumericalFailure: Unexpected: " << e.what() << '\n';
    return NumericalFailure;
  }
}

} // namespace smanakov::cli

#endif // SMANAKOV_TOOLS_CLI_APP_HPP
