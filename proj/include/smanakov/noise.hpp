#ifndef SMANAKOV_NOISE_HPP
#define SMANAKOV_NOISE_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "smanakov/errors.hpp"
#include "smanakov/format.hpp"
#include "smanakov/model.hpp"

namespace smanakov {

/// Identifies one reproducible noise stream.
struct NoiseConfig {
  std::uint64_t base_seed = 0;
  std::uint64_t sample_index = 0;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-sample generator seed; independent of the order in which samples are drawn.
constexpr std::uint64_t derive_seed(const NoiseConfig& cfg) {
  return mix64(mix64(cfg.base_seed) ^ mix64(cfg.sample_index + 0x632be59bd9b4e019ULL));
}

/// Standard normal variates by the Box-Muller transform on 53-bit uniforms drawn from
/// mt19937_64. Both outputs of each pair are used. The engine sequence is fixed by the
/// C++ standard, so streams agree across standard libraries (up to libm rounding).
class GaussianStream {
public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

private:
  // (0, 1]
  double uniform_open() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Three-component Wiener increments on a uniform time grid. Immutable once built.
class BrownianPath {
public:
  BrownianPath() = default;
  BrownianPath(double h, std::vector<Vec3> increments) : h_(h), increments_(std::move(increments)) {
    if (!(h > 0.0)) throw ConfigError("path step must be > 0");
  }

  std::size_t steps() const { return increments_.size(); }
  double step_size() const { return h_; }
  double horizon() const { return h_ * static_cast<double>(increments_.size()); }
  const Vec3& increment(std::size_t n) const { return increments_.at(n); }
  const std::vector<Vec3>& increments() const { return increments_; }

  friend bool operator==(const BrownianPath&, const BrownianPath&) = default;

private:
  double h_ = 0.0;
  std::vector<Vec3> increments_;
};

inline BrownianPath sample_path(const NoiseConfig& cfg, std::size_t n_fine, double h_fine) {
  if (n_fine < 1) throw ConfigError("path needs at least one step");
  if (!(h_fine > 0.0)) throw ConfigError("path step must be > 0");
  GaussianStream gauss(derive_seed(cfg));
  const double scale = std::sqrt(h_fine);
  std::vector<Vec3> inc(n_fine);
  for (auto& dw : inc) {
    for (auto& c : dw) c = scale * gauss.next();
  }
  return BrownianPath(h_fine, std::move(inc));
}

/// Sums consecutive blocks of `factor` increments, left to right.
inline BrownianPath coarsen(const BrownianPath& path, std::size_t factor) {
  if (factor == 0 || !std::has_single_bit(factor)) {
    throw BadFactor("coarsening factor " + std::to_string(factor) + " is not a power of two");
  }
  if (path.steps() % factor != 0) {
    throw BadFactor("coarsening factor " + std::to_string(factor) + " does not divide " +
                    std::to_string(path.steps()) + " steps");
  }
  if (factor == 1) return path;
  const auto& fine = path.increments();
  std::vector<Vec3> coarse(path.steps() / factor);
  // Pairwise dyadic reduction keeps coarsen(coarsen(p, 2), 2) == coarsen(p, 4) bitwise.
  std::vector<Vec3> level(fine);
  for (std::size_t f = factor; f > 1; f /= 2) {
    std::vector<Vec3> next(level.size() / 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      for (int k = 0; k < 3; ++k) next[i][k] = level[2 * i][k] + level[2 * i + 1][k];
    }
    level = std::move(next);
  }
  coarse = std::move(level);
  return BrownianPath(path.step_size() * static_cast<double>(factor), std::move(coarse));
}

/// chi^n = dW^n / sqrt(h).
inline Vec3 scaled_chi(const BrownianPath& path, std::size_t step) {
  if (step >= path.steps()) throw std::out_of_range("noise step index out of range");
  const double s = 1.0 / std::sqrt(path.step_size());
  const Vec3& dw = path.increment(step);
  return {dw[0] * s, dw[1] * s, dw[2] * s};
}

/// CSV dump: a "# h=<step>" comment line, then columns step,dW1,dW2,dW3.
inline void write_path_csv(std::ostream& os, const BrownianPath& path) {
  os << "# h=" << format_double(path.step_size()) << '\n';
  os << "step,dW1,dW2,dW3\n";
  for (std::size_t n = 0; n < path.steps(); ++n) {
    const auto& dw = path.increment(n);
    os << n << ',' << format_double(dw[0]) << ',' << format_double(dw[1]) << ','
       << format_double(dw[2]) << '\n';
  }
}

inline BrownianPath read_path_csv(std::istream& is) {
  std::string line;
  double h = 0.0;
  std::vector<Vec3> inc;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# h=", 0) == 0) {
      h = parse_double(std::string_view(line).substr(4));
      continue;
    }
    if (!header_seen) {
      if (line != "step,dW1,dW2,dW3") throw ConfigError("unexpected path CSV header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() != 4) throw ConfigError("path CSV row must have 4 columns: " + line);
    if (static_cast<std::size_t>(parse_double(cols[0])) != inc.size()) {
      throw ConfigError("path CSV steps must be consecutive from 0");
    }
    inc.push_back({parse_double(cols[1]), parse_double(cols[2]), parse_double(cols[3])});
  }
  if (!(h > 0.0)) throw ConfigError("path CSV lacks a positive '# h=' line");
  return BrownianPath(h, std::move(inc));
}

} // namespace smanakov

#endif // SMANAKOV_NOISE_HPP
