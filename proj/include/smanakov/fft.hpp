#ifndef SMANAKOV_FFT_HPP
#define SMANAKOV_FFT_HPP

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "smanakov/small_matrix.hpp"

namespace smanakov {

namespace detail {
// FFTW's planner is not re-entrant; execution on fresh arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}
} // namespace detail

/// In-place DFT of both components of an interleaved Spinor array.
/// Forward uses e^{-2 pi i jk/m}; inverse is normalized by 1/m.
class SpectralTransform {
public:
  explicit SpectralTransform(std::size_t m) : m_(m) {
    static_assert(sizeof(Spinor) == 2 * sizeof(fftw_complex));
    std::vector<Spinor> scratch(m);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    const int n = static_cast<int>(m);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_many_dft(1, &n, 2, data, nullptr, 2, 1, data, nullptr, 2, 1,
                                  FFTW_FORWARD, flags);
    backward_ = fftw_plan_many_dft(1, &n, 2, data, nullptr, 2, 1, data, nullptr, 2, 1,
                                   FFTW_BACKWARD, flags);
  }

  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  ~SpectralTransform() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  std::size_t size() const { return m_; }

  void forward(std::span<Spinor> v) const {
    fftw_execute_dft(forward_, as_fftw(v), as_fftw(v));
  }

  void inverse(std::span<Spinor> v) const {
    fftw_execute_dft(backward_, as_fftw(v), as_fftw(v));
    const double scale = 1.0 / static_cast<double>(m_);
    for (auto& s : v) s *= cplx(scale);
  }

  /// Signed integer wavenumber of DFT slot k: 0..ceil(m/2)-1, then -floor(m/2)..-1.
  int wavenumber(std::size_t k) const {
    const auto kk = static_cast<long>(k);
    const auto mm = static_cast<long>(m_);
    return static_cast<int>(kk < (mm + 1) / 2 ? kk : kk - mm);
  }

  /// Angular frequency of slot k on a period of length `length`.
  double frequency(std::size_t k, double length) const {
    return 2.0 * std::numbers::pi * wavenumber(k) / length;
  }

  /// Shared, planner-safe instance per size.
  static std::shared_ptr<const SpectralTransform> cached(std::size_t m) {
    static std::mutex cache_mu;
    static std::map<std::size_t, std::shared_ptr<const SpectralTransform>> cache;
    std::lock_guard lock(cache_mu);
    auto& slot = cache[m];
    if (!slot) slot = std::make_shared<const SpectralTransform>(m);
    return slot;
  }

private:
  static fftw_complex* as_fftw(std::span<Spinor> v) {
    return reinterpret_cast<fftw_complex*>(v.data());
  }

  std::size_t m_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

} // namespace smanakov

#endif // SMANAKOV_FFT_HPP
