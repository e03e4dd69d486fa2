#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "mechforce/fieldlang.hpp"

namespace mechforce {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

/// Points with |coefficients . q - offset| < radius are excluded.
struct ExclusionBand {
  Vector coefficients;
  double offset = 0.0;
  double radius = 0.0;
};

/// Axis-aligned box with optional excluded bands (used to keep samples away
/// from singular sets such as collisions).
class SampleDomain {
 public:
  SampleDomain() = default;
  explicit SampleDomain(std::vector<std::pair<double, double>> bounds,
                        std::vector<ExclusionBand> exclusions = {});

  /// [lo, hi]^n
  static SampleDomain cube(std::size_t n, double lo = -1.0, double hi = 1.0);

  std::size_t dim() const noexcept { return bounds_.size(); }
  const std::vector<std::pair<double, double>>& bounds() const noexcept {
    return bounds_;
  }
  const std::vector<ExclusionBand>& exclusions() const noexcept {
    return exclusions_;
  }
  bool contains(const Vector& x) const;
  Vector center() const;

  /// Cartesian product with another domain (exclusions of `other` are
  /// shifted to the trailing coordinates).
  SampleDomain product(const SampleDomain& other) const;

 private:
  std::vector<std::pair<double, double>> bounds_;
  std::vector<ExclusionBand> exclusions_;
};

/// Deterministic quasi-random samples: a Halton sequence with a seeded
/// Cranley-Patterson rotation, rejection-filtered by the exclusion bands.
std::vector<Vector> quasi_random_points(const SampleDomain& domain,
                                        std::size_t count,
                                        std::uint64_t seed = kDefaultSeed);

/// Run `body(i)` for i in [0, n) on a few worker threads. The first
/// exception thrown by any task is rethrown after all workers finish.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mechforce
