#include "mechforce/sampling.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace mechforce {

namespace {

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                                83, 89, 97, 101, 103, 107, 109, 113};

double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

SampleDomain::SampleDomain(std::vector<std::pair<double, double>> bounds,
                           std::vector<ExclusionBand> exclusions)
    : bounds_(std::move(bounds)), exclusions_(std::move(exclusions)) {
  for (const auto& [lo, hi] : bounds_) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw std::invalid_argument("sample box bounds must be finite, lo < hi");
    }
  }
  for (const auto& band : exclusions_) {
    if (static_cast<std::size_t>(band.coefficients.size()) != bounds_.size()) {
      throw std::invalid_argument("exclusion band has wrong dimension");
    }
  }
}

SampleDomain SampleDomain::cube(std::size_t n, double lo, double hi) {
  return SampleDomain(std::vector<std::pair<double, double>>(n, {lo, hi}));
}

bool SampleDomain::contains(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != bounds_.size()) return false;
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    const double v = x[static_cast<Eigen::Index>(i)];
    if (v < bounds_[i].first || v > bounds_[i].second) return false;
  }
  for (const auto& band : exclusions_) {
    if (std::fabs(band.coefficients.dot(x) - band.offset) < band.radius) {
      return false;
    }
  }
  return true;
}

Vector SampleDomain::center() const {
  Vector c(static_cast<Eigen::Index>(bounds_.size()));
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    c[static_cast<Eigen::Index>(i)] =
        0.5 * (bounds_[i].first + bounds_[i].second);
  }
  return c;
}

SampleDomain SampleDomain::product(const SampleDomain& other) const {
  auto bounds = bounds_;
  bounds.insert(bounds.end(), other.bounds_.begin(), other.bounds_.end());
  const auto n = static_cast<Eigen::Index>(bounds_.size());
  const auto m = static_cast<Eigen::Index>(other.bounds_.size());
  std::vector<ExclusionBand> ex;
  for (const auto& b : exclusions_) {
    ExclusionBand e = b;
    e.coefficients = Vector::Zero(n + m);
    e.coefficients.head(n) = b.coefficients;
    ex.push_back(e);
  }
  for (const auto& b : other.exclusions_) {
    ExclusionBand e = b;
    e.coefficients = Vector::Zero(n + m);
    e.coefficients.tail(m) = b.coefficients;
    ex.push_back(e);
  }
  return SampleDomain(std::move(bounds), std::move(ex));
}

std::vector<Vector> quasi_random_points(const SampleDomain& domain,
                                        std::size_t count,
                                        std::uint64_t seed) {
  const std::size_t d = domain.dim();
  if (d > std::size(kPrimes)) {
    throw std::invalid_argument("quasi-random sampling supports at most 30 "
                                "dimensions");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(d);
  for (auto& s : shift) s = unit(rng);

  std::vector<Vector> out;
  out.reserve(count);
  const std::size_t max_tries = 1000 * count + 1000;
  for (std::uint64_t k = 1; out.size() < count; ++k) {
    if (k > max_tries) {
      throw std::runtime_error("sample domain exclusions reject almost every "
                               "point");
    }
    Vector x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      double u = radical_inverse(k, kPrimes[i]) + shift[i];
      u -= std::floor(u);
      const auto [lo, hi] = domain.bounds()[i];
      x[static_cast<Eigen::Index>(i)] = lo + u * (hi - lo);
    }
    if (domain.contains(x)) out.push_back(std::move(x));
  }
  return out;
}

}  // namespace mechforce
