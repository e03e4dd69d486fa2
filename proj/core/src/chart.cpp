#include <algorithm>
#include <set>
#include <stdexcept>

#include "mechforce/fieldlang.hpp"

namespace mechforce {

std::string_view to_string(FiberKind kind) {
  switch (kind) {
    case FiberKind::none:
      return "none";
    case FiberKind::momenta:
      return "momenta";
    case FiberKind::velocities:
      return "velocities";
    case FiberKind::parameters:
      return "parameters";
  }
  return "?";
}

Chart::Chart(std::vector<std::string> base_names, FiberKind fiber_kind,
             std::vector<std::string> fiber_names, std::vector<Param> params)
    : base_names_(std::move(base_names)),
      fiber_kind_(fiber_kind),
      fiber_names_(std::move(fiber_names)),
      params_(std::move(params)) {
  if (base_names_.empty()) {
    throw std::invalid_argument("chart needs at least one base coordinate");
  }
  if (fiber_kind_ == FiberKind::none && !fiber_names_.empty()) {
    throw std::invalid_argument("chart without fiber has fiber names");
  }
  if (fiber_kind_ != FiberKind::none &&
      fiber_names_.size() != base_names_.size()) {
    throw std::invalid_argument(
        "fiber and base coordinate lists differ in length");
  }
  std::set<std::string> seen;
  auto claim = [&](const std::string& n) {
    if (n.empty()) throw std::invalid_argument("empty coordinate name");
    if (!seen.insert(n).second) {
      throw std::invalid_argument("duplicate name '" + n + "' in chart");
    }
  };
  for (const auto& n : base_names_) claim(n);
  for (const auto& n : fiber_names_) claim(n);
  for (const auto& [n, v] : params_) claim(n);
}

Chart::Chart(std::vector<std::string> base_names, std::vector<Param> params)
    : Chart(std::move(base_names), FiberKind::none, {}, std::move(params)) {}

std::optional<std::size_t> Chart::slot(std::string_view name) const {
  for (std::size_t i = 0; i < base_names_.size(); ++i) {
    if (base_names_[i] == name) return i;
  }
  for (std::size_t i = 0; i < fiber_names_.size(); ++i) {
    if (fiber_names_[i] == name) return base_names_.size() + i;
  }
  return std::nullopt;
}

std::optional<double> Chart::param(std::string_view name) const {
  for (const auto& [n, v] : params_) {
    if (n == name) return v;
  }
  return std::nullopt;
}

const std::string& Chart::name(std::size_t slot) const {
  if (slot < base_names_.size()) return base_names_[slot];
  return fiber_names_.at(slot - base_names_.size());
}

bool Chart::same_coordinates(const Chart& other) const {
  return base_names_ == other.base_names_ &&
         fiber_kind_ == other.fiber_kind_ &&
         fiber_names_ == other.fiber_names_;
}

bool Chart::operator==(const Chart& other) const {
  return same_coordinates(other) && params_ == other.params_;
}

ChartPtr make_chart(std::vector<std::string> base_names, FiberKind fiber_kind,
                    std::vector<std::string> fiber_names,
                    std::vector<Chart::Param> params) {
  return std::make_shared<const Chart>(std::move(base_names), fiber_kind,
                                       std::move(fiber_names),
                                       std::move(params));
}

std::vector<std::string> numbered_names(std::string_view prefix,
                                        std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    out.push_back(std::string(prefix) + std::to_string(i));
  }
  return out;
}

}  // namespace mechforce
