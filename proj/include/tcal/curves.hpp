#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tcal {

// Reserved method name of the scratch control.
inline constexpr const char* kScratchMethod = "scratch";

// Empirical risk in the loss's native units; lower is better.
struct Risk {
  double value{};
  auto operator<=>(const Risk&) const = default;
};

// Risk rescaled so that maximal supervision maps to 0 and the blind guess to 1.
// Not clamped: values below 0 or above 1 are meaningful.
struct CalibratedRisk {
  double value{};
  auto operator<=>(const CalibratedRisk&) const = default;
};

struct BaselineSet {
  std::string task;
  Risk blind;
  Risk max_supervision;
  bool operator==(const BaselineSet&) const = default;
};

struct LearningPoint {
  std::uint64_t n{};
  double mean{};
  double std_error{};
  std::size_t seed_count{1};
  bool operator==(const LearningPoint&) const = default;
};

/// Seed-aggregated risks of one (method, task) pair, sorted by strictly
/// increasing n.
struct LearningCurve {
  std::string method;
  std::string task;
  std::vector<LearningPoint> points;
  bool operator==(const LearningCurve&) const = default;
};

struct CalibratedPoint {
  std::uint64_t n{};
  CalibratedRisk cr;
  std::optional<double> dispersion;
  bool operator==(const CalibratedPoint&) const = default;
};

struct CalibratedCurve {
  std::string method;
  std::string task;
  std::vector<CalibratedPoint> points;
  bool operator==(const CalibratedCurve&) const = default;

  bool is_scratch() const { return method == kScratchMethod; }
};

}  // namespace tcal
