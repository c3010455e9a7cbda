#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tcal/curves.hpp"

namespace tcal {

struct RiskRecord {
  std::string method;
  std::string task;
  std::uint64_t n{};
  std::int64_t seed{};
  Risk risk;
  bool operator==(const RiskRecord&) const = default;
};

struct ParseOptions {
  // Reject columns/keys outside the documented schema.
  bool strict = true;
};

/// Parses an experiment log. The format is detected from the first
/// non-blank character: '{' selects JSON lines, anything else CSV with the
/// header `method,task,n,seed,risk` (columns in any order).
std::vector<RiskRecord> parse_log(std::string_view document, const ParseOptions& options = {});

std::string serialize_log_csv(const std::vector<RiskRecord>& records);
std::string serialize_log_jsonl(const std::vector<RiskRecord>& records);

/// Baselines CSV with header `task,blind_risk,max_risk`. Each row is
/// validated (blind > max) as it is read.
std::vector<BaselineSet> parse_baselines(std::string_view document,
                                         const ParseOptions& options = {});
std::string serialize_baselines(const std::vector<BaselineSet>& baselines);

/// Groups by (method, task) and averages seeds per n. Standard error is the
/// sample standard deviation over sqrt(seed count), 0 for a single seed.
/// Curves are ordered by (task, method); points by ascending n.
std::vector<LearningCurve> aggregate(const std::vector<RiskRecord>& records);

struct RegimeReport {
  std::string task;
  CalibratedRisk low_end_cr;
  CalibratedRisk high_end_cr;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultLowThreshold = 0.8;
inline constexpr double kDefaultHighThreshold = 0.2;

/// Checks that the measured regimes reach from near the blind guess (scratch
/// cr >= low_threshold at the smallest n) to near maximal supervision
/// (scratch cr <= high_threshold at the largest n).
RegimeReport validate_regimes(const CalibratedCurve& scratch_curve,
                              double low_threshold = kDefaultLowThreshold,
                              double high_threshold = kDefaultHighThreshold);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace tcal
