#include "tcal/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include <json.hpp>

#include "csv.hpp"
#include "tcal/error.hpp"
#include "tcal/metrics.hpp"

namespace tcal {
namespace {

using json = nlohmann::json;

[[noreturn]] void malformed(std::size_t line, const std::string& reason) {
  throw Error(ErrorCode::MalformedRow, "row at line " + std::to_string(line) + ": " + reason);
}

std::optional<std::uint64_t> parse_positive(std::string_view s) {
  std::uint64_t v = 0;
  if (s.empty() || s.front() < '0' || s.front() > '9') return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

// Maps required column names to header positions; rejects or skips extras.
template <std::size_t N>
std::array<std::size_t, N> map_header(const csv::Row& header,
                                      const std::array<std::string_view, N>& required,
                                      const ParseOptions& options) {
  std::array<std::size_t, N> index{};
  std::array<bool, N> seen{};
  for (std::size_t col = 0; col < header.fields.size(); ++col) {
    const auto& name = header.fields[col];
    auto it = std::find(required.begin(), required.end(), name);
    if (it == required.end()) {
      if (options.strict) throw Error(ErrorCode::UnknownField, "unknown column '" + name + "'");
      continue;
    }
    const auto k = static_cast<std::size_t>(it - required.begin());
    if (seen[k]) malformed(header.line, "duplicate column '" + name + "'");
    seen[k] = true;
    index[k] = col;
  }
  for (std::size_t k = 0; k < N; ++k) {
    if (!seen[k]) malformed(header.line, "missing column '" + std::string(required[k]) + "'");
  }
  return index;
}

RiskRecord make_record(std::size_t line, std::string method, std::string task,
                       std::optional<std::uint64_t> n, std::optional<std::int64_t> seed,
                       std::optional<double> risk) {
  if (method.empty()) malformed(line, "empty method");
  if (task.empty()) malformed(line, "empty task");
  if (!n) malformed(line, "n must be a positive base-10 integer");
  if (!seed) malformed(line, "seed must be an integer");
  if (!risk) malformed(line, "risk must be a finite number");
  return {std::move(method), std::move(task), *n, *seed, {*risk}};
}

std::vector<RiskRecord> parse_log_csv(std::string_view document, const ParseOptions& options) {
  static constexpr std::array<std::string_view, 5> kColumns{"method", "task", "n", "seed", "risk"};
  const auto rows = csv::read(document);
  std::vector<RiskRecord> records;
  if (rows.empty()) return records;

  const auto col = map_header(rows.front(), kColumns, options);
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != rows.front().fields.size()) {
      malformed(row.line, "expected " + std::to_string(rows.front().fields.size()) + " fields, got " +
                              std::to_string(row.fields.size()));
    }
    records.push_back(make_record(row.line, row.fields[col[0]], row.fields[col[1]],
                                  parse_positive(row.fields[col[2]]), parse_integer(row.fields[col[3]]),
                                  parse_real(row.fields[col[4]])));
  }
  return records;
}

std::vector<RiskRecord> parse_log_jsonl(std::string_view document, const ParseOptions& options) {
  std::vector<RiskRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= document.size()) {
    const std::size_t end = std::min(document.find('\n', pos), document.size());
    std::string_view line = document.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) malformed(line_no, "not a JSON object");
    for (const auto& [key, _] : obj.items()) {
      if (key != "method" && key != "task" && key != "n" && key != "seed" && key != "risk") {
        if (options.strict) throw Error(ErrorCode::UnknownField, "unknown key '" + key + "'");
      }
    }
    auto str = [&](const char* key) -> std::string {
      if (!obj.contains(key) || !obj[key].is_string()) malformed(line_no, std::string("missing string '") + key + "'");
      return obj[key].get<std::string>();
    };
    std::optional<std::uint64_t> n;
    if (obj.contains("n") && obj["n"].is_number_unsigned() && obj["n"].get<std::uint64_t>() > 0) {
      n = obj["n"].get<std::uint64_t>();
    }
    std::optional<std::int64_t> seed;
    if (obj.contains("seed") && obj["seed"].is_number_integer()) seed = obj["seed"].get<std::int64_t>();
    std::optional<double> risk;
    if (obj.contains("risk") && obj["risk"].is_number()) risk = obj["risk"].get<double>();
    records.push_back(make_record(line_no, str("method"), str("task"), n, seed, risk));
  }
  return records;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::vector<RiskRecord> parse_log(std::string_view document, const ParseOptions& options) {
  const auto first = document.find_first_not_of(" \t\r\n");
  auto records = (first != std::string_view::npos && document[first] == '{')
                     ? parse_log_jsonl(document, options)
                     : parse_log_csv(document, options);

  std::set<std::tuple<std::string_view, std::string_view, std::uint64_t, std::int64_t>> keys;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!keys.emplace(r.method, r.task, r.n, r.seed).second) {
      throw Error(ErrorCode::DuplicateRecord,
                  "data row " + std::to_string(i + 1) + ": repeated (method, task, n, seed) = (" + r.method +
                      ", " + r.task + ", " + std::to_string(r.n) + ", " + std::to_string(r.seed) + ")");
    }
  }
  return records;
}

std::string serialize_log_csv(const std::vector<RiskRecord>& records) {
  std::string out = "method,task,n,seed,risk\n";
  for (const auto& r : records) {
    out += csv::quote(r.method) + ',' + csv::quote(r.task) + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.seed) + ',' + format_double(r.risk.value) + '\n';
  }
  return out;
}

std::string serialize_log_jsonl(const std::vector<RiskRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json obj = {{"method", r.method}, {"task", r.task}, {"n", r.n}, {"seed", r.seed}, {"risk", r.risk.value}};
    out += obj.dump() + '\n';
  }
  return out;
}

std::vector<BaselineSet> parse_baselines(std::string_view document, const ParseOptions& options) {
  static constexpr std::array<std::string_view, 3> kColumns{"task", "blind_risk", "max_risk"};
  const auto rows = csv::read(document);
  std::vector<BaselineSet> out;
  if (rows.empty()) return out;

  const auto col = map_header(rows.front(), kColumns, options);
  std::set<std::string> tasks;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != rows.front().fields.size()) malformed(row.line, "wrong field count");
    const auto& task = row.fields[col[0]];
    if (task.empty()) malformed(row.line, "empty task");
    auto blind = parse_real(row.fields[col[1]]);
    auto ceiling = parse_real(row.fields[col[2]]);
    if (!blind || !ceiling) malformed(row.line, "baseline risks must be finite numbers");
    if (!tasks.insert(task).second) {
      throw Error(ErrorCode::DuplicateTask, "task '" + task + "' listed twice (line " + std::to_string(row.line) + ")");
    }
    BaselineSet b{task, {*blind}, {*ceiling}};
    validate(b);
    out.push_back(std::move(b));
  }
  return out;
}

std::string serialize_baselines(const std::vector<BaselineSet>& baselines) {
  std::string out = "task,blind_risk,max_risk\n";
  for (const auto& b : baselines) {
    out += csv::quote(b.task) + ',' + format_double(b.blind.value) + ',' +
           format_double(b.max_supervision.value) + '\n';
  }
  return out;
}

std::vector<LearningCurve> aggregate(const std::vector<RiskRecord>& records) {
  // (task, method) -> n -> [(seed, risk)]
  std::map<std::pair<std::string, std::string>,
           std::map<std::uint64_t, std::vector<std::pair<std::int64_t, double>>>>
      groups;
  for (const auto& r : records) groups[{r.task, r.method}][r.n].emplace_back(r.seed, r.risk.value);

  std::vector<LearningCurve> curves;
  curves.reserve(groups.size());
  for (auto& [key, by_n] : groups) {
    LearningCurve curve{key.second, key.first, {}};
    for (auto& [n, samples] : by_n) {
      // Summing in seed order makes the result independent of record order.
      std::sort(samples.begin(), samples.end());
      const auto k = samples.size();
      double sum = 0.0;
      for (const auto& s : samples) sum += s.second;
      const double mean = sum / static_cast<double>(k);
      double std_error = 0.0;
      if (k > 1) {
        double ss = 0.0;
        for (const auto& s : samples) ss += (s.second - mean) * (s.second - mean);
        std_error = std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k));
      }
      curve.points.push_back({n, mean, std_error, k});
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

RegimeReport validate_regimes(const CalibratedCurve& scratch_curve, double low_threshold,
                              double high_threshold) {
  if (scratch_curve.points.empty()) {
    throw Error(ErrorCode::EmptyCurve, "scratch curve for task '" + scratch_curve.task + "' is empty");
  }
  const auto& lo = scratch_curve.points.front();
  const auto& hi = scratch_curve.points.back();
  RegimeReport report{scratch_curve.task, lo.cr, hi.cr, {}};
  if (lo.cr.value < low_threshold) {
    report.warnings.push_back("task '" + scratch_curve.task + "': scratch calibrated risk " +
                              format_double(lo.cr.value) + " at smallest n=" + std::to_string(lo.n) +
                              " is below " + format_double(low_threshold) +
                              "; add smaller regimes to cover the low-data end");
  }
  if (hi.cr.value > high_threshold) {
    report.warnings.push_back("task '" + scratch_curve.task + "': scratch calibrated risk " +
                              format_double(hi.cr.value) + " at largest n=" + std::to_string(hi.n) +
                              " is above " + format_double(high_threshold) +
                              "; add larger regimes to reach the high-data end");
  }
  return report;
}

}  // namespace tcal
