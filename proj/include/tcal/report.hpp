#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tcal/curves.hpp"

namespace tcal {

enum class PlotKind { CrVsN, CrVsScratch };

struct PlotSpec {
  PlotKind kind = PlotKind::CrVsN;
  std::vector<CalibratedCurve> curves;
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
  // Rotates the color cycle; colors are assigned by sorted method name.
  std::uint64_t style_seed = 0;
  bool log_x = true;
  bool show_bands = true;
};

struct AxisRange {
  double lo{};
  double hi{};
};

/// Bounds of a calibrated-risk axis: the data range widened to include the
/// reference levels 0 and 1, then padded by 5% of that unit span per side.
AxisRange calibrated_axis(double data_lo, double data_hi);

/// Calibrated risk against transfer-set size, with reference lines at the
/// maximal-supervision (0) and blind-guess (1) levels.
std::string render_cr_n(const PlotSpec& spec);

/// Calibrated risk against the scratch calibrated risk at the same n, with
/// the main diagonal and each method's CCI in the legend.
std::string render_cr_scratch(const PlotSpec& spec);

struct TableOutput {
  std::string markdown;
  std::string csv;
};

using CciTable = std::map<std::pair<std::string, std::string>, double>;  // (task, method) -> CCI

/// One row per (task, method), scratch first within a task, then methods in
/// lexicographic order. Columns: baselines, CCI, calibrated risk and relative
/// improvement at every n. Cells that do not apply are left empty.
TableOutput render_table(const std::vector<CalibratedCurve>& curves,
                         const std::vector<BaselineSet>& baselines, const CciTable& ccis);

/// Fixed-point text with `decimals` digits, rounding the shortest decimal
/// representation of `value` half-to-even.
std::string format_fixed(double value, int decimals);

}  // namespace tcal
