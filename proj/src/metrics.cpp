#include "tcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcal/error.hpp"

namespace tcal {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::NonFiniteInput, std::string(what) + " is not finite");
  }
}

const CalibratedPoint* find_point(const CalibratedCurve& curve, std::uint64_t n) {
  auto it = std::lower_bound(curve.points.begin(), curve.points.end(), n,
                             [](const CalibratedPoint& p, std::uint64_t v) { return p.n < v; });
  if (it == curve.points.end() || it->n != n) return nullptr;
  return &*it;
}

void require_same_grid(const CalibratedCurve& a, const CalibratedCurve& b) {
  bool same = a.points.size() == b.points.size() &&
              std::equal(a.points.begin(), a.points.end(), b.points.begin(),
                         [](const CalibratedPoint& p, const CalibratedPoint& q) { return p.n == q.n; });
  if (!same) {
    throw Error(ErrorCode::GridMismatch,
                "n grids of '" + a.method + "' and '" + b.method + "' differ on task '" + a.task + "'");
  }
}

}  // namespace

void validate(const BaselineSet& baselines) {
  require_finite(baselines.blind.value, "blind-guess risk");
  require_finite(baselines.max_supervision.value, "maximal-supervision risk");
  if (!(baselines.blind.value > baselines.max_supervision.value)) {
    throw Error(ErrorCode::DegenerateBaselines,
                "task '" + baselines.task + "': blind-guess risk must exceed maximal-supervision risk");
  }
}

CalibratedRisk calibrate_risk(Risk risk, const BaselineSet& baselines) {
  validate(baselines);
  require_finite(risk.value, "risk");
  return {calibrate(risk.value, baselines.blind.value, baselines.max_supervision.value)};
}

CalibratedCurve calibrate_curve(const LearningCurve& curve, const BaselineSet& baselines) {
  validate(baselines);
  if (curve.points.empty()) {
    throw Error(ErrorCode::EmptyCurve, "curve '" + curve.method + "' has no points");
  }

  const auto m = static_cast<Eigen::Index>(curve.points.size());
  Eigen::ArrayXd risks(m);
  Eigen::ArrayXd spread(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    risks[i] = curve.points[i].mean;
    spread[i] = curve.points[i].std_error;
  }
  if (!risks.isFinite().all() || !spread.isFinite().all()) {
    throw Error(ErrorCode::NonFiniteInput, "curve '" + curve.method + "' has non-finite values");
  }

  const double blind = baselines.blind.value;
  const double ceiling = baselines.max_supervision.value;
  const Eigen::ArrayXd cr = calibrate(risks, blind, ceiling);
  const Eigen::ArrayXd scaled = spread / (blind - ceiling);

  CalibratedCurve out{curve.method, curve.task, {}};
  out.points.reserve(curve.points.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& p = curve.points[i];
    std::optional<double> dispersion;
    if (p.seed_count > 1) dispersion = scaled[i];
    out.points.push_back({p.n, {cr[i]}, dispersion});
  }
  return out;
}

double relative_improvement(CalibratedRisk cr_f, CalibratedRisk cr_scratch) {
  require_finite(cr_f.value, "calibrated risk");
  require_finite(cr_scratch.value, "scratch calibrated risk");
  if (cr_scratch.value == 0.0) {
    throw Error(ErrorCode::ScratchAtCeiling,
                "scratch calibrated risk is 0; relative improvement undefined");
  }
  return (cr_scratch.value - cr_f.value) / cr_scratch.value;
}

double delta_at(const CalibratedCurve& curve_f, const CalibratedCurve& curve_scratch,
                std::uint64_t n) {
  const auto* f = find_point(curve_f, n);
  const auto* s = find_point(curve_scratch, n);
  if (f == nullptr || s == nullptr) {
    throw Error(ErrorCode::UnknownRegime, "regime n=" + std::to_string(n) + " is not on both grids");
  }
  return s->cr.value - f->cr.value;
}

CciResult cci(const CalibratedCurve& curve_f, const CalibratedCurve& curve_scratch) {
  require_same_grid(curve_f, curve_scratch);
  const std::size_t m = curve_f.points.size();
  if (m < 2) {
    throw Error(ErrorCode::DegenerateRange, "CCI needs at least two regimes");
  }

  double area = 0.0;
  double x_min = curve_scratch.points[0].cr.value;
  double x_max = x_min;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double x0 = curve_scratch.points[i].cr.value;
    const double x1 = curve_scratch.points[i + 1].cr.value;
    const double g0 = x0 - curve_f.points[i].cr.value;
    const double g1 = x1 - curve_f.points[i + 1].cr.value;
    area += (x1 - x0) * (g0 + g1) / 2.0;
    x_min = std::min(x_min, x1);
    x_max = std::max(x_max, x1);
  }

  const double normalizer = (x_max * x_max - x_min * x_min) / 2.0;
  if (x_max == x_min || normalizer == 0.0 || !std::isfinite(area)) {
    throw Error(ErrorCode::DegenerateRange,
                "scratch calibrated range on task '" + curve_scratch.task + "' has zero diagonal area");
  }
  // Scratch risk usually falls as n grows; orient so the net traversal runs
  // toward increasing x and "below the diagonal" stays positive.
  const double orientation = curve_scratch.points[m - 1].cr.value < curve_scratch.points[0].cr.value ? -1.0 : 1.0;
  double value = orientation * area / normalizer;
  if (value == 0.0) value = 0.0;  // no negative zero
  return {value, {x_min, x_max}, m - 1};
}

}  // namespace tcal
