#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Core>

#include "tcal/curves.hpp"

namespace tcal {

// ---------------------------------------------------------------------------
// Calibration arithmetic
// ---------------------------------------------------------------------------

/// Affine map of a risk onto the calibrated scale: (r - max) / (blind - max).
/// No validation; see calibrate_risk for the checked entry point.
template <typename Scalar>
constexpr Scalar calibrate(Scalar risk, Scalar blind, Scalar max_supervision) {
  return (risk - max_supervision) / (blind - max_supervision);
}

/// Expression form over an Eigen array of risks. Element i evaluates exactly
/// as the scalar overload does.
template <typename Derived>
auto calibrate(const Eigen::ArrayBase<Derived>& risks,
               typename Derived::Scalar blind,
               typename Derived::Scalar max_supervision) {
  return (risks - max_supervision) / (blind - max_supervision);
}

// Throws DegenerateBaselines unless blind > max_supervision (both finite).
void validate(const BaselineSet& baselines);

CalibratedRisk calibrate_risk(Risk risk, const BaselineSet& baselines);

/// Pointwise calibration. Dispersion (the standard error) is scaled by the
/// calibration slope; single-seed points carry no dispersion.
CalibratedCurve calibrate_curve(const LearningCurve& curve, const BaselineSet& baselines);

/// Fraction of the scratch-to-ceiling gap closed by a method:
/// (cr_scratch - cr_f) / cr_scratch. Positive when the method beats scratch.
double relative_improvement(CalibratedRisk cr_f, CalibratedRisk cr_scratch);

// cr_scratch(n) - cr_f(n).
double delta_at(const CalibratedCurve& curve_f, const CalibratedCurve& curve_scratch,
                std::uint64_t n);

// ---------------------------------------------------------------------------
// Calibrated Cumulative Improvement
// ---------------------------------------------------------------------------

struct CciResult {
  double cci{};
  std::pair<double, double> x_range;
  std::size_t segment_count{};
};

/// Normalized signed area between the (cr_scratch, cr_f) curve and the main
/// diagonal.
///
/// The curve is traversed in order of n, so a non-monotone scratch curve
/// contributes signed trapezoids rather than being re-sorted by x. The sum is
/// oriented by the net direction of x (first to last regime), so decreasing
/// and increasing scratch curves agree. The normalizer is the area under the
/// diagonal over the observed scratch range [x_min, x_max]. Curves lying
/// below the diagonal give a positive value.
///
/// Throws GridMismatch if the n grids differ, DegenerateRange if there are
/// fewer than two points or the normalizer vanishes.
CciResult cci(const CalibratedCurve& curve_f, const CalibratedCurve& curve_scratch);

}  // namespace tcal
