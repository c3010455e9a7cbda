#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcal/curves.hpp"
#include "tcal/ingest.hpp"

namespace tcal {

/// Offset power law spanning the blind-guess level at n = 0 down to the
/// maximal-supervision level as n grows:
///   R(n) = r_max + (r_blind - r_max) * (1 + n / n0)^(-alpha)
struct PowerLawModel {
  Risk r_blind{1.0};
  Risk r_max{0.0};
  double n0 = 100.0;
  double alpha = 0.5;
  double noise_sigma = 0.0;
  std::uint64_t rng_seed = 0;
};

// Throws InvalidModel unless r_blind > r_max, n0 > 0, alpha > 0, sigma >= 0.
void validate(const PowerLawModel& model);

template <typename Scalar>
Scalar power_law_decay(Scalar n, Scalar n0, Scalar alpha) {
  using std::pow;
  return pow(Scalar(1) + n / n0, -alpha);
}

// Noiseless risk at n.
double power_law_risk(const PowerLawModel& model, double n);

/// One point per regime (strictly increasing, n = 0 allowed), with gaussian
/// noise of scale noise_sigma drawn from a generator seeded by rng_seed.
LearningCurve power_law_curve(const PowerLawModel& model, std::span<const std::uint64_t> regimes,
                              std::string method = "synthetic", std::string task = "synthetic");

struct SimulatedMethod {
  std::string name;
  double n0;
  double alpha;
};

struct SimulationConfig {
  std::string task = "synthetic";
  Risk r_blind{1.0};
  Risk r_max{0.0};
  std::vector<SimulatedMethod> methods;
  std::vector<std::uint64_t> regimes;
  std::size_t seeds = 3;
  double noise_sigma = 0.01;
  std::uint64_t rng_seed = 0;
};

/// Log records for every (method, regime, seed). Replicate k of a method is
/// drawn with an independent generator derived from (rng_seed, method, k).
std::vector<RiskRecord> simulate_log(const SimulationConfig& config);

// ---------------------------------------------------------------------------
// CCI quadrature oracles
// ---------------------------------------------------------------------------

/// Recomputes the parametric CCI integral after subdividing every segment
/// into `refinement` linear pieces. Refinement 1 is the plain trapezoid sum.
double cci_quadrature_oracle(const CalibratedCurve& curve_f, const CalibratedCurve& curve_scratch,
                             int refinement);

/// Same integral for analytic curves x(n) = scratch(n), y(n) = method(n):
/// each interval of `grid` is split into `refinement` equal steps in n and
/// the functions are evaluated there.
struct AnalyticPair {
  std::function<double(double)> scratch;
  std::function<double(double)> method;
};

double cci_quadrature_oracle(const AnalyticPair& curves, std::span<const double> grid, int refinement);

}  // namespace tcal
