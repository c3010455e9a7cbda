#include "tcal/synth.hpp"

#include <algorithm>
#include <random>

#include "tcal/error.hpp"

namespace tcal {
namespace {

void require_refinement(int refinement) {
  if (refinement < 1) throw Error(ErrorCode::InvalidModel, "refinement must be >= 1");
}

// Accumulates the signed trapezoid area between a parametric curve and the
// diagonal, tracking the x extremes for the normalizer.
struct DiagonalArea {
  double area = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  bool started = false;
  double first_x = 0.0;
  double last_x = 0.0;
  double last_gap = 0.0;

  void add(double x, double y) {
    const double gap = x - y;
    if (!started) {
      x_min = x_max = x;
      first_x = x;
      started = true;
    } else {
      area += (x - last_x) * (last_gap + gap) / 2.0;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
    last_x = x;
    last_gap = gap;
  }

  double normalized() const {
    const double normalizer = (x_max * x_max - x_min * x_min) / 2.0;
    if (x_max == x_min || normalizer == 0.0) {
      throw Error(ErrorCode::DegenerateRange, "zero area under the diagonal");
    }
    const double orientation = last_x < first_x ? -1.0 : 1.0;
    double value = orientation * area / normalizer;
    if (value == 0.0) value = 0.0;
    return value;
  }
};

}  // namespace

void validate(const PowerLawModel& model) {
  const bool ok = std::isfinite(model.r_blind.value) && std::isfinite(model.r_max.value) &&
                  model.r_blind.value > model.r_max.value && model.n0 > 0.0 && std::isfinite(model.n0) &&
                  model.alpha > 0.0 && std::isfinite(model.alpha) && model.noise_sigma >= 0.0 &&
                  std::isfinite(model.noise_sigma);
  if (!ok) {
    throw Error(ErrorCode::InvalidModel,
                "power-law model needs r_blind > r_max, n0 > 0, alpha > 0 and noise_sigma >= 0");
  }
}

double power_law_risk(const PowerLawModel& model, double n) {
  return model.r_max.value +
         (model.r_blind.value - model.r_max.value) * power_law_decay(n, model.n0, model.alpha);
}

LearningCurve power_law_curve(const PowerLawModel& model, std::span<const std::uint64_t> regimes,
                              std::string method, std::string task) {
  validate(model);
  if (!std::is_sorted(regimes.begin(), regimes.end(), std::less_equal<>{}) ||
      std::adjacent_find(regimes.begin(), regimes.end()) != regimes.end()) {
    throw Error(ErrorCode::InvalidModel, "regimes must be strictly increasing");
  }
  std::mt19937_64 rng(model.rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  LearningCurve curve{std::move(method), std::move(task), {}};
  for (auto n : regimes) {
    double r = power_law_risk(model, static_cast<double>(n));
    if (model.noise_sigma > 0.0) r += model.noise_sigma * noise(rng);
    curve.points.push_back({n, r, 0.0, 1});
  }
  return curve;
}

std::vector<RiskRecord> simulate_log(const SimulationConfig& config) {
  std::vector<RiskRecord> records;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const auto& method = config.methods[m];
    for (std::size_t k = 0; k < config.seeds; ++k) {
      std::seed_seq seq{static_cast<std::uint32_t>(config.rng_seed),
                        static_cast<std::uint32_t>(config.rng_seed >> 32), static_cast<std::uint32_t>(m),
                        static_cast<std::uint32_t>(k)};
      std::mt19937_64 derive(seq);
      PowerLawModel model{config.r_blind, config.r_max, method.n0, method.alpha, config.noise_sigma, derive()};
      const auto curve = power_law_curve(model, config.regimes, method.name, config.task);
      for (const auto& p : curve.points) {
        records.push_back({method.name, config.task, p.n, static_cast<std::int64_t>(k), {p.mean}});
      }
    }
  }
  return records;
}

double cci_quadrature_oracle(const CalibratedCurve& curve_f, const CalibratedCurve& curve_scratch,
                             int refinement) {
  require_refinement(refinement);
  const auto& f = curve_f.points;
  const auto& s = curve_scratch.points;
  if (f.size() != s.size()) throw Error(ErrorCode::GridMismatch, "curves have different lengths");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].n != s[i].n) throw Error(ErrorCode::GridMismatch, "curves have different n grids");
  }
  if (f.size() < 2) throw Error(ErrorCode::DegenerateRange, "need at least two regimes");

  DiagonalArea acc;
  acc.add(s[0].cr.value, f[0].cr.value);
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    const double x0 = s[i].cr.value, x1 = s[i + 1].cr.value;
    const double y0 = f[i].cr.value, y1 = f[i + 1].cr.value;
    for (int k = 1; k < refinement; ++k) {
      const double t = static_cast<double>(k) / refinement;
      acc.add(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
    }
    acc.add(x1, y1);
  }
  return acc.normalized();
}

double cci_quadrature_oracle(const AnalyticPair& curves, std::span<const double> grid, int refinement) {
  require_refinement(refinement);
  if (grid.size() < 2) throw Error(ErrorCode::DegenerateRange, "need at least two grid points");

  DiagonalArea acc;
  acc.add(curves.scratch(grid[0]), curves.method(grid[0]));
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    for (int k = 1; k <= refinement; ++k) {
      const double n = k == refinement ? grid[i + 1]
                                       : grid[i] + (grid[i + 1] - grid[i]) * k / refinement;
      acc.add(curves.scratch(n), curves.method(n));
    }
  }
  return acc.normalized();
}

}  // namespace tcal
