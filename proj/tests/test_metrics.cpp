#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tcal/error.hpp"
#include "tcal/metrics.hpp"
#include "tcal/synth.hpp"

using namespace tcal;

namespace {

BaselineSet toy_baselines(double blind = 0.999, double ceiling = 0.0) { return {"toy", {blind}, {ceiling}}; }

CalibratedCurve make_curve(std::string method, const std::vector<std::uint64_t>& ns,
                           const std::vector<double>& crs) {
  CalibratedCurve c{std::move(method), "t", {}};
  for (std::size_t i = 0; i < ns.size(); ++i) c.points.push_back({ns[i], {crs[i]}, std::nullopt});
  return c;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected tcal::Error");
  return ErrorCode::Io;
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("calibrate_risk anchors and toy scenario") {
  const auto b = toy_baselines();
  CHECK(calibrate_risk({0.0}, b).value == 0.0);
  CHECK(calibrate_risk({0.999}, b).value == 1.0);
  // Hand evaluation: 0.1 / 0.999 = 0.1001001001...
  CHECK(calibrate_risk({0.1}, b).value == doctest::Approx(0.1001001001001001).epsilon(1e-15));
}

TEST_CASE("calibrate_risk passes values outside [0, 1] through") {
  const BaselineSet b{"t", {2.0}, {1.0}};
  CHECK(calibrate_risk({0.5}, b).value == doctest::Approx(-0.5));
  CHECK(calibrate_risk({3.0}, b).value == doctest::Approx(2.0));
}

TEST_CASE("calibrate_risk error paths") {
  CHECK(code_of([] { calibrate_risk({0.5}, toy_baselines(0.5, 0.5)); }) == ErrorCode::DegenerateBaselines);
  CHECK(code_of([] { calibrate_risk({0.5}, toy_baselines(0.2, 0.5)); }) == ErrorCode::DegenerateBaselines);
  CHECK(code_of([] { calibrate_risk({NAN}, toy_baselines()); }) == ErrorCode::NonFiniteInput);
  CHECK(code_of([] { calibrate_risk({INFINITY}, toy_baselines()); }) == ErrorCode::NonFiniteInput);
  CHECK(code_of([] { calibrate_risk({0.1}, toy_baselines(NAN, 0.0)); }) == ErrorCode::NonFiniteInput);
}

TEST_CASE("calibration properties over random triples") {
  std::mt19937_64 rng(0xC0FFEE);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> gap(1e-3, 10.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);

  for (int trial = 0; trial < 1000; ++trial) {
    const double ceiling = u(rng);
    const double blind = ceiling + gap(rng);
    const double r = u(rng);
    const BaselineSet b{"t", {blind}, {ceiling}};

    // Anchors are exact.
    REQUIRE(calibrate_risk({ceiling}, b).value == 0.0);
    REQUIRE(calibrate_risk({blind}, b).value == 1.0);

    // Affine invariance.
    const double a = scale(rng);
    const double s = shift(rng);
    const BaselineSet moved{"t", {a * blind + s}, {a * ceiling + s}};
    REQUIRE(rel_close(calibrate_risk({a * r + s}, moved).value, calibrate_risk({r}, b).value, 1e-12));

    // Monotonicity.
    const double r2 = r + gap(rng);
    REQUIRE(calibrate_risk({r2}, b).value > calibrate_risk({r}, b).value);

    // Mean commutes with calibration.
    std::vector<double> risks{u(rng), u(rng), u(rng), u(rng)};
    double mean = 0.0, cal_mean = 0.0;
    for (double v : risks) {
      mean += v / 4.0;
      cal_mean += calibrate_risk({v}, b).value / 4.0;
    }
    REQUIRE(std::abs(calibrate_risk({mean}, b).value - cal_mean) <= 1e-12 * std::max(1.0, std::abs(cal_mean)));
  }
}

TEST_CASE("calibrate_curve") {
  const BaselineSet b{"t", {0.8}, {0.2}};

  SUBCASE("constant blind curve maps to 1") {
    LearningCurve c{"m", "t", {{10, 0.8, 0.0, 1}, {100, 0.8, 0.0, 1}, {1000, 0.8, 0.0, 1}}};
    const auto out = calibrate_curve(c, b);
    REQUIRE(out.points.size() == 3);
    for (const auto& p : out.points) CHECK(p.cr.value == 1.0);
    CHECK(out.points[1].n == 100);
  }

  SUBCASE("pointwise equals calibrate_risk and dispersion scales by the slope") {
    LearningCurve c{"m", "t", {{1, 0.7, 0.03, 3}, {5, 0.33, 0.0, 1}, {9, 0.1, 0.06, 2}}};
    const auto out = calibrate_curve(c, b);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      CHECK(out.points[i].cr.value == calibrate_risk({c.points[i].mean}, b).value);
      CHECK(out.points[i].n == c.points[i].n);
    }
    REQUIRE(out.points[0].dispersion.has_value());
    CHECK(*out.points[0].dispersion == doctest::Approx(0.05));
    CHECK_FALSE(out.points[1].dispersion.has_value());
    CHECK(*out.points[2].dispersion == doctest::Approx(0.1));
  }

  SUBCASE("affine-transformed inputs give the same curve") {
    LearningCurve c{"m", "t", {{1, 0.7, 0.03, 3}, {5, 0.33, 0.01, 3}}};
    LearningCurve moved = c;
    for (auto& p : moved.points) {
      p.mean = 3.5 * p.mean - 2.0;
      p.std_error *= 3.5;
    }
    const auto x = calibrate_curve(c, b);
    const auto y = calibrate_curve(moved, {"t", {3.5 * 0.8 - 2.0}, {3.5 * 0.2 - 2.0}});
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(rel_close(x.points[i].cr.value, y.points[i].cr.value, 1e-12));
      CHECK(rel_close(*x.points[i].dispersion, *y.points[i].dispersion, 1e-12));
    }
  }

  SUBCASE("power-law curve calibrates to the bare decay") {
    const double n0 = 50.0, alpha = 0.7;
    LearningCurve c{"m", "t", {}};
    for (std::uint64_t n : {1u, 10u, 100u, 1000u, 10000u}) {
      const double decay = std::pow(1.0 + n / n0, -alpha);
      c.points.push_back({n, 0.2 + (0.8 - 0.2) * decay, 0.0, 1});
    }
    const auto out = calibrate_curve(c, b);
    for (const auto& p : out.points) {
      const double expected = std::pow(1.0 + static_cast<double>(p.n) / n0, -alpha);
      CHECK(rel_close(p.cr.value, expected, 1e-12));
    }
  }

  CHECK(code_of([&] { calibrate_curve({"m", "t", {}}, b); }) == ErrorCode::EmptyCurve);
}

TEST_CASE("relative_improvement") {
  CHECK(relative_improvement({0.4}, {0.4}) == 0.0);
  CHECK(relative_improvement({0.0}, {0.5}) == 1.0);
  CHECK(relative_improvement({0.6}, {0.8}) == doctest::Approx(0.25));
  CHECK(relative_improvement({0.9}, {0.8}) < 0.0);
  CHECK(code_of([] { relative_improvement({0.1}, {0.0}); }) == ErrorCode::ScratchAtCeiling);
}

TEST_CASE("delta_at") {
  const auto s = make_curve("scratch", {10, 100}, {0.9, 0.5});
  const auto f = make_curve("m", {10, 100}, {0.4, 0.5});
  CHECK(delta_at(f, s, 10) == doctest::Approx(0.5));
  CHECK(delta_at(s, s, 10) == 0.0);
  CHECK(delta_at(s, s, 100) == 0.0);
  CHECK(code_of([&] { delta_at(f, s, 50); }) == ErrorCode::UnknownRegime);
}

TEST_CASE("cci analytic cases") {
  const std::vector<std::uint64_t> ns{1, 2, 3, 4, 5};
  const std::vector<double> xs{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto scratch = make_curve("scratch", ns, xs);

  CHECK(std::abs(cci(scratch, scratch).cci) <= 1e-15);
  CHECK(cci(make_curve("m", ns, {0, 0, 0, 0, 0}), scratch).cci == doctest::Approx(1.0).epsilon(1e-12));
  const auto half = cci(make_curve("m", ns, {0.0, 0.125, 0.25, 0.375, 0.5}), scratch);
  CHECK(half.cci == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half.segment_count == 4);
  CHECK(half.x_range.first == 0.0);
  CHECK(half.x_range.second == 1.0);
}

TEST_CASE("cci integrates parametrically over n") {
  // x goes 0 -> 1 -> 0.5 with y = 0: segments contribute +0.5 and -0.375,
  // normalized by the diagonal area over [0, 1] (0.5): 0.125 / 0.5.
  const auto scratch = make_curve("scratch", {1, 2, 3}, {0.0, 1.0, 0.5});
  const auto f = make_curve("m", {1, 2, 3}, {0.0, 0.0, 0.0});
  CHECK(cci(f, scratch).cci == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("cci does not depend on the direction scratch risk travels in n") {
  // Realistic order: scratch risk falls as n grows.
  const std::vector<std::uint64_t> ns{10, 100, 1000, 10000, 100000};
  const auto scratch = make_curve("scratch", ns, {1.0, 0.75, 0.5, 0.25, 0.0});
  const auto half = make_curve("m", ns, {0.5, 0.375, 0.25, 0.125, 0.0});
  CHECK(cci(half, scratch).cci == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cci(make_curve("m", ns, {1.0, 1.0, 1.0, 1.0, 1.0}), scratch).cci < 0.0);
}

TEST_CASE("cci sign convention") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint64_t> ns;
    std::vector<double> xs, below, above;
    double x = u(rng) * 0.2;
    for (std::uint64_t n = 1; n <= 8; ++n) {
      ns.push_back(n);
      xs.push_back(x);
      below.push_back(x - 0.01 - 0.2 * u(rng));
      above.push_back(x + 0.01 + 0.2 * u(rng));
      x += 0.01 + 0.1 * u(rng);
    }
    const auto s = make_curve("scratch", ns, xs);
    REQUIRE(cci(make_curve("m", ns, below), s).cci > 0.0);
    REQUIRE(cci(make_curve("m", ns, above), s).cci < 0.0);

    std::reverse(xs.begin(), xs.end());
    std::reverse(below.begin(), below.end());
    const auto falling = make_curve("scratch", ns, xs);
    REQUIRE(cci(make_curve("m", ns, below), falling).cci > 0.0);
  }
}

TEST_CASE("cci error paths") {
  const auto s = make_curve("scratch", {1, 2}, {0.9, 0.1});
  CHECK(code_of([&] { cci(make_curve("m", {1, 3}, {0.5, 0.1}), s); }) == ErrorCode::GridMismatch);
  CHECK(code_of([&] { cci(make_curve("m", {1}, {0.5}), s); }) == ErrorCode::GridMismatch);
  CHECK(code_of([] {
          const auto flat = make_curve("scratch", {1, 2}, {0.5, 0.5});
          cci(flat, flat);
        }) == ErrorCode::DegenerateRange);
  CHECK(code_of([] {
          const auto one = make_curve("scratch", {1}, {0.5});
          cci(one, one);
        }) == ErrorCode::DegenerateRange);
  CHECK(code_of([] {
          const auto sym = make_curve("scratch", {1, 2}, {-0.5, 0.5});
          cci(sym, sym);
        }) == ErrorCode::DegenerateRange);
}

TEST_CASE("cci on a 1000-point grid matches a 100000-point quadrature of smooth curves") {
  struct Case {
    double alpha_s, alpha_f, n0_s, n0_f;
  };
  for (const auto& c : {Case{0.5, 0.5, 1000.0, 100.0}, Case{0.8, 0.3, 200.0, 20.0}, Case{0.4, 0.9, 50.0, 500.0}}) {
    // Parametrized by t = log10(n) over [1, 5].
    auto x = [c](double t) { return std::pow(1.0 + std::pow(10.0, t) / c.n0_s, -c.alpha_s); };
    auto y = [c](double t) { return std::pow(1.0 + std::pow(10.0, t) / c.n0_f, -c.alpha_f); };

    CalibratedCurve s{"scratch", "t", {}}, f{"m", "t", {}};
    for (int i = 0; i < 1000; ++i) {
      const double t = 1.0 + 4.0 * i / 999.0;
      s.points.push_back({static_cast<std::uint64_t>(i + 1), {x(t)}, std::nullopt});
      f.points.push_back({static_cast<std::uint64_t>(i + 1), {y(t)}, std::nullopt});
    }
    const std::vector<double> ends{1.0, 5.0};
    const double fine = cci_quadrature_oracle(AnalyticPair{x, y}, ends, 100000);
    CHECK(std::abs(cci(f, s).cci - fine) <= 1e-4);
  }
}
