#include <doctest.h>

#include <regex>
#include <string>
#include <vector>

#include "tcal/error.hpp"
#include "tcal/report.hpp"

using namespace tcal;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected tcal::Error");
  return ErrorCode::Io;
}

CalibratedCurve curve(std::string method, const std::vector<std::uint64_t>& ns, const std::vector<double>& crs,
                      std::optional<double> dispersion = std::nullopt) {
  CalibratedCurve c{std::move(method), "task", {}};
  for (std::size_t i = 0; i < ns.size(); ++i) c.points.push_back({ns[i], {crs[i]}, dispersion});
  return c;
}

// All elements of the given tag whose attributes contain `marker`.
std::vector<std::string> elements(const std::string& svg, const std::string& tag, const std::string& marker) {
  std::vector<std::string> out;
  const std::regex re("<" + tag + "\\b[^>]*>");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    if (it->str().find(marker) != std::string::npos) out.push_back(it->str());
  }
  return out;
}

std::string attr(const std::string& element, const std::string& name) {
  std::smatch m;
  const std::regex re("\\s" + name + "=\"([^\"]*)\"");
  REQUIRE(std::regex_search(element, m, re));
  return m[1];
}

double num_attr(const std::string& element, const std::string& name) { return std::stod(attr(element, name)); }

std::vector<std::pair<double, double>> points_of(const std::string& polyline) {
  std::vector<std::pair<double, double>> out;
  const std::string pts = attr(polyline, "points");
  const std::regex re("(-?[0-9.]+),(-?[0-9.]+)");
  for (auto it = std::sregex_iterator(pts.begin(), pts.end(), re); it != std::sregex_iterator(); ++it) {
    out.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  }
  return out;
}

const std::vector<std::uint64_t> kGrid{10, 100, 1000, 10000};

}  // namespace

TEST_CASE("format_fixed rounds the decimal value half to even") {
  CHECK(format_fixed(0.00005, 4) == "0.0000");
  CHECK(format_fixed(0.00015, 4) == "0.0002");
  CHECK(format_fixed(0.00025, 4) == "0.0002");
  CHECK(format_fixed(0.000051, 4) == "0.0001");
  CHECK(format_fixed(-0.00005, 4) == "0.0000");
  CHECK(format_fixed(-1.23456, 4) == "-1.2346");
  CHECK(format_fixed(0.99995, 4) == "1.0000");
  CHECK(format_fixed(9.99995, 4) == "10.0000");
  CHECK(format_fixed(123456.5, 0) == "123456");
  CHECK(format_fixed(0.0, 4) == "0.0000");
  CHECK(format_fixed(1e-20, 4) == "0.0000");
  CHECK(format_fixed(2.5e7, 2) == "25000000.00");
  CHECK(format_fixed(0.5, 2) == "0.50");
  CHECK(format_fixed(0.125, 2) == "0.12");
}

TEST_CASE("calibrated axis padding") {
  const auto a = calibrated_axis(-0.1, 1.05);
  CHECK(a.lo == doctest::Approx(-0.15).epsilon(1e-12));
  CHECK(a.hi == doctest::Approx(1.1).epsilon(1e-12));
  const auto unit = calibrated_axis(0.3, 0.7);
  CHECK(unit.lo == doctest::Approx(-0.05));
  CHECK(unit.hi == doctest::Approx(1.05));
}

TEST_CASE("render_cr_n") {
  PlotSpec spec;
  spec.title = "t";
  spec.curves = {curve("m", kGrid, {1, 1, 1, 1})};

  SUBCASE("constant blind-level curve lies on the blind-guess reference line") {
    const auto svg = render_cr_n(spec);
    const auto lines = elements(svg, "polyline", "class=\"curve\"");
    REQUIRE(lines.size() == 1);
    const auto ref = elements(svg, "line", "data-ref=\"blind-guess\"");
    REQUIRE(ref.size() == 1);
    for (const auto& [x, y] : points_of(lines[0])) CHECK(y == num_attr(ref[0], "y1"));
    CHECK(elements(svg, "line", "data-ref=\"max-supervision\"").size() == 1);
  }

  SUBCASE("deterministic output") { CHECK(render_cr_n(spec) == render_cr_n(spec)); }

  SUBCASE("y-range padding is emitted with the transform") {
    spec.curves = {curve("m", kGrid, {1.05, 0.5, 0.2, -0.1})};
    const auto g = elements(render_cr_n(spec), "g", "id=\"plot\"").at(0);
    CHECK(num_attr(g, "data-y-min") == doctest::Approx(-0.15).epsilon(1e-12));
    CHECK(num_attr(g, "data-y-max") == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(attr(g, "data-x-scale") == "log10");
  }

  SUBCASE("every curve once in the legend, one marker per grid point") {
    spec.curves = {curve("scratch", kGrid, {0.9, 0.6, 0.3, 0.1}, 0.02), curve("swav", kGrid, {0.8, 0.4, 0.2, 0.05}),
                   curve("moco", kGrid, {0.85, 0.5, 0.25, 0.07})};
    const auto svg = render_cr_n(spec);
    for (const auto& c : spec.curves) {
      CHECK(elements(svg, "text", "class=\"legend-entry\" data-method=\"" + c.method + "\"").size() == 1);
      const auto markers = elements(svg, "circle", "data-method=\"" + c.method + "\"");
      REQUIRE(markers.size() == kGrid.size());
      for (std::size_t i = 0; i < kGrid.size(); ++i) CHECK(attr(markers[i], "data-n") == std::to_string(kGrid[i]));
    }
    CHECK(elements(svg, "polygon", "class=\"band\"").size() == 1);
    spec.show_bands = false;
    CHECK(elements(render_cr_n(spec), "polygon", "class=\"band\"").empty());
  }

  SUBCASE("colors follow method names, not input order") {
    spec.curves = {curve("b", kGrid, {0.9, 0.6, 0.3, 0.1}), curve("a", kGrid, {0.8, 0.4, 0.2, 0.05})};
    const auto one = render_cr_n(spec);
    std::swap(spec.curves[0], spec.curves[1]);
    const auto two = render_cr_n(spec);
    for (const char* m : {"a", "b"}) {
      const std::string sel = std::string("data-method=\"") + m + "\"";
      CHECK(attr(elements(one, "polyline", sel).at(0), "stroke") == attr(elements(two, "polyline", sel).at(0), "stroke"));
    }
  }

  SUBCASE("linear x axis") {
    spec.log_x = false;
    CHECK(attr(elements(render_cr_n(spec), "g", "id=\"plot\"").at(0), "data-x-scale") == "linear");
  }

  SUBCASE("empty curve") {
    spec.curves = {curve("m", {}, {})};
    CHECK(code_of([&] { render_cr_n(spec); }) == ErrorCode::EmptyCurve);
  }
}

TEST_CASE("render_cr_scratch") {
  PlotSpec spec;
  spec.kind = PlotKind::CrVsScratch;
  const std::vector<std::uint64_t> grid{1, 2, 3, 4, 5};
  const auto scratch = curve("scratch", grid, {1.0, 0.75, 0.5, 0.25, 0.0});

  SUBCASE("scratch alone lies on the diagonal") {
    spec.curves = {scratch};
    const auto svg = render_cr_scratch(spec);
    const auto lines = elements(svg, "polyline", "class=\"curve\"");
    REQUIRE(lines.size() == 1);
    for (const auto& [x, y] : points_of(lines[0])) {
      const auto g = elements(svg, "g", "id=\"plot\"").at(0);
      // The axes share the same data range, so the diagonal maps x to y.
      const double tx = (x - num_attr(g, "data-left")) / (num_attr(g, "data-right") - num_attr(g, "data-left"));
      const double ty = (num_attr(g, "data-bottom") - y) / (num_attr(g, "data-bottom") - num_attr(g, "data-top"));
      CHECK(tx == doctest::Approx(ty).epsilon(1e-4));
    }
    CHECK(svg.find("scratch (CCI 0.00)") != std::string::npos);
  }

  SUBCASE("legend carries each method's CCI") {
    spec.curves = {curve("half", grid, {0.5, 0.375, 0.25, 0.125, 0.0}), scratch, curve("same", grid, {1.0, 0.75, 0.5, 0.25, 0.0})};
    const auto svg = render_cr_scratch(spec);
    CHECK(svg.find("half (CCI 0.50)") != std::string::npos);
    CHECK(svg.find("same (CCI 0.00)") != std::string::npos);
    for (const auto& c : spec.curves) {
      CHECK(elements(svg, "text", "data-method=\"" + c.method + "\"").size() == 1);
      CHECK(elements(svg, "circle", "data-method=\"" + c.method + "\"").size() == grid.size());
    }
  }

  SUBCASE("diagonal endpoints map back to the scratch extremes") {
    spec.curves = {curve("scratch", grid, {0.9, 0.95, 0.5, 0.2, 0.1}), curve("m", grid, {0.8, 0.6, 0.3, 0.1, -0.05})};
    const auto svg = render_cr_scratch(spec);
    const auto g = elements(svg, "g", "id=\"plot\"").at(0);
    const auto d = elements(svg, "line", "class=\"diagonal\"").at(0);
    auto to_x = [&](double px) {
      return num_attr(g, "data-x-min") + (px - num_attr(g, "data-left")) / (num_attr(g, "data-right") - num_attr(g, "data-left")) *
                                             (num_attr(g, "data-x-max") - num_attr(g, "data-x-min"));
    };
    auto to_y = [&](double py) {
      return num_attr(g, "data-y-min") + (num_attr(g, "data-bottom") - py) / (num_attr(g, "data-bottom") - num_attr(g, "data-top")) *
                                             (num_attr(g, "data-y-max") - num_attr(g, "data-y-min"));
    };
    CHECK(to_x(num_attr(d, "x1")) == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(to_y(num_attr(d, "y1")) == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(to_x(num_attr(d, "x2")) == doctest::Approx(0.95).epsilon(1e-3));
    CHECK(to_y(num_attr(d, "y2")) == doctest::Approx(0.95).epsilon(1e-3));
  }

  SUBCASE("errors") {
    spec.curves = {curve("m", grid, {0.5, 0.4, 0.3, 0.2, 0.1})};
    CHECK(code_of([&] { render_cr_scratch(spec); }) == ErrorCode::MissingScratch);
    spec.curves = {scratch, curve("m", {1, 2, 3}, {0.5, 0.4, 0.3})};
    CHECK(code_of([&] { render_cr_scratch(spec); }) == ErrorCode::GridMismatch);
  }
}

TEST_CASE("render_table") {
  SUBCASE("empty input gives a header-only table") {
    const auto t = render_table({}, {}, {});
    CHECK(t.csv == "task,method,blind_risk,max_risk,cci\n");
    CHECK(t.markdown == "| task | method | blind_risk | max_risk | cci |\n| --- | --- | ---: | ---: | ---: |\n");
  }

  SUBCASE("scratch row first, 4-decimal cells, relative improvement per n") {
    const std::vector<CalibratedCurve> curves{curve("swav", {10, 100}, {0.6, 0.00005}),
                                              curve("scratch", {10, 100}, {0.8, 0.1})};
    const std::vector<BaselineSet> baselines{{"task", {0.9}, {0.1}}};
    const CciTable ccis{{{"task", "scratch"}, 0.0}, {{"task", "swav"}, 0.123456}};
    const auto t = render_table(curves, baselines, ccis);
    CHECK(t.csv ==
          "task,method,blind_risk,max_risk,cci,cr_n10,cr_n100,ri_n10,ri_n100\n"
          "task,scratch,0.9000,0.1000,0.0000,0.8000,0.1000,0.0000,0.0000\n"
          "task,swav,0.9000,0.1000,0.1235,0.6000,0.0000,0.2500,0.9995\n");
    CHECK(t.markdown.find("| task | scratch |") < t.markdown.find("| task | swav |"));
  }

  SUBCASE("rows sort by task then method; missing cells stay empty") {
    const std::vector<CalibratedCurve> curves{curve("b", {10}, {0.5}), curve("a", {20}, {0.4})};
    const auto t = render_table(curves, {}, {});
    CHECK(t.csv ==
          "task,method,blind_risk,max_risk,cci,cr_n10,cr_n20,ri_n10,ri_n20\n"
          "task,a,,,,,0.4000,,\n"
          "task,b,,,,0.5000,,,\n");
  }
}
