#include "tcal/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "csv.hpp"
#include "tcal/error.hpp"
#include "tcal/ingest.hpp"
#include "tcal/metrics.hpp"

namespace tcal {
namespace {

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

constexpr double kPadFraction = 0.05;

std::string num(double v) {
  if (std::abs(v) < 5e-4) v = 0.0;
  std::array<char, 48> buf{};
  std::snprintf(buf.data(), buf.size(), "%.3f", v);
  return buf.data();
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Maps data coordinates into the plotting rectangle.
struct Frame {
  double left, right, top, bottom;
  AxisRange x, y;
  bool log_x;

  double px(double v) const {
    const double t = log_x ? std::log10(v) : v;
    return left + (t - x.lo) / (x.hi - x.lo) * (right - left);
  }
  double py(double v) const { return bottom - (v - y.lo) / (y.hi - y.lo) * (bottom - top); }
};

Frame make_frame(const PlotSpec& spec, AxisRange x, AxisRange y, bool log_x) {
  return {70.0, spec.width - 190.0, 40.0, spec.height - 55.0, x, y, log_x};
}

std::string curve_label(const CalibratedCurve& c, bool multi_task) {
  return multi_task ? c.method + " / " + c.task : c.method;
}

bool has_multiple_tasks(const std::vector<CalibratedCurve>& curves) {
  return std::any_of(curves.begin(), curves.end(),
                     [&](const CalibratedCurve& c) { return c.task != curves.front().task; });
}

std::map<std::string, std::string> color_map(const PlotSpec& spec) {
  std::set<std::string> names;
  for (const auto& c : spec.curves) names.insert(c.method);
  std::map<std::string, std::string> colors;
  std::size_t i = 0;
  for (const auto& name : names) {
    colors[name] = kPalette[(i++ + spec.style_seed) % kPalette.size()];
  }
  return colors;
}

void require_points(const PlotSpec& spec) {
  for (const auto& c : spec.curves) {
    if (c.points.empty()) throw Error(ErrorCode::EmptyCurve, "curve '" + c.method + "' has no points");
  }
}

void open_document(std::string& out, const PlotSpec& spec, const Frame& f, const char* kind) {
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
         "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " + std::to_string(spec.width) +
         " " + std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<title>" + escape(spec.title) + "</title>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + num(spec.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(spec.title) + "</text>\n";
  out += std::string("<g id=\"plot\" data-kind=\"") + kind + "\" data-x-scale=\"" +
         (f.log_x ? "log10" : "linear") + "\" data-x-min=\"" + format_double(f.x.lo) + "\" data-x-max=\"" +
         format_double(f.x.hi) + "\" data-y-min=\"" + format_double(f.y.lo) + "\" data-y-max=\"" +
         format_double(f.y.hi) + "\" data-left=\"" + num(f.left) + "\" data-right=\"" + num(f.right) +
         "\" data-top=\"" + num(f.top) + "\" data-bottom=\"" + num(f.bottom) + "\">\n";
}

void draw_axes(std::string& out, const PlotSpec& spec, const Frame& f, bool calibrated_x) {
  out += "<rect class=\"frame\" x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" +
         num(f.right - f.left) + "\" height=\"" + num(f.bottom - f.top) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";

  // y ticks every 0.2 calibrated units
  for (double t = std::ceil(f.y.lo / 0.2) * 0.2; t <= f.y.hi + 1e-12; t += 0.2) {
    const double y = f.py(t);
    out += "<line class=\"tick\" x1=\"" + num(f.left - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.left) +
           "\" y2=\"" + num(y) + "\" stroke=\"#333333\"/>\n";
    out += "<text x=\"" + num(f.left - 7) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" +
           format_fixed(t, 1) + "</text>\n";
  }

  if (f.log_x) {
    for (double d = std::ceil(f.x.lo); d <= f.x.hi + 1e-12; d += 1.0) {
      const double x = f.left + (d - f.x.lo) / (f.x.hi - f.x.lo) * (f.right - f.left);
      out += "<line class=\"tick\" x1=\"" + num(x) + "\" y1=\"" + num(f.bottom) + "\" x2=\"" + num(x) +
             "\" y2=\"" + num(f.bottom + 4) + "\" stroke=\"#333333\"/>\n";
      out += "<text x=\"" + num(x) + "\" y=\"" + num(f.bottom + 17) + "\" text-anchor=\"middle\">1e" +
             std::to_string(static_cast<int>(d)) + "</text>\n";
    }
  } else if (calibrated_x) {
    for (double t = std::ceil(f.x.lo / 0.2) * 0.2; t <= f.x.hi + 1e-12; t += 0.2) {
      const double x = f.px(t);
      out += "<line class=\"tick\" x1=\"" + num(x) + "\" y1=\"" + num(f.bottom) + "\" x2=\"" + num(x) +
             "\" y2=\"" + num(f.bottom + 4) + "\" stroke=\"#333333\"/>\n";
      out += "<text x=\"" + num(x) + "\" y=\"" + num(f.bottom + 17) + "\" text-anchor=\"middle\">" +
             format_fixed(t, 1) + "</text>\n";
    }
  } else {
    for (int k = 0; k <= 4; ++k) {
      const double v = f.x.lo + (f.x.hi - f.x.lo) * k / 4.0;
      const double x = f.px(v);
      out += "<line class=\"tick\" x1=\"" + num(x) + "\" y1=\"" + num(f.bottom) + "\" x2=\"" + num(x) +
             "\" y2=\"" + num(f.bottom + 4) + "\" stroke=\"#333333\"/>\n";
      out += "<text x=\"" + num(x) + "\" y=\"" + num(f.bottom + 17) + "\" text-anchor=\"middle\">" +
             format_fixed(v, std::abs(f.x.hi - f.x.lo) >= 20 ? 0 : 2) + "</text>\n";
    }
  }

  out += "<text class=\"x-label\" x=\"" + num((f.left + f.right) / 2) + "\" y=\"" + num(spec.height - 12.0) +
         "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  out += "<text class=\"y-label\" transform=\"translate(16 " + num((f.top + f.bottom) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(spec.y_label) + "</text>\n";
}

std::string polyline(const std::vector<std::pair<double, double>>& pts) {
  std::string s;
  for (const auto& [x, y] : pts) {
    if (!s.empty()) s.push_back(' ');
    s += num(x) + "," + num(y);
  }
  return s;
}

void draw_legend(std::string& out, const Frame& f,
                 const std::vector<std::tuple<std::string, std::string, std::string>>& entries) {
  out += "<g class=\"legend\">\n";
  double y = f.top + 10;
  for (const auto& [method, color, label] : entries) {
    out += "<line x1=\"" + num(f.right + 15) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.right + 35) +
           "\" y2=\"" + num(y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text class=\"legend-entry\" data-method=\"" + escape(method) + "\" x=\"" + num(f.right + 40) +
           "\" y=\"" + num(y + 4) + "\">" + escape(label) + "</text>\n";
    y += 18;
  }
  out += "</g>\n";
}

void draw_series(std::string& out, const CalibratedCurve& curve, const std::string& color,
                 const std::vector<std::pair<double, double>>& pts) {
  out += "<polyline class=\"curve\" data-method=\"" + escape(curve.method) + "\" data-task=\"" +
         escape(curve.task) + "\" points=\"" + polyline(pts) + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out += "<circle class=\"marker\" data-method=\"" + escape(curve.method) + "\" data-n=\"" +
           std::to_string(curve.points[i].n) + "\" cx=\"" + num(pts[i].first) + "\" cy=\"" +
           num(pts[i].second) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
  }
}

AxisRange n_axis(const std::vector<CalibratedCurve>& curves, bool log_x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      const double t = log_x ? std::log10(static_cast<double>(p.n)) : static_cast<double>(p.n);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (!(lo <= hi)) return log_x ? AxisRange{0.0, 1.0} : AxisRange{0.0, 1.0};
  if (hi == lo) return {lo - 0.5, hi + 0.5};
  const double pad = (hi - lo) * kPadFraction;
  return {lo - pad, hi + pad};
}

const CalibratedCurve* find_scratch(const std::vector<CalibratedCurve>& curves) {
  auto it = std::find_if(curves.begin(), curves.end(), [](const CalibratedCurve& c) { return c.is_scratch(); });
  return it == curves.end() ? nullptr : &*it;
}

}  // namespace

AxisRange calibrated_axis(double data_lo, double data_hi) {
  const double lo = std::min(data_lo, 0.0);
  const double hi = std::max(data_hi, 1.0);
  return {lo - kPadFraction, hi + kPadFraction};
}

std::string render_cr_n(const PlotSpec& spec) {
  require_points(spec);
  if (spec.log_x) {
    for (const auto& c : spec.curves) {
      if (c.points.front().n == 0) throw Error(ErrorCode::NonFiniteInput, "log-scaled n axis needs n > 0");
    }
  }
  const bool bands = spec.show_bands;
  double lo = 0.0, hi = 1.0;
  for (const auto& c : spec.curves) {
    for (const auto& p : c.points) {
      const double d = bands ? p.dispersion.value_or(0.0) : 0.0;
      lo = std::min(lo, p.cr.value - d);
      hi = std::max(hi, p.cr.value + d);
    }
  }
  const Frame f = make_frame(spec, n_axis(spec.curves, spec.log_x), calibrated_axis(lo, hi), spec.log_x);
  const auto colors = color_map(spec);

  std::string out;
  open_document(out, spec, f, "cr_vs_n");
  draw_axes(out, spec, f, false);

  out += "<line class=\"reference\" data-ref=\"max-supervision\" data-level=\"0\" x1=\"" + num(f.left) +
         "\" y1=\"" + num(f.py(0.0)) + "\" x2=\"" + num(f.right) + "\" y2=\"" + num(f.py(0.0)) +
         "\" stroke=\"#555555\" stroke-dasharray=\"6 4\"/>\n";
  out += "<text x=\"" + num(f.right - 4) + "\" y=\"" + num(f.py(0.0) - 5) +
         "\" text-anchor=\"end\" fill=\"#555555\">maximal supervision</text>\n";
  out += "<line class=\"reference\" data-ref=\"blind-guess\" data-level=\"1\" x1=\"" + num(f.left) +
         "\" y1=\"" + num(f.py(1.0)) + "\" x2=\"" + num(f.right) + "\" y2=\"" + num(f.py(1.0)) +
         "\" stroke=\"#555555\" stroke-dasharray=\"6 4\"/>\n";
  out += "<text x=\"" + num(f.right - 4) + "\" y=\"" + num(f.py(1.0) - 5) +
         "\" text-anchor=\"end\" fill=\"#555555\">blind guess</text>\n";

  if (bands) {
    for (const auto& c : spec.curves) {
      const bool any = std::any_of(c.points.begin(), c.points.end(),
                                   [](const CalibratedPoint& p) { return p.dispersion.has_value(); });
      if (!any) continue;
      std::vector<std::pair<double, double>> ring;
      for (const auto& p : c.points) {
        ring.emplace_back(f.px(static_cast<double>(p.n)), f.py(p.cr.value + p.dispersion.value_or(0.0)));
      }
      for (auto it = c.points.rbegin(); it != c.points.rend(); ++it) {
        ring.emplace_back(f.px(static_cast<double>(it->n)), f.py(it->cr.value - it->dispersion.value_or(0.0)));
      }
      out += "<polygon class=\"band\" data-method=\"" + escape(c.method) + "\" points=\"" + polyline(ring) +
             "\" fill=\"" + colors.at(c.method) + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
  }

  const bool multi = !spec.curves.empty() && has_multiple_tasks(spec.curves);
  std::vector<std::tuple<std::string, std::string, std::string>> legend;
  for (const auto& c : spec.curves) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : c.points) pts.emplace_back(f.px(static_cast<double>(p.n)), f.py(p.cr.value));
    draw_series(out, c, colors.at(c.method), pts);
    legend.emplace_back(c.method, colors.at(c.method), curve_label(c, multi));
  }
  draw_legend(out, f, legend);
  out += "</g>\n</svg>\n";
  return out;
}

std::string render_cr_scratch(const PlotSpec& spec) {
  require_points(spec);
  const CalibratedCurve* scratch = find_scratch(spec.curves);
  if (scratch == nullptr) throw Error(ErrorCode::MissingScratch, "no 'scratch' curve to plot against");
  for (const auto& c : spec.curves) {
    const bool same = c.points.size() == scratch->points.size() &&
                      std::equal(c.points.begin(), c.points.end(), scratch->points.begin(),
                                 [](const CalibratedPoint& a, const CalibratedPoint& b) { return a.n == b.n; });
    if (!same) throw Error(ErrorCode::GridMismatch, "curve '" + c.method + "' is not on the scratch n grid");
  }

  double x_min = scratch->points.front().cr.value;
  double x_max = x_min;
  for (const auto& p : scratch->points) {
    x_min = std::min(x_min, p.cr.value);
    x_max = std::max(x_max, p.cr.value);
  }
  double y_lo = x_min, y_hi = x_max;
  for (const auto& c : spec.curves) {
    for (const auto& p : c.points) {
      y_lo = std::min(y_lo, p.cr.value);
      y_hi = std::max(y_hi, p.cr.value);
    }
  }
  const Frame f = make_frame(spec, calibrated_axis(x_min, x_max), calibrated_axis(y_lo, y_hi), false);
  const auto colors = color_map(spec);

  std::string out;
  open_document(out, spec, f, "cr_vs_scratch");
  draw_axes(out, spec, f, true);
  out += "<line class=\"diagonal\" data-x1=\"" + format_double(x_min) + "\" data-x2=\"" + format_double(x_max) +
         "\" x1=\"" + num(f.px(x_min)) + "\" y1=\"" + num(f.py(x_min)) + "\" x2=\"" + num(f.px(x_max)) +
         "\" y2=\"" + num(f.py(x_max)) + "\" stroke=\"#555555\" stroke-dasharray=\"6 4\"/>\n";

  const bool multi = has_multiple_tasks(spec.curves);
  std::vector<std::tuple<std::string, std::string, std::string>> legend;
  for (const auto& c : spec.curves) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      pts.emplace_back(f.px(scratch->points[i].cr.value), f.py(c.points[i].cr.value));
    }
    draw_series(out, c, colors.at(c.method), pts);

    std::string cci_text = "n/a";
    try {
      cci_text = format_fixed(cci(c, *scratch).cci, 2);
    } catch (const Error&) {
    }
    legend.emplace_back(c.method, colors.at(c.method), curve_label(c, multi) + " (CCI " + cci_text + ")");
  }
  draw_legend(out, f, legend);
  out += "</g>\n</svg>\n";
  return out;
}

TableOutput render_table(const std::vector<CalibratedCurve>& curves,
                         const std::vector<BaselineSet>& baselines, const CciTable& ccis) {
  std::set<std::uint64_t> grid;
  for (const auto& c : curves) {
    for (const auto& p : c.points) grid.insert(p.n);
  }

  std::vector<const CalibratedCurve*> rows;
  for (const auto& c : curves) rows.push_back(&c);
  std::sort(rows.begin(), rows.end(), [](const CalibratedCurve* a, const CalibratedCurve* b) {
    return std::tuple(a->task, !a->is_scratch(), a->method) < std::tuple(b->task, !b->is_scratch(), b->method);
  });

  std::vector<std::string> header{"task", "method", "blind_risk", "max_risk", "cci"};
  for (auto n : grid) header.push_back("cr_n" + std::to_string(n));
  for (auto n : grid) header.push_back("ri_n" + std::to_string(n));

  auto fmt = [](double v) { return format_fixed(v, 4); };
  std::vector<std::vector<std::string>> cells;
  for (const auto* c : rows) {
    std::vector<std::string> row{c->task, c->method, "", "", ""};
    auto b = std::find_if(baselines.begin(), baselines.end(), [&](const BaselineSet& s) { return s.task == c->task; });
    if (b != baselines.end()) {
      row[2] = fmt(b->blind.value);
      row[3] = fmt(b->max_supervision.value);
    }
    if (auto it = ccis.find({c->task, c->method}); it != ccis.end()) row[4] = fmt(it->second);

    const CalibratedCurve* scratch = nullptr;
    for (const auto* s : rows) {
      if (s->task == c->task && s->is_scratch()) scratch = s;
    }
    std::vector<std::string> ri;
    for (auto n : grid) {
      auto p = std::find_if(c->points.begin(), c->points.end(), [n](const CalibratedPoint& q) { return q.n == n; });
      row.push_back(p == c->points.end() ? "" : fmt(p->cr.value));
      std::string cell;
      if (p != c->points.end() && scratch != nullptr) {
        auto s = std::find_if(scratch->points.begin(), scratch->points.end(),
                              [n](const CalibratedPoint& q) { return q.n == n; });
        if (s != scratch->points.end()) {
          try {
            cell = fmt(relative_improvement(p->cr, s->cr));
          } catch (const Error&) {
          }
        }
      }
      ri.push_back(cell);
    }
    row.insert(row.end(), ri.begin(), ri.end());
    cells.push_back(std::move(row));
  }

  TableOutput out;
  auto md_row = [](const std::vector<std::string>& r) {
    std::string line = "|";
    for (const auto& v : r) {
      std::string cell;
      for (char ch : v) {
        if (ch == '|') cell += "\\|";
        else cell.push_back(ch);
      }
      line += " " + cell + " |";
    }
    return line + "\n";
  };
  auto csv_row = [](const std::vector<std::string>& r) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) line.push_back(',');
      line += csv::quote(r[i]);
    }
    return line + "\n";
  };
  out.markdown = md_row(header);
  out.markdown += "|";
  for (std::size_t i = 0; i < header.size(); ++i) out.markdown += i < 2 ? " --- |" : " ---: |";
  out.markdown += "\n";
  out.csv = csv_row(header);
  for (const auto& r : cells) {
    out.markdown += md_row(r);
    out.csv += csv_row(r);
  }
  return out;
}

std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";

  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::scientific);
  std::string_view sci(buf.data(), static_cast<std::size_t>(end - buf.data()));
  const bool negative = sci.front() == '-';
  if (negative) sci.remove_prefix(1);
  const auto e_pos = sci.find('e');
  std::string digits;
  for (char c : sci.substr(0, e_pos)) {
    if (c != '.') digits.push_back(c);
  }
  int exponent = 0;
  std::string_view exp_text = sci.substr(e_pos + 1);
  if (exp_text.front() == '+') exp_text.remove_prefix(1);
  std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);

  // digits[k] has place value 10^(exponent - k); keep places >= 10^-decimals.
  const long last = static_cast<long>(exponent) + decimals;
  std::string kept;
  std::string rest;
  if (last < 0) {
    kept = "0";
    rest = last == -1 ? digits : std::string();
  } else {
    for (long k = 0; k <= last; ++k) {
      kept.push_back(k < static_cast<long>(digits.size()) ? digits[static_cast<std::size_t>(k)] : '0');
    }
    if (last + 1 < static_cast<long>(digits.size())) rest = digits.substr(static_cast<std::size_t>(last + 1));
  }

  bool round_up = false;
  if (!rest.empty()) {
    if (rest[0] > '5') {
      round_up = true;
    } else if (rest[0] == '5') {
      const bool exact_half = rest.find_first_not_of('0', 1) == std::string::npos;
      round_up = !exact_half || ((kept.back() - '0') % 2 == 1);
    }
  }
  if (round_up) {
    std::size_t i = kept.size();
    while (i > 0) {
      --i;
      if (kept[i] == '9') {
        kept[i] = '0';
      } else {
        ++kept[i];
        break;
      }
      if (i == 0) kept.insert(kept.begin(), '1');
    }
  }

  // kept holds round(|value| * 10^decimals) as decimal digits.
  if (kept.size() < static_cast<std::size_t>(decimals) + 1) {
    kept.insert(0, static_cast<std::size_t>(decimals) + 1 - kept.size(), '0');
  }
  std::string text = kept.substr(0, kept.size() - static_cast<std::size_t>(decimals));
  text.erase(0, std::min(text.find_first_not_of('0'), text.size() - 1));
  if (decimals > 0) text += "." + kept.substr(kept.size() - static_cast<std::size_t>(decimals));
  const bool zero = kept.find_first_not_of('0') == std::string::npos;
  return (negative && !zero ? "-" : "") + text;
}

}  // namespace tcal
