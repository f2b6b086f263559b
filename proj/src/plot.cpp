#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "palmtess/harness.hpp"

namespace palmtess {

namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 150, kT = 30, kB = 55;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};

struct Mark {
  double x, y, err;
};

struct Series {
  std::string label;
  std::vector<Mark> marks;
  bool connect = false;
  bool dashed = false;
  bool points = true;
};

struct Chart {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<Series> series;
};

double num(const std::string& s) {
  try {
    return std::stod(s);
  } catch (...) {
    return std::nan("");
  }
}

std::string f2(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::vector<double> ticks(double lo, double hi, bool log) {
  std::vector<double> t;
  if (log) {
    for (double e = std::floor(lo); e <= std::ceil(hi) + 1e-9; e += 1.0)
      if (e >= lo - 1e-9 && e <= hi + 1e-9) t.push_back(e);
    return t;
  }
  double span = hi - lo;
  double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (span / (step * m) <= 6.0) {
      step *= m;
      break;
    }
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

std::string render(const Chart& c) {
  auto tx = [&](double v) { return c.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return c.logy ? std::log10(v) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : c.series)
    for (const auto& m : s.marks) {
      if (!std::isfinite(m.x) || !std::isfinite(m.y)) continue;
      if ((c.logx && m.x <= 0) || (c.logy && m.y <= 0)) continue;
      x0 = std::min(x0, tx(m.x));
      x1 = std::max(x1, tx(m.x));
      double lo = m.y - (std::isfinite(m.err) ? m.err : 0.0), hi = m.y + (std::isfinite(m.err) ? m.err : 0.0);
      if (c.logy && lo <= 0) lo = m.y;
      y0 = std::min(y0, ty(lo));
      y1 = std::max(y1, ty(hi));
    }
  if (!(x0 <= x1)) {
    x0 = c.logx ? -1 : 0;
    x1 = c.logx ? 0 : 1;
  }
  if (!(y0 <= y1)) {
    y0 = c.logy ? -2 : 0;
    y1 = c.logy ? 0 : 1;
  }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  double py = 0.05 * (y1 - y0);
  y0 -= py;
  y1 += py;
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto sx = [&](double v) { return kL + (tx(v) - x0) / (x1 - x0) * pw; };
  auto sy = [&](double v) { return kT + ph - (ty(v) - y0) / (y1 - y0) * ph; };
  auto sxr = [&](double t) { return kL + (t - x0) / (x1 - x0) * pw; };
  auto syr = [&](double t) { return kT + ph - (t - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kL + pw / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << c.title << "</text>\n";
  o << "<g id=\"axes\" stroke=\"black\" fill=\"none\">\n";
  o << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw << "\" height=\"" << ph << "\"/>\n";
  for (double t : ticks(x0, x1, c.logx))
    o << "<line x1=\"" << sxr(t) << "\" y1=\"" << kT + ph << "\" x2=\"" << sxr(t) << "\" y2=\"" << kT + ph + 5 << "\"/>\n";
  for (double t : ticks(y0, y1, c.logy))
    o << "<line x1=\"" << kL - 5 << "\" y1=\"" << syr(t) << "\" x2=\"" << kL << "\" y2=\"" << syr(t) << "\"/>\n";
  o << "</g>\n<g id=\"labels\">\n";
  for (double t : ticks(x0, x1, c.logx))
    o << "<text x=\"" << sxr(t) << "\" y=\"" << kT + ph + 18 << "\" text-anchor=\"middle\">"
      << (c.logx ? "1e" + f2(t) : f2(t)) << "</text>\n";
  for (double t : ticks(y0, y1, c.logy))
    o << "<text x=\"" << kL - 8 << "\" y=\"" << syr(t) + 4 << "\" text-anchor=\"end\">"
      << (c.logy ? "1e" + f2(t) : f2(t)) << "</text>\n";
  o << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << c.xlabel << "</text>\n";
  o << "<text transform=\"translate(16," << kT + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << c.ylabel
    << "</text>\n</g>\n";

  int idx = 0;
  for (const auto& s : c.series) {
    const char* col = kColors[idx % 8];
    std::vector<Mark> ok;
    for (const auto& m : s.marks)
      if (std::isfinite(m.x) && std::isfinite(m.y) && !(c.logx && m.x <= 0) && !(c.logy && m.y <= 0)) ok.push_back(m);
    o << "<g class=\"series\" data-label=\"" << s.label << "\">\n";
    if (s.connect && ok.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << col << "\"" << (s.dashed ? " stroke-dasharray=\"5,4\"" : "")
        << " points=\"";
      for (const auto& m : ok) o << sx(m.x) << "," << sy(m.y) << " ";
      o << "\"/>\n";
    }
    if (s.points)
      for (const auto& m : ok) {
        if (std::isfinite(m.err) && m.err > 0) {
          double lo = m.y - m.err, hi = m.y + m.err;
          if (c.logy && lo <= 0) lo = m.y;
          o << "<line class=\"errorbar\" stroke=\"" << col << "\" x1=\"" << sx(m.x) << "\" y1=\"" << sy(lo)
            << "\" x2=\"" << sx(m.x) << "\" y2=\"" << sy(hi) << "\"/>\n";
        }
        o << "<circle class=\"mark\" cx=\"" << sx(m.x) << "\" cy=\"" << sy(m.y) << "\" r=\"3\" fill=\"" << col
          << "\"/>\n";
      }
    o << "</g>\n";
    double ly = kT + 12 + 16 * idx;
    o << "<line x1=\"" << kW - kR + 10 << "\" y1=\"" << ly << "\" x2=\"" << kW - kR + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << col << "\"" << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
    o << "<text x=\"" << kW - kR + 35 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
    ++idx;
  }
  o << "</svg>\n";
  return o.str();
}

std::map<std::string, std::size_t> require(const CsvTable& t, const std::vector<std::string>& cols) {
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < t.header().size(); ++i) at[t.header()[i]] = i;
  std::string missing;
  for (const auto& c : cols)
    if (!at.count(c)) missing += (missing.empty() ? "" : ", ") + c;
  if (!missing.empty()) throw Error(Errc::schema_error, "missing columns: " + missing);
  return at;
}

Chart void_chart(const CsvTable& t) {
  auto at = require(t, {"ell", "estimate", "stderr"});
  Chart c{"void probability", "ell", "P(no point in [-ell, ell]^2)", true, true, {}};
  Series data{"empirical", {}, false, false, true};
  double m = std::nan("");
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : t.rows()) {
    Mark mk{num(r[at["ell"]]), num(r[at["estimate"]]), num(r[at["stderr"]])};
    data.marks.push_back(mk);
    lo = std::min(lo, mk.x);
    hi = std::max(hi, mk.x);
    if (at.count("intensity") && at.count("process") && r[at["process"]] == "poisson") m = num(r[at["intensity"]]);
  }
  c.series.push_back(data);
  if (data.marks.empty()) return c;
  // Power-law fit through the positive frequencies, drawn over the whole range.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& mk : data.marks)
    if (mk.x > 0 && mk.y > 0) {
      double x = std::log(mk.x), y = std::log(mk.y);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++n;
    }
  if (n >= 2 && n * sxx - sx * sx > 0) {
    double b = (n * sxy - sx * sy) / (n * sxx - sx * sx), a = (sy - b * sx) / n;
    Series fit{"power-law fit", {}, true, true, false};
    for (int k = 0; k <= 40; ++k) {
      double x = lo * std::pow(hi / lo, k / 40.0);
      fit.marks.push_back({x, std::exp(a + b * std::log(x)), 0});
    }
    c.series.push_back(fit);
  }
  if (std::isfinite(m)) {
    Series th{"exp(-m (2 ell)^2)", {}, true, false, false};
    for (int k = 0; k <= 40; ++k) {
      double x = lo * std::pow(hi / lo, k / 40.0);
      th.marks.push_back({x, std::exp(-m * 4 * x * x), 0});
    }
    c.series.push_back(th);
  }
  return c;
}

Chart phi_chart(const CsvTable& t) {
  auto at = require(t, {"p", "R", "phi", "phi_stderr", "bound"});
  Chart c{"origin box open frequency", "p", "phi(p, R)", false, false, {}};
  std::map<double, Series> data, bound;
  for (const auto& r : t.rows()) {
    double R = num(r[at["R"]]), p = num(r[at["p"]]);
    auto& s = data[R];
    s.label = "phi, R=" + f2(R);
    s.connect = true;
    s.marks.push_back({p, num(r[at["phi"]]), num(r[at["phi_stderr"]])});
    auto& b = bound[R];
    b.label = "bound, R=" + f2(R);
    b.connect = true;
    b.dashed = true;
    b.points = false;
    double v = num(r[at["bound"]]);
    if (v <= 1.0) b.marks.push_back({p, v, 0});
  }
  for (auto& [R, s] : data) {
    c.series.push_back(s);
    if (bound[R].marks.size() > 1) c.series.push_back(bound[R]);
  }
  return c;
}

Chart cluster_chart(const CsvTable& t) {
  auto at = require(t, {"t0", "size", "count"});
  Chart c{"cluster size distribution", "cluster size", "P(size <= s)", true, false, {}};
  std::map<double, std::vector<std::pair<double, double>>> by;
  for (const auto& r : t.rows()) by[num(r[at["t0"]])].emplace_back(num(r[at["size"]]), num(r[at["count"]]));
  for (auto& [t0, v] : by) {
    std::sort(v.begin(), v.end());
    double total = 0;
    for (auto& [s, n] : v) total += n;
    Series s{"t0=" + f2(t0), {}, true, false, true};
    double acc = 0;
    for (auto& [sz, n] : v) {
      acc += n;
      s.marks.push_back({sz, acc / total, 0});
    }
    c.series.push_back(s);
  }
  return c;
}

Chart trace_chart(const CsvTable& t) {
  auto at = require(t, {"quantity", "route", "param", "n_replicates", "rm_1", "rm_2", "rm_3", "rm_4"});
  Chart c{"running Palm mean", "replicates", "running mean", true, false, {}};
  for (const auto& r : t.rows()) {
    double n = num(r[at["n_replicates"]]);
    Series s{r[at["quantity"]] + " " + r[at["route"]] + " " + r[at["param"]], {}, true, false, true};
    const double frac[4] = {0.125, 0.25, 0.5, 1.0};
    const char* cols[4] = {"rm_1", "rm_2", "rm_3", "rm_4"};
    for (int k = 0; k < 4; ++k) s.marks.push_back({std::max(1.0, std::floor(n * frac[k])), num(r[at[cols[k]]]), 0});
    c.series.push_back(s);
  }
  return c;
}

}  // namespace

PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "loglog-void") return PlotKind::loglog_void;
  if (s == "phi-vs-p") return PlotKind::phi_vs_p;
  if (s == "cluster-cdf") return PlotKind::cluster_cdf;
  if (s == "palm-trace") return PlotKind::palm_trace;
  throw Error(Errc::invalid_parameter, "unknown plot kind '" + s + "'");
}

std::string render_plot(const CsvTable& table, PlotKind kind) {
  switch (kind) {
    case PlotKind::loglog_void: return render(void_chart(table));
    case PlotKind::phi_vs_p: return render(phi_chart(table));
    case PlotKind::cluster_cdf: return render(cluster_chart(table));
    case PlotKind::palm_trace: return render(trace_chart(table));
  }
  return {};
}

void plot_file(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg) {
  auto text = render_plot(read_csv(csv), kind);
  std::ofstream out(svg);
  if (!out) throw Error(Errc::io_error, "cannot write " + svg.string());
  out << text;
}

}  // namespace palmtess
