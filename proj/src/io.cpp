#include "nlres/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace nlres {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw IoError("bad number '" + s + "'");
  return v;
}

namespace {

int parse_int(const std::string& s) {
  int v = 0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw IoError("bad integer '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw IoError("bad boolean '" + s + "'");
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) throw IoError("unterminated quote");
  return out;
}

std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + quote(fields[i]);
  return out;
}

bool next_line(std::istream& is, std::string& line) {
  if (!std::getline(is, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void write_header(std::ostream& os, const std::string& type, const Meta& meta = {}) {
  os << "# nlres-" << type << " v" << kFormatVersion << "\n";
  for (const auto& [k, v] : meta) os << "#@ " << k << "=" << v << "\n";
}

// Checks the header line and collects metadata; leaves the stream at the first
// line that is not metadata, returned in `line`.
Meta read_header(std::istream& is, const std::string& type, std::string& line) {
  const std::string tag = "# nlres-" + type + " v";
  if (!next_line(is, line)) throw IoError("empty " + type + " file");
  if (line.rfind(tag, 0) != 0) throw IoError("not an nlres " + type + " file");
  if (line != tag + std::to_string(kFormatVersion))
    throw IoError("unsupported " + type + " file version '" + line.substr(tag.size()) +
                  "' (expected " + std::to_string(kFormatVersion) + ")");
  Meta meta;
  line.clear();
  while (next_line(is, line)) {
    if (line.rfind("#@ ", 0) != 0) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("bad metadata line '" + line + "'");
    meta.emplace_back(line.substr(3, eq - 3), line.substr(eq + 1));
    line.clear();
  }
  return meta;
}

void expect_columns(const std::string& line, const std::vector<std::string>& cols) {
  if (split_csv(line) != cols) throw IoError("unexpected column header '" + line + "'");
}

template <class Row, class Parse>
std::vector<Row> read_rows(std::istream& is, std::size_t width, Parse parse) {
  std::vector<Row> rows;
  std::string line;
  while (next_line(is, line)) {
    if (line.empty()) continue;
    // A quoted field may span lines.
    std::string more;
    while (std::count(line.begin(), line.end(), '"') % 2 && next_line(is, more)) line += "\n" + more;
    const auto f = split_csv(line);
    if (f.size() != width)
      throw IoError("record with " + std::to_string(f.size()) + " fields, expected " +
                    std::to_string(width));
    rows.push_back(parse(f));
  }
  return rows;
}

std::string join_flags(const std::vector<std::string>& f) {
  std::string out;
  for (const auto& s : f) out += (out.empty() ? "" : ";") + s;
  return out;
}

} // namespace

std::string meta_value(const Meta& m, const std::string& key) {
  for (const auto& [k, v] : m)
    if (k == key) return v;
  return {};
}

bool CurveRow::has_flag(const std::string& f) const {
  std::stringstream ss(flags);
  for (std::string tok; std::getline(ss, tok, ';');)
    if (tok == f) return true;
  return false;
}

CurveRow curve_row(const PeriodicOrbit& o, std::string flags) {
  CurveRow r;
  r.omega = o.params.omega;
  r.A = o.params.A;
  r.gamma = o.params.gamma;
  r.n = o.n;
  r.x0 = o.s0.x;
  r.v0 = o.s0.v;
  r.xmax = o.x_max;
  r.mult1 = o.multipliers[0];
  r.mult2 = o.multipliers[1];
  r.stable = o.stability == Stability::Stable;
  r.symmetric = o.symmetric;
  r.winding = o.winding;
  r.flags = std::move(flags);
  return r;
}

CurveFile branch_file(const Branch& b) {
  CurveFile f;
  const std::string model = b.points.empty() ? "" : std::string(to_string(b.points[0].orbit.params.model));
  f.meta = {{"kind", "branch"},
            {"model", model},
            {"param", std::string(to_string(b.active))},
            {"n", std::to_string(b.n)},
            {"half_map", b.half_map ? "1" : "0"},
            {"closed", b.closed ? "1" : "0"},
            {"end0", std::string(to_string(b.ends[0]))},
            {"end1", std::string(to_string(b.ends[1]))}};
  std::vector<const BifurcationPoint*> bifs;
  for (const auto& bp : b.bifurcations) bifs.push_back(&bp);
  auto mid = [](const BifurcationPoint* p) {
    return 0.5 * (p->arclength_bracket.first + p->arclength_bracket.second);
  };
  std::stable_sort(bifs.begin(), bifs.end(),
                   [&](auto* a, auto* c) { return mid(a) < mid(c); });
  std::size_t k = 0;
  for (const auto& p : b.points) {
    for (; k < bifs.size() && mid(bifs[k]) < p.arclength; ++k)
      f.rows.push_back(curve_row(bifs[k]->orbit_at, std::string(to_string(bifs[k]->kind))));
    f.rows.push_back(curve_row(p.orbit));
  }
  for (; k < bifs.size(); ++k)
    f.rows.push_back(curve_row(bifs[k]->orbit_at, std::string(to_string(bifs[k]->kind))));
  return f;
}

CurveFile tongue_file(const TongueCurve& t) {
  CurveFile f;
  const std::string model = t.points.empty() ? "" : std::string(to_string(t.points[0].orbit.params.model));
  f.meta = {{"kind", "tongue"},
            {"model", model},
            {"tongue", std::string(to_string(t.kind))},
            {"first", std::string(to_string(t.first))},
            {"second", std::string(to_string(t.second))},
            {"n", std::to_string(t.n)},
            {"half_map", t.half_map ? "1" : "0"},
            {"label", t.label.str()},
            {"closed", t.closed ? "1" : "0"},
            {"end0", std::string(to_string(t.ends[0]))},
            {"end1", std::string(to_string(t.ends[1]))}};
  const auto tips = tongue_tips(t);
  const std::set<std::size_t> cusp(t.cusps.begin(), t.cusps.end()), tip(tips.begin(), tips.end());
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    std::vector<std::string> flags;
    if (cusp.count(i)) flags.push_back("cusp");
    if (tip.count(i)) flags.push_back("tip");
    f.rows.push_back(curve_row(t.points[i].orbit, join_flags(flags)));
  }
  return f;
}

void write_curve(std::ostream& os, const CurveFile& f) {
  write_header(os, "curve", f.meta);
  os << join_csv(kCurveColumns) << "\n";
  for (const auto& r : f.rows)
    os << join_csv({format_double(r.omega), format_double(r.A), format_double(r.gamma),
                    std::to_string(r.n), format_double(r.x0), format_double(r.v0),
                    format_double(r.xmax), format_double(r.mult1.real()),
                    format_double(r.mult1.imag()), format_double(r.mult2.real()),
                    format_double(r.mult2.imag()), r.stable ? "1" : "0",
                    r.symmetric ? "1" : "0", std::to_string(r.winding), r.flags})
       << "\n";
  if (!os) throw IoError("write failed");
}

CurveFile read_curve(std::istream& is) {
  CurveFile f;
  std::string line;
  f.meta = read_header(is, "curve", line);
  expect_columns(line, kCurveColumns);
  f.rows = read_rows<CurveRow>(is, kCurveColumns.size(), [](const std::vector<std::string>& c) {
    CurveRow r;
    r.omega = parse_double(c[0]);
    r.A = parse_double(c[1]);
    r.gamma = parse_double(c[2]);
    r.n = parse_int(c[3]);
    r.x0 = parse_double(c[4]);
    r.v0 = parse_double(c[5]);
    r.xmax = parse_double(c[6]);
    r.mult1 = {parse_double(c[7]), parse_double(c[8])};
    r.mult2 = {parse_double(c[9]), parse_double(c[10])};
    r.stable = parse_bool(c[11]);
    r.symmetric = parse_bool(c[12]);
    r.winding = parse_int(c[13]);
    r.flags = c[14];
    return r;
  });
  return f;
}

RasterFile raster_file(const Raster& r) {
  RasterFile f;
  const SweepSpec& s = r.spec;
  f.meta = {{"model", std::string(to_string(s.base.model))},
            {"gamma", format_double(s.base.gamma)},
            {"omega_axis", format_double(s.omega.lo) + " " + format_double(s.omega.hi) + " " +
                               std::to_string(s.omega.count)},
            {"A_axis", format_double(s.A.lo) + " " + format_double(s.A.hi) + " " +
                           std::to_string(s.A.count)},
            {"initial", format_double(s.initial.x) + " " + format_double(s.initial.v)},
            {"transient_periods", std::to_string(s.timing.transient_periods)},
            {"sample_periods", std::to_string(s.timing.sample_periods)},
            {"n_max", std::to_string(s.timing.n_max)},
            {"strobe_tol", format_double(s.timing.strobe_tol)}};
  for (const auto& c : r.cells)
    f.rows.push_back({c.omega, c.A, c.cls, c.n, c.strobe.x, c.strobe.v, c.x_max});
  return f;
}

void write_raster(std::ostream& os, const RasterFile& f) {
  write_header(os, "raster", f.meta);
  os << join_csv(kRasterColumns) << "\n";
  for (const auto& r : f.rows)
    os << join_csv({format_double(r.omega), format_double(r.A), std::string(to_string(r.cls)),
                    std::to_string(r.n), format_double(r.strobe_x), format_double(r.strobe_v),
                    format_double(r.xmax)})
       << "\n";
  if (!os) throw IoError("write failed");
}

RasterFile read_raster(std::istream& is) {
  RasterFile f;
  std::string line;
  f.meta = read_header(is, "raster", line);
  expect_columns(line, kRasterColumns);
  f.rows = read_rows<RasterRow>(is, kRasterColumns.size(), [](const std::vector<std::string>& c) {
    RasterRow r;
    r.omega = parse_double(c[0]);
    r.A = parse_double(c[1]);
    if (c[2] == to_string(AttractorClass::Periodic)) r.cls = AttractorClass::Periodic;
    else if (c[2] == to_string(AttractorClass::QuasiPeriodic)) r.cls = AttractorClass::QuasiPeriodic;
    else if (c[2] == to_string(AttractorClass::Unresolved)) r.cls = AttractorClass::Unresolved;
    else throw IoError("unknown class '" + c[2] + "'");
    r.n = parse_int(c[3]);
    r.strobe_x = parse_double(c[4]);
    r.strobe_v = parse_double(c[5]);
    r.xmax = parse_double(c[6]);
    return r;
  });
  return f;
}

OrbitReport orbit_report(const PeriodicOrbit& o) {
  OrbitReport r;
  r.params = o.params;
  r.n = o.n;
  r.s0 = o.s0;
  r.mult1 = o.multipliers[0];
  r.mult2 = o.multipliers[1];
  r.stable = o.stability == Stability::Stable;
  r.symmetric = o.symmetric;
  r.winding = o.winding;
  r.x_max = o.x_max;
  r.period = o.period();
  r.residual = o.residual;
  return r;
}

void write_orbit_report(std::ostream& os, const OrbitReport& r) {
  write_header(os, "orbit");
  const auto d = [](double v) { return format_double(v); };
  os << "model = " << to_string(r.params.model) << "\n"
     << "omega = " << d(r.params.omega) << "\n"
     << "A = " << d(r.params.A) << "\n"
     << "gamma = " << d(r.params.gamma) << "\n"
     << "n = " << r.n << "\n"
     << "x0 = " << d(r.s0.x) << "\n"
     << "v0 = " << d(r.s0.v) << "\n"
     << "mult1 = " << d(r.mult1.real()) << " " << d(r.mult1.imag()) << "\n"
     << "mult2 = " << d(r.mult2.real()) << " " << d(r.mult2.imag()) << "\n"
     << "stability = " << (r.stable ? "Stable" : "Unstable") << "\n"
     << "symmetric = " << (r.symmetric ? "true" : "false") << "\n"
     << "winding = " << r.winding << "\n"
     << "label = " << ResonanceLabel{r.winding, r.n}.str() << "\n"
     << "x_max = " << d(r.x_max) << "\n"
     << "period = " << d(r.period) << "\n"
     << "residual = " << d(r.residual) << "\n";
  if (!os) throw IoError("write failed");
}

OrbitReport read_orbit_report(std::istream& is) {
  std::string line;
  read_header(is, "orbit", line);
  std::map<std::string, std::string> kv;
  do {
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw IoError("bad report line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  } while (next_line(is, line));
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw IoError("report lacks '" + k + "'");
    return it->second;
  };
  auto cplx = [&](const std::string& k) {
    std::istringstream ss(get(k));
    std::string re, im;
    ss >> re >> im;
    return std::complex<double>(parse_double(re), parse_double(im));
  };
  OrbitReport r;
  try {
    r.params.model = parse_model(get("model"));
  } catch (const InvalidArgument& e) {
    throw IoError(e.what());
  }
  r.params.omega = parse_double(get("omega"));
  r.params.A = parse_double(get("A"));
  r.params.gamma = parse_double(get("gamma"));
  r.n = parse_int(get("n"));
  r.s0 = {parse_double(get("x0")), parse_double(get("v0"))};
  r.mult1 = cplx("mult1");
  r.mult2 = cplx("mult2");
  const std::string st = get("stability");
  if (st != "Stable" && st != "Unstable") throw IoError("bad stability '" + st + "'");
  r.stable = st == "Stable";
  r.symmetric = parse_bool(get("symmetric"));
  r.winding = parse_int(get("winding"));
  r.x_max = parse_double(get("x_max"));
  r.period = parse_double(get("period"));
  r.residual = parse_double(get("residual"));
  return r;
}

void write_natfreq(std::ostream& os, const NatfreqFile& f) {
  write_header(os, "natfreq");
  os << "x_max,T\n";
  for (const auto& [x, T] : f.rows) os << format_double(x) << "," << format_double(T) << "\n";
  if (!os) throw IoError("write failed");
}

NatfreqFile read_natfreq(std::istream& is) {
  std::string line;
  read_header(is, "natfreq", line);
  expect_columns(line, {"x_max", "T"});
  NatfreqFile f;
  f.rows = read_rows<std::pair<double, double>>(is, 2, [](const std::vector<std::string>& c) {
    return std::pair{parse_double(c[0]), parse_double(c[1])};
  });
  return f;
}

void write_trajectory(std::ostream& os, const TrajectoryFile& f) {
  write_header(os, "trajectory");
  os << "t,x,v\n";
  for (const auto& r : f.rows)
    os << format_double(r[0]) << "," << format_double(r[1]) << "," << format_double(r[2]) << "\n";
  if (!os) throw IoError("write failed");
}

TrajectoryFile read_trajectory(std::istream& is) {
  std::string line;
  read_header(is, "trajectory", line);
  expect_columns(line, {"t", "x", "v"});
  TrajectoryFile f;
  f.rows = read_rows<std::array<double, 3>>(is, 3, [](const std::vector<std::string>& c) {
    return std::array<double, 3>{parse_double(c[0]), parse_double(c[1]), parse_double(c[2])};
  });
  return f;
}

void write_errors(std::ostream& os, const std::vector<ErrorRecord>& e) {
  write_header(os, "errors");
  os << "item,code,message\n";
  for (const auto& r : e) os << join_csv({r.item, r.code, r.message}) << "\n";
  if (!os) throw IoError("write failed");
}

std::vector<ErrorRecord> read_errors(std::istream& is) {
  std::string line;
  read_header(is, "errors", line);
  expect_columns(line, {"item", "code", "message"});
  return read_rows<ErrorRecord>(is, 3, [](const std::vector<std::string>& c) {
    return ErrorRecord{c[0], c[1], c[2]};
  });
}

void save_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
  os << text;
  os.close();
  if (!os) throw IoError("cannot write '" + p.string() + "'");
}

std::string load_text(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ---- SVG --------------------------------------------------------------------

namespace {

constexpr double kW = 800, kH = 520, kLeft = 70, kRight = 20, kTop = 20, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

struct Frame {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  void include(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    if (empty) {
      x0 = x1 = x;
      y0 = y1 = y;
      empty = false;
      return;
    }
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void pad() {
    if (x1 - x0 <= 0) x1 = x0 + 1;
    if (y1 - y0 <= 0) y1 = y0 + 1;
  }
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); }
  double py(double y) const { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); }
  bool empty = true;
};

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// Round tick values (steps of 1, 2 or 5 times a power of ten) inside [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double step = raw / mag < 1.5 ? mag : raw / mag < 3.5 ? 2 * mag : raw / mag < 7.5 ? 5 * mag : 10 * mag;
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

std::string open_svg(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" viewBox=\"0 0 " << kW << " " << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kW - kLeft - kRight
    << "\" height=\"" << kH - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double x : ticks(f.x0, f.x1))
    s << "<line x1=\"" << num(f.px(x)) << "\" x2=\"" << num(f.px(x)) << "\" y1=\"" << kH - kBottom
      << "\" y2=\"" << kH - kBottom + 5 << "\" stroke=\"black\"/>\n<text x=\"" << num(f.px(x))
      << "\" y=\"" << kH - kBottom + 18 << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
  for (double y : ticks(f.y0, f.y1))
    s << "<line x1=\"" << kLeft - 5 << "\" x2=\"" << kLeft << "\" y1=\"" << num(f.py(y)) << "\" y2=\""
      << num(f.py(y)) << "\" stroke=\"black\"/>\n<text x=\"" << kLeft - 8 << "\" y=\""
      << num(f.py(y) + 4) << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
  s << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 12
    << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
    << "<text x=\"16\" y=\"" << (kTop + kH - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (kTop + kH - kBottom) / 2 << ")\">" << ylabel << "</text>\n";
  return s.str();
}

void polyline(std::ostringstream& s, const Frame& f, const std::vector<std::pair<double, double>>& pts,
              const char* colour, bool dashed) {
  if (pts.size() < 2) return;
  s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
  if (dashed) s << " stroke-dasharray=\"6,4\"";
  s << " points=\"";
  for (const auto& [x, y] : pts) s << num(f.px(x)) << "," << num(f.py(y)) << " ";
  s << "\"/>\n";
}

bool is_bifurcation(const CurveRow& r) {
  return r.has_flag("SN") || r.has_flag("PF") || r.has_flag("PD");
}

double abscissa(const CurveRow& r, Param p) {
  return p == Param::Omega ? r.omega : p == Param::A ? r.A : r.gamma;
}

} // namespace

std::string svg_amplitude(const std::vector<CurveFile>& curves, Param param) {
  Frame f;
  for (const auto& c : curves)
    for (const auto& r : c.rows) f.include(abscissa(r, param), r.xmax);
  f.pad();
  std::ostringstream s;
  s << open_svg(f, std::string(to_string(param)), "x_max");
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const char* colour = kPalette[ci % std::size(kPalette)];
    std::vector<std::pair<double, double>> seg;
    bool stable = false;
    for (const auto& r : curves[ci].rows) {
      if (is_bifurcation(r)) continue;
      const std::pair pt{abscissa(r, param), r.xmax};
      if (!seg.empty() && r.stable != stable) {
        seg.push_back(pt);
        polyline(s, f, seg, colour, !stable);
        seg = {pt};
      } else {
        seg.push_back(pt);
      }
      stable = r.stable;
    }
    polyline(s, f, seg, colour, !stable);
    for (const auto& r : curves[ci].rows)
      if (is_bifurcation(r))
        s << "<circle cx=\"" << num(f.px(abscissa(r, param))) << "\" cy=\"" << num(f.py(r.xmax))
          << "\" r=\"3\" fill=\"" << colour << "\"><title>" << r.flags << "</title></circle>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string svg_tongues(const std::vector<CurveFile>& tongues, const RasterFile* raster,
                        const std::vector<int>& periods) {
  Frame f;
  for (const auto& c : tongues)
    for (const auto& r : c.rows) f.include(r.omega, r.A);
  std::set<double> ws, as;
  if (raster) {
    for (const auto& r : raster->rows) {
      f.include(r.omega, r.A);
      ws.insert(r.omega);
      as.insert(r.A);
    }
  }
  f.pad();
  const double dw = ws.size() > 1 ? (*ws.rbegin() - *ws.begin()) / (ws.size() - 1) : 0.0;
  const double da = as.size() > 1 ? (*as.rbegin() - *as.begin()) / (as.size() - 1) : 0.0;
  std::ostringstream s;
  s << open_svg(f, "omega", "A");
  if (raster) {
    for (const auto& r : raster->rows) {
      if (r.cls != AttractorClass::Periodic) continue;
      if (!periods.empty() && std::find(periods.begin(), periods.end(), r.n) == periods.end()) continue;
      const double x = f.px(r.omega - dw / 2), y = f.py(r.A + da / 2);
      s << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
        << num(f.px(r.omega + dw / 2) - x + 0.5) << "\" height=\"" << num(f.py(r.A - da / 2) - y + 0.5)
        << "\" fill=\"#9ed99e\"/>\n";
    }
  }
  for (std::size_t ci = 0; ci < tongues.size(); ++ci) {
    const char* colour = kPalette[ci % std::size(kPalette)];
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : tongues[ci].rows) pts.push_back({r.omega, r.A});
    polyline(s, f, pts, colour, false);
    for (const auto& r : tongues[ci].rows) {
      if (r.has_flag("cusp"))
        s << "<path d=\"M" << num(f.px(r.omega)) << "," << num(f.py(r.A) - 5) << " l4,8 l-8,0 z\" fill=\""
          << colour << "\"><title>cusp</title></path>\n";
      if (r.has_flag("tip"))
        s << "<circle cx=\"" << num(f.px(r.omega)) << "\" cy=\"" << num(f.py(r.A))
          << "\" r=\"3\" fill=\"none\" stroke=\"" << colour << "\"><title>tip</title></circle>\n";
    }
    const std::string label = meta_value(tongues[ci].meta, "label");
    if (!label.empty() && !tongues[ci].rows.empty()) {
      const auto low = std::min_element(tongues[ci].rows.begin(), tongues[ci].rows.end(),
                                        [](const auto& a, const auto& b) { return a.A < b.A; });
      s << "<text x=\"" << num(f.px(low->omega)) << "\" y=\"" << num(f.py(low->A) + 14)
        << "\" text-anchor=\"middle\" fill=\"" << colour << "\">" << label << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

std::string svg_raster(const RasterFile& r) {
  Frame f;
  std::set<double> ws, as;
  for (const auto& c : r.rows) {
    f.include(c.omega, c.A);
    ws.insert(c.omega);
    as.insert(c.A);
  }
  f.pad();
  const double dw = ws.size() > 1 ? (*ws.rbegin() - *ws.begin()) / (ws.size() - 1) : 0.0;
  const double da = as.size() > 1 ? (*as.rbegin() - *as.begin()) / (as.size() - 1) : 0.0;
  std::ostringstream s;
  s << open_svg(f, "omega", "A");
  for (const auto& c : r.rows) {
    const char* fill = c.cls == AttractorClass::QuasiPeriodic ? "#c8c8c8"
                       : c.cls == AttractorClass::Unresolved  ? "#202020"
                                                              : kPalette[(c.n - 1) % std::size(kPalette)];
    const double x = f.px(c.omega - dw / 2), y = f.py(c.A + da / 2);
    s << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
      << num(f.px(c.omega + dw / 2) - x + 0.5) << "\" height=\"" << num(f.py(c.A - da / 2) - y + 0.5)
      << "\" fill=\"" << fill << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

} // namespace nlres
