#pragma once

// Text serialization of branches, tongues, rasters and orbit reports, plus
// SVG plots. Every file starts with "# nlres-<type> v<version>"; readers
// reject any other type or version.

#include <array>
#include <complex>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlres/codim2.hpp"
#include "nlres/continuation.hpp"
#include "nlres/sweep.hpp"

namespace nlres {

inline constexpr int kFormatVersion = 1;

// Unreadable, unwritable or malformed files.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Ordered metadata, written as "#@ key=value" lines after the header.
using Meta = std::vector<std::pair<std::string, std::string>>;
std::string meta_value(const Meta& m, const std::string& key);

// One record of a branch or tongue file. `flags` holds ';'-separated tokens:
// SN, PF, PD for bifurcation records, cusp and tip on tongue curves.
struct CurveRow {
  double omega = 0.0, A = 0.0, gamma = 0.0;
  int n = 1;
  double x0 = 0.0, v0 = 0.0, xmax = 0.0;
  std::complex<double> mult1{}, mult2{};
  bool stable = false, symmetric = false;
  int winding = 1;
  std::string flags;

  bool has_flag(const std::string& f) const;
  bool operator==(const CurveRow&) const = default;
};

struct CurveFile {
  Meta meta;
  std::vector<CurveRow> rows;
  bool operator==(const CurveFile&) const = default;
};

inline const std::vector<std::string> kCurveColumns{
    "omega", "A",        "gamma",    "n",      "x0",        "v0",      "xmax", "mult_re1",
    "mult_im1", "mult_re2", "mult_im2", "stable", "symmetric", "winding", "flags"};
inline const std::vector<std::string> kRasterColumns{"omega",    "A",        "class", "n",
                                                     "strobe_x", "strobe_v", "xmax"};

CurveRow curve_row(const PeriodicOrbit& o, std::string flags = {});
// Branch points in arclength order with each bifurcation inserted as a
// flagged record at its position.
CurveFile branch_file(const Branch& b);
CurveFile tongue_file(const TongueCurve& t);

void write_curve(std::ostream& os, const CurveFile& f);
CurveFile read_curve(std::istream& is);

struct RasterRow {
  double omega = 0.0, A = 0.0;
  AttractorClass cls = AttractorClass::Unresolved;
  int n = 0;
  double strobe_x = 0.0, strobe_v = 0.0, xmax = 0.0;
  bool operator==(const RasterRow&) const = default;
};

struct RasterFile {
  Meta meta;
  std::vector<RasterRow> rows;
  bool operator==(const RasterFile&) const = default;
};

RasterFile raster_file(const Raster& r);
void write_raster(std::ostream& os, const RasterFile& f);
RasterFile read_raster(std::istream& is);

// Single-orbit report as key = value lines.
struct OrbitReport {
  ModelParams params;
  int n = 1;
  OscState s0;
  std::complex<double> mult1{}, mult2{};
  bool stable = false, symmetric = false;
  int winding = 1;
  double x_max = 0.0, period = 0.0, residual = 0.0;
  bool operator==(const OrbitReport&) const = default;
};

OrbitReport orbit_report(const PeriodicOrbit& o);
void write_orbit_report(std::ostream& os, const OrbitReport& r);
OrbitReport read_orbit_report(std::istream& is);

struct NatfreqFile {
  std::vector<std::pair<double, double>> rows; // (x_max, T)
  bool operator==(const NatfreqFile&) const = default;
};
void write_natfreq(std::ostream& os, const NatfreqFile& f);
NatfreqFile read_natfreq(std::istream& is);

// Samples (t, x, v) along one orbit period.
struct TrajectoryFile {
  std::vector<std::array<double, 3>> rows;
  bool operator==(const TrajectoryFile&) const = default;
};
void write_trajectory(std::ostream& os, const TrajectoryFile& f);
TrajectoryFile read_trajectory(std::istream& is);

// Machine-readable failure record: the item that failed, a stable error code
// and the message.
struct ErrorRecord {
  std::string item, code, message;
  bool operator==(const ErrorRecord&) const = default;
};
void write_errors(std::ostream& os, const std::vector<ErrorRecord>& e);
std::vector<ErrorRecord> read_errors(std::istream& is);

// Amplitude against the first column of each curve; stable stretches solid,
// unstable ones dashed. `param` picks the abscissa (omega, A or gamma).
std::string svg_amplitude(const std::vector<CurveFile>& curves, Param param);
// Tongue boundaries in the (omega, A) plane, optionally over the cells of a
// raster that are periodic with one of `periods`.
std::string svg_tongues(const std::vector<CurveFile>& tongues, const RasterFile* raster = nullptr,
                        const std::vector<int>& periods = {});
// Raster cells coloured by class and period.
std::string svg_raster(const RasterFile& r);

// File helpers; failures throw IoError.
void save_text(const std::filesystem::path& p, const std::string& text);
std::string load_text(const std::filesystem::path& p);

// Shortest text that parses back to exactly the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

} // namespace nlres
