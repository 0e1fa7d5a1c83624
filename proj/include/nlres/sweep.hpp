#pragma once

// Brute-force attractor classification on a grid of forcing parameters.

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "nlres/continuation.hpp"
#include "nlres/integrator.hpp"
#include "nlres/model.hpp"

namespace nlres {

enum class AttractorClass { Periodic, QuasiPeriodic, Unresolved };
std::string_view to_string(AttractorClass c);

struct SweepTiming {
  int transient_periods = 1000;
  int sample_periods = 20;
  int n_max = 9;
  double strobe_tol = 1e-6;
  // Strobe samples gathered for the quasi-periodicity test.
  int qp_samples = 200;
  // Stop the transient early once the strobe sequence is provably within
  // settle_factor * strobe_tol of a periodic cycle.
  bool early_settle = true;
  double settle_factor = 1e-3;
  Tolerances tol{};

  void validate() const;
};

struct CellResult {
  double omega = 0.0, A = 0.0;
  AttractorClass cls = AttractorClass::Unresolved;
  int n = 0; // period multiple when cls == Periodic
  OscState strobe{};
  double x_max = 0.0;
  int transient_used = 0; // forcing periods actually integrated before sampling
  std::string diagnostic;

  bool periodic(int k) const { return cls == AttractorClass::Periodic && n == k; }
};

// Integrates from s0 at forcing phase 0, discards the transient and classifies
// the strobe samples. Integrator failures give Unresolved with a diagnostic.
CellResult classify_attractor(const ModelParams& p, OscState s0, const SweepTiming& t = {});

struct Axis {
  double lo = 0.0, hi = 0.0;
  int count = 1;
  double at(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }
};

struct SweepSpec {
  ModelParams base{};
  Axis omega{}, A{};
  OscState initial{0.0, 0.0};
  SweepTiming timing{};

  void validate() const;
};

// Cells are stored row by row: index = iA * omega.count + iomega.
struct Raster {
  SweepSpec spec;
  std::vector<CellResult> cells;

  const CellResult& at(int iomega, int iA) const {
    return cells.at(static_cast<std::size_t>(iA) * spec.omega.count + iomega);
  }
};

// Classifies every cell; threads = 0 uses the hardware concurrency. The
// result does not depend on the number of threads.
Raster scan(const SweepSpec& spec, int threads = 0);

struct HarvestedSeed {
  double omega, A;
  OscState state;
  int n;
  std::size_t region_size;

  IsolaSeed isola() const { return {omega, state, n}; }
};

// One seed per 4-connected region of cells satisfying `pred`: the region cell
// closest to the region centroid. Regions are ordered by their first cell.
std::vector<HarvestedSeed> harvest_seeds(const Raster& r,
                                         const std::function<bool(const CellResult&)>& pred);

} // namespace nlres
