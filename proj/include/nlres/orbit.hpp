#pragma once

#include <array>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "nlres/integrator.hpp"
#include "nlres/model.hpp"

namespace nlres {

enum class Stability { Stable, Unstable };

struct ResonanceLabel {
  int k = 1; // winding number
  int n = 1; // period in forcing periods
  std::string str() const { return "R" + std::to_string(k) + "," + std::to_string(n); }
};

struct OrbitOptions {
  Tolerances tol{};
  int max_iterations = 25;
  int max_halvings = 8;
  // Newton stops once the residual is below `target`; anything above
  // `accept` is a failure.
  double target = 1e-10;
  double accept = 1e-9;
  double symmetry_tol = 1e-7;
  int samples_per_period = 256;
};

struct PeriodicOrbit {
  ModelParams params;
  int n = 1;
  OscState s0;
  Eigen::Matrix2d monodromy = Eigen::Matrix2d::Identity();
  std::array<std::complex<double>, 2> multipliers{};
  Stability stability = Stability::Unstable;
  bool symmetric = false;
  int winding = 1;
  double x_max = 0.0;
  double residual = 0.0;

  double period() const { return n * params.forcing_period(); }
  ResonanceLabel label() const { return {winding, n}; }
};

// P^n(s): the state after n forcing periods starting at forcing phase 0.
OscState stroboscopic_map(const ModelParams& p, const OscState& s, int n,
                          Tolerances tol = {});

// Eigenvalues of a 2x2 matrix from its trace and determinant, ordered by
// decreasing modulus.
std::array<std::complex<double>, 2> floquet_multipliers(const Eigen::Matrix2d& M);

// Damped Newton shooting on P^n(s) = s followed by classification.
// Throws NoConvergence or SingularJacobian.
PeriodicOrbit refine_orbit(const ModelParams& p, const OscState& guess, int n,
                           const OrbitOptions& opt = {});

// Classification of a point already known to be (close to) periodic, without
// Newton iterations.
PeriodicOrbit analyze_orbit(const ModelParams& p, const OscState& s0, int n,
                            const OrbitOptions& opt = {});

// Assembles the orbit record from data a caller already has (monodromy,
// residual, symmetry), adding winding and amplitude.
PeriodicOrbit assemble_orbit(const ModelParams& p, const OscState& s0, int n,
                             const Eigen::Matrix2d& M, double residual, bool symmetric,
                             const OrbitOptions& opt = {});

// Phase-0 point of the image of the orbit through s under the half-period
// flip (x, v, t) -> (-x, -v, t + pi / omega), i.e. -Phi(s; 0 -> pi / omega).
OscState mirror(const ModelParams& p, const OscState& s, Tolerances tol = {});

// True iff the orbit is its own mirror image within opt.symmetry_tol. For odd n
// this is H(s0) = s0 with H = -Phi(0 -> n pi / omega); an even minimal period
// never admits the symmetry, and the test compares against every phase-0
// point of the orbit.
bool classify_symmetry(const PeriodicOrbit& o, const OrbitOptions& opt = {});

// Strict local maxima of x(t) over one orbit period (plateaus count once).
// Throws DegenerateOrbit when x(t) is constant.
int winding_number(const PeriodicOrbit& o, const OrbitOptions& opt = {});

// max |x(t)| over one orbit period.
double amplitude(const PeriodicOrbit& o, const OrbitOptions& opt = {});

// Smallest d dividing n with |P^d(s0) - s0| <= tol_close.
int minimal_period(const PeriodicOrbit& o, double tol_close = 1e-8,
                   Tolerances tol = {});

} // namespace nlres
