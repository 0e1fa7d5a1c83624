#pragma once

// Two-parameter continuation of fold and symmetry-breaking pitchfork loci.
//
// A fold of the section map G (G = H on symmetric branches of odd period,
// P^n otherwise) is continued as a solution curve of
//   G(s) - s = 0,  (DG - sigma I) q = 0,  |q|^2 = 1
// in (x0, v0, q1, q2, p1, p2), with sigma = +1 for folds and sigma = -1 for
// pitchforks of symmetric orbits (DH has the eigenvalue -1 there).

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nlres/continuation.hpp"
#include "nlres/orbit.hpp"
#include "nlres/palc.hpp"

namespace nlres {

enum class TongueKind { FoldOdd, PitchforkEven, FoldBroken, FoldIsola, FoldSync };
std::string_view to_string(TongueKind k);

using Vector6d = Eigen::Matrix<double, 6, 1>;

struct Range {
  double lo, hi;
};

struct TonguePoint {
  PeriodicOrbit orbit;
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  double arclength = 0.0;
  // Unit tangent in (x0, v0, q1, q2, p1, p2).
  Vector6d tangent = Vector6d::Zero();
};

struct TongueCurve {
  TongueKind kind = TongueKind::FoldOdd;
  Param first = Param::Omega, second = Param::A;
  int n = 1;
  bool half_map = false;
  std::vector<TonguePoint> points;
  std::vector<std::size_t> cusps;
  ResonanceLabel label;
  bool closed = false;
  std::array<Termination, 2> ends{Termination::MaxPoints, Termination::MaxPoints};

  // Index of the point with the smallest value of the second parameter.
  std::size_t lowest() const;
};

struct TongueOptions {
  StepControl step{};
  CorrectorSettings corrector{};
  OrbitOptions orbit{};
  int max_points = 20000;
  double closure_tol = 1e-7;
  int closure_min_steps = 10;
  double min_cos = 0.9;
  // Arclength resolution of cusp localisation.
  double cusp_tol = 1e-6;
};

// Continues a saddle-node found by continue_branch in the two parameters
// (first, second), each kept within its range. Throws LostFoldCondition when
// the extended system cannot be solved at the start.
TongueCurve continue_fold_2p(const BifurcationPoint& start, Param first, Param second,
                             Range r1, Range r2, const TongueOptions& opt = {},
                             TongueKind kind = TongueKind::FoldOdd);

// Same for a symmetry-breaking pitchfork of a symmetric branch. Throws
// NotApplicable for other starts.
TongueCurve continue_pitchfork_2p(const BifurcationPoint& start, Param first, Param second,
                                  Range r1, Range r2, const TongueOptions& opt = {},
                                  TongueKind kind = TongueKind::PitchforkEven);

// Interior indices where the curve's projection onto the parameter plane
// reverses direction (both parameter components of the tangent change sign).
// Points with a zero tangent fall back on chord directions.
std::vector<std::size_t> detect_cusps(const TongueCurve& t);

// Interior local minima of the second parameter along the curve (tongue tips).
std::vector<std::size_t> tongue_tips(const TongueCurve& t);

// The fold or pitchfork at points[i] as a start point for another two-parameter
// continuation.
BifurcationPoint as_start(const TongueCurve& t, std::size_t i);

// Angular frequency of the unforced Duffing-Van der Pol limit cycle.
double limit_cycle_frequency(const ModelParams& p, Tolerances tol = {});

struct SyncTongue {
  // Left (lower omega) and right boundaries, each ordered by decreasing A.
  TongueCurve left, right;
  double omega0 = 0.0; // unforced limit-cycle frequency
  // Midpoint of the two boundaries at the lowest A both reached.
  double tip_omega = 0.0, tip_A = 0.0;
  // Forcing amplitude at which the two folds were found.
  double start_A = 0.0;
};

// The 1:1 synchronisation tongue of the forced Duffing-Van der Pol oscillator.
// The locked orbit at the free-running frequency is continued in omega at
// A = p.A, halving A until the branch has a fold on each side; both folds are
// then continued in (omega, A) over the given ranges. Each boundary keeps the
// stretch that rises monotonically in A from the tip.
SyncTongue sync_tongue(const ModelParams& p, Range omega_range, Range a_range,
                       const TongueOptions& opt = {});

// Carries a tongue through increasing damping values. For each target, a fold
// point at the highest A of the current tongue is continued in (omega, gamma)
// at fixed A. If the fold turns back before the target, the tongue is
// re-traced in (omega, A) at the largest damping reached and the step repeats
// from its new highest point. Throws NoConvergence when no progress is made.
struct GammaStage {
  double gamma;
  TongueCurve tongue; // traced in (omega, A) at this gamma
  TongueCurve path;   // the (omega, gamma) fold curve that reached it
};
std::vector<GammaStage> continue_tongue_in_gamma(const TongueCurve& tongue,
                                                 const std::vector<double>& gammas,
                                                 Range omega_range, Range a_range,
                                                 const TongueOptions& opt = {});

} // namespace nlres
