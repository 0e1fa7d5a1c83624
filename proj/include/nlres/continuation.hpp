#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nlres/orbit.hpp"
#include "nlres/palc.hpp"

namespace nlres {

enum class BifurcationKind { SaddleNode, Pitchfork, PeriodDoubling };
std::string_view to_string(BifurcationKind k);

struct BranchPoint {
  PeriodicOrbit orbit;
  double arclength = 0.0;
  // Unit tangent in (x0, v0, active parameter).
  Eigen::Vector3d tangent = Eigen::Vector3d::Zero();
  // Jacobian of the half map H at x0 on branches continued as fixed points
  // of H (symmetric orbits with odd n).
  std::optional<Eigen::Matrix2d> half_jacobian;
  // Test functions; NaN where not applicable.
  double fold = 0.0, pitchfork = 0.0, period_doubling = 0.0, branch_point = 0.0;
};

struct BifurcationPoint {
  BifurcationKind kind = BifurcationKind::SaddleNode;
  ModelParams params_at;
  PeriodicOrbit orbit_at;
  Param active = Param::Omega;
  std::pair<double, double> test_value_bracket{0.0, 0.0};
  std::pair<double, double> arclength_bracket{0.0, 0.0};
  double test_value = 0.0;
  Eigen::Vector3d tangent = Eigen::Vector3d::Zero();
  // Critical direction: null vector of DG - I at a fold (G = H on symmetric
  // branches, P^n otherwise), the -1 eigenvector of DH at a pitchfork.
  Eigen::Vector2d null_vector = Eigen::Vector2d::Zero();
  // True when the point sits on a branch of H fixed points.
  bool half_map = false;
  // A pitchfork found as a branch point of an asymmetric branch. It is
  // located on the symmetric branch through it: orbit_at is the symmetric
  // orbit and test_value the pitchfork test there, while the bracket holds the
  // branch-point test of the asymmetric branch.
  bool from_asymmetric = false;
};

struct Branch {
  std::vector<BranchPoint> points;
  std::vector<BifurcationPoint> bifurcations;
  bool closed = false;
  Param active = Param::Omega;
  int n = 1;
  bool half_map = false;
  std::optional<BifurcationPoint> parent;
  // How each end of the trace stopped: [0] the start of `points`, [1] its end.
  std::array<Termination, 2> ends{Termination::MaxPoints, Termination::MaxPoints};

  double length() const { return points.empty() ? 0.0 : points.back().arclength; }
  std::size_t count(BifurcationKind k) const;
};

struct ContinuationOptions {
  StepControl step{};
  CorrectorSettings corrector{};
  OrbitOptions orbit{};
  int max_points = 20000;
  double closure_tol = 1e-7;
  int closure_min_steps = 10;
  double min_cos = 0.9;
  double localize_tol = 1e-8;
  // Seeds whose orbit lies this close to a traced branch are merged into it.
  double merge_tol = 1e-6;
  // Stop an asymmetric branch where it meets the symmetric one.
  bool stop_at_branch_points = false;
  bool detect = true;
};

// Test functions, in the forms documented with each.
// Parameter component of the unit tangent.
double fold_test(const BranchPoint& bp);
// det(DH + I) / (1 + |tr DH|): changes sign when an eigenvalue of the half
// map's Jacobian crosses -1, i.e. a multiplier of the antisymmetric direction
// crosses +1. Throws NotApplicable off symmetric branches.
double pitchfork_test(const BranchPoint& bp);
// det(M + I) / (1 + |tr M|) = (1 + mu1)(1 + mu2) / (1 + |mu1 + mu2|).
double pd_test(const BranchPoint& bp);

Branch continue_branch(const PeriodicOrbit& seed, Param active, double lo, double hi,
                       const ContinuationOptions& opt = {});

// Continues from the seed until the active parameter reaches `target` and
// returns the orbit there. The trace may first run away from the target by up
// to the seed-target distance (S-shaped branches).
PeriodicOrbit continue_to(const PeriodicOrbit& seed, Param active, double target,
                          const ContinuationOptions& opt = {});

// Two asymmetric orbits on the symmetry-broken branch leaving a pitchfork.
std::pair<PeriodicOrbit, PeriodicOrbit> switch_branch(const BifurcationPoint& pf,
                                                      const ContinuationOptions& opt = {});

// Continuation along the symmetry-broken branch from a pitchfork; the branch
// stops where it rejoins the symmetric branch.
Branch continue_switched(const BifurcationPoint& pf, const PeriodicOrbit& seed, double lo,
                         double hi, ContinuationOptions opt = {});

struct IsolaSeed {
  double omega;
  OscState state;
  int n;
};

struct IsolaSearch {
  std::vector<Branch> branches; // ordered by seed omega
  std::vector<double> seed_omegas;
  std::vector<std::string> skipped;
};

// Continues each seed in omega unless its orbit already lies on a traced
// branch (or on one of `known`).
IsolaSearch find_isolas(const ModelParams& base, double omega_lo, double omega_hi,
                        std::vector<IsolaSeed> seeds, const ContinuationOptions& opt = {},
                        const std::vector<Branch>& known = {});

// True if some phase-0 point of `orbit` lies on `branch` at the orbit's
// parameter value, within `tol` in (x0, v0, normalized parameter).
bool branch_contains(const Branch& branch, const PeriodicOrbit& orbit, double tol,
                     double param_scale, const ContinuationOptions& opt = {});

// Minimum phase-space distance between a point of `a` and `b` at equal
// parameter values, over the parameter values of a's points.
double min_distance_at_equal_param(const Branch& a, const Branch& b,
                                   const ContinuationOptions& opt = {});

} // namespace nlres
