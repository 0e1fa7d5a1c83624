#include "nlres/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlres/errors.hpp"
#include "nlres/flow_map.hpp"

namespace nlres {

std::string_view to_string(Termination t) {
  switch (t) {
  case Termination::RangeExit: return "range-exit";
  case Termination::Closed: return "closed";
  case Termination::StepCollapse: return "step-collapse";
  case Termination::MaxPoints: return "max-points";
  case Termination::Stopped: return "stopped";
  }
  return "?";
}

std::string_view to_string(BifurcationKind k) {
  switch (k) {
  case BifurcationKind::SaddleNode: return "SN";
  case BifurcationKind::Pitchfork: return "PF";
  case BifurcationKind::PeriodDoubling: return "PD";
  }
  return "?";
}

std::size_t Branch::count(BifurcationKind k) const {
  return static_cast<std::size_t>(std::count_if(
      bifurcations.begin(), bifurcations.end(),
      [k](const BifurcationPoint& b) { return b.kind == k; }));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using P3 = Palc<2>;

double normalized_char(const Eigen::Matrix2d& K, double sign) {
  // det(K + sign I) / (1 + |tr K|)
  return (1.0 + sign * K.trace() + K.determinant()) / (1.0 + std::abs(K.trace()));
}

// Unit vector spanning the (approximate) kernel of A.
Eigen::Vector2d null_vector(const Eigen::Matrix2d& A) {
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(A, Eigen::ComputeFullV);
  return svd.matrixV().col(1);
}

// The map whose fixed points make up a branch.
struct BranchSystem {
  ModelParams base;
  Param active;
  MapSpec spec;
  OrbitOptions orbit;

  ModelParams at(double lambda) const { return base.with(active, lambda); }

  P3::Eval eval(const P3::Vec& u) const {
    const MapJet jet = evaluate_map(at(u(2)), {u(0), u(1)}, spec, {{active}, {}}, orbit.tol);
    P3::Eval e;
    e.F = jet.residual({u(0), u(1)});
    e.J.leftCols<2>() = jet.D - Eigen::Matrix2d::Identity();
    e.J.col(2) = jet.dparam[0];
    return e;
  }

  P3 palc() const {
    return P3([this](const P3::Vec& u) { return eval(u); });
  }

  // Jacobian of the section map G at a solution node.
  static Eigen::Matrix2d DG(const P3::Node& node) {
    return node.e.J.leftCols<2>() + Eigen::Matrix2d::Identity();
  }

  Eigen::Matrix2d monodromy(const P3::Node& node) const {
    const Eigen::Matrix2d K = DG(node);
    return spec.half ? Eigen::Matrix2d(K * K) : K;
  }

  BranchPoint point(const P3::Node& node) const {
    const ModelParams p = at(node.u(2));
    const OscState s{node.u(0), node.u(1)};
    const Eigen::Matrix2d M = monodromy(node);
    const double residual =
        spec.half ? (map_value(p, s, {spec.n, false}, orbit.tol) - s).norm()
                  : node.e.F.norm();
    PeriodicOrbit o;
    if (spec.half) {
      o = assemble_orbit(p, s, spec.n, M, residual, true, orbit);
    } else {
      o = assemble_orbit(p, s, spec.n, M, residual, false, orbit);
      o.symmetric = classify_symmetry(o, orbit);
    }
    BranchPoint bp;
    bp.orbit = std::move(o);
    bp.arclength = node.s;
    bp.tangent = node.t;
    if (spec.half) bp.half_jacobian = DG(node);
    fill_tests(bp, node);
    return bp;
  }

  void fill_tests(BranchPoint& bp, const P3::Node& node) const {
    bp.fold = node.t(2);
    bp.period_doubling = normalized_char(monodromy(node), 1.0);
    if (spec.half) {
      bp.pitchfork = normalized_char(DG(node), 1.0);
      bp.branch_point = kNaN;
    } else {
      bp.pitchfork = kNaN;
      const Eigen::Vector3d r1 = node.e.J.row(0), r2 = node.e.J.row(1);
      const double scale = r1.norm() * r2.norm();
      bp.branch_point = scale > 0.0 ? node.t.dot(r1.cross(r2)) / scale : 0.0;
    }
  }

  // Test values at a node, in the order SN, PF (symmetric), PD, PF (branch point).
  std::array<double, 4> tests(const P3::Node& node) const {
    BranchPoint bp;
    fill_tests(bp, node);
    return {bp.fold, bp.pitchfork, bp.period_doubling, bp.branch_point};
  }
};

constexpr std::array<BifurcationKind, 4> kTestKinds{
    BifurcationKind::SaddleNode, BifurcationKind::Pitchfork, BifurcationKind::PeriodDoubling,
    BifurcationKind::Pitchfork};

bool sign_change(double a, double b) {
  return std::isfinite(a) && std::isfinite(b) && ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0));
}

// Newton at fixed parameter on the branch's own map, starting from `guess`.
std::optional<OscState> solve_fixed(const BranchSystem& sys, double lambda, OscState guess) {
  const ModelParams p = sys.at(lambda);
  for (int it = 0; it < 25; ++it) {
    MapJet jet;
    try {
      jet = evaluate_map(p, guess, sys.spec, {}, sys.orbit.tol);
    } catch (const NumericalError&) {
      return std::nullopt;
    }
    const Eigen::Vector2d r = jet.residual(guess);
    if (r.norm() <= sys.orbit.target) return guess;
    const Eigen::Matrix2d K = jet.D - Eigen::Matrix2d::Identity();
    const Eigen::Vector2d delta = K.fullPivLu().solve(-r);
    if (!delta.allFinite()) return std::nullopt;
    guess = state(vec(guess) + delta);
    if (!guess.finite() || delta.norm() > 10.0) return std::nullopt;
  }
  return std::nullopt;
}

// A branch point on a full-map branch of odd period is a pitchfork of the
// symmetric branch through it, where it is a regular zero of det(DH + I):
// locate it there by a secant iteration in the parameter.
std::optional<P3::Node> symmetric_pitchfork(const BranchSystem& sys, const P3::Node& near) {
  if (sys.spec.n % 2 == 0) return std::nullopt;
  const BranchSystem hs{sys.base, sys.active, {sys.spec.n, true}, sys.orbit};
  const P3 palc = hs.palc();
  const OscState s{near.u(0), near.u(1)};
  OscState guess;
  try {
    guess = (s + map_value(sys.at(near.u(2)), s, hs.spec, sys.orbit.tol)) * 0.5;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
  auto at = [&](double lambda) -> std::optional<P3::Node> {
    const auto fixed = solve_fixed(hs, lambda, guess);
    if (!fixed) return std::nullopt;
    guess = *fixed;
    const P3::Vec u(fixed->x, fixed->v, lambda);
    const auto e = palc.evaluate(u);
    if (!e) return std::nullopt;
    return P3::Node{u, P3::tangent(e->J, P3::Vec(0, 0, 1)), *e, near.s};
  };
  double l0 = near.u(2), l1 = l0 + 1e-6 * (1.0 + std::abs(l0));
  auto n0 = at(l0), n1 = at(l1);
  if (!n0 || !n1) return std::nullopt;
  double f0 = hs.tests(*n0)[1], f1 = hs.tests(*n1)[1];
  for (int it = 0; it < 30 && std::abs(f1) > 1e-10; ++it) {
    if (f1 == f0) break;
    const double l2 = l1 - f1 * (l1 - l0) / (f1 - f0);
    auto n2 = at(l2);
    if (!n2) return std::nullopt;
    l0 = l1;
    f0 = f1;
    l1 = l2;
    n1 = n2;
    f1 = hs.tests(*n2)[1];
  }
  if (std::abs(f1) > 1e-8) return std::nullopt;
  return n1;
}

// Locates the zero of test `which` between two consecutive nodes by an
// Illinois iteration on the arclength along the secant.
BifurcationPoint localize(const BranchSystem& sys, const P3& palc, const P3::Node& a,
                          const P3::Node& b, int which, const ContinuationOptions& opt) {
  const P3::Vec chord = b.u - a.u;
  const double L = chord.norm();
  const P3::Vec d = chord / L;
  auto at = [&](double sigma) -> std::optional<P3::Node> {
    auto c = palc.correct(a.u + sigma * d, d, d.dot(a.u) + sigma, opt.corrector);
    if (!c) return std::nullopt;
    c->t = P3::tangent(c->e.J, a.t);
    c->s = a.s + sigma;
    return c;
  };
  double lo = 0.0, hi = L;
  double flo = sys.tests(a)[which], fhi = sys.tests(b)[which];
  const double f_a = flo, f_b = fhi;
  P3::Node best = std::abs(flo) <= std::abs(fhi) ? a : b;
  double fbest = std::min(std::abs(flo), std::abs(fhi));
  int side = 0;
  for (int it = 0; it < 80; ++it) {
    if (fbest <= opt.localize_tol && hi - lo <= 1e-7) break;
    if (hi - lo <= 1e-12) break;
    double sigma = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(sigma > lo && sigma < hi)) sigma = 0.5 * (lo + hi);
    auto c = at(sigma);
    if (!c) {
      sigma = 0.5 * (lo + hi);
      c = at(sigma);
      if (!c) break;
    }
    const double f = sys.tests(*c)[which];
    if (std::abs(f) < fbest) {
      fbest = std::abs(f);
      best = *c;
    }
    if (sign_change(flo, f)) {
      hi = sigma;
      fhi = f;
      if (side == -1) flo *= 0.5;
      side = -1;
    } else {
      lo = sigma;
      flo = f;
      if (side == 1) fhi *= 0.5;
      side = 1;
    }
    if (fbest <= opt.localize_tol && hi - lo <= 1e-7) break;
  }

  BifurcationPoint bif;
  if (which == 3) {
    if (const auto pf = symmetric_pitchfork(sys, best)) {
      const BranchSystem hs{sys.base, sys.active, {sys.spec.n, true}, sys.orbit};
      bif.kind = BifurcationKind::Pitchfork;
      bif.active = sys.active;
      bif.half_map = false;
      bif.from_asymmetric = true;
      bif.orbit_at = hs.point(*pf).orbit;
      bif.params_at = bif.orbit_at.params;
      bif.tangent = best.t;
      bif.test_value = hs.tests(*pf)[1];
      bif.test_value_bracket = {f_a, f_b};
      bif.arclength_bracket = {a.s + lo, a.s + hi};
      bif.null_vector = null_vector(BranchSystem::DG(*pf) + Eigen::Matrix2d::Identity());
      return bif;
    }
  }
  bif.kind = kTestKinds[which];
  bif.active = sys.active;
  bif.half_map = sys.spec.half;
  bif.from_asymmetric = which == 3;
  BranchPoint bp = sys.point(best);
  bif.orbit_at = bp.orbit;
  bif.params_at = bp.orbit.params;
  bif.tangent = best.t;
  bif.test_value = sys.tests(best)[which];
  bif.test_value_bracket = {f_a, f_b};
  bif.arclength_bracket = {a.s + lo, a.s + hi};
  const Eigen::Matrix2d G = BranchSystem::DG(best);
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  switch (bif.kind) {
  case BifurcationKind::SaddleNode: bif.null_vector = null_vector(G - I); break;
  case BifurcationKind::Pitchfork:
    bif.null_vector = bif.from_asymmetric ? null_vector(G - I) : null_vector(G + I);
    break;
  case BifurcationKind::PeriodDoubling: bif.null_vector = null_vector(sys.monodromy(best) + I); break;
  }
  return bif;
}

struct DirectionResult {
  std::vector<P3::Node> nodes;
  std::vector<BifurcationPoint> bifs;
  Termination end;
};

DirectionResult trace_direction(const BranchSystem& sys, const P3& palc, const P3::Node& start,
                                double lo, double hi, const ContinuationOptions& opt) {
  P3::Settings st;
  st.step = opt.step;
  st.corrector = opt.corrector;
  st.bounds = {{2, lo, hi}};
  st.max_points = opt.max_points;
  st.closure_tol = opt.closure_tol;
  st.closure_min_steps = opt.closure_min_steps;
  st.min_cos = opt.min_cos;

  DirectionResult out;
  bool stop_here = false;
  std::optional<BifurcationPoint> stop_point;
  auto observer = [&](const P3::Node& prev, P3::Node& cur) {
    if (!opt.detect) return true;
    const auto ta = sys.tests(prev), tb = sys.tests(cur);
    std::vector<BifurcationPoint> found;
    for (int k = 0; k < 4; ++k)
      if (sign_change(ta[k], tb[k])) found.push_back(localize(sys, palc, prev, cur, k, opt));
    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) {
      return x.arclength_bracket.first < y.arclength_bracket.first;
    });
    for (auto& f : found) {
      if (opt.stop_at_branch_points && f.from_asymmetric) {
        out.bifs.push_back(f);
        stop_point = f;
        stop_here = true;
        return false;
      }
      out.bifs.push_back(std::move(f));
    }
    return true;
  };
  auto trace = palc.trace(start, st, observer);
  out.nodes = std::move(trace.nodes);
  out.end = trace.end;
  if (stop_here && stop_point && !out.nodes.empty()) {
    // End the branch on the located branch point itself.
    const auto& o = stop_point->orbit_at;
    P3::Vec u(o.s0.x, o.s0.v, o.params.get(sys.active));
    if (auto e = palc.evaluate(u)) {
      P3::Node& last = out.nodes.back();
      last.u = u;
      last.e = *e;
      last.t = stop_point->tangent;
      last.s = 0.5 * (stop_point->arclength_bracket.first + stop_point->arclength_bracket.second);
    }
  }
  return out;
}

BranchSystem system_for(const Branch& b, const ModelParams& base, const OrbitOptions& orbit) {
  return BranchSystem{base, b.active, {b.n, b.half_map}, orbit};
}

// Points of `b` at parameter lambda (one per crossing), refined on the branch.
std::vector<OscState> points_at(const Branch& b, double lambda, const OrbitOptions& orbit,
                                double coarse_radius = INFINITY,
                                const std::vector<OscState>* targets = nullptr) {
  std::vector<OscState> out;
  if (b.points.empty()) return out;
  const BranchSystem sys = system_for(b, b.points.front().orbit.params, orbit);
  for (std::size_t i = 0; i + 1 < b.points.size(); ++i) {
    const double la = b.points[i].orbit.params.get(b.active);
    const double lb = b.points[i + 1].orbit.params.get(b.active);
    if (!((la <= lambda && lambda <= lb) || (lb <= lambda && lambda <= la))) continue;
    if (la == lb && la != lambda) continue;
    const double w = la == lb ? 0.0 : (lambda - la) / (lb - la);
    const OscState sa = b.points[i].orbit.s0, sb = b.points[i + 1].orbit.s0;
    const OscState guess = sa + (sb - sa) * w;
    if (targets && std::isfinite(coarse_radius)) {
      double nearest = INFINITY;
      for (const auto& t : *targets) nearest = std::min(nearest, (t - guess).norm());
      if (nearest > coarse_radius) {
        out.push_back(guess);
        continue;
      }
    }
    if (w == 0.0 && la == lambda) {
      out.push_back(sa);
      continue;
    }
    if (w == 1.0) continue; // picked up as the next segment's start
    if (auto s = solve_fixed(sys, lambda, guess)) out.push_back(*s);
  }
  if (b.points.back().orbit.params.get(b.active) == lambda) out.push_back(b.points.back().orbit.s0);
  return out;
}

std::vector<OscState> phase_points(const PeriodicOrbit& o, Tolerances tol) {
  std::vector<OscState> pts{o.s0};
  for (int k = 1; k < o.n; ++k) pts.push_back(stroboscopic_map(o.params, pts.back(), 1, tol));
  return pts;
}

} // namespace

double fold_test(const BranchPoint& bp) { return bp.tangent(2); }

double pitchfork_test(const BranchPoint& bp) {
  if (!bp.half_jacobian)
    throw NotApplicable("pitchfork test needs a branch of symmetric orbits with odd n");
  return normalized_char(*bp.half_jacobian, 1.0);
}

double pd_test(const BranchPoint& bp) { return normalized_char(bp.orbit.monodromy, 1.0); }

Branch continue_branch(const PeriodicOrbit& seed, Param active, double lo, double hi,
                       const ContinuationOptions& opt) {
  if (!(lo < hi)) throw InvalidArgument("continuation range needs lo < hi");
  const double lambda0 = seed.params.get(active);
  if (lambda0 < lo || lambda0 > hi)
    throw InvalidArgument("seed parameter lies outside the continuation range");

  PeriodicOrbit refined;
  try {
    refined = refine_orbit(seed.params, seed.s0, seed.n, opt.orbit);
  } catch (const NumericalError& e) {
    throw SeedNotConverged(std::string("seed refinement failed: ") + e.what());
  }

  Branch branch;
  branch.active = active;
  branch.n = seed.n;
  branch.half_map = refined.symmetric && seed.n % 2 == 1;
  const BranchSystem sys{seed.params, active, {seed.n, branch.half_map}, opt.orbit};
  const P3 palc = sys.palc();

  P3::Vec u0(refined.s0.x, refined.s0.v, lambda0);
  if (branch.half_map) {
    // Put the seed exactly on the fixed-point set of H.
    auto c = palc.correct(u0, P3::Vec(0, 0, 1), lambda0, opt.corrector);
    if (!c) throw SeedNotConverged("seed is not a fixed point of the half map");
    u0 = c->u;
  }
  auto start = palc.start(u0, P3::Vec(0, 0, 1));
  if (!start) throw SeedNotConverged("cannot evaluate the seed");

  DirectionResult fwd = trace_direction(sys, palc, *start, lo, hi, opt);
  DirectionResult bwd;
  if (fwd.end == Termination::Closed) {
    branch.closed = true;
    bwd.end = Termination::Closed;
  } else {
    P3::Node back = *start;
    back.t = -start->t;
    bwd = trace_direction(sys, palc, back, lo, hi, opt);
  }

  // Merge: reversed backward trace, seed, forward trace, all oriented forward.
  const double S = bwd.nodes.empty() ? 0.0 : bwd.nodes.back().s;
  std::vector<P3::Node> nodes;
  for (auto it = bwd.nodes.rbegin(); it != bwd.nodes.rend(); ++it) {
    P3::Node n = *it;
    n.t = -n.t;
    n.s = S - n.s;
    nodes.push_back(n);
  }
  P3::Node s0 = *start;
  s0.s = S;
  nodes.push_back(s0);
  for (P3::Node n : fwd.nodes) {
    n.s += S;
    nodes.push_back(n);
  }
  branch.points.reserve(nodes.size());
  for (const auto& n : nodes) branch.points.push_back(sys.point(n));

  for (BifurcationPoint b : bwd.bifs) {
    b.arclength_bracket = {S - b.arclength_bracket.second, S - b.arclength_bracket.first};
    std::swap(b.test_value_bracket.first, b.test_value_bracket.second);
    if (b.kind == BifurcationKind::SaddleNode || b.from_asymmetric) {
      // Tangent-based tests flip with the orientation.
      b.test_value_bracket = {-b.test_value_bracket.first, -b.test_value_bracket.second};
      b.test_value = -b.test_value;
    }
    b.tangent = -b.tangent;
    branch.bifurcations.push_back(b);
  }
  for (BifurcationPoint b : fwd.bifs) {
    b.arclength_bracket.first += S;
    b.arclength_bracket.second += S;
    branch.bifurcations.push_back(b);
  }
  // An asymmetric branch turns in the parameter exactly where it meets the
  // symmetric one, so its fold test vanishes at each branch point too.
  std::vector<BifurcationPoint> kept;
  for (const BifurcationPoint& b : branch.bifurcations) {
    bool shadow = false;
    if (b.kind == BifurcationKind::SaddleNode)
      for (const BifurcationPoint& bp : branch.bifurcations)
        if (bp.from_asymmetric &&
            (b.orbit_at.s0 - bp.orbit_at.s0).norm() +
                    std::abs(b.params_at.get(active) - bp.params_at.get(active)) <
                1e-2)
          shadow = true;
    if (!shadow) kept.push_back(b);
  }
  branch.bifurcations = std::move(kept);
  std::sort(branch.bifurcations.begin(), branch.bifurcations.end(),
            [](const auto& x, const auto& y) {
              return x.arclength_bracket.first < y.arclength_bracket.first;
            });
  branch.ends = {bwd.end, fwd.end};
  return branch;
}

PeriodicOrbit continue_to(const PeriodicOrbit& seed, Param active, double target,
                          const ContinuationOptions& opt) {
  const double lambda0 = seed.params.get(active);
  if (lambda0 == target) return refine_orbit(seed.params, seed.s0, seed.n, opt.orbit);
  ContinuationOptions o = opt;
  o.detect = false;
  // The branch may fold back before reaching the target, so leave room
  // behind the seed as well.
  const double span = std::abs(target - lambda0);
  double lo = std::min(lambda0, target), hi = std::max(lambda0, target);
  if (target > lambda0)
    lo = std::max(lambda0 - span, active == Param::Gamma ? 1e-6 : 1e-4 * lambda0);
  else
    hi = lambda0 + span;
  const Branch b = continue_branch(seed, active, lo, hi, o);
  for (const BranchPoint& bp : b.points)
    if (bp.orbit.params.get(active) == target) return bp.orbit;
  throw NoConvergence("branch from the seed does not reach " + std::string(to_string(active)) +
                      " = " + std::to_string(target));
}

std::pair<PeriodicOrbit, PeriodicOrbit> switch_branch(const BifurcationPoint& pf,
                                                      const ContinuationOptions& opt) {
  if (pf.kind != BifurcationKind::Pitchfork || pf.from_asymmetric || !pf.half_map)
    throw NotApplicable("branch switching needs a pitchfork on a symmetric branch");
  const PeriodicOrbit& o = pf.orbit_at;
  const BranchSystem sys{o.params, pf.active, {o.n, false}, opt.orbit};
  const P3 palc = sys.palc();
  const P3::Vec ustar(o.s0.x, o.s0.v, o.params.get(pf.active));
  const Eigen::Vector2d q = pf.null_vector.normalized();
  const P3::Vec a(q(0), q(1), 0.0);

  auto attempt = [&](double delta) -> std::optional<PeriodicOrbit> {
    auto c = palc.correct(ustar + delta * a, a, a.dot(ustar) + delta, opt.corrector);
    if (!c) return std::nullopt;
    try {
      PeriodicOrbit r =
          refine_orbit(sys.at(c->u(2)), {c->u(0), c->u(1)}, o.n, opt.orbit);
      if (r.symmetric || (r.s0 - o.s0).norm() < 0.25 * std::abs(delta)) return std::nullopt;
      return r;
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  };

  // The second orbit is the image of the first under the half-period flip,
  // so the pair is mirror-exact at one parameter value.
  const double scale = 1.0 + o.s0.norm();
  for (double delta : {1e-3, 1e-2, 1e-1}) {
    for (double sign : {1.0, -1.0}) {
      const auto got = attempt(sign * delta * scale);
      if (!got) continue;
      try {
        const OscState img = map_value(got->params, got->s0, {got->n, true}, opt.orbit.tol);
        PeriodicOrbit other = refine_orbit(got->params, img, got->n, opt.orbit);
        if (sign > 0.0) return {*got, other};
        return {other, *got};
      } catch (const NumericalError&) {
      }
    }
  }
  throw SwitchFailed("no asymmetric orbit found near the pitchfork at " +
                     std::string(to_string(pf.active)) + " = " +
                     std::to_string(o.params.get(pf.active)));
}

Branch continue_switched(const BifurcationPoint& pf, const PeriodicOrbit& seed, double lo,
                         double hi, ContinuationOptions opt) {
  opt.stop_at_branch_points = true;
  Branch b = continue_branch(seed, pf.active, lo, hi, opt);
  b.parent = pf;
  return b;
}

bool branch_contains(const Branch& branch, const PeriodicOrbit& orbit, double tol,
                     double param_scale, const ContinuationOptions& opt) {
  if (branch.points.empty()) return false;
  if (orbit.n % branch.n != 0) return false;
  const double lambda = orbit.params.get(branch.active);
  const auto targets = phase_points(orbit, opt.orbit.tol);
  const double coarse = 0.05 + tol;
  for (const OscState& s : points_at(branch, lambda, opt.orbit, coarse, &targets)) {
    for (const OscState& t : targets) {
      // Parameters agree exactly here, so only the state contributes.
      (void)param_scale;
      if ((s - t).norm() <= tol) return true;
    }
  }
  return false;
}

double min_distance_at_equal_param(const Branch& a, const Branch& b,
                                   const ContinuationOptions& opt) {
  double best = INFINITY;
  for (const BranchPoint& bp : a.points) {
    const double lambda = bp.orbit.params.get(a.active);
    const auto targets = phase_points(bp.orbit, opt.orbit.tol);
    for (const OscState& s : points_at(b, lambda, opt.orbit, 0.1, &targets))
      for (const OscState& t : targets) best = std::min(best, (s - t).norm());
  }
  return best;
}

IsolaSearch find_isolas(const ModelParams& base, double omega_lo, double omega_hi,
                        std::vector<IsolaSeed> seeds, const ContinuationOptions& opt,
                        const std::vector<Branch>& known) {
  IsolaSearch out;
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const IsolaSeed& x, const IsolaSeed& y) { return x.omega < y.omega; });
  const double scale = omega_hi - omega_lo;
  for (const IsolaSeed& seed : seeds) {
    const std::string tag = "seed omega=" + std::to_string(seed.omega) + " n=" +
                            std::to_string(seed.n);
    if (seed.omega < omega_lo || seed.omega > omega_hi) {
      out.skipped.push_back(tag + ": outside the omega range");
      continue;
    }
    PeriodicOrbit orbit;
    try {
      orbit = refine_orbit(base.with(Param::Omega, seed.omega), seed.state, seed.n, opt.orbit);
    } catch (const NumericalError& e) {
      out.skipped.push_back(tag + ": " + e.code() + ": " + e.what());
      continue;
    }
    bool duplicate = false;
    const std::array<const std::vector<Branch>*, 2> lists{&out.branches, &known};
    for (const std::vector<Branch>* list : lists) {
      for (const Branch& b : *list) {
        if (b.active != Param::Omega) continue;
        if (branch_contains(b, orbit, opt.merge_tol, scale, opt)) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) break;
    }
    if (duplicate) {
      out.skipped.push_back(tag + ": lies on an already traced branch");
      continue;
    }
    try {
      out.branches.push_back(continue_branch(orbit, Param::Omega, omega_lo, omega_hi, opt));
      out.seed_omegas.push_back(seed.omega);
    } catch (const NumericalError& e) {
      out.skipped.push_back(tag + ": " + e.code() + ": " + e.what());
    }
  }
  return out;
}

} // namespace nlres
