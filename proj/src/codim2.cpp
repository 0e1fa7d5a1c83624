#include "nlres/codim2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "nlres/errors.hpp"
#include "nlres/flow_map.hpp"
#include "nlres/ode.hpp"

namespace nlres {

std::string_view to_string(TongueKind k) {
  switch (k) {
  case TongueKind::FoldOdd: return "fold-odd";
  case TongueKind::PitchforkEven: return "pitchfork-even";
  case TongueKind::FoldBroken: return "fold-broken";
  case TongueKind::FoldIsola: return "fold-isola";
  case TongueKind::FoldSync: return "fold-sync";
  }
  return "?";
}

std::size_t TongueCurve::lowest() const {
  if (points.empty()) throw InvalidArgument("empty tongue curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].orbit.params.get(second) < points[best].orbit.params.get(second)) best = i;
  return best;
}

namespace {

using P6 = Palc<5>;

struct FoldSystem {
  ModelParams base;
  Param p1, p2;
  MapSpec spec;
  double sigma; // eigenvalue of DG pinned by the extended system
  OrbitOptions orbit;

  ModelParams at(const P6::Vec& w) const { return base.with(p1, w(4)).with(p2, w(5)); }

  P6::Eval eval(const P6::Vec& w) const {
    const OscState s{w(0), w(1)};
    const Eigen::Vector2d q = w.segment<2>(2);
    const MapJet jet = evaluate_map(at(w), s, spec, {{p1, p2}, q}, orbit.tol);
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    P6::Eval e;
    e.F.head<2>() = jet.residual(s);
    e.F.segment<2>(2) = jet.D * q - sigma * q;
    e.F(4) = q.squaredNorm() - 1.0;
    e.J.setZero();
    e.J.block<2, 2>(0, 0) = jet.D - I;
    e.J.block<2, 1>(0, 4) = jet.dparam[0];
    e.J.block<2, 1>(0, 5) = jet.dparam[1];
    e.J.block<2, 2>(2, 0) = jet.dDq_ds;
    e.J.block<2, 2>(2, 2) = jet.D - sigma * I;
    e.J.block<2, 1>(2, 4) = jet.dDq_dparam[0];
    e.J.block<2, 1>(2, 5) = jet.dDq_dparam[1];
    e.J.block<1, 2>(4, 2) = 2.0 * q.transpose();
    return e;
  }

  P6 palc() const {
    return P6([this](const P6::Vec& w) { return eval(w); });
  }

  TonguePoint point(const P6::Node& node) const {
    const ModelParams p = at(node.u);
    const OscState s{node.u(0), node.u(1)};
    const Eigen::Matrix2d D = node.e.J.block<2, 2>(0, 0) + Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d M = spec.half ? Eigen::Matrix2d(D * D) : D;
    const double residual =
        spec.half ? (map_value(p, s, {spec.n, false}, orbit.tol) - s).norm()
                  : node.e.F.head<2>().norm();
    TonguePoint tp;
    tp.orbit = assemble_orbit(p, s, spec.n, M, residual, spec.half, orbit);
    if (!spec.half) tp.orbit.symmetric = classify_symmetry(tp.orbit, orbit);
    tp.q = node.u.segment<2>(2);
    tp.arclength = node.s;
    tp.tangent = node.t;
    return tp;
  }
};

Eigen::Vector2d projected(const P6::Vec& t) { return t.tail<2>(); }

// Zero of the first-parameter tangent component between two nodes, by
// bisection along the secant, to `tol` in arclength.
std::optional<P6::Node> locate_cusp(const P6& palc, const P6::Node& a, const P6::Node& b,
                                    const TongueOptions& opt) {
  const P6::Vec chord = b.u - a.u;
  const double L = chord.norm();
  const P6::Vec d = chord / L;
  const int comp = std::signbit(a.t(4)) != std::signbit(b.t(4)) ? 4 : 5;
  double lo = 0.0, hi = L;
  const bool neg_lo = std::signbit(a.t(comp));
  std::optional<P6::Node> best;
  while (hi - lo > opt.cusp_tol) {
    const double mid = 0.5 * (lo + hi);
    auto c = palc.correct(a.u + mid * d, d, d.dot(a.u) + mid, opt.corrector);
    if (!c) return best;
    c->t = P6::tangent(c->e.J, a.t);
    c->s = a.s + mid;
    if (std::signbit(c->t(comp)) == neg_lo)
      lo = mid;
    else
      hi = mid;
    best = c;
  }
  return best;
}

struct Direction {
  P6::Trace trace;
  std::vector<P6::Node> cusps;
};

Direction trace_direction(const P6& palc, const P6::Node& start, Range r1, Range r2,
                          const TongueOptions& opt) {
  P6::Settings st;
  st.step = opt.step;
  st.corrector = opt.corrector;
  st.bounds = {{4, r1.lo, r1.hi}, {5, r2.lo, r2.hi}};
  st.max_points = opt.max_points;
  st.closure_tol = opt.closure_tol;
  st.closure_min_steps = opt.closure_min_steps;
  st.min_cos = opt.min_cos;
  Direction out;
  auto observer = [&](const P6::Node& prev, P6::Node& cur) {
    if (projected(prev.t).dot(projected(cur.t)) < 0.0)
      if (auto c = locate_cusp(palc, prev, cur, opt)) out.cusps.push_back(*c);
    return true;
  };
  out.trace = palc.trace(start, st, observer);
  return out;
}

TongueCurve trace_locus(const BifurcationPoint& start, double sigma, Param first, Param second,
                        Range r1, Range r2, const TongueOptions& opt, TongueKind kind) {
  if (first == second) throw InvalidArgument("the two continuation parameters must differ");
  if (!(r1.lo < r1.hi) || !(r2.lo < r2.hi)) throw InvalidArgument("empty parameter range");
  const PeriodicOrbit& o = start.orbit_at;
  const bool half = start.half_map || start.from_asymmetric;
  const FoldSystem sys{o.params, first, second, {o.n, half}, sigma, opt.orbit};
  const P6 palc = sys.palc();

  P6::Vec w0;
  w0 << o.s0.x, o.s0.v, start.null_vector.normalized(), o.params.get(first),
      o.params.get(second);
  if (w0(4) < r1.lo || w0(4) > r1.hi || w0(5) < r2.lo || w0(5) > r2.hi)
    throw InvalidArgument("start point lies outside the parameter ranges");
  P6::Vec fix = P6::Vec::Zero();
  fix(5) = 1.0;
  auto c = palc.correct(w0, fix, w0(5), opt.corrector);
  if (!c) {
    fix.setZero();
    fix(4) = 1.0;
    c = palc.correct(w0, fix, w0(4), opt.corrector);
  }
  if (!c)
    throw LostFoldCondition("extended system does not converge at the start point (" +
                            std::string(to_string(first)) + " = " + std::to_string(w0(4)) +
                            ", " + std::string(to_string(second)) + " = " +
                            std::to_string(w0(5)) + ")");
  P6::Vec hint = P6::Vec::Zero();
  hint(5) = 1.0;
  auto first_node = palc.start(c->u, hint);
  if (!first_node) throw LostFoldCondition("cannot evaluate the corrected start point");

  Direction fwd = trace_direction(palc, *first_node, r1, r2, opt);
  Direction bwd;
  bwd.trace.end = Termination::Closed;
  if (fwd.trace.end != Termination::Closed) {
    P6::Node back = *first_node;
    back.t = -back.t;
    bwd = trace_direction(palc, back, r1, r2, opt);
  }
  std::vector<P6::Node> nodes;
  const double S = P6::merge(bwd.trace, *first_node, fwd.trace, nodes);
  for (P6::Node n : bwd.cusps) {
    n.t = -n.t;
    n.s = S - n.s;
    nodes.push_back(n);
  }
  for (P6::Node n : fwd.cusps) {
    n.s += S;
    nodes.push_back(n);
  }
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const P6::Node& a, const P6::Node& b) { return a.s < b.s; });

  TongueCurve curve;
  curve.kind = kind;
  curve.first = first;
  curve.second = second;
  curve.n = o.n;
  curve.half_map = half;
  curve.closed = fwd.trace.end == Termination::Closed;
  curve.ends = {bwd.trace.end, fwd.trace.end};
  curve.points.reserve(nodes.size());
  for (const auto& n : nodes) curve.points.push_back(sys.point(n));
  curve.cusps = detect_cusps(curve);
  curve.label = curve.points[curve.lowest()].orbit.label();
  // A pitchfork tongue lies between the odd resonances k and k + 2 of the
  // symmetric branch and carries the even label k + 1.
  if (sigma < 0.0) ++curve.label.k;
  return curve;
}

} // namespace

TongueCurve continue_fold_2p(const BifurcationPoint& start, Param first, Param second,
                             Range r1, Range r2, const TongueOptions& opt, TongueKind kind) {
  if (start.kind != BifurcationKind::SaddleNode)
    throw NotApplicable("fold continuation needs a saddle-node start point");
  return trace_locus(start, 1.0, first, second, r1, r2, opt, kind);
}

TongueCurve continue_pitchfork_2p(const BifurcationPoint& start, Param first, Param second,
                                  Range r1, Range r2, const TongueOptions& opt,
                                  TongueKind kind) {
  if (start.kind != BifurcationKind::Pitchfork || !(start.half_map || start.from_asymmetric))
    throw NotApplicable("pitchfork continuation needs a pitchfork of a symmetric branch");
  return trace_locus(start, -1.0, first, second, r1, r2, opt, kind);
}

std::vector<std::size_t> detect_cusps(const TongueCurve& t) {
  const std::size_t m = t.points.size();
  std::vector<std::size_t> out;
  if (m < 3) return out;
  auto param = [&](std::size_t i) {
    const auto& p = t.points[i].orbit.params;
    return Eigen::Vector2d(p.get(t.first), p.get(t.second));
  };
  auto dir = [&](std::size_t i) -> Eigen::Vector2d {
    const Eigen::Vector2d d = t.points[i].tangent.tail<2>();
    if (t.points[i].tangent.norm() > 0.0) return d;
    return param(std::min(i + 1, m - 1)) - param(i == 0 ? 0 : i - 1);
  };
  constexpr double tiny = 1e-4;
  // Compare each direction with the previous one that is not tiny; the cusp
  // index is the point of least projected speed in between.
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::Vector2d d = dir(i);
    if (d.norm() < tiny) continue;
    if (last && dir(*last).dot(d) < 0.0) {
      std::size_t best = *last;
      for (std::size_t k = *last; k <= i; ++k)
        if (dir(k).norm() < dir(best).norm()) best = k;
      if (best > 0 && best + 1 < m) out.push_back(best);
    }
    last = i;
  }
  return out;
}

std::vector<std::size_t> tongue_tips(const TongueCurve& t) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < t.points.size(); ++i) {
    const double a = t.points[i - 1].orbit.params.get(t.second);
    const double b = t.points[i].orbit.params.get(t.second);
    const double c = t.points[i + 1].orbit.params.get(t.second);
    if (b < a && b <= c) out.push_back(i);
  }
  return out;
}

BifurcationPoint as_start(const TongueCurve& t, std::size_t i) {
  const TonguePoint& tp = t.points.at(i);
  BifurcationPoint b;
  const bool fold = t.kind != TongueKind::PitchforkEven;
  b.kind = fold ? BifurcationKind::SaddleNode : BifurcationKind::Pitchfork;
  b.params_at = tp.orbit.params;
  b.orbit_at = tp.orbit;
  b.active = t.first;
  b.null_vector = tp.q;
  b.half_map = t.half_map;
  return b;
}

double limit_cycle_frequency(const ModelParams& p, Tolerances tol) {
  if (p.model != Model::DuffingVanDerPol)
    throw InvalidArgument("limit cycle frequency needs the Duffing-Van der Pol model");
  ModelParams free = p;
  free.A = 0.0;
  // Settle onto the cycle, then read the period between two maxima.
  OscState s{2.0, 0.0};
  double t = 0.0;
  for (int k = 0; k < 40; ++k) {
    s = integrate(free, s, t, t + 50.0, tol);
    t += 50.0;
  }
  auto m1 = next_maximum(free, s, t, t + 100.0, tol);
  if (!m1) throw NoConvergence("no oscillation on the unforced cycle");
  auto m2 = next_maximum(free, m1->s, m1->t, m1->t + 100.0, tol);
  if (!m2) throw NoConvergence("no oscillation on the unforced cycle");
  // Newton on the return to the maximum section: unknowns (x0, omega) with
  // v0 = 0, using the map over one "forcing" period 2 pi / omega at A = 0.
  double x0 = m2->s.x, omega = 2.0 * std::numbers::pi / (m2->t - m1->t);
  for (int it = 0; it < 30; ++it) {
    free.omega = omega;
    const MapJet jet = evaluate_map(free, {x0, 0.0}, {1, false}, {{Param::Omega}, {}}, tol);
    const Eigen::Vector2d r = jet.residual({x0, 0.0});
    if (r.norm() < 1e-12) return omega;
    Eigen::Matrix2d K;
    K.col(0) = jet.D.col(0) - Eigen::Vector2d(1.0, 0.0);
    K.col(1) = jet.dparam[0];
    const Eigen::Vector2d d = K.fullPivLu().solve(-r);
    x0 += d(0);
    omega += d(1);
    if (!std::isfinite(x0) || !(omega > 0.0)) break;
    if (d.norm() < 1e-14 * (1.0 + std::abs(omega))) return omega;
  }
  throw NoConvergence("limit cycle Newton iteration did not converge");
}

namespace {

double omega_at_A(const TongueCurve& c, double A) {
  // Linear interpolation at the first crossing of A from the low end.
  const std::size_t lo = c.lowest();
  for (std::size_t i = lo; i + 1 < c.points.size(); ++i) {
    const auto& a = c.points[i].orbit.params;
    const auto& b = c.points[i + 1].orbit.params;
    if ((a.A - A) * (b.A - A) <= 0.0 && a.A != b.A)
      return a.omega + (A - a.A) / (b.A - a.A) * (b.omega - a.omega);
  }
  for (std::size_t i = lo; i > 0; --i) {
    const auto& a = c.points[i].orbit.params;
    const auto& b = c.points[i - 1].orbit.params;
    if ((a.A - A) * (b.A - A) <= 0.0 && a.A != b.A)
      return a.omega + (A - a.A) / (b.A - a.A) * (b.omega - a.omega);
  }
  return c.points[lo].orbit.params.omega;
}

void order_by_decreasing_A(TongueCurve& c) {
  if (c.points.size() > 1 && c.points.front().orbit.params.A < c.points.back().orbit.params.A) {
    std::reverse(c.points.begin(), c.points.end());
    const double L = c.points.front().arclength;
    for (auto& p : c.points) {
      p.arclength = L - p.arclength;
      p.tangent = -p.tangent;
    }
    std::swap(c.ends[0], c.ends[1]);
    c.cusps = detect_cusps(c);
  }
}

// Keeps the part of a boundary (ordered by decreasing A) that rises
// monotonically from its lowest point; past the first maximum of A the fold
// curve no longer bounds the locking region.
void keep_tongue_part(TongueCurve& c) {
  const std::size_t tip = c.lowest();
  std::size_t top = tip;
  while (top > 0 && c.points[top - 1].orbit.params.A >= c.points[top].orbit.params.A) --top;
  if (top == 0 && tip + 1 == c.points.size()) return;
  c.points = std::vector<TonguePoint>(c.points.begin() + top, c.points.begin() + tip + 1);
  const double s0 = c.points.front().arclength;
  for (auto& p : c.points) p.arclength -= s0;
  c.cusps = detect_cusps(c);
  c.closed = false;
  if (top > 0) c.ends[0] = Termination::Stopped;
}

} // namespace

SyncTongue sync_tongue(const ModelParams& p, Range omega_range, Range a_range,
                       const TongueOptions& opt) {
  if (p.model != Model::DuffingVanDerPol)
    throw InvalidArgument("the synchronisation tongue needs the Duffing-Van der Pol model");
  p.validate();
  SyncTongue out;
  out.omega0 = limit_cycle_frequency(p, opt.orbit.tol);
  if (out.omega0 <= omega_range.lo || out.omega0 >= omega_range.hi)
    throw InvalidArgument("the free-running frequency lies outside the omega range");

  ContinuationOptions copt;
  copt.step = opt.step;
  copt.corrector = opt.corrector;
  copt.orbit = opt.orbit;
  // The locked branch at the centre of the tongue has folds on both sides of
  // the free-running frequency only for weak enough forcing; further up the
  // low side is bounded by torus bifurcations. Halve A until both folds exist.
  std::optional<BifurcationPoint> left, right;
  for (double A = p.A; A >= a_range.lo && !(left && right); A *= 0.5) {
    left.reset();
    right.reset();
    const ModelParams centre = p.with(Param::A, A).with(Param::Omega, out.omega0);
    const OscState settled = integrate(centre, {0.0, 0.0}, 0.0,
                                       1000 * centre.forcing_period(), opt.orbit.tol);
    PeriodicOrbit locked;
    Branch b;
    try {
      locked = refine_orbit(centre, settled, 1, opt.orbit);
      b = continue_branch(locked, Param::Omega, omega_range.lo, omega_range.hi, copt);
    } catch (const NumericalError&) {
      continue;
    }
    for (const auto& f : b.bifurcations) {
      if (f.kind != BifurcationKind::SaddleNode) continue;
      const double w = f.params_at.omega;
      if (w < out.omega0 && (!left || w > left->params_at.omega)) left = f;
      if (w > out.omega0 && (!right || w < right->params_at.omega)) right = f;
    }
    out.start_A = A;
  }
  if (!left || !right)
    throw NoConvergence("no forcing amplitude in range gives folds on both sides of the "
                        "free-running frequency");

  out.left = continue_fold_2p(*left, Param::Omega, Param::A, omega_range, a_range, opt,
                              TongueKind::FoldSync);
  out.right = continue_fold_2p(*right, Param::Omega, Param::A, omega_range, a_range, opt,
                               TongueKind::FoldSync);
  order_by_decreasing_A(out.left);
  order_by_decreasing_A(out.right);
  keep_tongue_part(out.left);
  keep_tongue_part(out.right);
  out.tip_A = std::max(out.left.points[out.left.lowest()].orbit.params.A,
                       out.right.points[out.right.lowest()].orbit.params.A);
  out.tip_omega = 0.5 * (omega_at_A(out.left, out.tip_A) + omega_at_A(out.right, out.tip_A));
  return out;
}

std::vector<GammaStage> continue_tongue_in_gamma(const TongueCurve& tongue,
                                                 const std::vector<double>& gammas,
                                                 Range omega_range, Range a_range,
                                                 const TongueOptions& opt) {
  if (tongue.first != Param::Omega || tongue.second != Param::A)
    throw InvalidArgument("gamma continuation needs a tongue traced in (omega, A)");
  if (tongue.points.empty()) throw InvalidArgument("empty tongue curve");
  auto continue2 = [&](const TongueCurve& from, std::size_t i, Param second, Range r2) {
    const BifurcationPoint b = as_start(from, i);
    return from.kind == TongueKind::PitchforkEven
               ? continue_pitchfork_2p(b, Param::Omega, second, omega_range, r2, opt, from.kind)
               : continue_fold_2p(b, Param::Omega, second, omega_range, r2, opt, from.kind);
  };

  std::vector<GammaStage> out;
  TongueCurve current = tongue;
  double g = tongue.points.front().orbit.params.gamma;
  for (const double target : gammas) {
    if (!(target > 0.0)) throw InvalidArgument("damping targets must be positive");
    while (g != target) {
      // Candidates: points at the highest A. Each one that reaches the target
      // is re-traced there; the re-traced tongue reaching lowest in A is kept,
      // since fold curves of neighbouring tongues can reconnect on the way.
      double top = -1.0;
      for (const auto& tp : current.points) top = std::max(top, tp.orbit.params.A);
      std::optional<GammaStage> stage;
      std::optional<std::pair<TongueCurve, std::size_t>> furthest;
      double best = g;
      for (std::size_t i = 0; i < current.points.size(); ++i) {
        if (current.points[i].orbit.params.A < top - 1e-9 * (1.0 + top)) continue;
        TongueCurve path;
        try {
          path = continue2(current, i, Param::Gamma, {std::min(g, target), std::max(g, target)});
        } catch (const NumericalError&) {
          continue;
        }
        std::optional<std::size_t> hit;
        for (std::size_t k = 0; k < path.points.size() && !hit; ++k) {
          const double gk = path.points[k].orbit.params.gamma;
          if (gk == target) hit = k;
          if (std::abs(gk - g) > std::abs(best - g)) {
            best = gk;
            furthest = {path, k};
          }
        }
        if (!hit) continue;
        try {
          TongueCurve t = continue2(path, *hit, Param::A, a_range);
          const auto minA = [](const TongueCurve& c) {
            return c.points[c.lowest()].orbit.params.A;
          };
          if (!stage || minA(t) < minA(stage->tongue)) stage = GammaStage{target, t, path};
        } catch (const NumericalError&) {
        }
      }
      if (stage) {
        current = stage->tongue;
        out.push_back(std::move(*stage));
        g = target;
      } else {
        if (!furthest || std::abs(best - g) < 1e-6 * (1.0 + std::abs(g)))
          throw NoConvergence("fold continuation in gamma stalls at gamma = " +
                              std::to_string(g));
        current = continue2(furthest->first, furthest->second, Param::A, a_range);
        g = best;
      }
    }
  }
  return out;
}

} // namespace nlres
