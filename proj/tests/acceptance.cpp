// Acceptance run: one PASS/FAIL line per criterion. With no argument every
// criterion runs; otherwise only those named (AC1 ... AC7).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nlres/codim2.hpp"
#include "nlres/errors.hpp"
#include "nlres/ode.hpp"
#include "nlres/orbit.hpp"
#include "nlres/sweep.hpp"
#include "oracles.hpp"

using namespace nlres;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

ModelParams duffing(double A, double omega, double gamma = 0.01) {
  return {Model::Duffing, A, omega, gamma};
}

std::vector<const BifurcationPoint*> of_kind(const Branch& b, BifurcationKind k) {
  std::vector<const BifurcationPoint*> out;
  for (const auto& f : b.bifurcations)
    if (f.kind == k) out.push_back(&f);
  return out;
}

std::pair<double, double> omega_span(const Branch& b) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& p : b.points) {
    lo = std::min(lo, p.orbit.params.omega);
    hi = std::max(hi, p.orbit.params.omega);
  }
  return {lo, hi};
}

// Omega values where the curve crosses the level A, by linear interpolation.
std::vector<double> crossings(const TongueCurve& t, double A) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
    const auto& a = t.points[i].orbit.params;
    const auto& b = t.points[i + 1].orbit.params;
    if ((a.A < A) != (b.A < A))
      out.push_back(a.omega + (A - a.A) / (b.A - a.A) * (b.omega - a.omega));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double min_A(const TongueCurve& t) { return t.points[t.lowest()].orbit.params.A; }

// Symmetric small-forcing branch carried up to A at omega_seed and continued
// in omega.
Branch primary_branch(double A, double gamma, double omega_seed, double lo, double hi) {
  const PeriodicOrbit small = refine_orbit(duffing(0.05, omega_seed, gamma), {0.0, 0.0}, 1);
  return continue_branch(continue_to(small, Param::A, A), Param::Omega, lo, hi);
}

// Both symmetry-broken branches of every pitchfork on a symmetric branch.
std::vector<Branch> switched_branches(const Branch& b, double lo, double hi) {
  std::vector<Branch> out;
  for (const auto* f : of_kind(b, BifurcationKind::Pitchfork)) {
    if (f->from_asymmetric) continue;
    const auto [s1, s2] = switch_branch(*f);
    out.push_back(continue_switched(*f, s1, lo, hi));
    out.push_back(continue_switched(*f, s2, lo, hi));
  }
  return out;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string list(const std::vector<double>& v, const char* f = "%.4f") {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(f, v[i]);
  return s + "]";
}

// ---------------------------------------------------------------------------

Verdict ac1() {
  const double lo = 0.8, hi = 1.6, A = 0.05;
  std::vector<PeriodicOrbit> seeds{refine_orbit(duffing(A, lo), {0.0, 0.0}, 1)};
  for (const OscState& s : oracle::multistart_orbits(duffing(A, hi), 1, 2.5, 11))
    seeds.push_back(refine_orbit(duffing(A, hi), s, 1));

  std::vector<Branch> branches;
  for (const auto& s : seeds) {
    const bool known = std::any_of(branches.begin(), branches.end(), [&](const Branch& b) {
      return branch_contains(b, s, 1e-6, 1.0);
    });
    if (!known) branches.push_back(continue_branch(s, Param::Omega, lo, hi));
  }
  std::vector<double> folds;
  const Branch* on = nullptr;
  for (const auto& b : branches)
    for (const auto* f : of_kind(b, BifurcationKind::SaddleNode)) {
      folds.push_back(f->params_at.omega);
      on = &b;
    }
  std::sort(folds.begin(), folds.end());

  bool unstable_between = false;
  if (folds.size() == 2 && on && on->count(BifurcationKind::SaddleNode) == 2) {
    const auto sn = of_kind(*on, BifurcationKind::SaddleNode);
    const double a = sn[0]->arclength_bracket.second, b = sn[1]->arclength_bracket.first;
    int inner = 0;
    unstable_between = true;
    for (const auto& p : on->points)
      if (p.arclength > a + 1e-9 && p.arclength < b - 1e-9) {
        ++inner;
        unstable_between = unstable_between && p.orbit.stability == Stability::Unstable;
      }
    unstable_between = unstable_between && inner > 0;
  }

  // Coexisting stable responses from a grid of initial states, midway through
  // the bistable interval (or from the one fold to the window end).
  const double w = folds.empty() ? 0.5 * (lo + hi)
                                 : 0.5 * (folds.front() + (folds.size() > 1 ? folds[1] : hi));
  std::vector<PeriodicOrbit> stable;
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0})
    for (double v : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      const CellResult c = classify_attractor(duffing(A, w), {x, v});
      if (!c.periodic(1)) continue;
      const PeriodicOrbit o = refine_orbit(duffing(A, w), c.strobe, 1);
      if (o.stability != Stability::Stable) continue;
      const bool seen = std::any_of(stable.begin(), stable.end(),
                                    [&](const PeriodicOrbit& q) { return (q.s0 - o.s0).norm() < 1e-6; });
      if (!seen) stable.push_back(o);
    }
  double spread = 0.0;
  for (const auto& a : stable)
    for (const auto& b : stable) spread = std::max(spread, std::abs(a.x_max - b.x_max));

  std::vector<double> wide;
  const Branch full =
      continue_branch(refine_orbit(duffing(A, 3.0), {0.0, 0.0}, 1), Param::Omega, lo, 3.0);
  for (const auto* f : of_kind(full, BifurcationKind::SaddleNode)) wide.push_back(f->params_at.omega);
  std::sort(wide.begin(), wide.end());

  Verdict r;
  r.pass = folds.size() == 2 && unstable_between && stable.size() >= 2 && spread > 0.1;
  r.detail = fmt("SN in [0.8, 1.6]: %zu at ", folds.size()) + list(folds) +
             fmt(" (need 2); unstable segment between: %s; stable orbits at omega=%.4f: %zu, "
                 "x_max spread %.4f (need > 0.1); diagnostic SN on [0.8, 3.0]: ",
                 unstable_between ? "yes" : "no", w, stable.size(), spread) +
             list(wide);
  return r;
}

Verdict ac2() {
  const Branch main = continue_branch(refine_orbit(duffing(0.05, 3.0), {0.0, 0.0}, 1),
                                      Param::Omega, 0.8, 3.0);
  const Range a_main{1e-4, 0.2};
  const TongueCurve t = continue_fold_2p(main.bifurcations.at(0), Param::Omega, Param::A,
                                         {0.5, 3.5}, a_main);
  std::vector<double> cusp_A;
  for (std::size_t i : t.cusps) cusp_A.push_back(t.points[i].orbit.params.A);
  const bool cusp_ok = !cusp_A.empty() && std::all_of(cusp_A.begin(), cusp_A.end(), [&](double a) {
    return a > a_main.lo;
  });

  const double gamma = 0.01;
  const double w0 = oracle::free_cycle_frequency(gamma);
  const SyncTongue s =
      sync_tongue({Model::DuffingVanDerPol, 2.0, 1.0, gamma}, {0.5, 4.0}, {1e-5, 2.0});
  const std::size_t sync_cusps = s.left.cusps.size() + s.right.cusps.size();
  const double off = std::abs(s.tip_omega - w0);

  Verdict r;
  r.pass = cusp_ok && sync_cusps == 0 && s.tip_A < 0.01 && off < 1e-3;
  r.detail = fmt("Duffing main tongue cusps at A = ", 0) + list(cusp_A, "%.5g") +
             fmt("; sync tongue cusps %zu, tip A %.3g (need < 0.01), tip omega %.6f vs "
                 "free-running %.6f (|diff| %.2g, need < 1e-3)",
                 sync_cusps, s.tip_A, s.tip_omega, w0, off);
  return r;
}

Verdict ac3() {
  const Branch b = primary_branch(3.0, 0.01, 1.2, 0.15, 1.2);
  const auto sn = of_kind(b, BifurcationKind::SaddleNode);
  const auto pf = of_kind(b, BifurcationKind::Pitchfork);

  bool paired = true;
  for (std::size_t i = 0; i + 1 < b.bifurcations.size(); i += 2)
    paired = paired && b.bifurcations[i].kind == b.bifurcations[i + 1].kind;
  paired = paired && b.bifurcations.size() % 2 == 0;
  std::vector<double> sn_w;
  bool odd = true;
  for (const auto* f : sn) {
    sn_w.push_back(f->orbit_at.winding);
    odd = odd && f->orbit_at.winding % 2 == 1;
  }
  const bool sn_ok = sn.size() >= 2 && sn.size() % 2 == 0 && odd;
  const bool pf_ok = pf.size() >= 6 && pf.size() % 2 == 0 &&
                     std::none_of(pf.begin(), pf.end(), [](auto* f) { return f->from_asymmetric; });

  bool winding_ok = true;
  std::string windings;
  for (auto [omega, k] : {std::pair{0.7, 3}, {0.4, 5}}) {
    const PeriodicOrbit small = refine_orbit(duffing(0.05, 1.2), {0.0, 0.0}, 1);
    const PeriodicOrbit o =
        continue_to(continue_to(small, Param::A, 3.0), Param::Omega, omega);
    const int events = oracle::count_maxima_by_events(o.params, o.s0, o.period());
    winding_ok = winding_ok && o.winding == k && events == k;
    windings += fmt(" %.1f->%d (events %d)", omega, o.winding, events);
  }

  // Symmetry-broken pair spanning omega = 1.
  std::vector<const BifurcationPoint*> order(pf.begin(), pf.end());
  std::sort(order.begin(), order.end(), [](auto* a, auto* c) {
    return std::abs(a->params_at.omega - 1.0) < std::abs(c->params_at.omega - 1.0);
  });
  bool mirror_ok = false;
  std::string pair_detail = "no switched branch spans omega = 1";
  for (const auto* f : order) {
    const auto [s1, s2] = switch_branch(*f);
    const Branch b1 = continue_switched(*f, s1, 0.15, 1.2);
    const Branch b2 = continue_switched(*f, s2, 0.15, 1.2);
    const auto span = omega_span(b1);
    if (!(span.first < 1.0 && span.second > 1.0)) continue;
    const PeriodicOrbit a1 = continue_to(s1, Param::Omega, 1.0);
    const PeriodicOrbit a2 = continue_to(s2, Param::Omega, 1.0);
    PeriodicOrbit img = a1;
    img.s0 = mirror(a1.params, a1.s0);
    const double gap = (img.s0 - a2.s0).norm();
    const bool on_other = branch_contains(b2, img, 1e-6, 1.05) || branch_contains(b1, img, 1e-6, 1.05);
    const bool off_primary = !branch_contains(b, a1, 1e-3, 1.05);
    mirror_ok = !a1.symmetric && !a2.symmetric && gap < 1e-7 && on_other && off_primary &&
                std::abs(a1.x_max - a2.x_max) < 1e-7 &&
                std::abs(a1.multipliers[0] - a2.multipliers[0]) < 1e-7;
    pair_detail = fmt("pitchfork at %.4f: asymmetric %d/%d, |mirror(s1) - s2| = %.2g, x_max "
                      "%.5f/%.5f",
                      f->params_at.omega, !a1.symmetric, !a2.symmetric, gap, a1.x_max, a2.x_max);
    break;
  }

  Verdict r;
  r.pass = sn_ok && pf_ok && paired && winding_ok && mirror_ok;
  r.detail = fmt("SN %zu (windings ", sn.size()) + list(sn_w, "%.0f") +
             fmt("), PF %zu, adjacent pairs: %s; winding", pf.size(), paired ? "yes" : "no") +
             windings + "; " + pair_detail;
  return r;
}

Verdict ac4() {
  const Branch prim = primary_branch(3.0, 0.01, 1.2, 0.15, 1.2);
  const std::vector<Branch> broken = switched_branches(prim, 0.15, 1.2);
  std::vector<IsolaSeed> seeds;
  std::string cls;
  bool classified = true;
  for (double w : {0.82, 0.2988}) {
    const CellResult c = classify_attractor(duffing(3.0, w), {0.0, 0.0});
    classified = classified && c.periodic(3);
    cls += fmt(" %.4f: %s n=%d;", w, std::string(to_string(c.cls)).c_str(), c.n);
    if (c.cls == AttractorClass::Periodic) seeds.push_back({w, c.strobe, c.n});
  }
  std::vector<Branch> known{prim};
  known.insert(known.end(), broken.begin(), broken.end());
  const IsolaSearch iso = find_isolas(duffing(3.0, 1.0), 0.15, 1.2, seeds, {}, known);
  bool closed = iso.branches.size() == 2;
  double dmin = INFINITY;
  for (const Branch& b : iso.branches) {
    closed = closed && b.closed;
    for (const Branch& k : known) dmin = std::min(dmin, min_distance_at_equal_param(b, k));
  }
  Verdict r;
  r.pass = classified && closed && dmin > 1e-3;
  r.detail = "sweep cells" + cls +
             fmt(" isolas %zu, closed: %s; min distance to primary and %zu broken branches "
                 "%.4g (need > 1e-3)",
                 iso.branches.size(), closed ? "yes" : "no", broken.size(), dmin);
  return r;
}

Verdict ac5() {
  SweepSpec spec;
  spec.base = duffing(0.0, 1.0);
  spec.omega = {0.15, 1.2, 200};
  spec.A = {0.0, 6.0, 120};
  const Raster raster = scan(spec);
  const auto p3 = [](const CellResult& c) { return c.periodic(3); };
  auto seeds = harvest_seeds(raster, p3);
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](auto& a, auto& b) { return a.region_size > b.region_size; });

  const int nw = spec.omega.count, na = spec.A.count;
  std::vector<TongueCurve> tongues;
  std::vector<char> inside(static_cast<std::size_t>(nw) * na, 0);
  const auto refresh = [&] {
    for (int ia = 0; ia < na; ++ia) {
      const double A = spec.A.at(ia);
      for (const auto& t : tongues) {
        const auto c = crossings(t, A);
        for (std::size_t k = 0; k + 1 < c.size(); k += 2)
          for (int io = 0; io < nw; ++io) {
            const double w = spec.omega.at(io);
            if (w >= c[k] && w <= c[k + 1]) inside[ia * nw + io] = 1;
          }
      }
    }
  };
  const auto covered = [&](double w, double A) {
    return std::any_of(tongues.begin(), tongues.end(), [&](const TongueCurve& t) {
      const auto c = crossings(t, A);
      for (std::size_t k = 0; k + 1 < c.size(); k += 2)
        if (w >= c[k] - 1e-6 && w <= c[k + 1] + 1e-6) return true;
      return false;
    });
  };

  int failures = 0;
  for (const auto& s : seeds) {
    const int io = static_cast<int>(std::lround((s.omega - spec.omega.lo) /
                                                (spec.omega.hi - spec.omega.lo) * (nw - 1)));
    const int ia = static_cast<int>(std::lround((s.A - spec.A.lo) / (spec.A.hi - spec.A.lo) * (na - 1)));
    if (inside[ia * nw + io]) continue;
    try {
      const IsolaSearch iso = find_isolas(duffing(s.A, s.omega), 0.15, 1.2, {s.isola()});
      for (const Branch& b : iso.branches)
        for (const auto* f : of_kind(b, BifurcationKind::SaddleNode)) {
          if (covered(f->params_at.omega, f->params_at.A)) continue;
          tongues.push_back(continue_fold_2p(*f, Param::Omega, Param::A, {0.1, 1.3}, {1e-3, 8.0},
                                             {}, TongueKind::FoldIsola));
        }
    } catch (const NumericalError&) {
      ++failures;
    }
    refresh();
  }

  int total = 0, in = 0, far = 0;
  for (int ia = 0; ia < na; ++ia)
    for (int io = 0; io < nw; ++io) {
      if (!raster.at(io, ia).periodic(3)) continue;
      ++total;
      if (inside[ia * nw + io]) {
        ++in;
        continue;
      }
      bool near = false;
      for (int da = -2; da <= 2 && !near; ++da)
        for (int dw = -2; dw <= 2 && !near; ++dw) {
          const int ja = ia + da, jw = io + dw;
          near = ja >= 0 && ja < na && jw >= 0 && jw < nw && inside[ja * nw + jw];
        }
      far += !near;
    }
  const double frac = total ? double(in) / total : 0.0;
  const auto union_cells = std::count(inside.begin(), inside.end(), 1);
  Verdict r;
  r.pass = total > 0 && frac >= 0.95 && far == 0;
  r.detail = fmt("period-3 cells %d, inside the isola fold tongues %d (%.1f%%, need >= 95%%), "
                 "more than 2 cells outside %d (need 0); %zu regions, %zu tongues covering %ld of "
                 "%d cells, %d seed failures",
                 total, in, 100.0 * frac, far, seeds.size(), tongues.size(),
                 static_cast<long>(union_cells), nw * na, failures);
  return r;
}

Verdict ac6() {
  // Isola tongues at gamma = 0.01; the one opening at the lowest forcing is
  // carried to gamma = 0.2.
  const Range om{0.1, 4.0}, amp{1e-3, 60.0};
  std::optional<TongueCurve> largest;
  for (double w : {0.82, 0.2988}) {
    const ModelParams p = duffing(3.0, w);
    const IsolaSearch iso = find_isolas(p, 0.15, 1.2, {{w, oracle::settle(p, {0.0, 0.0}, 1020), 3}});
    if (iso.branches.empty() || iso.branches[0].bifurcations.empty()) continue;
    TongueCurve t = continue_fold_2p(iso.branches[0].bifurcations[0], Param::Omega, Param::A, om,
                                     amp, {}, TongueKind::FoldIsola);
    if (!largest || min_A(t) < min_A(*largest)) largest = std::move(t);
  }
  if (!largest) return {false, "no isola tongue at gamma = 0.01"};
  const auto stages = continue_tongue_in_gamma(*largest, {0.05, 0.1, 0.15, 0.2}, om, amp);
  const TongueCurve& top = stages.back().tongue;
  const std::size_t features = top.cusps.size() + tongue_tips(top).size();
  std::vector<double> mins{min_A(*largest)};
  for (const auto& s : stages) mins.push_back(min_A(s.tongue));
  const bool lifted = stages.back().gamma == 0.2 && min_A(top) > min_A(*largest);

  // Period-3 components at gamma = 0.2, A = 25.
  const double g = 0.2, A = 25.0, lo = 1.15, hi = 1.7;
  const auto settled = [&](double w, OscState s) {
    const ModelParams p = duffing(A, w, g);
    return refine_orbit(p, oracle::settle(p, s, 400), 3);
  };
  const Branch right = continue_branch(settled(1.595, {-5.0, 5.0}), Param::Omega, lo, hi);
  const bool right_ok = right.closed && right.count(BifurcationKind::Pitchfork) == 0 &&
                        right.count(BifurcationKind::PeriodDoubling) == 0;

  const PeriodicOrbit left_seed = settled(1.37, {0.0, 0.0});
  const Branch left = continue_branch(left_seed, Param::Omega, lo, hi);
  std::vector<double> left_pd, prim_pd;
  for (const Branch& b : switched_branches(left, lo, hi))
    for (const auto* f : of_kind(b, BifurcationKind::PeriodDoubling)) left_pd.push_back(f->params_at.omega);
  const Branch prim = primary_branch(A, g, hi, lo, hi);
  for (const Branch& b : switched_branches(prim, lo, hi))
    for (const auto* f : of_kind(b, BifurcationKind::PeriodDoubling)) prim_pd.push_back(f->params_at.omega);
  std::sort(left_pd.begin(), left_pd.end());
  std::sort(prim_pd.begin(), prim_pd.end());

  // Between the facing period doublings of the two cascades the attractor
  // reached from rest is not periodic.
  double gap_lo = NAN, gap_hi = NAN;
  for (double p : prim_pd)
    for (double l : left_pd)
      if (p < l && (std::isnan(gap_lo) || l - p < gap_hi - gap_lo)) {
        gap_lo = p;
        gap_hi = l;
      }
  int nonperiodic = 0;
  if (!std::isnan(gap_lo))
    for (int k = 1; k <= 9; ++k) {
      const double w = gap_lo + (gap_hi - gap_lo) * k / 10.0;
      nonperiodic += classify_attractor(duffing(A, w, g), {0.0, 0.0}).cls != AttractorClass::Periodic;
    }
  const bool left_ok = left_seed.symmetric && left.count(BifurcationKind::Pitchfork) >= 1 &&
                       !left_pd.empty() && prim.count(BifurcationKind::Pitchfork) >= 1 &&
                       !prim_pd.empty() && nonperiodic > 0;

  Verdict r;
  r.pass = lifted && features >= 2 && right_ok && left_ok;
  r.detail = "isola tongue min A per stage " + list(mins, "%.3f") +
             fmt(", cusps %zu + tips %zu at gamma 0.2; right component omega [%.4f, %.4f] "
                 "closed %d, PF %zu, PD %zu; left component PF %zu, switched PD ",
                 top.cusps.size(), tongue_tips(top).size(), omega_span(right).first,
                 omega_span(right).second, right.closed, right.count(BifurcationKind::Pitchfork),
                 right.count(BifurcationKind::PeriodDoubling), left.count(BifurcationKind::Pitchfork)) +
             list(left_pd) + fmt("; primary PF %zu, switched PD ", prim.count(BifurcationKind::Pitchfork)) +
             list(prim_pd) + fmt("; non-periodic cells between %.4f and %.4f: %d/9", gap_lo, gap_hi,
                                 nonperiodic);
  return r;
}

Verdict ac7() {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> failed;

  // Liouville along n forcing periods, directly and through refined orbits.
  double det_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams p = duffing(5.0 * u(rng), 0.3 + 1.5 * u(rng), 0.2 * u(rng));
    const int n = 1 + static_cast<int>(3 * u(rng));
    const auto v = integrate_with_variations(p, {4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0}, 0.0,
                                             n * p.forcing_period());
    const double expect = std::exp(-p.gamma * n * p.forcing_period());
    det_err = std::max(det_err, std::abs(v.M.determinant() - expect) / expect);
  }
  for (double w : {0.6, 1.5, 2.5}) {
    const PeriodicOrbit o = refine_orbit(duffing(0.3, w, 0.05), {0.0, 0.0}, 1);
    const double expect = std::exp(-o.params.gamma * o.period());
    det_err = std::max(det_err, std::abs(o.monodromy.determinant() - expect) / expect);
  }
  if (!(det_err <= 1e-6)) failed.push_back(fmt("det %.2g", det_err));

  double period_err = 0.0;
  for (double xm : {0.5, 1.0, 2.0, 5.0})
    period_err = std::max(period_err, std::abs(natural_period(xm) - oracle::return_time(xm)) /
                                          oracle::return_time(xm));
  if (!(period_err <= 1e-8)) failed.push_back(fmt("natural period %.2g", period_err));

  // Energy drift per natural period elapsed, relative to the initial energy.
  const Tolerances tol{};
  double drift = 0.0;
  for (double xm : {0.5, 1.0, 2.0}) {
    const double T = natural_period(xm);
    const double E0 = energy({xm, 0.0});
    const Trajectory tr =
        sample_trajectory(duffing(0.0, 1.0, 0.0), {xm, 0.0}, 0.0, 100.0 * T, 2000, true, tol);
    for (const auto& ts : tr.samples)
      drift = std::max(drift, std::abs(energy(ts.s) - E0) / (E0 * std::max(1.0, ts.t / T)));
  }
  if (!(drift <= 10 * tol.rel)) failed.push_back(fmt("energy %.2g", drift));

  // The flip applied twice is one forcing period; symmetric orbits are fixed
  // by it.
  double mirror_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams p = duffing(4.0 * u(rng), 0.3 + 1.5 * u(rng), 0.1 * u(rng));
    const OscState s{4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0};
    const OscState twice = mirror(p, mirror(p, s));
    mirror_err = std::max(mirror_err, (twice - stroboscopic_map(p, s, 1)).norm() / (1.0 + s.norm()));
  }
  for (double w : {0.6, 1.5}) {
    const PeriodicOrbit o = refine_orbit(duffing(0.3, w), {0.0, 0.0}, 1);
    mirror_err = std::max(mirror_err, (mirror(o.params, o.s0) - o.s0).norm());
  }
  if (!(mirror_err <= 1e-8)) failed.push_back(fmt("mirror %.2g", mirror_err));

  // Bitwise equal rasters for different thread counts.
  SweepSpec spec;
  spec.base = duffing(0.0, 1.0);
  spec.omega = {0.3, 1.1, 5};
  spec.A = {1.0, 4.0, 3};
  const Raster r1 = scan(spec, 1), r3 = scan(spec, 3);
  bool same = r1.cells.size() == r3.cells.size();
  for (std::size_t i = 0; same && i < r1.cells.size(); ++i) {
    const CellResult &a = r1.cells[i], &b = r3.cells[i];
    same = a.cls == b.cls && a.n == b.n && a.transient_used == b.transient_used &&
           std::memcmp(&a.strobe, &b.strobe, sizeof a.strobe) == 0 &&
           std::memcmp(&a.x_max, &b.x_max, sizeof a.x_max) == 0;
  }
  if (!same) failed.push_back("sweep not bitwise reproducible");

  double fd_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Model m = trial % 2 ? Model::DuffingVanDerPol : Model::Duffing;
    const ModelParams p{m, 4.0 * u(rng), 0.4 + u(rng), 0.01 + 0.1 * u(rng)};
    const OscState s{2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0};
    const double t1 = p.forcing_period();
    const Eigen::Matrix2d M = integrate_with_variations(p, s, 0.0, t1).M;
    fd_err = std::max(fd_err, (M - oracle::fd_fundamental(p, s, 0.0, t1, 1e-6)).cwiseAbs().maxCoeff());
  }
  if (!(fd_err <= 1e-5)) failed.push_back(fmt("variational vs FD %.2g", fd_err));

  Verdict r;
  r.pass = failed.empty();
  r.detail = fmt("det rel err %.2g (<= 1e-6), natural period rel err %.2g (<= 1e-8), energy drift "
                 "%.2g per period (<= %.0g), mirror closure %.2g, sweep bitwise %s, variational "
                 "vs FD %.2g (<= 1e-5)",
                 det_err, period_err, drift, 10 * tol.rel, mirror_err, same ? "yes" : "no", fd_err);
  return r;
}

} // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<Verdict()>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},
      {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  if (wanted.empty())
    for (const auto& [name, fn] : criteria) wanted.push_back(name);
  int failures = 0;
  for (const auto& name : wanted) {
    const auto it = criteria.find(name);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", name.c_str());
      return 2;
    }
    Verdict v;
    try {
      v = it->second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures ? 1 : 0;
}
