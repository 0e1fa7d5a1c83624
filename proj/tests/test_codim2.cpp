#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nlres/codim2.hpp"
#include "nlres/errors.hpp"
#include "nlres/ode.hpp"
#include "oracles.hpp"

using namespace nlres;

namespace {

ModelParams duffing(double A, double omega, double gamma = 0.01) {
  return {Model::Duffing, A, omega, gamma};
}

const Branch& main_resonance() {
  static const Branch b = [] {
    const PeriodicOrbit seed = refine_orbit(duffing(0.05, 3.0), {0.0, 0.0}, 1);
    return continue_branch(seed, Param::Omega, 0.8, 3.0);
  }();
  return b;
}

const TongueCurve& main_tongue() {
  static const TongueCurve t = continue_fold_2p(main_resonance().bifurcations.at(0),
                                                Param::Omega, Param::A, {0.5, 3.5}, {1e-4, 0.2});
  return t;
}

const Branch& primary() {
  static const Branch b = [] {
    const PeriodicOrbit small = refine_orbit(duffing(0.05, 1.2), {0.0, 0.0}, 1);
    return continue_branch(continue_to(small, Param::A, 3.0), Param::Omega, 0.15, 1.2);
  }();
  return b;
}

const BifurcationPoint& nearest(const Branch& b, BifurcationKind kind, double omega) {
  const BifurcationPoint* best = nullptr;
  for (const auto& f : b.bifurcations)
    if (f.kind == kind &&
        (!best || std::abs(f.params_at.omega - omega) < std::abs(best->params_at.omega - omega)))
      best = &f;
  REQUIRE(best != nullptr);
  return *best;
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

// Planar synthetic curve with given parameter points and projected tangents.
TongueCurve synthetic(const std::vector<Eigen::Vector2d>& xy,
                      const std::vector<Eigen::Vector2d>& dir) {
  TongueCurve t;
  for (std::size_t i = 0; i < xy.size(); ++i) {
    TonguePoint p;
    p.orbit.params = duffing(xy[i].y(), xy[i].x());
    p.tangent(0) = 1.0; // state motion keeps the full tangent nonzero
    p.tangent.tail<2>() = dir[i];
    t.points.push_back(p);
  }
  return t;
}

} // namespace

TEST_CASE("main-resonance folds meet at a single cusp above A = 0") {
  const TongueCurve& t = main_tongue();
  CHECK(t.kind == TongueKind::FoldOdd);
  REQUIRE(t.cusps.size() == 1);
  const auto& c = t.points[t.cusps[0]].orbit.params;
  CHECK(c.A > 1e-4);
  CHECK(t.cusps[0] == t.lowest());
  // At A = 0.05 the tongue passes through both folds of the one-parameter branch.
  std::vector<double> folds;
  for (const auto& f : main_resonance().bifurcations) folds.push_back(f.params_at.omega);
  std::sort(folds.begin(), folds.end());
  const auto cross = crossings(t, 0.05);
  REQUIRE(cross.size() == 2);
  REQUIRE(folds.size() == 2);
  CHECK(cross[0] == doctest::Approx(folds[0]).epsilon(1e-4));
  CHECK(cross[1] == doctest::Approx(folds[1]).epsilon(1e-4));
  CHECK(c.omega > folds[0] - 0.2);
  CHECK(c.omega < folds[0]);
}

TEST_CASE("fold-curve orbits have a unit multiplier") {
  const TongueCurve& t = main_tongue();
  for (std::size_t i = 0; i < t.points.size(); i += t.points.size() / 9) {
    const PeriodicOrbit& o = t.points[i].orbit;
    CHECK(o.residual < 1e-9);
    double lib = 1e9;
    for (const auto& m : o.multipliers) lib = std::min(lib, std::abs(m - 1.0));
    CHECK(lib < 1e-6);
    const Eigen::Matrix2d M = oracle::fd_fundamental(o.params, o.s0, 0.0, o.period(), 1e-6);
    double fd = 1e9;
    for (const auto& m : M.eigenvalues()) fd = std::min(fd, std::abs(m - 1.0));
    CHECK(fd < 1e-4);
  }
}

TEST_CASE("isola tongue has no low-A cusp and passes through the isola folds") {
  const ModelParams p = duffing(3.0, 0.82);
  const OscState s = oracle::settle(p, {0.0, 0.0}, 1020);
  const auto iso = find_isolas(p, 0.15, 1.2, {{0.82, s, 3}});
  REQUIRE(iso.branches.size() == 1);
  const Branch& b = iso.branches[0];
  REQUIRE(b.bifurcations.size() == 2);
  const TongueCurve t = continue_fold_2p(b.bifurcations[0], Param::Omega, Param::A, {0.1, 2.0},
                                         {1e-3, 8.0}, {}, TongueKind::FoldIsola);
  CHECK(t.kind == TongueKind::FoldIsola);
  CHECK(t.cusps.empty());
  CHECK(min_A(t) > 1.0);
  CHECK(tongue_tips(t).size() == 1);
  std::vector<double> folds{b.bifurcations[0].params_at.omega, b.bifurcations[1].params_at.omega};
  std::sort(folds.begin(), folds.end());
  const auto cross = crossings(t, 3.0);
  REQUIRE(cross.size() == 2);
  CHECK(cross[0] == doctest::Approx(folds[0]).epsilon(1e-4));
  CHECK(cross[1] == doctest::Approx(folds[1]).epsilon(1e-4));
}

TEST_CASE("the even tongue between R3 and R5 starts above both") {
  const Range om{0.1, 1.5}, a{1e-3, 6.0};
  const auto& pf = nearest(primary(), BifurcationKind::Pitchfork, 0.50);
  const TongueCurve even = continue_pitchfork_2p(pf, Param::Omega, Param::A, om, a);
  const TongueCurve r3 = continue_fold_2p(nearest(primary(), BifurcationKind::SaddleNode, 0.65),
                                          Param::Omega, Param::A, om, a);
  const TongueCurve r5 = continue_fold_2p(nearest(primary(), BifurcationKind::SaddleNode, 0.37),
                                          Param::Omega, Param::A, om, a);
  CHECK(even.kind == TongueKind::PitchforkEven);
  CHECK(even.half_map);
  CHECK(r3.label.k == 3);
  CHECK(even.label.k == 4);
  CHECK(r5.label.k == 5);
  CHECK(r3.cusps.size() == 1);
  CHECK(r5.cusps.size() == 1);
  CHECK(min_A(even) > min_A(r3));
  CHECK(min_A(even) > min_A(r5));
  // Both pitchforks of the pair lie on the same curve.
  const auto cross = crossings(even, 3.0);
  REQUIRE(cross.size() == 2);
  const double lo = nearest(primary(), BifurcationKind::Pitchfork, 0.46).params_at.omega;
  CHECK(cross[0] == doctest::Approx(lo).epsilon(1e-4));
  CHECK(cross[1] == doctest::Approx(pf.params_at.omega).epsilon(1e-4));
}

TEST_CASE("restarting from a tongue point reproduces the tongue") {
  const TongueCurve& t = main_tongue();
  const std::size_t i = t.points.size() / 3;
  const TongueCurve again =
      continue_fold_2p(as_start(t, i), Param::Omega, Param::A, {0.5, 3.5}, {1e-4, 0.2});
  REQUIRE(again.cusps.size() == 1);
  const auto& c0 = t.points[t.cusps[0]].orbit.params;
  const auto& c1 = again.points[again.cusps[0]].orbit.params;
  CHECK(c1.omega == doctest::Approx(c0.omega).epsilon(1e-6));
  CHECK(c1.A == doctest::Approx(c0.A).epsilon(1e-5));
}

TEST_CASE("two-parameter continuation rejects unsuitable starts") {
  const auto& sn = main_resonance().bifurcations.at(0);
  CHECK_THROWS_AS(continue_pitchfork_2p(sn, Param::Omega, Param::A, {0.5, 3.5}, {1e-4, 0.2}),
                  NotApplicable);
  BifurcationPoint pf = nearest(primary(), BifurcationKind::Pitchfork, 0.48);
  CHECK_THROWS_AS(continue_fold_2p(pf, Param::Omega, Param::A, {0.1, 1.5}, {1e-3, 6.0}),
                  NotApplicable);
  pf.half_map = false;
  pf.from_asymmetric = false;
  CHECK_THROWS_AS(continue_pitchfork_2p(pf, Param::Omega, Param::A, {0.1, 1.5}, {1e-3, 6.0}),
                  NotApplicable);
  CHECK_THROWS_AS(continue_fold_2p(sn, Param::Omega, Param::Omega, {0.5, 3.5}, {0.5, 3.5}),
                  InvalidArgument);
  CHECK_THROWS_AS(continue_fold_2p(sn, Param::Omega, Param::A, {0.5, 3.5}, {0.1, 0.2}),
                  InvalidArgument);
}

TEST_CASE("cusp detection on synthetic curves") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto rotate = [](double a, Eigen::Vector2d v) {
    return Eigen::Vector2d(std::cos(a) * v.x() - std::sin(a) * v.y(),
                           std::sin(a) * v.x() + std::cos(a) * v.y());
  };
  for (int trial = 0; trial < 20; ++trial) {
    const double angle = 2.0 * std::numbers::pi * u(rng);
    const int m = 20 + static_cast<int>(200 * u(rng));
    std::vector<Eigen::Vector2d> xy, dir;

    // Straight segment.
    const Eigen::Vector2d d = rotate(angle, {1.0, 0.0});
    for (int i = 0; i < m; ++i) {
      xy.push_back(Eigen::Vector2d(1.0, 1.0) + (0.01 * i) * d);
      dir.push_back(d);
    }
    CHECK(detect_cusps(synthetic(xy, dir)).empty());

    // Smooth arc turning by up to 300 degrees: the direction never reverses
    // between neighbours.
    xy.clear();
    dir.clear();
    const double sweep = (0.5 + 1.2 * u(rng)) * std::numbers::pi;
    for (int i = 0; i < m; ++i) {
      const double th = angle + sweep * i / (m - 1);
      xy.push_back(Eigen::Vector2d(2.0 + std::cos(th), 2.0 + std::sin(th)));
      dir.push_back(Eigen::Vector2d(-std::sin(th), std::cos(th)));
    }
    CHECK(detect_cusps(synthetic(xy, dir)).empty());

    // Semicubical cusp (s^2, s^3) with an odd number of samples.
    xy.clear();
    dir.clear();
    const int half = m / 2;
    for (int i = -half; i <= half; ++i) {
      const double s = static_cast<double>(i) / half;
      xy.push_back(Eigen::Vector2d(1.0, 1.0) + rotate(angle, {s * s * s, s * s}));
      dir.push_back(rotate(angle, {3 * s * s, 2 * s}));
    }
    const auto c = detect_cusps(synthetic(xy, dir));
    REQUIRE(c.size() == 1);
    CHECK(static_cast<int>(c[0]) == half);
  }
  CHECK(detect_cusps(TongueCurve{}).empty());
}

TEST_CASE("tongue tips are the interior minima of A") {
  std::vector<Eigen::Vector2d> xy, dir;
  for (int i = 0; i <= 100; ++i) {
    const double w = 0.5 + 0.01 * i;
    xy.push_back({w, 2.0 + std::cos(4.0 * std::numbers::pi * (w - 0.5))});
    dir.push_back({1.0, 0.0});
  }
  const TongueCurve t = synthetic(xy, dir);
  const auto tips = tongue_tips(t);
  REQUIRE(tips.size() == 2);
  CHECK(tips[0] == 25);
  CHECK(tips[1] == 75);
  CHECK(t.lowest() == 25);
}

TEST_CASE("synchronisation tongue narrows to the free-running frequency") {
  const double gamma = 0.01;
  const double w0 = oracle::free_cycle_frequency(gamma);
  const ModelParams p{Model::DuffingVanDerPol, 2.0, 1.0, gamma};
  CHECK(limit_cycle_frequency(p) == doctest::Approx(w0).epsilon(1e-8));
  const SyncTongue s = sync_tongue(p, {0.5, 4.0}, {1e-5, 2.0});
  CHECK(s.left.kind == TongueKind::FoldSync);
  CHECK(s.start_A <= 2.0);
  CHECK(std::abs(s.tip_omega - w0) < 1e-3);
  CHECK(s.tip_A < 1e-3);
  CHECK(s.left.cusps.empty());
  CHECK(s.right.cusps.empty());
  // Width shrinks monotonically on the way down to the tip.
  const double top = std::min(s.left.points.front().orbit.params.A,
                              s.right.points.front().orbit.params.A);
  CHECK(top > 1e-3);
  double last = 1e9;
  for (double A = 0.9 * top; A > 1e-4; A *= 0.7) {
    const auto l = crossings(s.left, A), r = crossings(s.right, A);
    REQUIRE(l.size() == 1);
    REQUIRE(r.size() == 1);
    CHECK(l[0] < w0);
    CHECK(r[0] > w0);
    CHECK(r[0] - l[0] < last);
    last = r[0] - l[0];
  }
  CHECK_THROWS_AS(sync_tongue(duffing(2.0, 1.0), {0.5, 4.0}, {1e-5, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(limit_cycle_frequency(duffing(0.0, 1.0)), InvalidArgument);
}

TEST_CASE("stronger damping lifts the main-resonance cusp") {
  const TongueCurve& t = main_tongue();
  const auto stages = continue_tongue_in_gamma(t, {0.02}, {0.5, 3.5}, {1e-4, 0.2});
  REQUIRE(stages.size() == 1);
  const TongueCurve& u = stages[0].tongue;
  CHECK(stages[0].gamma == 0.02);
  for (const auto& p : u.points) CHECK(p.orbit.params.gamma == 0.02);
  REQUIRE(u.cusps.size() == 1);
  CHECK(u.points[u.cusps[0]].orbit.params.A > t.points[t.cusps[0]].orbit.params.A);
  CHECK(stages[0].path.second == Param::Gamma);

  TongueCurve wrong = t;
  wrong.second = Param::Gamma;
  CHECK_THROWS_AS(continue_tongue_in_gamma(wrong, {0.02}, {0.5, 3.5}, {1e-4, 0.2}),
                  InvalidArgument);
}
