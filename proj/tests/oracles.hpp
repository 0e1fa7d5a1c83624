#pragma once

// Independent reference computations used by the tests. None of these go
// through the code path they are compared against.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nlres/ode.hpp"

namespace oracle {

// Centered finite differences of the flow map with respect to the initial state.
inline Eigen::Matrix2d fd_fundamental(const nlres::ModelParams& p, nlres::OscState s0,
                                      double t0, double t1, double h) {
  Eigen::Matrix2d M;
  for (int j = 0; j < 2; ++j) {
    nlres::OscState sp = s0, sm = s0;
    (j == 0 ? sp.x : sp.v) += h;
    (j == 0 ? sm.x : sm.v) -= h;
    const auto a = nlres::integrate(p, sp, t0, t1);
    const auto b = nlres::integrate(p, sm, t0, t1);
    M(0, j) = (a.x - b.x) / (2 * h);
    M(1, j) = (a.v - b.v) / (2 * h);
  }
  return M;
}

// Period of the conservative oscillation from (x_max, 0): integrate until the
// trajectory returns to the section v = 0, x > 0.
inline double return_time(double x_max) {
  const nlres::ModelParams p{nlres::Model::Duffing, 0.0, 1.0, 0.0};
  const nlres::Tolerances tight{1e-13, 1e-15};
  const auto hit = nlres::next_maximum(p, {x_max, 0.0}, 0.0, 20.0, tight);
  if (!hit) throw std::runtime_error("no return to the section");
  return hit->t;
}

// Local maxima of x over [0, span) counted as v: + -> - events.
inline int count_maxima_by_events(const nlres::ModelParams& p, nlres::OscState s0,
                                  double span) {
  int count = 0;
  double t = 0.0;
  while (auto hit = nlres::next_maximum(p, s0, t, span)) {
    if (hit->t >= span) break;
    ++count;
    t = hit->t;
    s0 = hit->s;
  }
  return count;
}

// State after `periods` forcing periods from s0 at phase 0.
inline nlres::OscState settle(const nlres::ModelParams& p, nlres::OscState s0, int periods) {
  return nlres::integrate(p, s0, 0.0, periods * p.forcing_period());
}

// Plain Newton on P^n(s) = s with a finite-difference Jacobian.
inline std::optional<nlres::OscState> fd_newton(const nlres::ModelParams& p, nlres::OscState s,
                                                int n) {
  const double span = n * p.forcing_period();
  for (int it = 0; it < 40; ++it) {
    const auto img = nlres::integrate(p, s, 0.0, span);
    const Eigen::Vector2d r(img.x - s.x, img.v - s.v);
    if (!r.allFinite() || r.norm() > 1e3) return std::nullopt;
    if (r.norm() < 1e-10) return s;
    const Eigen::Matrix2d K = fd_fundamental(p, s, 0.0, span, 1e-6) - Eigen::Matrix2d::Identity();
    const Eigen::Vector2d d = K.fullPivLu().solve(-r);
    const double damp = std::min(1.0, 1.0 / d.norm());
    s = {s.x + damp * d(0), s.v + damp * d(1)};
  }
  return std::nullopt;
}

// Distinct period-n orbits reached by fd_newton from a grid of starting points
// (phase-0 points closer than 1e-6 count once).
inline std::vector<nlres::OscState> multistart_orbits(const nlres::ModelParams& p, int n,
                                                      double radius, int grid) {
  std::vector<nlres::OscState> found;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double x = -radius + 2.0 * radius * i / (grid - 1);
      const double v = -radius + 2.0 * radius * j / (grid - 1);
      const auto s = fd_newton(p, {x, v}, n);
      if (!s) continue;
      bool seen = false;
      for (const auto& f : found) seen = seen || (f - *s).norm() < 1e-6;
      if (!seen) found.push_back(*s);
    }
  return found;
}

// Angular frequency of the unforced Duffing-Van der Pol cycle from the mean
// spacing of 40 successive maxima after a long settling run.
inline double free_cycle_frequency(double gamma) {
  const nlres::ModelParams p{nlres::Model::DuffingVanDerPol, 0.0, 1.0, gamma};
  const nlres::Tolerances tight{1e-12, 1e-14};
  nlres::OscState s = nlres::integrate(p, {0.5, 0.0}, 0.0, 3000.0, tight);
  double t = 3000.0, first = 0.0;
  for (int k = 0; k <= 40; ++k) {
    const auto hit = nlres::next_maximum(p, s, t, t + 50.0, tight);
    if (!hit) throw std::runtime_error("no maximum on the free cycle");
    if (k == 0) first = hit->t;
    t = hit->t;
    s = hit->s;
  }
  return 2.0 * std::numbers::pi * 40.0 / (t - first);
}

// Perimeter of the ellipse with semi-axes a, b by composite Simpson quadrature.
inline double ellipse_perimeter(double a, double b, int panels = 20000) {
  auto speed = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  const double h = 2.0 * std::numbers::pi / panels;
  double sum = speed(0.0) + speed(2.0 * std::numbers::pi);
  for (int k = 1; k < panels; ++k) sum += (k % 2 ? 4.0 : 2.0) * speed(k * h);
  return sum * h / 3.0;
}

} // namespace oracle
