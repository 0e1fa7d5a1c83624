#include "nlres/ode.hpp"

#include <numbers>

#include "nlres/errors.hpp"
#include "systems.hpp"

namespace nlres {

namespace {

void check_span(double t0, double t1, Tolerances tol) {
  if (!(t1 > t0)) throw InvalidArgument("integration requires t1 > t0");
  if (!(tol.rel > 0.0) || !(tol.abs > 0.0))
    throw InvalidArgument("tolerances must be positive");
}

} // namespace

OscState integrate(const ModelParams& p, OscState s0, double t0, double t1,
                   Tolerances tol) {
  check_span(t0, t1, tol);
  DormandPrince<detail::BaseSystem> dp({p}, t0, {s0.x, s0.v}, tol);
  dp.advance_to(t1);
  return {dp.state()[0], dp.state()[1]};
}

VariationalResult integrate_with_variations(const ModelParams& p, OscState s0,
                                            double t0, double t1,
                                            Tolerances tol) {
  check_span(t0, t1, tol);
  using Sys = detail::VariationalSystem<0, false>;
  DormandPrince<Sys> dp(Sys{p}, t0, {s0.x, s0.v, 1.0, 0.0, 0.0, 1.0}, tol);
  dp.advance_to(t1);
  const auto& y = dp.state();
  VariationalResult r;
  r.state = {y[0], y[1]};
  r.M << y[2], y[4], y[3], y[5];
  return r;
}

Trajectory sample_trajectory(const ModelParams& p, OscState s0, double t0,
                             double t1, std::size_t count, bool include_end,
                             Tolerances tol) {
  check_span(t0, t1, tol);
  if (count == 0) throw InvalidArgument("sample count must be positive");
  Trajectory tr;
  tr.params = p;
  tr.samples.reserve(count + 1);
  tr.samples.push_back({t0, s0});
  const double dt = (t1 - t0) / static_cast<double>(count);
  std::size_t next = 1;
  DormandPrince<detail::BaseSystem> dp({p}, t0, {s0.x, s0.v}, tol);
  dp.advance_to(t1, [&](const auto& step) {
    while (next < count) {
      const double ts = t0 + dt * static_cast<double>(next);
      if (ts > step.t1) break;
      const auto y = step(ts);
      tr.samples.push_back({ts, {y[0], y[1]}});
      ++next;
    }
  });
  if (include_end) tr.samples.push_back({t1, {dp.state()[0], dp.state()[1]}});
  return tr;
}

std::optional<TimedState> next_maximum(const ModelParams& p, OscState s0,
                                       double t0, double t_limit,
                                       Tolerances tol) {
  check_span(t0, t_limit, tol);
  using Dp = DormandPrince<detail::BaseSystem>;
  Dp dp({p}, t0, {s0.x, s0.v}, tol);
  std::optional<TimedState> found;
  // Advance one accepted step at a time by chasing the step end; the observer
  // inspects each step's interpolant.
  auto observer = [&](const Dp::Interpolant& step) {
    if (found) return;
    const double va = step.r1[1];
    const double vb = step(step.t1)[1];
    if (!(va > 0.0 && vb <= 0.0)) return;
    double lo = step.t0, hi = step.t1;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (step(mid)[1] > 0.0) lo = mid;
      else hi = mid;
    }
    const auto y = step(hi);
    found = TimedState{hi, {y[0], y[1]}};
  };
  // Chunked advance keeps the search bounded once the event is seen.
  const double chunk = std::max((t_limit - t0) / 64.0, 1e-3);
  for (double t = t0; t < t_limit && !found;) {
    const double te = std::min(t + chunk, t_limit);
    dp.advance_to(te, observer);
    t = te;
  }
  return found;
}

double natural_period(double x_max) {
  if (!(x_max > 0.0) || !std::isfinite(x_max))
    throw InvalidArgument("natural_period requires x_max > 0");
  // T = 4 int_0^{pi/2} dtheta / sqrt(1 + x_max^2 (1 + sin^2 theta) / 2).
  // The integrand is even and pi-periodic, so the trapezoid rule converges
  // geometrically.
  const double m2 = x_max * x_max;
  auto f = [m2](double th) {
    const double s = std::sin(th);
    return 1.0 / std::sqrt(1.0 + 0.5 * m2 * (1.0 + s * s));
  };
  const double a = 0.0, b = 0.5 * std::numbers::pi;
  double h = b - a;
  double sum = 0.5 * (f(a) + f(b));
  double prev = sum * h;
  for (int level = 1; level < 30; ++level) {
    const int npts = 1 << (level - 1);
    double add = 0.0;
    for (int i = 0; i < npts; ++i) add += f(a + h * (i + 0.5));
    sum += add;
    h *= 0.5;
    const double est = sum * h;
    if (level > 3 && std::abs(est - prev) <= 1e-15 * std::abs(est)) return 4.0 * est;
    prev = est;
  }
  return 4.0 * prev;
}

} // namespace nlres
