#include "nlres/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nlres/errors.hpp"
#include "nlres/flow_map.hpp"
#include "nlres/ode.hpp"

namespace nlres {

namespace {

// x(t) on n * spp uniform samples of [0, n T), the last sample wrapping to the first.
std::vector<double> x_profile(const ModelParams& p, const OscState& s0, int n,
                              int spp, Tolerances tol) {
  const std::size_t count = static_cast<std::size_t>(n) * std::max(spp, 64);
  const Trajectory tr = sample_trajectory(p, s0, 0.0, n * p.forcing_period(), count, false, tol);
  std::vector<double> x;
  x.reserve(tr.samples.size());
  for (const auto& ts : tr.samples) x.push_back(ts.s.x);
  return x;
}

int count_maxima(const std::vector<double>& x) {
  // Compress plateaus, then count strict maxima on the cycle.
  std::vector<double> c;
  for (double xi : x)
    if (c.empty() || xi != c.back()) c.push_back(xi);
  while (c.size() > 1 && c.back() == c.front()) c.pop_back();
  if (c.size() < 2) throw DegenerateOrbit("x(t) is constant along the orbit");
  const std::size_t m = c.size();
  int maxima = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double prev = c[(i + m - 1) % m], next = c[(i + 1) % m];
    if (c[i] > prev && c[i] > next) ++maxima;
  }
  return maxima;
}

double peak_abs(const std::vector<double>& x) {
  const std::size_t m = x.size();
  std::size_t best = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (std::abs(x[i]) > std::abs(x[best])) best = i;
  const double a = std::abs(x[(best + m - 1) % m]), b = std::abs(x[best]),
               c = std::abs(x[(best + 1) % m]);
  const double curv = 2.0 * b - a - c;
  if (!(curv > 0.0)) return b;
  return b + (c - a) * (c - a) / (8.0 * curv);
}

PeriodicOrbit bare(const ModelParams& p, const OscState& s0, int n,
                   const Eigen::Matrix2d& M, double residual) {
  PeriodicOrbit o;
  o.params = p;
  o.n = n;
  o.s0 = s0;
  o.monodromy = M;
  o.multipliers = floquet_multipliers(M);
  o.stability = std::abs(o.multipliers[0]) < 1.0 && std::abs(o.multipliers[1]) < 1.0
                    ? Stability::Stable
                    : Stability::Unstable;
  o.residual = residual;
  return o;
}

void add_profile(PeriodicOrbit& o, const OrbitOptions& opt) {
  const auto x = x_profile(o.params, o.s0, o.n, opt.samples_per_period, opt.tol);
  o.winding = count_maxima(x);
  o.x_max = peak_abs(x);
}

PeriodicOrbit build(const ModelParams& p, const OscState& s0, int n,
                    const Eigen::Matrix2d& M, double residual, const OrbitOptions& opt) {
  PeriodicOrbit o = bare(p, s0, n, M, residual);
  o.symmetric = classify_symmetry(o, opt);
  add_profile(o, opt);
  return o;
}

} // namespace

PeriodicOrbit assemble_orbit(const ModelParams& p, const OscState& s0, int n,
                             const Eigen::Matrix2d& M, double residual, bool symmetric,
                             const OrbitOptions& opt) {
  PeriodicOrbit o = bare(p, s0, n, M, residual);
  o.symmetric = symmetric;
  add_profile(o, opt);
  return o;
}

OscState stroboscopic_map(const ModelParams& p, const OscState& s, int n, Tolerances tol) {
  return map_value(p, s, {n, false}, tol);
}

std::array<std::complex<double>, 2> floquet_multipliers(const Eigen::Matrix2d& M) {
  const double tr = M.trace(), det = M.determinant();
  const double disc = 0.25 * tr * tr - det;
  std::array<std::complex<double>, 2> mu;
  if (disc >= 0.0) {
    // Avoid cancellation: take the larger root directly, the other from det.
    const double big = 0.5 * tr + std::copysign(std::sqrt(disc), tr);
    mu[0] = big;
    mu[1] = big != 0.0 ? det / big : 0.0;
  } else {
    const double im = std::sqrt(-disc);
    mu[0] = {0.5 * tr, im};
    mu[1] = {0.5 * tr, -im};
  }
  if (std::abs(mu[1]) > std::abs(mu[0])) std::swap(mu[0], mu[1]);
  return mu;
}

PeriodicOrbit refine_orbit(const ModelParams& p, const OscState& guess, int n,
                           const OrbitOptions& opt) {
  p.validate();
  if (n < 1) throw InvalidArgument("period multiple must be >= 1");
  if (!guess.finite()) throw NoConvergence("non-finite initial guess");
  const MapSpec spec{n, false};
  OscState s = guess;
  for (int it = 0; it <= opt.max_iterations; ++it) {
    const MapJet jet = evaluate_map(p, s, spec, {}, opt.tol);
    const Eigen::Vector2d r = jet.residual(s);
    const double rn = r.norm();
    if (rn <= opt.target || (it == opt.max_iterations && rn <= opt.accept))
      return build(p, s, n, jet.D, rn, opt);
    if (it == opt.max_iterations) break;

    const Eigen::Matrix2d K = jet.D - Eigen::Matrix2d::Identity();
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if (std::abs(K.determinant()) < 1e-13 * scale * scale)
      throw SingularJacobian("DP^n - I is singular at (" + std::to_string(s.x) + ", " +
                             std::to_string(s.v) + ")");
    const Eigen::Vector2d delta = -K.inverse() * r;

    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, lambda *= 0.5) {
      const OscState trial = state(vec(s) + lambda * delta);
      double trial_rn;
      try {
        trial_rn = (vec(map_value(p, trial, spec, opt.tol)) - vec(trial)).norm();
      } catch (const NumericalError&) {
        continue;
      }
      if (trial_rn < rn) {
        s = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Residual floor of the map: the full step is as good as it gets.
      if (rn <= opt.accept) return build(p, s, n, jet.D, rn, opt);
      throw NoConvergence("damped Newton step failed to reduce the residual");
    }
  }
  throw NoConvergence("no convergence after " + std::to_string(opt.max_iterations) +
                      " Newton iterations");
}

PeriodicOrbit analyze_orbit(const ModelParams& p, const OscState& s0, int n,
                            const OrbitOptions& opt) {
  p.validate();
  if (n < 1) throw InvalidArgument("period multiple must be >= 1");
  const MapJet jet = evaluate_map(p, s0, {n, false}, {}, opt.tol);
  return build(p, s0, n, jet.D, jet.residual(s0).norm(), opt);
}

OscState mirror(const ModelParams& p, const OscState& s, Tolerances tol) {
  return -integrate(p, s, 0.0, std::numbers::pi / p.omega, tol);
}

bool classify_symmetry(const PeriodicOrbit& o, const OrbitOptions& opt) {
  // The damping of both models is even in x, so both share the flip symmetry.
  if (o.n % 2 == 1) {
    const OscState h = map_value(o.params, o.s0, {o.n, true}, opt.tol);
    return (h - o.s0).norm() <= opt.symmetry_tol;
  }
  const OscState m = mirror(o.params, o.s0, opt.tol);
  OscState pk = o.s0;
  for (int k = 0; k < o.n; ++k) {
    if ((m - pk).norm() <= opt.symmetry_tol) return true;
    pk = stroboscopic_map(o.params, pk, 1, opt.tol);
  }
  return false;
}

int winding_number(const PeriodicOrbit& o, const OrbitOptions& opt) {
  return count_maxima(x_profile(o.params, o.s0, o.n, opt.samples_per_period, opt.tol));
}

double amplitude(const PeriodicOrbit& o, const OrbitOptions& opt) {
  return peak_abs(x_profile(o.params, o.s0, o.n, opt.samples_per_period, opt.tol));
}

int minimal_period(const PeriodicOrbit& o, double tol_close, Tolerances tol) {
  for (int d = 1; d < o.n; ++d) {
    if (o.n % d != 0) continue;
    if ((stroboscopic_map(o.params, o.s0, d, tol) - o.s0).norm() <= tol_close) return d;
  }
  return o.n;
}

} // namespace nlres
