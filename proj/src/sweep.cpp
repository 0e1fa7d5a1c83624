#include "nlres/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "nlres/errors.hpp"
#include "nlres/ode.hpp"

namespace nlres {

std::string_view to_string(AttractorClass c) {
  switch (c) {
  case AttractorClass::Periodic: return "periodic";
  case AttractorClass::QuasiPeriodic: return "quasi-periodic";
  case AttractorClass::Unresolved: return "unresolved";
  }
  return "?";
}

void SweepTiming::validate() const {
  if (n_max < 1) throw InvalidArgument("n_max must be at least 1");
  if (sample_periods < n_max) throw InvalidArgument("sample_periods must be at least n_max");
  if (transient_periods < sample_periods)
    throw InvalidArgument("transient_periods must be at least sample_periods");
  if (!(strobe_tol > 0.0)) throw InvalidArgument("strobe tolerance must be positive");
  if (qp_samples < 4 * (sample_periods + 1) && qp_samples != 0)
    throw InvalidArgument("qp_samples must be 0 or at least four times the sample count");
  if (!(settle_factor > 0.0) || settle_factor > 1.0)
    throw InvalidArgument("settle_factor must lie in (0, 1]");
  if (!(tol.rel > 0.0) || !(tol.abs > 0.0)) throw InvalidArgument("tolerances must be positive");
}

void SweepSpec::validate() const {
  if (omega.count < 1 || A.count < 1) throw InvalidArgument("axis counts must be at least 1");
  if (omega.hi < omega.lo || A.hi < A.lo) throw InvalidArgument("empty axis range");
  if (!(omega.lo > 0.0)) throw InvalidArgument("omega must be positive");
  if (A.lo < 0.0) throw InvalidArgument("A must be non-negative");
  if (!initial.finite()) throw InvalidArgument("initial state must be finite");
  timing.validate();
  base.validate();
}

namespace {

double dist(const OscState& a, const OscState& b) { return (a - b).norm(); }

// Minimal n <= n_max with all s[k + n] within tol of s[k].
int minimal_period(const std::vector<OscState>& s, int n_max, double tol) {
  for (int n = 1; n <= n_max; ++n) {
    bool ok = n < static_cast<int>(s.size());
    for (std::size_t k = 0; ok && k + n < s.size(); ++k) ok = dist(s[k + n], s[k]) < tol;
    if (ok) return n;
  }
  return 0;
}

// Transient early exit: the last strobe step is within `goal` of a period-n
// cycle when successive n-step differences contract geometrically.
bool settled(const std::vector<OscState>& h, int n_max, double goal) {
  const std::size_t m = h.size();
  for (int n = 1; n <= n_max; ++n) {
    if (m < static_cast<std::size_t>(2 * n + 2)) return false;
    bool ok = true;
    for (std::size_t back = 0; ok && back < 2; ++back) {
      const std::size_t k = m - 1 - back;
      const double d1 = dist(h[k], h[k - n]);
      const double d0 = dist(h[k - n], h[k - 2 * n]);
      if (d1 == 0.0) continue;
      const double r = d0 > 0.0 ? d1 / d0 : 1.0;
      ok = r < 0.9 && d1 / (1.0 - r) < goal;
    }
    if (ok) return true;
  }
  return false;
}

double median_nn_spacing(const std::vector<OscState>& s, std::size_t count) {
  std::vector<double> nn(count, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j)
      if (i != j) nn[i] = std::min(nn[i], dist(s[i], s[j]));
  std::nth_element(nn.begin(), nn.begin() + count / 2, nn.end());
  return nn[count / 2];
}

// Length of the closed polygon through the first `count` samples ordered by
// angle about their centroid.
double angular_polygon_length(const std::vector<OscState>& s, std::size_t count) {
  OscState c{0.0, 0.0};
  for (std::size_t i = 0; i < count; ++i) c = c + s[i] * (1.0 / count);
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < count; ++i)
    order.push_back({std::atan2(s[i].v - c.v, s[i].x - c.x), i});
  std::sort(order.begin(), order.end());
  double L = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    L += dist(s[order[i].second], s[order[(i + 1) % count].second]);
  return L;
}

// Samples fill a smooth closed curve: spacing shrinks as samples accumulate
// while the angularly ordered polygon length settles.
bool fills_curve(const std::vector<OscState>& s, double tol) {
  const std::size_t all = s.size(), early = all / 4;
  for (const auto& p : s)
    if (!p.finite() || p.norm() > 1e3) return false;
  for (std::size_t i = 0; i < all; ++i)
    for (std::size_t j = i + 1; j < all; ++j)
      if (dist(s[i], s[j]) < tol) return false;
  const double shrink = median_nn_spacing(s, all) / median_nn_spacing(s, early);
  const double growth = angular_polygon_length(s, all) / angular_polygon_length(s, early);
  // A slowly settling transient creeps along the curve with shrinking steps;
  // on an invariant curve the step statistics do not drift.
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < early; ++i) {
    first += dist(s[i + 1], s[i]);
    last += dist(s[all - 1 - i], s[all - 2 - i]);
  }
  const double drift = last / first;
  return shrink < 0.5 && growth < 1.25 && drift > 0.8 && drift < 1.25;
}

} // namespace

CellResult classify_attractor(const ModelParams& p, OscState s0, const SweepTiming& t) {
  t.validate();
  p.validate();
  CellResult out;
  out.omega = p.omega;
  out.A = p.A;
  const double T = p.forcing_period();
  try {
    std::vector<OscState> hist{s0};
    const std::size_t keep = 2 * static_cast<std::size_t>(t.n_max) + 2;
    OscState s = s0;
    int k = 0;
    while (k < t.transient_periods) {
      s = integrate(p, s, 0.0, T, t.tol);
      ++k;
      if (!t.early_settle) continue;
      hist.push_back(s);
      if (hist.size() > keep) hist.erase(hist.begin());
      if (settled(hist, t.n_max, t.settle_factor * t.strobe_tol)) break;
    }
    out.transient_used = k;

    std::vector<OscState> samples{s};
    for (int j = 0; j < t.sample_periods; ++j) samples.push_back(s = integrate(p, s, 0.0, T, t.tol));
    out.strobe = samples.front();

    // x_max over the sample window: strobe points and every local maximum.
    double xm = -std::numeric_limits<double>::infinity();
    for (const auto& q : samples) xm = std::max(xm, q.x);
    const double span = t.sample_periods * T;
    OscState e = samples.front();
    double te = 0.0;
    while (auto hit = next_maximum(p, e, te, span, t.tol)) {
      xm = std::max(xm, hit->s.x);
      e = hit->s;
      te = hit->t;
    }
    out.x_max = xm;

    out.n = minimal_period(samples, t.n_max, t.strobe_tol);
    if (out.n > 0) {
      out.cls = AttractorClass::Periodic;
      return out;
    }
    out.cls = AttractorClass::Unresolved;
    if (t.qp_samples > 0) {
      std::vector<OscState> many = samples;
      while (static_cast<int>(many.size()) < t.qp_samples)
        many.push_back(s = integrate(p, s, 0.0, T, t.tol));
      if (fills_curve(many, t.strobe_tol)) out.cls = AttractorClass::QuasiPeriodic;
    }
    if (out.cls == AttractorClass::Unresolved) out.diagnostic = "no period up to n_max";
  } catch (const NumericalError& err) {
    out.cls = AttractorClass::Unresolved;
    out.n = 0;
    out.diagnostic = err.code() + ": " + err.what();
  }
  return out;
}

Raster scan(const SweepSpec& spec, int threads) {
  spec.validate();
  Raster r;
  r.spec = spec;
  const std::size_t total = static_cast<std::size_t>(spec.omega.count) * spec.A.count;
  r.cells.resize(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const int io = static_cast<int>(i % spec.omega.count);
      const int ia = static_cast<int>(i / spec.omega.count);
      ModelParams p = spec.base;
      p.omega = spec.omega.at(io);
      p.A = spec.A.at(ia);
      r.cells[i] = classify_attractor(p, spec.initial, spec.timing);
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, total));
  std::vector<std::jthread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(work);
  work();
  return r;
}

std::vector<HarvestedSeed> harvest_seeds(const Raster& r,
                                         const std::function<bool(const CellResult&)>& pred) {
  const int W = r.spec.omega.count, H = r.spec.A.count;
  std::vector<HarvestedSeed> out;
  if (r.cells.size() != static_cast<std::size_t>(W) * H) return out;
  std::vector<char> seen(r.cells.size(), 0);
  for (std::size_t start = 0; start < r.cells.size(); ++start) {
    if (seen[start] || !pred(r.cells[start])) continue;
    std::vector<std::size_t> region{start};
    seen[start] = 1;
    for (std::size_t head = 0; head < region.size(); ++head) {
      const int io = static_cast<int>(region[head] % W), ia = static_cast<int>(region[head] / W);
      const int nb[4][2] = {{io - 1, ia}, {io + 1, ia}, {io, ia - 1}, {io, ia + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] >= W || q[1] < 0 || q[1] >= H) continue;
        const std::size_t j = static_cast<std::size_t>(q[1]) * W + q[0];
        if (!seen[j] && pred(r.cells[j])) {
          seen[j] = 1;
          region.push_back(j);
        }
      }
    }
    double co = 0.0, ca = 0.0;
    for (std::size_t j : region) {
      co += static_cast<double>(j % W) / region.size();
      ca += static_cast<double>(j / W) / region.size();
    }
    std::size_t best = region.front();
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j : region) {
      const double d = std::hypot(static_cast<double>(j % W) - co, static_cast<double>(j / W) - ca);
      if (d < bd || (d == bd && j < best)) {
        bd = d;
        best = j;
      }
    }
    const CellResult& c = r.cells[best];
    out.push_back({c.omega, c.A, c.strobe, c.n, region.size()});
  }
  return out;
}

} // namespace nlres
