#include "nlres/flow_map.hpp"

#include <numbers>

#include "nlres/errors.hpp"
#include "systems.hpp"

namespace nlres {

double MapSpec::span(double omega) const {
  return (half ? n : 2 * n) * std::numbers::pi / omega;
}

namespace {

using detail::VariationalSystem;

template <std::size_t NP, bool Second>
MapJet make_jet(const VariationalSystem<NP, Second>& sys,
                const typename VariationalSystem<NP, Second>::State& y,
                double tau, double sign) {
  using Sys = VariationalSystem<NP, Second>;
  MapJet jet;
  jet.value = OscState{y[0], y[1]} * sign;
  jet.D << y[2], y[4], y[3], y[5];
  jet.D *= sign;

  // The span tau = m pi / omega moves with omega.
  const ModelParams& p = sys.p;
  const double dtau_domega = -tau / p.omega;
  const Derivative f = vector_field(p, {y[0], y[1]}, tau);
  const Damping d = damping(p, y[0]);
  Eigen::Matrix2d J;
  J << 0.0, 1.0, -d.dg * y[1] - 1.0 - 3.0 * y[0] * y[0], -d.g;

  for (std::size_t k = 0; k < NP; ++k) {
    Eigen::Vector2d dp(y[6 + 2 * k], y[7 + 2 * k]);
    if (sys.params[k] == Param::Omega) dp += Eigen::Vector2d(f.dx, f.dv) * dtau_domega;
    jet.dparam.push_back(sign * dp);
  }
  if constexpr (Second) {
    constexpr std::size_t s = Sys::sec;
    jet.dDq_ds << y[s], y[s + 2], y[s + 1], y[s + 3];
    jet.dDq_ds *= sign;
    const Eigen::Vector2d zq(sys.q0 * y[2] + sys.q1 * y[4], sys.q0 * y[3] + sys.q1 * y[5]);
    for (std::size_t k = 0; k < NP; ++k) {
      Eigen::Vector2d dq(y[s + 4 + 2 * k], y[s + 5 + 2 * k]);
      if (sys.params[k] == Param::Omega) dq += J * zq * dtau_domega;
      jet.dDq_dparam.push_back(sign * dq);
    }
  }
  return jet;
}

template <std::size_t NP, bool Second>
MapJet run(const ModelParams& p, const OscState& s, MapSpec spec,
           const JetRequest& req, Tolerances tol, MapJet* half_out) {
  using Sys = VariationalSystem<NP, Second>;
  Sys sys{p};
  for (std::size_t k = 0; k < NP; ++k) sys.params[k] = req.params[k];
  if constexpr (Second) {
    sys.q0 = (*req.q)(0);
    sys.q1 = (*req.q)(1);
  }
  typename Sys::State y{};
  y[0] = s.x;
  y[1] = s.v;
  y[2] = 1.0;
  y[5] = 1.0;
  DormandPrince<Sys> dp(sys, 0.0, y, tol);
  const double half_tau = MapSpec{spec.n, true}.span(p.omega);
  dp.advance_to(half_tau);
  if (spec.half) return make_jet(sys, dp.state(), half_tau, -1.0);
  if (half_out) *half_out = make_jet(sys, dp.state(), half_tau, -1.0);
  const double tau = spec.span(p.omega);
  dp.advance_to(tau);
  return make_jet(sys, dp.state(), tau, 1.0);
}

template <std::size_t NP>
MapJet dispatch_second(const ModelParams& p, const OscState& s, MapSpec spec,
                       const JetRequest& req, Tolerances tol, MapJet* half_out) {
  if (req.q) return run<NP, true>(p, s, spec, req, tol, half_out);
  return run<NP, false>(p, s, spec, req, tol, half_out);
}

} // namespace

MapJet evaluate_map(const ModelParams& p, const OscState& s, MapSpec spec,
                    const JetRequest& req, Tolerances tol, MapJet* half_out) {
  if (spec.n < 1) throw InvalidArgument("map period multiple must be >= 1");
  switch (req.params.size()) {
  case 0: return dispatch_second<0>(p, s, spec, req, tol, half_out);
  case 1: return dispatch_second<1>(p, s, spec, req, tol, half_out);
  case 2: return dispatch_second<2>(p, s, spec, req, tol, half_out);
  default: throw InvalidArgument("at most two parameter sensitivities supported");
  }
}

OscState map_value(const ModelParams& p, const OscState& s, MapSpec spec,
                   Tolerances tol, OscState* half_out) {
  if (spec.n < 1) throw InvalidArgument("map period multiple must be >= 1");
  detail::BaseSystem sys{p};
  DormandPrince<detail::BaseSystem> dp(sys, 0.0, {s.x, s.v}, tol);
  const double half_tau = MapSpec{spec.n, true}.span(p.omega);
  dp.advance_to(half_tau);
  const OscState mid{dp.state()[0], dp.state()[1]};
  if (spec.half) return -mid;
  if (half_out) *half_out = -mid;
  dp.advance_to(spec.span(p.omega));
  return {dp.state()[0], dp.state()[1]};
}

} // namespace nlres
