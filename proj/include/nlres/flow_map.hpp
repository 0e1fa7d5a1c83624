#pragma once

// Section maps of the forced flow and their derivatives.
//
// With T = 2 pi / omega the full map is P^n(s) = Phi(s; 0 -> n T) and the half
// map is H(s) = -Phi(s; 0 -> n T / 2). For odd n, H o H = P^n by the
// equivariance (x, v, t) -> (-x, -v, t + T / 2) of the Duffing flow, and a
// symmetric orbit is a fixed point of H.

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nlres/integrator.hpp"
#include "nlres/model.hpp"

namespace nlres {

struct MapSpec {
  int n = 1;
  bool half = false;

  double span(double omega) const;
  double sign() const { return half ? -1.0 : 1.0; }
};

// Value and derivatives of a section map at one point.
struct MapJet {
  OscState value;
  Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
  // d value / d params[k], including the dependence of the span on omega.
  std::vector<Eigen::Vector2d> dparam;
  // Second-order data, present when a direction q was requested:
  // column j of dDq_ds is d(D q)/d s_j; dDq_dparam[k] is d(D q)/d params[k].
  Eigen::Matrix2d dDq_ds = Eigen::Matrix2d::Zero();
  std::vector<Eigen::Vector2d> dDq_dparam;

  Eigen::Vector2d residual(const OscState& s) const {
    return {value.x - s.x, value.v - s.v};
  }
};

struct JetRequest {
  std::vector<Param> params; // at most two
  std::optional<Eigen::Vector2d> q;
};

// Evaluates the map given by `spec` at s. When `spec` is a full map and
// `half_out` is non-null, the half map H at the same point is also returned
// (the integration passes through n T / 2 either way, so all evaluations share
// one step sequence).
MapJet evaluate_map(const ModelParams& p, const OscState& s, MapSpec spec,
                    const JetRequest& req, Tolerances tol,
                    MapJet* half_out = nullptr);

// Value only; bitwise equal to evaluate_map(...).value.
OscState map_value(const ModelParams& p, const OscState& s, MapSpec spec,
                   Tolerances tol, OscState* half_out = nullptr);

// Eigen::Vector2d <-> OscState
inline Eigen::Vector2d vec(const OscState& s) { return {s.x, s.v}; }
inline OscState state(const Eigen::Vector2d& v) { return {v(0), v(1)}; }

} // namespace nlres
