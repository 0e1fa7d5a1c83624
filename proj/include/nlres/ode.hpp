#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nlres/integrator.hpp"
#include "nlres/model.hpp"

namespace nlres {

struct TimedState {
  double t;
  OscState s;
};

struct Trajectory {
  std::vector<TimedState> samples;
  ModelParams params;
};

struct VariationalResult {
  OscState state;
  // Fundamental matrix d(state at t1) / d(state at t0).
  Eigen::Matrix2d M;
};

OscState integrate(const ModelParams& p, OscState s0, double t0, double t1,
                   Tolerances tol = {});

// The tangent equations share the base step sequence, so `state` is bitwise
// equal to integrate(p, s0, t0, t1, tol).
VariationalResult integrate_with_variations(const ModelParams& p, OscState s0,
                                            double t0, double t1,
                                            Tolerances tol = {});

// `count` equally spaced samples t0 + k (t1 - t0) / count, k = 0..count-1,
// taken from the dense output. With `include_end` the state at t1 is appended.
Trajectory sample_trajectory(const ModelParams& p, OscState s0, double t0,
                             double t1, std::size_t count,
                             bool include_end = false, Tolerances tol = {});

// First time in (t0, t_limit] where v changes sign from positive to
// non-positive, i.e. a local maximum of x. Located on the dense output.
std::optional<TimedState> next_maximum(const ModelParams& p, OscState s0,
                                       double t0, double t_limit,
                                       Tolerances tol = {});

// Period of the undamped, unforced oscillation x'' + x + x^3 = 0 with amplitude
// x_max, by quadrature over a quarter period after x = x_max sin(theta).
double natural_period(double x_max);

} // namespace nlres
