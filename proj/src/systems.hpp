#pragma once

// Right-hand sides handed to DormandPrince. Private to the library.

#include <algorithm>
#include <array>
#include <cmath>

#include "nlres/integrator.hpp"
#include "nlres/model.hpp"

namespace nlres::detail {

// Modulus of the eigenvalues of the linearization at y: sqrt(|f_x|) + |f_v|.
inline double linear_frequency(const ModelParams& p, double x, double v) {
  const Damping d = damping(p, x);
  const double a = d.dg * v + 1.0 + 3.0 * x * x;
  return std::sqrt(std::max(1.0, std::abs(a))) + std::abs(d.g);
}

struct BaseSystem {
  static constexpr std::size_t dim = 2;
  static constexpr std::size_t controlled = 2;
  ModelParams p;

  void operator()(double t, const Vec<2>& y, Vec<2>& dy) const {
    const Derivative d = vector_field(p, {y[0], y[1]}, t);
    dy[0] = d.dx;
    dy[1] = d.dv;
  }
  double frequency_scale(const Vec<2>& y) const { return linear_frequency(p, y[0], y[1]); }
};

// Base state, fundamental matrix Z (columns at 2..5), NP parameter
// sensitivities, and optionally the derivatives of Z q with respect to the
// initial state and the parameters for a fixed direction q.
//
// Layout: [x v | Z e1 | Z e2 | z_p0 | z_p1 | Y_1 | Y_2 | Y_p0 | Y_p1]
template <std::size_t NP, bool Second> struct VariationalSystem {
  static constexpr std::size_t sec = 6 + 2 * NP;
  static constexpr std::size_t dim = sec + (Second ? 4 + 2 * NP : 0);
  static constexpr std::size_t controlled = 2;
  using State = Vec<dim>;

  ModelParams p;
  std::array<Param, NP> params{};
  double q0 = 0.0, q1 = 0.0;

  double frequency_scale(const Vec<dim>& y) const { return linear_frequency(p, y[0], y[1]); }

  void operator()(double t, const Vec<dim>& y, Vec<dim>& dy) const {
    const double x = y[0], v = y[1];
    const Damping d = damping(p, x);
    const double c = std::cos(p.omega * t);
    // Jacobian [[0, 1], [a, b]]
    const double a = -d.dg * v - 1.0 - 3.0 * x * x;
    const double b = -d.g;
    dy[0] = v;
    dy[1] = -d.g * v - x - x * x * x + p.A * c;
    for (std::size_t k = 2; k < 6; k += 2) {
      dy[k] = y[k + 1];
      dy[k + 1] = a * y[k] + b * y[k + 1];
    }
    const Damping dgam = damping_dgamma(p, x);
    for (std::size_t k = 0; k < NP; ++k) {
      const std::size_t i = 6 + 2 * k;
      double forced = 0.0;
      switch (params[k]) {
      case Param::Omega: forced = -p.A * t * std::sin(p.omega * t); break;
      case Param::A: forced = c; break;
      case Param::Gamma: forced = -dgam.g * v; break;
      }
      dy[i] = y[i + 1];
      dy[i + 1] = a * y[i] + b * y[i + 1] + forced;
    }
    if constexpr (Second) {
      const double zq0 = q0 * y[2] + q1 * y[4];
      const double zq1 = q0 * y[3] + q1 * y[5];
      const double fxx = -d.ddg * v - 6.0 * x;
      const double fxv = -d.dg;
      auto hess = [&](double u0, double u1) {
        return fxx * u0 * zq0 + fxv * (u0 * zq1 + u1 * zq0);
      };
      for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t i = sec + 2 * j;
        dy[i] = y[i + 1];
        dy[i + 1] = a * y[i] + b * y[i + 1] + hess(y[2 + 2 * j], y[3 + 2 * j]);
      }
      for (std::size_t k = 0; k < NP; ++k) {
        const std::size_t i = sec + 4 + 2 * k;
        const std::size_t z = 6 + 2 * k;
        double direct = 0.0;
        if (params[k] == Param::Gamma) direct = -dgam.dg * v * zq0 - dgam.g * zq1;
        dy[i] = y[i + 1];
        dy[i + 1] = a * y[i] + b * y[i + 1] + hess(y[z], y[z + 1]) + direct;
      }
    }
  }
};

} // namespace nlres::detail
