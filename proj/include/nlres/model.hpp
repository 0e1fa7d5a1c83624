#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

namespace nlres {

enum class Model { Duffing, DuffingVanDerPol };

// Parameters that can be varied by continuation.
enum class Param { Omega, A, Gamma };

std::string_view to_string(Model m);
std::string_view to_string(Param p);
Model parse_model(std::string_view s);
Param parse_param(std::string_view s);

// x'' + g(x) x' + omega0^2 x + beta x^3 = A cos(omega t), with g = gamma for the
// Duffing oscillator and g = (x^2 - 1) gamma for the Duffing-Van der Pol one:
// energy is pumped in for |x| < 1 and removed outside, so the unforced
// oscillator has an attracting limit cycle. beta and omega0 are normalized to 1.
struct ModelParams {
  Model model = Model::Duffing;
  double A = 0.0;
  double omega = 1.0;
  double gamma = 0.01;
  static constexpr double beta = 1.0;
  static constexpr double omega0 = 1.0;

  double forcing_period() const { return 2.0 * std::numbers::pi / omega; }
  double get(Param p) const;
  void set(Param p, double value);
  ModelParams with(Param p, double value) const {
    ModelParams q = *this;
    q.set(p, value);
    return q;
  }

  // Throws InvalidArgument when an invariant is violated.
  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

struct OscState {
  double x = 0.0;
  double v = 0.0;

  OscState operator+(const OscState& o) const { return {x + o.x, v + o.v}; }
  OscState operator-(const OscState& o) const { return {x - o.x, v - o.v}; }
  OscState operator-() const { return {-x, -v}; }
  OscState operator*(double s) const { return {x * s, v * s}; }
  double norm() const { return std::hypot(x, v); }
  bool finite() const { return std::isfinite(x) && std::isfinite(v); }
  bool operator==(const OscState&) const = default;
};

struct Derivative {
  double dx;
  double dv;
};

// Position-dependent damping g(x) and its first two x-derivatives.
struct Damping {
  double g, dg, ddg;
};

inline Damping damping(const ModelParams& p, double x) {
  if (p.model == Model::Duffing) return {p.gamma, 0.0, 0.0};
  return {(x * x - 1.0) * p.gamma, 2.0 * x * p.gamma, 2.0 * p.gamma};
}

// d g / d gamma and its x-derivatives.
inline Damping damping_dgamma(const ModelParams& p, double x) {
  if (p.model == Model::Duffing) return {1.0, 0.0, 0.0};
  return {x * x - 1.0, 2.0 * x, 2.0};
}

inline double forcing(const ModelParams& p, double t) {
  return p.A * std::cos(p.omega * t);
}

inline Derivative vector_field(const ModelParams& p, const OscState& s,
                               double t) {
  const Damping d = damping(p, s.x);
  return {s.v, -d.g * s.v - s.x - s.x * s.x * s.x + forcing(p, t)};
}

// Potential of the restoring force, U'(x) = x + x^3.
inline double potential(double x) { return 0.5 * x * x + 0.25 * x * x * x * x; }

inline double energy(const OscState& s) {
  return 0.5 * s.v * s.v + potential(s.x);
}

} // namespace nlres
