#pragma once

// Embedded Runge-Kutta 5(4) of Dormand and Prince with the standard 4th order
// continuous extension. Header-only so the right-hand sides inline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "nlres/errors.hpp"

namespace nlres {

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;

  Tolerances scaled(double factor) const { return {rel * factor, abs * factor}; }
};

namespace detail {

template <std::size_t N> using Vec = std::array<double, N>;

struct DopriTableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                          a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432,
                          d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072,
                          d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844,
                          d7 = 69997945.0 / 29380423;
};

} // namespace detail

// Dense interpolant of one accepted step, restricted to the first `NDense`
// components.
template <std::size_t NDense> class StepInterpolant {
public:
  double t0 = 0.0, t1 = 0.0;

  std::array<double, NDense> operator()(double t) const {
    const double theta = (t - t0) / (t1 - t0);
    const double theta1 = 1.0 - theta;
    std::array<double, NDense> out{};
    for (std::size_t i = 0; i < NDense; ++i)
      out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
    return out;
  }

  std::array<double, NDense> r1{}, r2{}, r3{}, r4{}, r5{};
};

// `System` provides `static constexpr std::size_t dim`, `controlled` (number
// of leading components entering the error norm) and
// `void operator()(double t, const Vec& y, Vec& dy) const`.
//
// Only the controlled components drive step selection, so an augmented system
// whose leading components are a plain system reproduces its step sequence
// bit for bit.
template <class System> class DormandPrince {
public:
  static constexpr std::size_t N = System::dim;
  static constexpr std::size_t NC = System::controlled;
  using State = detail::Vec<N>;
  using Interpolant = StepInterpolant<NC>;

  DormandPrince(System sys, double t0, const State& y0, Tolerances tol)
      : sys_(std::move(sys)), tol_(tol), t_(t0), y_(y0),
        linear_step_(std::pow(3600.0 * tol.rel, 0.2)) {
    sys_(t_, y_, k1_);
  }

  double time() const { return t_; }
  const State& state() const { return y_; }
  std::size_t accepted_steps() const { return accepted_; }
  std::size_t rejected_steps() const { return rejected_; }

  void advance_to(double t_end) {
    advance_to(t_end, [](const Interpolant&) {});
  }

  // Integrates up to exactly t_end (> time()). The observer is called with the
  // dense interpolant of every accepted step.
  template <class Observer> void advance_to(double t_end, Observer&& observer) {
    using T = detail::DopriTableau;
    if (!(t_end > t_)) return;
    for (std::size_t i = 0; i < NC; ++i)
      if (!std::isfinite(y_[i]))
        throw StepUnderflow("non-finite state at t=" + std::to_string(t_));
    if (h_ <= 0.0) h_ = initial_step(t_end - t_);

    State k2, k3, k4, k5, k6, k7, ytmp, ynew;
    bool last_rejected = false;
    while (t_ < t_end) {
      const double remaining = t_end - t_;
      bool clipped = false;
      double h = h_;
      if (h >= remaining) {
        h = remaining;
        clipped = true;
      }
      const double hmin = 16.0 * std::numeric_limits<double>::epsilon() *
                          std::max(1.0, std::abs(t_));
      if (h < hmin && !clipped)
        throw StepUnderflow("adaptive step collapsed to " + std::to_string(h) +
                            " at t=" + std::to_string(t_));

      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y_[i] + h * T::a21 * k1_[i];
      sys_(t_ + T::c2 * h, ytmp, k2);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y_[i] + h * (T::a31 * k1_[i] + T::a32 * k2[i]);
      sys_(t_ + T::c3 * h, ytmp, k3);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y_[i] + h * (T::a41 * k1_[i] + T::a42 * k2[i] + T::a43 * k3[i]);
      sys_(t_ + T::c4 * h, ytmp, k4);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y_[i] + h * (T::a51 * k1_[i] + T::a52 * k2[i] + T::a53 * k3[i] +
                               T::a54 * k4[i]);
      sys_(t_ + T::c5 * h, ytmp, k5);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y_[i] + h * (T::a61 * k1_[i] + T::a62 * k2[i] + T::a63 * k3[i] +
                               T::a64 * k4[i] + T::a65 * k5[i]);
      const double tnew = clipped ? t_end : t_ + h;
      sys_(t_ + h, ytmp, k6);
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y_[i] + h * (T::a71 * k1_[i] + T::a73 * k3[i] + T::a74 * k4[i] +
                               T::a75 * k5[i] + T::a76 * k6[i]);
      sys_(tnew, ynew, k7);

      double err = 0.0;
      for (std::size_t i = 0; i < NC; ++i) {
        const double e = h * (T::e1 * k1_[i] + T::e3 * k3[i] + T::e4 * k4[i] +
                              T::e5 * k5[i] + T::e6 * k6[i] + T::e7 * k7[i]);
        const double sc =
            tol_.abs + tol_.rel * std::max(std::abs(y_[i]), std::abs(ynew[i]));
        err += (e / sc) * (e / sc);
      }
      err = std::sqrt(err / static_cast<double>(NC));

      if (!std::isfinite(err)) {
        ++rejected_;
        h_ = 0.2 * h;
        last_rejected = true;
        if (h_ < hmin)
          throw StepUnderflow("non-finite state near t=" + std::to_string(t_));
        continue;
      }

      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      if (err <= 1.0) {
        fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
        {
          Interpolant dense;
          dense.t0 = t_;
          dense.t1 = tnew;
          for (std::size_t i = 0; i < NC; ++i) {
            const double ydiff = ynew[i] - y_[i];
            const double bspl = h * k1_[i] - ydiff;
            dense.r1[i] = y_[i];
            dense.r2[i] = ydiff;
            dense.r3[i] = bspl;
            dense.r4[i] = ydiff - h * k7[i] - bspl;
            dense.r5[i] = h * (T::d1 * k1_[i] + T::d3 * k3[i] + T::d4 * k4[i] +
                               T::d5 * k5[i] + T::d6 * k6[i] + T::d7 * k7[i]);
          }
          observer(static_cast<const Interpolant&>(dense));
        }
        t_ = tnew;
        y_ = ynew;
        k1_ = k7;
        ++accepted_;
        // A step shortened to hit t_end says nothing about the attainable size.
        double hnext = h * fac;
        if constexpr (requires { sys_.frequency_scale(y_); }) {
          // Keeps the linearized flow resolved when the controlled components
          // carry no error signal (e.g. resting exactly at an equilibrium).
          const double cap = linear_step_ / sys_.frequency_scale(y_);
          hnext = std::min(hnext, cap);
        }
        h_ = clipped ? std::max(h_, hnext) : hnext;
        last_rejected = false;
      } else {
        ++rejected_;
        h_ = h * std::clamp(fac, 0.2, 1.0);
        last_rejected = true;
      }
    }
  }

private:
  double initial_step(double span) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < NC; ++i) {
      const double sc = tol_.abs + tol_.rel * std::abs(y_[i]);
      d0 += (y_[i] / sc) * (y_[i] / sc);
      d1 += (k1_[i] / sc) * (k1_[i] / sc);
    }
    d0 = std::sqrt(d0 / NC);
    d1 = std::sqrt(d1 / NC);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, 0.01);
    return std::min(h, span);
  }

  System sys_;
  Tolerances tol_;
  double t_;
  State y_;
  State k1_{};
  double h_ = 0.0;
  double linear_step_;
  std::size_t accepted_ = 0, rejected_ = 0;
};

} // namespace nlres
