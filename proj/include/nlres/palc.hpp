#pragma once

// Pseudo-arclength continuation of the solution curve of F(u) = 0,
// F: R^(N+1) -> R^N. Shared by branch and tongue tracing.

#include <cmath>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nlres/errors.hpp"

namespace nlres {

struct StepControl {
  double initial = 0.01;
  double min = 1e-6;
  double max = 0.05;
  double grow = 1.3;
  int grow_after = 4;
};

enum class Termination { RangeExit, Closed, StepCollapse, MaxPoints, Stopped };

std::string_view to_string(Termination t);

struct CorrectorSettings {
  int max_iterations = 10;
  double residual_tol = 1e-10;
  double step_tol = 1e-8;
};

template <int N> class Palc {
public:
  static constexpr int D = N + 1;
  using Vec = Eigen::Matrix<double, D, 1>;
  using Res = Eigen::Matrix<double, N, 1>;
  using Jac = Eigen::Matrix<double, N, D>;
  struct Eval {
    Res F;
    Jac J;
  };
  struct Node {
    Vec u;
    Vec t;  // unit tangent, oriented along the direction of travel
    Eval e;
    double s = 0.0; // arclength travelled from the start node
  };
  // Coordinate `index` of u kept within [lo, hi]; leaving lands on the bound.
  struct Bound {
    int index;
    double lo, hi;
  };
  struct Settings {
    StepControl step;
    CorrectorSettings corrector;
    std::vector<Bound> bounds;
    int max_points = 20000;
    double closure_tol = 1e-7;
    int closure_min_steps = 10;
    double min_cos = 0.9; // smallest accepted cosine between consecutive tangents
  };
  struct Trace {
    std::vector<Node> nodes; // excludes the start node
    Termination end = Termination::MaxPoints;
  };
  // Called for every accepted node; returning false stops the trace.
  using Observer = std::function<bool(const Node& prev, Node& cur)>;

  explicit Palc(std::function<Eval(const Vec&)> eval) : eval_(std::move(eval)) {}

  std::optional<Eval> evaluate(const Vec& u) const {
    try {
      Eval e = eval_(u);
      if (!e.F.allFinite() || !e.J.allFinite()) return std::nullopt;
      return e;
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  }

  // Newton on [F(v); a . v - b] = 0.
  std::optional<Node> correct(Vec v, const Vec& a, double b,
                              const CorrectorSettings& cs) const {
    double last_step = INFINITY;
    double prev_norm = INFINITY;
    for (int it = 0; it <= cs.max_iterations; ++it) {
      auto e = evaluate(v);
      if (!e) return std::nullopt;
      const double rn = e->F.norm();
      const double cn = std::abs(a.dot(v) - b);
      if (it > 0 && rn <= cs.residual_tol && cn <= cs.residual_tol * (1.0 + std::abs(b)) &&
          last_step <= cs.step_tol * (1.0 + v.norm()))
        return Node{v, Vec::Zero(), *e, 0.0};
      if (it >= 2 && rn > 2.0 * prev_norm) return std::nullopt;
      if (it == cs.max_iterations) break;
      prev_norm = rn;
      Eigen::Matrix<double, D, D> M;
      M.template topRows<N>() = e->J;
      M.row(N) = a.transpose();
      Vec rhs;
      rhs.template head<N>() = -e->F;
      rhs(N) = b - a.dot(v);
      const Vec dv = M.fullPivLu().solve(rhs);
      if (!dv.allFinite()) return std::nullopt;
      v += dv;
      last_step = dv.norm();
    }
    return std::nullopt;
  }

  // Unit null vector of J oriented so that ref . t > 0.
  static Vec tangent(const Jac& J, const Vec& ref) {
    Eigen::Matrix<double, D, D> M;
    M.template topRows<N>() = J;
    M.row(N) = ref.transpose();
    Vec rhs = Vec::Zero();
    rhs(N) = 1.0;
    Vec t = M.fullPivLu().solve(rhs);
    if (!t.allFinite() || t.norm() == 0.0) {
      // ref is (nearly) orthogonal to the kernel; fall back on the SVD.
      Eigen::JacobiSVD<Eigen::Matrix<double, D, D>> svd(
          (Eigen::Matrix<double, D, D>() << J, Vec::Zero().transpose()).finished(),
          Eigen::ComputeFullV);
      t = svd.matrixV().col(D - 1);
      if (t.dot(ref) < 0.0) t = -t;
    }
    return t.normalized();
  }

  // Start node at a solution u0 with initial direction hint.
  std::optional<Node> start(const Vec& u0, const Vec& hint) const {
    auto e = evaluate(u0);
    if (!e) return std::nullopt;
    return Node{u0, tangent(e->J, hint), *e, 0.0};
  }

  Trace trace(const Node& first, const Settings& st, const Observer& observer) const {
    Trace out;
    Node cur = first;
    std::optional<Vec> prev_u;
    double h = st.step.initial;
    int successes = 0;
    int steps = 0;
    while (static_cast<int>(out.nodes.size()) < st.max_points) {
      // Secant predictor once two points are known.
      Vec d = cur.t;
      if (prev_u) {
        const Vec sec = cur.u - *prev_u;
        if (sec.norm() > 0.0 && sec.dot(cur.t) > 0.0) d = sec.normalized();
      }

      // Closure: the start node lies within reach ahead.
      if (steps >= st.closure_min_steps) {
        const Vec to_start = first.u - cur.u;
        const double ahead = d.dot(to_start);
        if (ahead > 0.0 && to_start.norm() <= 1.5 * h) {
          auto c = correct(cur.u + ahead * d, d, d.dot(first.u), st.corrector);
          if (c && (c->u - first.u).norm() <= st.closure_tol) {
            Node last = first;
            last.s = cur.s + (first.u - cur.u).norm();
            last.t = tangent(first.e.J, cur.t);
            if (observer) observer(cur, last);
            out.nodes.push_back(last);
            out.end = Termination::Closed;
            return out;
          }
        }
      }

      auto c = correct(cur.u + h * d, d, d.dot(cur.u) + h, st.corrector);
      bool ok = c.has_value();
      if (ok) {
        c->t = tangent(c->e.J, cur.t);
        ok = c->t.dot(cur.t) >= st.min_cos;
      }
      if (!ok) {
        successes = 0;
        h *= 0.5;
        if (h < st.step.min) {
          out.end = Termination::StepCollapse;
          return out;
        }
        continue;
      }
      Node next = *c;

      // Range exit: land exactly on the violated bound.
      bool exit = false;
      for (const Bound& b : st.bounds) {
        const double x = next.u(b.index);
        if (x >= b.lo && x <= b.hi) continue;
        const double target = x < b.lo ? b.lo : b.hi;
        const double frac = (target - cur.u(b.index)) / (x - cur.u(b.index));
        Vec e_i = Vec::Zero();
        e_i(b.index) = 1.0;
        auto landed = correct(cur.u + frac * (next.u - cur.u), e_i, target, st.corrector);
        if (!landed) {
          out.end = Termination::RangeExit;
          return out;
        }
        landed->t = tangent(landed->e.J, cur.t);
        next = *landed;
        exit = true;
        break;
      }

      if (exit && (next.u - cur.u).norm() < 1e-12) {
        out.end = Termination::RangeExit;
        return out;
      }
      next.s = cur.s + (next.u - cur.u).norm();
      if (observer && !observer(cur, next)) {
        out.nodes.push_back(next);
        out.end = Termination::Stopped;
        return out;
      }
      out.nodes.push_back(next);
      if (exit) {
        out.end = Termination::RangeExit;
        return out;
      }
      prev_u = cur.u;
      cur = next;
      ++steps;
      if (++successes >= st.step.grow_after) {
        h = std::min(h * st.step.grow, st.step.max);
        successes = 0;
      }
    }
    out.end = Termination::MaxPoints;
    return out;
  }

  // Joins a backward and a forward trace from the same start node into one
  // list oriented along the forward direction, with arclength from its first
  // node. Returns the offset added to forward arclengths.
  static double merge(const Trace& back, const Node& start, const Trace& fwd,
                      std::vector<Node>& out) {
    const double S = back.nodes.empty() ? 0.0 : back.nodes.back().s;
    out.clear();
    for (auto it = back.nodes.rbegin(); it != back.nodes.rend(); ++it) {
      Node n = *it;
      n.t = -n.t;
      n.s = S - n.s;
      out.push_back(n);
    }
    Node first = start;
    first.s = S;
    out.push_back(first);
    for (Node n : fwd.nodes) {
      n.s += S;
      out.push_back(n);
    }
    return S;
  }

private:
  std::function<Eval(const Vec&)> eval_;
};

} // namespace nlres
