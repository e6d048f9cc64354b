#ifndef RDSLAB_QUADRATURE_HPP
#define RDSLAB_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

#include "rdslab/errors.hpp"

namespace rdslab {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;  // estimated
  int panels = 0;
  bool converged = false;

  double rel_error() const {
    return value == 0.0 ? abs_error : std::fabs(abs_error / value);
  }
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss-Legendre on [-1,1].
// Nodes are symmetric; only the nonnegative half is tabulated.
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGK15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

// Weights of the embedded 7-point Gauss rule (at nodes 1, 3, 5, 7 above).
inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& error) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  // Deep refinement against an integrable endpoint singularity can round a
  // node onto the singular point itself; a non-finite sample there carries
  // zero measure, so drop it rather than poison the sum.
  auto sample = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  double kronrod = 0.0;
  double gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kGK15Nodes[i];
    const double f1 = sample(c - dx);
    const double f2 = (i == 7) ? 0.0 : sample(c + dx);
    const double pair = (i == 7) ? f1 : f1 + f2;
    kronrod += kGK15Weights[i] * pair;
    if (i % 2 == 1) gauss += kG7Weights[i / 2] * pair;
  }
  value = kronrod * h;
  // Conservative estimate: |K15 - G7|. The sharpened QUADPACK variant
  // underestimates on panels with endpoint singularities, which dominate
  // these integrands.
  error = std::fabs((kronrod - gauss) * h);
  if (!std::isfinite(error)) error = std::fabs(value);
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace detail

// Globally adaptive quadrature over the union of [breakpoints[i], breakpoints[i+1]].
// Panels are refined worst-first until the total error estimate drops below
// rel_tol * |integral| (or abs_floor, whichever is larger). Breakpoints must
// be increasing; put them at singularities and kinks of the integrand --
// panel endpoints are never evaluated, so endpoint singularities grade
// automatically under bisection.
template <class F>
QuadratureResult integrate_adaptive(const F& f, std::span<const double> breakpoints,
                                    double rel_tol, int max_panels = 100000,
                                    double abs_floor = 0.0) {
  QuadratureResult result;
  if (breakpoints.size() < 2) return result;

  std::priority_queue<detail::Panel> queue;
  double total = 0.0;
  double total_err = 0.0;
  int panels = 0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    double a = breakpoints[i], b = breakpoints[i + 1];
    if (!(b > a)) continue;
    detail::Panel p{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, p.value, p.error);
    total += p.value;
    total_err += p.error;
    queue.push(p);
    ++panels;
  }

  auto good_enough = [&]() {
    return total_err <= std::max(rel_tol * std::fabs(total), abs_floor);
  };

  while (!good_enough() && panels < max_panels && !queue.empty()) {
    detail::Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) continue;  // interval exhausted
    detail::Panel left{worst.a, mid, 0.0, 0.0};
    detail::Panel right{mid, worst.b, 0.0, 0.0};
    detail::gk15(f, left.a, left.b, left.value, left.error);
    detail::gk15(f, right.a, right.b, right.value, right.error);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++panels;
  }

  result.value = total;
  result.abs_error = total_err;
  result.panels = panels;
  result.converged = good_enough() && std::isfinite(total);
  return result;
}

template <class F>
QuadratureResult integrate_adaptive(const F& f, std::initializer_list<double> breakpoints,
                                    double rel_tol, int max_panels = 100000,
                                    double abs_floor = 0.0) {
  std::vector<double> pts(breakpoints);
  return integrate_adaptive(f, std::span<const double>(pts), rel_tol, max_panels, abs_floor);
}

// Integral over [a, b] of an integrand with an algebraic singularity at one
// endpoint. The substitution u = a + (b-a) s^q (resp. mirrored at b) weakens
// an u^{-beta} endpoint singularity to s^{q(1-beta)-1} and anchors it at
// s = 0, where bisection has the full subnormal range to grade into.
template <class F>
QuadratureResult integrate_power_mapped(const F& f, double a, double b, bool singular_at_b,
                                        double rel_tol, int max_panels = 100000, int q = 8) {
  const double width = b - a;
  const double dq = static_cast<double>(q);
  auto mapped = [&](double s) {
    double sq = std::pow(s, q - 1);
    double u = singular_at_b ? b - width * sq * s : a + width * sq * s;
    return f(u) * width * dq * sq;
  };
  return integrate_adaptive(mapped, {0.0, 1.0}, rel_tol, max_panels);
}

// Integral over [t0, inf) of an integrand decaying like u^{-(1+decay)},
// decay > 0, via u = t0 e^s. The transformed integrand decays like
// e^{-decay s}; the truncation at s_max contributes < e^{-35} relatively.
template <class F>
QuadratureResult integrate_log_tail(const F& f, double t0, double decay, double rel_tol,
                                    int max_panels = 100000) {
  const double s_max = std::min(1400.0, 35.0 / std::max(decay, 0.025));
  auto mapped = [&](double s) {
    const double u = t0 * std::exp(s);
    return f(u) * u;
  };
  return integrate_adaptive(mapped, {0.0, 0.5 * s_max, s_max}, rel_tol, max_panels);
}

}  // namespace rdslab

#endif
