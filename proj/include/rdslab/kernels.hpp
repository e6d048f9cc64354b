#ifndef RDSLAB_KERNELS_HPP
#define RDSLAB_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rdslab/errors.hpp"
#include "rdslab/quadrature.hpp"

namespace rdslab {

// Volume of the unit ball in R^k for the supported dimensions.
inline double unit_ball_volume(int k) {
  if (k == 1) return 2.0;
  if (k == 2) return std::numbers::pi;
  throw config_error("k: unsupported dimension " + std::to_string(k) + " (expected 1 or 2)");
}

// Parameters of the cut-off kernel family. The exponent range (0, 1/2) is a
// hard requirement: outside it the potential U loses either integrability or
// the power-law sandwich.
struct KernelParams {
  double alpha;
  double epsilon;
  int k;

  KernelParams(double alpha_, double epsilon_, int k_)
      : alpha(alpha_), epsilon(epsilon_), k(k_) {
    if (!(alpha > 0.0 && alpha < 0.5)) {
      throw config_error("alpha: must lie in (0, 0.5), got " + std::to_string(alpha_));
    }
    if (!(epsilon > 0.0)) {
      throw config_error("epsilon: must be positive, got " + std::to_string(epsilon_));
    }
    unit_ball_volume(k_);
  }
};

// phi_{alpha,eps}(r): r^{-(k+alpha)/2} outside the cut-off, softened to
// eps^{-alpha} r^{-(k-alpha)/2} below it. Continuous at r = eps.
// r = 0 returns +inf; callers that sum over atoms guard the diagonal.
inline double phi_eval(const KernelParams& p, double r) {
  if (r < 0.0) throw chart_error("phi: negative radius");
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  if (r >= p.epsilon) return std::pow(r, -0.5 * (p.k + p.alpha));
  return std::pow(p.epsilon, -p.alpha) * std::pow(r, -0.5 * (p.k - p.alpha));
}

// Closed form U_{alpha,eps}(0) = (L/alpha) eps^{-alpha}. Both branches of
// phi^2 integrate to (surface of S^{k-1})/alpha in polar coordinates, so
// L = 2 k Leb B_1(0): k=1 -> 4, k=2 -> 4 pi.
inline double u_zero(const KernelParams& p) {
  const double L = 2.0 * p.k * unit_ball_volume(p.k);
  return (L / p.alpha) * std::pow(p.epsilon, -p.alpha);
}

namespace detail {

// phi with eps = 0 allowed (pure power law); w > 0.
inline double phi_core(double w, double eps, double exp_out, double exp_in, double eps_pow) {
  if (w >= eps) return std::pow(w, exp_out);
  return eps_pow * std::pow(w, exp_in);
}

struct PhiSpec {
  double eps;
  double exp_out;  // -(k+alpha)/2
  double exp_in;   // -(k-alpha)/2
  double eps_pow;  // eps^{-alpha}

  PhiSpec(double alpha, double eps_, int k)
      : eps(eps_),
        exp_out(-0.5 * (k + alpha)),
        exp_in(-0.5 * (k - alpha)),
        eps_pow(eps_ > 0.0 ? std::pow(eps_, -alpha) : 0.0) {}

  double operator()(double w) const { return phi_core(w, eps, exp_out, exp_in, eps_pow); }
};

inline void append_if_inside(std::vector<double>& pts, double x, double lo, double hi) {
  if (x > lo && x < hi) pts.push_back(x);
}

inline std::vector<double> sorted_unique(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

inline void accumulate(QuadratureResult& out, const QuadratureResult& part) {
  out.value += part.value;
  out.abs_error += part.abs_error;
  out.panels += part.panels;
  out.converged = out.converged && part.converged;
}

// Integrate over the partition induced by `pts`, power-mapping each panel
// that touches a point of `singular` (at most one endpoint per panel).
template <class F>
QuadratureResult integrate_partition(const F& f, const std::vector<double>& pts,
                                     const std::vector<double>& singular, double rel_tol) {
  auto is_singular = [&](double x) {
    return std::find(singular.begin(), singular.end(), x) != singular.end();
  };
  QuadratureResult out;
  out.converged = true;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (!(b > a)) continue;
    if (is_singular(a)) {
      accumulate(out, integrate_power_mapped(f, a, b, false, rel_tol));
    } else if (is_singular(b)) {
      accumulate(out, integrate_power_mapped(f, a, b, true, rel_tol));
    } else {
      accumulate(out, integrate_adaptive(f, {a, b}, rel_tol));
    }
  }
  return out;
}

// Radial profile: U(0) = S_k int_0^inf phi(u)^2 u^{k-1} du with the sphere
// measure S_k = k Leb B_1. Used for r = 0, where the axis through the two
// singular points degenerates.
inline QuadratureResult u_center(double alpha, double eps, int k, double rel_tol) {
  const PhiSpec phi(alpha, eps, k);
  const double sphere = (k == 1) ? 2.0 : 2.0 * std::numbers::pi;
  auto f = [&](double u) {
    double p = phi(u);
    return p * p * (k == 2 ? u : 1.0);
  };
  const double t0 = std::max(8.0 * eps, 1.0);
  QuadratureResult out;
  out.converged = true;
  accumulate(out, integrate_partition(f, sorted_unique({0.0, eps, t0}), {0.0}, rel_tol * 0.5));
  accumulate(out, integrate_log_tail(f, t0, alpha, rel_tol * 0.5));
  out.value *= sphere;
  out.abs_error *= sphere;
  return out;
}

// k = 1: int_R phi(|u|) phi(|u-r|) du with splits at the singular points and
// the cut-off kinks, plus log-mapped power-law tails on both sides.
inline QuadratureResult u_line(double alpha, double eps, double r, double rel_tol) {
  const PhiSpec phi(alpha, eps, 1);
  auto f = [&](double u) { return phi(std::fabs(u)) * phi(std::fabs(u - r)); };
  const double margin = eps + 2.0 * std::max(r, eps);
  const double lo = -margin, hi = r + margin;
  std::vector<double> pts{lo, hi};
  for (double x : {0.0, r, -eps, eps, r - eps, r + eps, 0.5 * r})
    append_if_inside(pts, x, lo, hi);
  QuadratureResult out;
  out.converged = true;
  accumulate(out, integrate_partition(f, sorted_unique(std::move(pts)), {0.0, r}, rel_tol / 3));
  accumulate(out, integrate_log_tail(f, hi, alpha, rel_tol / 3));
  auto f_neg = [&](double u) { return f(-u); };
  accumulate(out, integrate_log_tail(f_neg, -lo, alpha, rel_tol / 3));
  return out;
}

// k = 2: polar coordinates about one singular point with the axis through
// both. The angular factor uses the half-angle form
//   w(psi)^2 = (u-r)^2 + 4 u r sin^2(psi/2),
// which keeps the integrand smooth at both psi endpoints; breakpoints mark
// the cut-off crossing w = eps and grade the psi ~ |u-r|/sqrt(ur) scale.
inline QuadratureResult u_plane(double alpha, double eps, double r, double rel_tol) {
  const PhiSpec phi(alpha, eps, 2);
  const double inner_tol = rel_tol / 3.0;
  bool inner_ok = true;

  auto angular = [&](double u) {
    const double d = u - r;
    if (d == 0.0 && eps == 0.0) {
      // The raw power kernel diverges at coincident points; the sample sits
      // on a measure-zero set and is dropped by the panel rule.
      return std::numeric_limits<double>::infinity();
    }
    const double d2 = d * d;
    const double fourur = 4.0 * u * r;
    auto g = [&](double psi) {
      const double s = std::sin(0.5 * psi);
      return phi(std::sqrt(d2 + fourur * s * s));
    };
    std::vector<double> pts{0.0, std::numbers::pi};
    if (eps > 0.0) {
      const double arg = (eps * eps - d2) / fourur;
      if (arg > 0.0 && arg < 1.0)
        append_if_inside(pts, 2.0 * std::asin(std::sqrt(arg)), 0.0, std::numbers::pi);
    }
    const double psi_scale = std::fabs(d) / std::sqrt(fourur);
    for (double m : {1.0, 8.0, 64.0})
      append_if_inside(pts, m * psi_scale, 0.0, std::numbers::pi);
    pts = sorted_unique(std::move(pts));
    QuadratureResult a = integrate_adaptive(g, std::span<const double>(pts), inner_tol, 4000);
    if (!a.converged) inner_ok = false;
    return 2.0 * a.value;
  };

  auto f = [&](double u) { return phi(u) * u * angular(u); };
  const double hi = r + eps + 2.0 * std::max(r, eps);
  std::vector<double> pts{0.0, hi};
  for (double x : {r, eps, r - eps, r + eps, 0.5 * r})
    append_if_inside(pts, x, 0.0, hi);
  QuadratureResult out;
  out.converged = true;
  accumulate(out,
             integrate_partition(f, sorted_unique(std::move(pts)), {0.0, r}, rel_tol * 0.5));
  accumulate(out, integrate_log_tail(f, hi, alpha, rel_tol * 0.5));
  out.converged = out.converged && inner_ok;
  return out;
}

inline double u_integral(double alpha, double eps, int k, double r, double rel_tol) {
  QuadratureResult q;
  if (r == 0.0) {
    q = u_center(alpha, eps, k, rel_tol);
  } else if (k == 1) {
    q = u_line(alpha, eps, r, rel_tol);
  } else {
    q = u_plane(alpha, eps, r, rel_tol);
  }
  if (!q.converged) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "kernel quadrature did not reach rel tol %.3g (achieved %.3g, %d panels)",
                  rel_tol, q.rel_error(), q.panels);
    throw numerical_error(buf);
  }
  return q.value;
}

}  // namespace detail

// Reference evaluation of U_{alpha,eps}(r) = int phi(|y-x|) phi(|y-z|) dLeb(y)
// with |x - z| = r, by adaptive quadrature to the given relative tolerance.
inline double u_reference(const KernelParams& p, double r, double rel_tol = 1e-8) {
  if (r < 0.0) throw chart_error("u_reference: negative distance");
  return detail::u_integral(p.alpha, p.epsilon, p.k, r, rel_tol);
}

// The eps -> 0 limit constant: c_alpha = int |y|^{-(k+a)/2} |y-e1|^{-(k+a)/2} dy,
// so that U_{alpha,eps}(r) -> c_alpha r^{-alpha}.
inline double c_alpha_limit(double alpha, int k, double rel_tol = 1e-8) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw config_error("alpha: must lie in (0, 0.5), got " + std::to_string(alpha));
  }
  unit_ball_volume(k);
  return detail::u_integral(alpha, 0.0, k, 1.0, rel_tol);
}

struct KernelGridSpec {
  double t_min = 1e-4;
  double t_max = 1e4;
  int points = 512;
};

// Precomputed profile of U_{alpha,1} on a log-spaced grid. Every
// U_{alpha,eps}(r) reduces to it through the scaling identity
// U_{alpha,eps}(r) = eps^{-alpha} U_{alpha,1}(r/eps), so one table serves all
// cut-off lengths. Interpolation is monotone piecewise-cubic in log-log
// coordinates; below t_min the profile blends linearly (in t) into the exact
// value U(0) = L/alpha, above t_max it continues as the power law
// c_alpha t^{-alpha}. Immutable after construction.
class KernelTable {
 public:
  static KernelTable build(double alpha, int k, KernelGridSpec spec = {},
                           double quadrature_tol = 1e-8) {
    KernelParams params(alpha, 1.0, k);  // validates alpha, k
    if (!(spec.t_min > 0.0 && spec.t_min <= 1.0 && spec.t_max >= 1.0))
      throw config_error("grid: need 0 < t_min <= 1 <= t_max");
    if (spec.points < 64) throw config_error("grid: need at least 64 points");

    KernelTable t;
    t.alpha_ = alpha;
    t.k_ = k;
    t.spec_ = spec;
    t.tol_ = quadrature_tol;
    t.u_zero_ = rdslab::u_zero(params);
    t.c_alpha_ = c_alpha_limit(alpha, k, quadrature_tol);
    t.c_alpha_prime_ = u_reference(params, 1.0, quadrature_tol);
    const int n = spec.points;
    t.t_.resize(n);
    t.values_.resize(n);
    const double log_min = std::log(spec.t_min);
    const double dlog = (std::log(spec.t_max) - log_min) / (n - 1);
    for (int i = 0; i < n; ++i) {
      t.t_[i] = std::exp(log_min + i * dlog);
      t.values_[i] = u_reference(params, t.t_[i], quadrature_tol);
    }
    t.finalize();
    return t;
  }

  double alpha() const { return alpha_; }
  int dim() const { return k_; }
  const KernelGridSpec& grid_spec() const { return spec_; }
  double quadrature_tol() const { return tol_; }
  const std::vector<double>& grid() const { return t_; }
  const std::vector<double>& values() const { return values_; }
  double c_alpha() const { return c_alpha_; }
  double c_alpha_prime() const { return c_alpha_prime_; }

  // U_{alpha,eps}(0) for the given cut-off.
  double u_zero(double epsilon) const { return u_zero_ * std::pow(epsilon, -alpha_); }

  // U_{alpha,1}(t).
  double evaluate_unit(double t) const {
    if (t <= 0.0) return u_zero_;
    if (t < spec_.t_min) {
      return u_zero_ + (values_.front() - u_zero_) * (t / spec_.t_min);
    }
    if (t > spec_.t_max) {
      return c_alpha_ * std::pow(t, -alpha_);
    }
    const double w = std::log(t);
    int j = static_cast<int>((w - log_tmin_) * inv_dlog_);
    j = std::clamp(j, 0, static_cast<int>(t_.size()) - 2);
    // nudge against rounding at cell boundaries
    if (w < log_t_[j] && j > 0) --j;
    if (w > log_t_[j + 1] && j + 2 < static_cast<int>(t_.size())) ++j;
    const double h = log_t_[j + 1] - log_t_[j];
    const double s = (w - log_t_[j]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double g = (2 * s3 - 3 * s2 + 1) * log_values_[j] +
                     (s3 - 2 * s2 + s) * h * slopes_[j] +
                     (-2 * s3 + 3 * s2) * log_values_[j + 1] +
                     (s3 - s2) * h * slopes_[j + 1];
    return std::exp(g);
  }

  // U_{alpha,eps}(r) through the scaling identity.
  double evaluate(double epsilon, double r) const {
    if (!(epsilon > 0.0)) throw config_error("epsilon: must be positive");
    if (r < 0.0) throw chart_error("u_eval: negative distance");
    return std::pow(epsilon, -alpha_) * evaluate_unit(r / epsilon);
  }

  void save_csv(std::ostream& os) const {
    char buf[64];
    auto hex = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%a", v);
      return std::string(buf);
    };
    os << "rdslab_kernel_table,1\n";
    os << "alpha," << hex(alpha_) << "\n";
    os << "k," << k_ << "\n";
    os << "t_min," << hex(spec_.t_min) << "\n";
    os << "t_max," << hex(spec_.t_max) << "\n";
    os << "points," << spec_.points << "\n";
    os << "quadrature_tol," << hex(tol_) << "\n";
    os << "u_zero," << hex(u_zero_) << "\n";
    os << "c_alpha," << hex(c_alpha_) << "\n";
    os << "c_alpha_prime," << hex(c_alpha_prime_) << "\n";
    os << "t,value\n";
    for (std::size_t i = 0; i < t_.size(); ++i) {
      os << hex(t_[i]) << "," << hex(values_[i]) << "\n";
    }
  }

  void save_csv_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write kernel table cache: " + path);
    save_csv(os);
  }

  static KernelTable load_csv(std::istream& is) {
    auto next_field = [&](const char* key) {
      std::string line;
      if (!std::getline(is, line)) throw config_error("kernel table cache: truncated file");
      auto comma = line.find(',');
      if (comma == std::string::npos || line.substr(0, comma) != key)
        throw config_error("kernel table cache: expected '" + std::string(key) + "' row");
      return line.substr(comma + 1);
    };
    auto parse_hex = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };

    std::string magic = next_field("rdslab_kernel_table");
    if (magic != "1") throw config_error("kernel table cache: unsupported version " + magic);
    KernelTable t;
    t.alpha_ = parse_hex(next_field("alpha"));
    t.k_ = std::stoi(next_field("k"));
    t.spec_.t_min = parse_hex(next_field("t_min"));
    t.spec_.t_max = parse_hex(next_field("t_max"));
    t.spec_.points = std::stoi(next_field("points"));
    t.tol_ = parse_hex(next_field("quadrature_tol"));
    t.u_zero_ = parse_hex(next_field("u_zero"));
    t.c_alpha_ = parse_hex(next_field("c_alpha"));
    t.c_alpha_prime_ = parse_hex(next_field("c_alpha_prime"));
    std::string header;
    std::getline(is, header);
    if (header != "t,value") throw config_error("kernel table cache: missing data header");
    t.t_.reserve(t.spec_.points);
    t.values_.reserve(t.spec_.points);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      auto comma = line.find(',');
      if (comma == std::string::npos) throw config_error("kernel table cache: bad data row");
      t.t_.push_back(parse_hex(line.substr(0, comma)));
      t.values_.push_back(parse_hex(line.substr(comma + 1)));
    }
    if (static_cast<int>(t.t_.size()) != t.spec_.points)
      throw config_error("kernel table cache: row count mismatch");
    t.finalize();
    return t;
  }

  static KernelTable load_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot read kernel table cache: " + path);
    return load_csv(is);
  }

  // True when a cached table was built with the requested key.
  bool matches(double alpha, int k, const KernelGridSpec& spec, double quadrature_tol) const {
    return alpha_ == alpha && k_ == k && spec_.t_min == spec.t_min &&
           spec_.t_max == spec.t_max && spec_.points == spec.points && tol_ == quadrature_tol;
  }

 private:
  KernelTable() = default;

  void finalize() {
    const int n = static_cast<int>(t_.size());
    // Quadrature noise may leave microscopic up-jumps on the flat left end;
    // anything larger than the tolerance budget means a real defect.
    for (int i = 1; i < n; ++i) {
      if (values_[i] > values_[i - 1]) {
        if (values_[i] > values_[i - 1] * (1.0 + 50.0 * tol_))
          throw numerical_error("kernel table: non-monotone profile beyond tolerance");
        values_[i] = values_[i - 1];
      }
    }
    log_t_.resize(n);
    log_values_.resize(n);
    for (int i = 0; i < n; ++i) {
      log_t_[i] = std::log(t_[i]);
      log_values_[i] = std::log(values_[i]);
    }
    log_tmin_ = log_t_.front();
    inv_dlog_ = (n - 1) / (log_t_.back() - log_t_.front());
    compute_pchip_slopes();
  }

  // Fritsch-Carlson monotone slopes in (log t, log U).
  void compute_pchip_slopes() {
    const int n = static_cast<int>(t_.size());
    slopes_.assign(n, 0.0);
    std::vector<double> d(n - 1), h(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
      h[i] = log_t_[i + 1] - log_t_[i];
      d[i] = (log_values_[i + 1] - log_values_[i]) / h[i];
    }
    for (int i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        slopes_[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        slopes_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    auto endpoint = [](double h0, double h1, double d0, double d1) {
      double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (m * d0 <= 0.0) return 0.0;
      if (std::fabs(m) > 3.0 * std::fabs(d0)) return 3.0 * d0;
      return m;
    };
    slopes_[0] = endpoint(h[0], h[1], d[0], d[1]);
    slopes_[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }

  double alpha_ = 0.0;
  int k_ = 1;
  KernelGridSpec spec_;
  double tol_ = 0.0;
  double u_zero_ = 0.0;
  double c_alpha_ = 0.0;
  double c_alpha_prime_ = 0.0;
  std::vector<double> t_, values_, log_t_, log_values_, slopes_;
  double log_tmin_ = 0.0, inv_dlog_ = 0.0;
};

// Dense resampling of U_{alpha,eps} for one fixed eps, for pairwise-energy
// hot loops: two uniform grids (fine below 8 eps, coarser above) evaluated by
// a plain cubic Hermite with centered-difference slopes. Deviation from the
// table interpolant stays below ~1e-7 relative; callers that need the exact
// table values use KernelTable::evaluate directly.
class FastKernelEvaluator {
 public:
  FastKernelEvaluator(const KernelTable& table, double epsilon, double r_max) {
    split_ = 8.0 * epsilon;
    r_max_ = std::max(r_max, 2.0 * split_);
    const int na = 1024;
    const int nb = std::min(1 << 22, static_cast<int>((r_max_ - split_) / (0.5 * epsilon)) + 2);
    build_grid(table, epsilon, 0.0, split_, na, ya_, da_);
    build_grid(table, epsilon, split_, r_max_, std::max(nb, 16), yb_, db_);
    inv_ha_ = (ya_.size() - 1) / split_;
    inv_hb_ = (yb_.size() - 1) / (r_max_ - split_);
  }

  double operator()(double r) const {
    const std::vector<double>*ys, *ds;
    double s;
    if (r <= split_) {
      s = r * inv_ha_;
      ys = &ya_;
      ds = &da_;
    } else if (r <= r_max_) {
      s = (r - split_) * inv_hb_;
      ys = &yb_;
      ds = &db_;
    } else {
      return yb_.back();  // clamp; distances never exceed diameter
    }
    int j = static_cast<int>(s);
    if (j >= static_cast<int>(ys->size()) - 1) j = static_cast<int>(ys->size()) - 2;
    const double u = s - j;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * (*ys)[j] + (u3 - 2 * u2 + u) * (*ds)[j] +
           (-2 * u3 + 3 * u2) * (*ys)[j + 1] + (u3 - u2) * (*ds)[j + 1];
  }

 private:
  void build_grid(const KernelTable& table, double epsilon, double lo, double hi, int n,
                  std::vector<double>& y, std::vector<double>& d) {
    y.resize(n);
    d.resize(n);
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) y[i] = table.evaluate(epsilon, lo + i * h);
    for (int i = 1; i + 1 < n; ++i) d[i] = 0.5 * (y[i + 1] - y[i - 1]);
    d[0] = y[1] - y[0];
    d[n - 1] = y[n - 1] - y[n - 2];
  }

  double split_ = 0.0, r_max_ = 0.0, inv_ha_ = 0.0, inv_hb_ = 0.0;
  std::vector<double> ya_, da_, yb_, db_;
};

}  // namespace rdslab

#endif
