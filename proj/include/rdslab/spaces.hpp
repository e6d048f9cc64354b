#ifndef RDSLAB_SPACES_HPP
#define RDSLAB_SPACES_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

enum class SpaceKind { Circle, ProjectiveLine, Interval, Disk };

// A point in chart coordinates. One-dimensional spaces use x only (y = 0);
// the disk uses both coordinates.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

// Catalog of supported metric spaces. Charts:
//   Circle          x in [0,1), unit circumference, d = min(|dx|, 1-|dx|)
//   ProjectiveLine  angle in [0,pi), d = min(|dt|, pi-|dt|)
//   Interval        x in [0,1], Euclidean
//   Disk            {x^2+y^2 <= 1} in R^2, Euclidean
// Balls are closed: B_r(x) = {y : d(x,y) <= r}.
class Space {
 public:
  static Space circle() { return Space(SpaceKind::Circle); }
  static Space projective_line() { return Space(SpaceKind::ProjectiveLine); }
  static Space interval() { return Space(SpaceKind::Interval); }
  static Space disk() { return Space(SpaceKind::Disk); }

  // Config-facing names: "circle", "rp1", "interval", "disk".
  static Space from_name(std::string_view name) {
    if (name == "circle") return circle();
    if (name == "rp1") return projective_line();
    if (name == "interval") return interval();
    if (name == "disk") return disk();
    throw config_error("unknown space kind '" + std::string(name) +
                       "' (expected circle|rp1|interval|disk)");
  }

  SpaceKind kind() const { return kind_; }

  std::string_view name() const {
    switch (kind_) {
      case SpaceKind::Circle: return "circle";
      case SpaceKind::ProjectiveLine: return "rp1";
      case SpaceKind::Interval: return "interval";
      case SpaceKind::Disk: return "disk";
    }
    return "?";
  }

  int dimension() const { return kind_ == SpaceKind::Disk ? 2 : 1; }

  double diameter() const {
    switch (kind_) {
      case SpaceKind::Circle: return 0.5;
      case SpaceKind::ProjectiveLine: return std::numbers::pi / 2;
      case SpaceKind::Interval: return 1.0;
      case SpaceKind::Disk: return 2.0;
    }
    return 0.0;
  }

  // Total Lebesgue mass of the space in chart coordinates.
  double lebesgue_total() const {
    switch (kind_) {
      case SpaceKind::Circle: return 1.0;
      case SpaceKind::ProjectiveLine: return std::numbers::pi;
      case SpaceKind::Interval: return 1.0;
      case SpaceKind::Disk: return std::numbers::pi;
    }
    return 0.0;
  }

  // Length of the 1-D chart; the two circular spaces wrap at this value.
  double chart_length() const { return lebesgue_total(); }

  bool is_circular() const {
    return kind_ == SpaceKind::Circle || kind_ == SpaceKind::ProjectiveLine;
  }

  bool contains(const Point& p) const {
    switch (kind_) {
      case SpaceKind::Circle: return p.x >= 0.0 && p.x < 1.0 && p.y == 0.0;
      case SpaceKind::ProjectiveLine:
        return p.x >= 0.0 && p.x < std::numbers::pi && p.y == 0.0;
      case SpaceKind::Interval: return p.x >= 0.0 && p.x <= 1.0 && p.y == 0.0;
      case SpaceKind::Disk: return p.x * p.x + p.y * p.y <= 1.0 + 1e-12;
    }
    return false;
  }

  void require_in_chart(const Point& p, const char* where) const {
    if (!contains(p)) {
      throw chart_error(std::string(where) + ": point (" + std::to_string(p.x) + ", " +
                        std::to_string(p.y) + ") outside the " + std::string(name()) +
                        " chart");
    }
  }

  // Wrap a coordinate into the chart of a circular space.
  Point canonical(Point p) const {
    if (is_circular()) {
      const double len = chart_length();
      p.x -= len * std::floor(p.x / len);
      if (p.x >= len) p.x = 0.0;  // guard against rounding at the seam
    }
    return p;
  }

  double distance(const Point& a, const Point& b) const {
    require_in_chart(a, "distance");
    require_in_chart(b, "distance");
    return distance_unchecked(a, b);
  }

  // Same metric without chart validation; inner loops validate atoms once.
  double distance_unchecked(const Point& a, const Point& b) const {
    switch (kind_) {
      case SpaceKind::Circle: {
        double d = std::fabs(a.x - b.x);
        return std::min(d, 1.0 - d);
      }
      case SpaceKind::ProjectiveLine: {
        double d = std::fabs(a.x - b.x);
        return std::min(d, std::numbers::pi - d);
      }
      case SpaceKind::Interval:
        return std::fabs(a.x - b.x);
      case SpaceKind::Disk:
        return std::hypot(a.x - b.x, a.y - b.y);
    }
    return 0.0;
  }

  Point random_point(RngStream& rng) const {
    switch (kind_) {
      case SpaceKind::Circle: return {rng.next_double(), 0.0};
      case SpaceKind::ProjectiveLine: return {rng.next_double() * std::numbers::pi, 0.0};
      case SpaceKind::Interval: return {rng.next_double(), 0.0};
      case SpaceKind::Disk: {
        // Rejection from the bounding square; draw count varies per point but
        // the stream is private to the caller, so replay stays deterministic.
        for (;;) {
          double x = 2.0 * rng.next_double() - 1.0;
          double y = 2.0 * rng.next_double() - 1.0;
          if (x * x + y * y <= 1.0) return {x, y};
        }
      }
    }
    return {};
  }

  friend bool operator==(const Space& a, const Space& b) { return a.kind_ == b.kind_; }

 private:
  explicit Space(SpaceKind kind) : kind_(kind) {}
  SpaceKind kind_;
};

}  // namespace rdslab

#endif
