#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace geopix {

// Smooth Jordan curves that pass exactly through the vertices of 1-5
// prescribed squares. A random harmonic radial profile is bent onto the
// square vertices by a periodic cubic spline fitted to the radius
// corrections at the vertex angles.

struct HarmonicProfile {
  std::vector<double> amplitudes;  // rho_h for h = 1..H
  std::vector<double> phases;      // phi_h, radians

  int harmonic_count() const { return static_cast<int>(amplitudes.size()); }
};

// r(theta) = 1 + sum_h rho_h sin(h theta + phi_h)
inline double sample_radial_profile(const HarmonicProfile& profile, double theta) {
  double r = 1.0;
  for (std::size_t h = 0; h < profile.amplitudes.size(); ++h) {
    r += profile.amplitudes[h] * std::sin(static_cast<double>(h + 1) * theta + profile.phases[h]);
  }
  return r;
}

struct InscribedSquare {
  Point center;
  double side = 0.0;
  double rotation = 0.0;  // [0, 2pi)

  // Counter-clockwise corners.
  std::array<Point, 4> vertices() const {
    const double half = 0.5 * side;
    const std::array<Point, 4> local{Point{-half, -half}, Point{half, -half}, Point{half, half},
                                     Point{-half, half}};
    std::array<Point, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = center + rotate(local[i], rotation);
    return out;
  }
};

// Interpolating cubic spline on the circle [0, 2pi) with C2 continuity across
// the seam. Knots must be strictly increasing inside [0, 2pi).
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline(std::vector<double> knots, std::vector<double> values)
      : knots_(std::move(knots)), values_(std::move(values)) {
    const std::size_t m = knots_.size();
    if (m < 3 || values_.size() != m) throw InvalidInput("periodic spline needs >= 3 knots");
    for (std::size_t i = 0; i + 1 < m; ++i) {
      if (!(knots_[i] < knots_[i + 1])) throw InvalidInput("spline knots must increase");
    }
    if (knots_.front() < 0.0 || knots_.back() >= kTwoPi) {
      throw InvalidInput("spline knots must lie in [0, 2pi)");
    }

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t prev = (i + m - 1) % m, next = (i + 1) % m;
      const double hp = gap(prev), hi = gap(i);
      const auto r = static_cast<Eigen::Index>(i);
      a(r, static_cast<Eigen::Index>(prev)) += hp;
      a(r, r) += 2.0 * (hp + hi);
      a(r, static_cast<Eigen::Index>(next)) += hi;
      rhs(r) = 6.0 * ((values_[next] - values_[i]) / hi - (values_[i] - values_[prev]) / hp);
    }
    const Eigen::VectorXd m2 = a.partialPivLu().solve(rhs);
    second_.assign(m2.data(), m2.data() + m);
  }

  double operator()(double theta) const {
    const std::size_t m = knots_.size();
    double t = std::fmod(theta, kTwoPi);
    if (t < 0) t += kTwoPi;
    // Segment i spans [knot_i, knot_i + gap(i)); the last one wraps.
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t i;
    if (it == knots_.begin()) {
      i = m - 1;
      t += kTwoPi;
    } else {
      i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    }
    const std::size_t j = (i + 1) % m;
    const double h = gap(i);
    const double u = t - knots_[i];
    const double w = h - u;
    return (second_[i] * w * w * w + second_[j] * u * u * u) / (6.0 * h) +
           (values_[i] / h - second_[i] * h / 6.0) * w + (values_[j] / h - second_[j] * h / 6.0) * u;
  }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double gap(std::size_t i) const {
    return i + 1 < knots_.size() ? knots_[i + 1] - knots_[i] : knots_.front() + kTwoPi - knots_.back();
  }

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_;
};

struct CurveGenConfig {
  int min_harmonics = 6;
  int max_harmonics = 30;
  double amplitude = 0.15;  // rho_h = amplitude * U[-1,1] / h
  int samples = 500;
  double min_side = 0.3;
  double max_side = 0.7;
  double square_center_radius = 0.15;
  int min_squares = 1;
  int max_squares = 5;
  double max_translation = 0.5;
  double circle_probability = 0.1;
  double min_knot_separation = 0.5 * kPi / 180.0;
  double fit_extent = 0.95;  // normalized geometry lies in [-fit_extent, fit_extent]^2
  int retry_budget = 200;
};

// world = scale * (raw + translation)
struct Normalization {
  double scale = 1.0;
  Point translation;

  Point apply(Point p) const { return scale * (p + translation); }
};

struct CurveInstance {
  Polyline curve;
  std::vector<InscribedSquare> squares;
  Normalization normalization;
  bool circle = false;
};

inline void validate(const CurveGenConfig& c) {
  if (c.min_harmonics < 1 || c.max_harmonics < c.min_harmonics) throw InvalidInput("bad harmonic range");
  if (c.samples < 16) throw InvalidInput("too few curve samples");
  if (c.min_side <= 0 || c.max_side < c.min_side) throw InvalidInput("bad square side range");
  if (c.min_squares < 1 || c.max_squares < c.min_squares) throw InvalidInput("bad square count range");
  if (c.retry_budget < 1) throw InvalidInput("retry budget must be positive");
}

// True iff no two non-adjacent segments of the closed polyline cross.
inline bool jordan_check(const Polyline& c) {
  if (!c.closed) throw InvalidInput("jordan_check needs a closed polyline");
  const std::size_t n = c.segment_count();
  std::vector<double> lo_x(n), hi_x(n), lo_y(n), hi_y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Segment s = c.segment(i);
    lo_x[i] = std::min(s.a.x, s.b.x);
    hi_x[i] = std::max(s.a.x, s.b.x);
    lo_y[i] = std::min(s.a.y, s.b.y);
    hi_y[i] = std::max(s.a.y, s.b.y);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (hi_x[i] < lo_x[j] || hi_x[j] < lo_x[i] || hi_y[i] < lo_y[j] || hi_y[j] < lo_y[i]) continue;
      if (segment_intersect(c.segment(i), c.segment(j)) == IntersectionKind::Proper) return false;
    }
  }
  return true;
}

namespace detail {

inline HarmonicProfile random_profile(Rng& rng, const CurveGenConfig& cfg) {
  const auto h = rng.uniform_int(cfg.min_harmonics, cfg.max_harmonics);
  HarmonicProfile p;
  for (std::int64_t k = 1; k <= h; ++k) {
    p.amplitudes.push_back(cfg.amplitude * rng.uniform(-1.0, 1.0) / static_cast<double>(k));
    p.phases.push_back(rng.uniform(0.0, kTwoPi));
  }
  return p;
}

struct Knot {
  double theta;
  double radius;
};

inline double polar_angle(Point p) {
  double a = std::atan2(p.y, p.x);
  return a < 0 ? a + kTwoPi : a;
}

// Square vertices as polar knots sorted by angle; empty when two knots are
// closer than the minimum angular separation.
inline std::vector<Knot> square_knots(const std::vector<InscribedSquare>& squares, double min_sep) {
  std::vector<Knot> knots;
  for (const auto& sq : squares) {
    for (const Point& v : sq.vertices()) knots.push_back({polar_angle(v), norm(v)});
  }
  std::sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) { return a.theta < b.theta; });
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double next = i + 1 < knots.size() ? knots[i + 1].theta : knots[0].theta + kTwoPi;
    if (next - knots[i].theta < min_sep) return {};
  }
  return knots;
}

// Uniform angular grid merged with the knot angles, `total` samples overall.
inline std::vector<double> sample_angles(const std::vector<Knot>& knots, int total) {
  const int grid = total - static_cast<int>(knots.size());
  std::vector<double> angles;
  angles.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < grid; ++i) angles.push_back(kTwoPi * i / grid);
  for (const auto& k : knots) angles.push_back(k.theta);
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace detail

inline CurveInstance generate_instance(std::uint64_t seed, const CurveGenConfig& cfg = {}) {
  validate(cfg);
  Rng rng(seed);
  // Drawn once so that retries do not skew the circle fraction.
  const bool circle = rng.bernoulli(cfg.circle_probability);
  for (int attempt = 0; attempt < cfg.retry_budget; ++attempt) {
    const int count = static_cast<int>(rng.uniform_int(cfg.min_squares, cfg.max_squares));

    std::vector<InscribedSquare> squares;
    std::vector<double> angles;
    std::vector<Point> points;
    if (circle) {
      const double side = rng.uniform(cfg.min_side, cfg.max_side);
      for (int i = 0; i < count; ++i) squares.push_back({Point{}, side, rng.uniform(0.0, kTwoPi)});
      const auto knots = detail::square_knots(squares, cfg.min_knot_separation);
      if (knots.empty()) continue;
      const double radius = side / std::sqrt(2.0);
      angles = detail::sample_angles(knots, cfg.samples);
      for (double a : angles) points.push_back({radius * std::cos(a), radius * std::sin(a)});
    } else {
      const HarmonicProfile profile = detail::random_profile(rng, cfg);
      for (int i = 0; i < count; ++i) {
        Point c;
        do {
          c = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        } while (norm(c) > 1.0);
        squares.push_back({cfg.square_center_radius * c, rng.uniform(cfg.min_side, cfg.max_side),
                           rng.uniform(0.0, kTwoPi)});
      }
      const auto knots = detail::square_knots(squares, cfg.min_knot_separation);
      if (knots.empty()) continue;
      std::vector<double> kt, kv;
      for (const auto& k : knots) {
        kt.push_back(k.theta);
        kv.push_back(k.radius - sample_radial_profile(profile, k.theta));
      }
      const PeriodicCubicSpline correction(kt, kv);
      angles = detail::sample_angles(knots, cfg.samples);
      bool positive = true;
      for (double a : angles) {
        const double r = sample_radial_profile(profile, a) + correction(a);
        if (r <= 0.0) {
          positive = false;
          break;
        }
        points.push_back({r * std::cos(a), r * std::sin(a)});
      }
      if (!positive) continue;
    }

    Polyline curve = make_polyline(std::move(points), true);
    if (!jordan_check(curve)) continue;

    Normalization norm_rec;
    norm_rec.translation = {rng.uniform(-cfg.max_translation, cfg.max_translation),
                            rng.uniform(-cfg.max_translation, cfg.max_translation)};
    double extent = 0.0;
    for (const Point& p : curve.points) {
      const Point q = p + norm_rec.translation;
      extent = std::max({extent, std::abs(q.x), std::abs(q.y)});
    }
    norm_rec.scale = std::min(1.0, cfg.fit_extent / extent);
    for (Point& p : curve.points) p = norm_rec.apply(p);
    for (auto& sq : squares) {
      sq.center = norm_rec.apply(sq.center);
      sq.side *= norm_rec.scale;
    }
    return CurveInstance{std::move(curve), std::move(squares), norm_rec, circle};
  }
  throw GenerationFailure("curve generation exhausted its retry budget", seed);
}

}  // namespace geopix
