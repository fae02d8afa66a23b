#include "pointflow/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pointflow/errors.hpp"

namespace pointflow {

double compute_separation(std::span<const Vec2> points, const PolygonDomain& domain) {
  if (points.empty()) throw InvalidArgument("compute_separation: empty point set");
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    if (!domain.strictly_contains(p)) throw DomainError("compute_separation: point not strictly inside the domain");
    d = std::min(d, domain.distance_to_boundary(p));
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) d = std::min(d, (points[i] - points[j]).norm());
  return d;
}

DiracSourceSet::DiracSourceSet(std::vector<Vec2> points, const PolygonDomain& domain)
    : points_(std::move(points)), domain_(domain), separation_(compute_separation(points_, domain)) {
  if (!(separation_ > 0.0)) throw InvalidArgument("DiracSourceSet: points must be pairwise distinct");
}

MuckenhouptWeight::MuckenhouptWeight(double alpha, DiracSourceSet sources)
    : alpha_(alpha), sources_(std::move(sources)) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("alpha must lie in (0,2)");
}

MuckenhouptWeight::MuckenhouptWeight(DiracSourceSet sources)
    : alpha_(0.0), sources_(std::move(sources)), unit_(true) {}

MuckenhouptWeight MuckenhouptWeight::unit(DiracSourceSet sources) { return MuckenhouptWeight(std::move(sources)); }

double MuckenhouptWeight::eval(const Vec2& x) const {
  if (unit_) return 1.0;
  const auto& pts = sources_.points();
  if (pts.size() == 1) return std::pow((x - pts.front()).norm(), alpha_);
  const double half = 0.5 * sources_.separation();
  for (const auto& t : pts) {
    const double d = (x - t).norm();
    if (d < half) return std::pow(d, alpha_);
  }
  return 1.0;
}

double MuckenhouptWeight::eval_inverse(const Vec2& x) const {
  const double r = eval(x);
  return r == 0.0 ? kInfinity : 1.0 / r;
}

A2Estimate estimate_a2_characteristic(const MuckenhouptWeight& w, int sample_balls, std::uint64_t seed,
                                      int points_per_ball) {
  if (sample_balls < 1) throw InvalidArgument("estimate_a2_characteristic: sample_balls must be >= 1");
  if (points_per_ball < 1) throw InvalidArgument("estimate_a2_characteristic: points_per_ball must be >= 1");
  const PolygonDomain& domain = w.sources().domain();
  const auto& sources = w.sources().points();

  Vec2 lo = domain.vertices().front(), hi = lo;
  for (const auto& v : domain.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double diam = domain.diameter();

  A2Estimate out;
  out.running_max.reserve(static_cast<std::size_t>(sample_balls));
  double best = 0.0;
  for (int b = 0; b < sample_balls; ++b) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(b + 1));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Vec2 center;
    double dist = 0.0;
    for (int attempt = 0;; ++attempt) {
      if (b % 2 == 0) {
        center = Vec2(lo.x() + unif(rng) * (hi.x() - lo.x()), lo.y() + unif(rng) * (hi.y() - lo.y()));
      } else {
        const auto& t = sources[static_cast<std::size_t>(b / 2) % sources.size()];
        const double r = diam * std::pow(10.0, -4.0 * unif(rng));
        const double phi = 2.0 * std::numbers::pi * unif(rng);
        center = t + r * Vec2(std::cos(phi), std::sin(phi));
      }
      if (domain.strictly_contains(center)) {
        dist = domain.distance_to_boundary(center);
        break;
      }
      if (attempt > 10000) throw InternalError("estimate_a2_characteristic: could not sample a ball center");
    }
    const double radius = dist * (1.0 - unif(rng));  // in (0, dist]

    double sum_w = 0.0, sum_inv = 0.0;
    for (int q = 0; q < points_per_ball; ++q) {
      const double r = radius * std::sqrt(unif(rng));
      const double phi = 2.0 * std::numbers::pi * unif(rng);
      const Vec2 x = center + r * Vec2(std::cos(phi), std::sin(phi));
      sum_w += w.eval(x);
      sum_inv += w.eval_inverse(x);
    }
    const double value = (sum_w / points_per_ball) * (sum_inv / points_per_ball);
    if (std::isfinite(value)) best = std::max(best, value);
    out.running_max.push_back(best);
  }
  out.value = best;
  return out;
}

}  // namespace pointflow
