#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pointflow/geometry.hpp"

namespace pointflow {

/// Separation of a finite point set inside a polygon: the distance to the
/// boundary for a single point, otherwise the smaller of that distance and the
/// minimal pairwise distance. Throws DomainError for points not strictly
/// inside the domain.
double compute_separation(std::span<const Vec2> points, const PolygonDomain& domain);

/// Ordered set of distinct interior points carrying the point forces.
class DiracSourceSet {
 public:
  DiracSourceSet(std::vector<Vec2> points, const PolygonDomain& domain);

  const std::vector<Vec2>& points() const { return points_; }
  const PolygonDomain& domain() const { return domain_; }
  int size() const { return static_cast<int>(points_.size()); }
  double separation() const { return separation_; }

 private:
  std::vector<Vec2> points_;
  PolygonDomain domain_;
  double separation_;
};

/// Distance weight rho = d_t^alpha around the sources.
///
/// With one source the power law holds on the whole domain. With several, it
/// holds inside the open ball of radius separation/2 around each source and
/// rho = 1 elsewhere; the resulting jump at the sphere is kept as is.
class MuckenhouptWeight {
 public:
  /// Requires 0 < alpha < 2.
  MuckenhouptWeight(double alpha, DiracSourceSet sources);

  /// rho = 1 everywhere (alpha = 0); used to compare against unweighted norms.
  static MuckenhouptWeight unit(DiracSourceSet sources);

  double alpha() const { return alpha_; }
  const DiracSourceSet& sources() const { return sources_; }

  double eval(const Vec2& x) const;
  /// 1 / eval(x); +infinity exactly at a source point.
  double eval_inverse(const Vec2& x) const;

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

 private:
  MuckenhouptWeight(DiracSourceSet sources);

  double alpha_;
  DiracSourceSet sources_;
  bool unit_ = false;
};

struct A2Estimate {
  double value = 0.0;                  // max over sampled balls
  std::vector<double> running_max;     // after each ball, in sampling order
};

/// Lower bound on the A2 characteristic of the weight restricted to the
/// domain: max over random balls B contained in the domain of
/// (avg_B rho)(avg_B 1/rho), each average by Monte Carlo. Ball i only depends
/// on (seed, i), so samples are nested across sample_balls. Even-indexed balls
/// have centers uniform in the domain, odd-indexed ones are centered near a
/// source with a log-uniform offset.
A2Estimate estimate_a2_characteristic(const MuckenhouptWeight& w, int sample_balls,
                                      std::uint64_t seed, int points_per_ball = 4000);

}  // namespace pointflow
