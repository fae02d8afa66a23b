#include "pointflow/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pointflow/errors.hpp"

namespace pointflow {

OptimizeReport projected_gradient(const ReducedProblem& problem, const ControlVector& u0, const BoxConstraints& box,
                                  const OptimizeOptions& opts) {
  if (!box.contains(u0)) throw InvalidArgument("projected_gradient: initial control is not feasible");
  OptimizeReport rep;
  Evaluation cur = problem.evaluate(u0, true);
  double vi = vi_residual(cur.u, cur.gradient, box);
  rep.iterates.push_back({cur.u, cur.cost, vi, 0.0});

  ControlVector prev_u;
  GradientVector prev_g;
  while (vi > opts.tol && rep.iterations < opts.max_iters) {
    double step = opts.initial_step;
    if (opts.barzilai_borwein && prev_u.size() > 0) {
      const Eigen::VectorXd s = cur.u - prev_u;
      const Eigen::VectorXd y = cur.gradient - prev_g;
      const double sy = s.dot(y);
      if (sy > 0.0) step = std::clamp(s.squaredNorm() / sy, 1e-12, 1e12);
    }

    bool accepted = false;
    for (int b = 0; b <= opts.max_backtracks; ++b, step *= opts.backtrack) {
      const ControlVector trial = project_box(cur.u - step * cur.gradient, box);
      const double decrease = cur.gradient.dot(trial - cur.u);
      if (trial == cur.u) break;
      try {
        Evaluation next = problem.evaluate(trial, false, &cur);
        if (next.cost <= cur.cost + opts.sufficient_decrease * decrease) {
          problem.add_gradient(next);
          prev_u = cur.u;
          prev_g = cur.gradient;
          cur = std::move(next);
          accepted = true;
          break;
        }
      } catch (const NonConvergence&) {
        ++rep.failed_state_solves;
      } catch (const SingularSystem&) {
        ++rep.failed_state_solves;
      }
      ++rep.backtracks;
    }
    if (!accepted) {
      rep.message = "line search failed";
      break;
    }
    ++rep.iterations;
    vi = vi_residual(cur.u, cur.gradient, box);
    rep.iterates.push_back({cur.u, cur.cost, vi, step});
  }

  rep.u = cur.u;
  rep.cost = cur.cost;
  rep.gradient = cur.gradient;
  rep.vi_residual = vi;
  rep.converged = vi <= opts.tol;
  if (rep.message.empty()) rep.message = rep.converged ? "converged" : "iteration budget exhausted";
  return rep;
}

SecondOrderReport check_ssc(const ReducedProblem& problem, const ControlVector& u, const BoxConstraints& box,
                            const SscOptions& opts) {
  if (!(opts.tau > 0.0) || !(opts.tol_active >= 0.0)) throw InvalidArgument("check_ssc: tau must be positive");
  const Evaluation ev = problem.evaluate(u, true);
  SecondOrderReport r;
  r.gradient = ev.gradient;
  r.vi_residual = vi_residual(u, ev.gradient, box);
  if (r.vi_residual > opts.stationarity_tol) {
    throw InvalidArgument("check_ssc: control is not stationary (vi_residual " + std::to_string(r.vi_residual) + ")");
  }
  r.hessian = problem.assemble_reduced_hessian(ev);
  r.bound_state = bound_states(u, box, opts.active_rel_tol);
  r.cone = critical_cone(u, ev.gradient, box, opts.tol_active, opts.active_rel_tol);
  r.tau_cone = critical_cone(u, ev.gradient, box, opts.tau, opts.active_rel_tol);
  r.tau = opts.tau;

  const auto tau_min = cone_min_rayleigh(r.hessian, r.tau_cone);
  r.kappa = tau_min.value;
  r.kappa_direction = tau_min.direction;
  r.ssc_holds = r.kappa >= opts.kappa_min;

  r.necessary_min = cone_min_rayleigh(r.hessian, r.cone).value;
  r.necessary_holds = r.necessary_min >= -1e-8 * r.hessian.norm();
  return r;
}

GrowthReport quadratic_growth_probe(const ReducedProblem& problem, const ControlVector& u, const BoxConstraints& box,
                                    double sigma, int samples, std::uint64_t seed) {
  if (!(sigma > 0.0) || samples < 1) throw InvalidArgument("quadratic_growth_probe: need sigma > 0 and samples >= 1");
  const Evaluation base = problem.evaluate(u, false);
  const double j0 = base.cost;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const int n = static_cast<int>(u.size());

  GrowthReport g;
  g.min_ratio = std::numeric_limits<double>::infinity();
  while (g.samples < samples) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = normal(rng);
    const double radius = sigma * std::pow(unif(rng), 1.0 / n);
    const ControlVector us = project_box(u + radius * d.normalized(), box);
    const double dist2 = (us - u).squaredNorm();
    if (dist2 < 1e-4 * sigma * sigma) continue;
    const double ratio = 2.0 * (problem.evaluate(us, false, &base).cost - j0) / dist2;
    g.ratios.push_back(ratio);
    g.min_ratio = std::min(g.min_ratio, ratio);
    if (ratio < 0.0) ++g.violations;
    ++g.samples;
  }
  g.mu = std::max(0.0, g.min_ratio);
  return g;
}

}  // namespace pointflow
