#include "pointflow/controls.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "pointflow/errors.hpp"

namespace pointflow {

std::vector<Vec2> control_pairs(const ControlVector& u) {
  if (u.size() % 2 != 0) throw InvalidArgument("control vector must have even length");
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(u.size() / 2));
  for (int t = 0; t < u.size() / 2; ++t) out.push_back(control_at(u, t));
  return out;
}

BoxConstraints::BoxConstraints(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0 || lower_.size() % 2 != 0) {
    throw InvalidArgument("box bounds must have equal, even, nonzero length");
  }
  for (int i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i])) {
      throw InvalidArgument("box bounds need lower < upper componentwise (component " + std::to_string(i) + ")");
    }
  }
}

BoxConstraints BoxConstraints::uniform(int sources, double a, double b) {
  return BoxConstraints(Eigen::VectorXd::Constant(2 * sources, a), Eigen::VectorXd::Constant(2 * sources, b));
}

bool BoxConstraints::contains(const ControlVector& u) const {
  return u.size() == dim() && (u.array() >= lower_.array()).all() && (u.array() <= upper_.array()).all();
}

ControlVector project_box(const ControlVector& v, const BoxConstraints& box) {
  if (v.size() != box.dim()) throw InvalidArgument("project_box: size mismatch");
  return v.cwiseMax(box.lower()).cwiseMin(box.upper());
}

double vi_residual(const ControlVector& u, const GradientVector& psi, const BoxConstraints& box) {
  if (psi.size() != u.size()) throw InvalidArgument("vi_residual: size mismatch");
  return (u - project_box(u - psi, box)).norm();
}

std::vector<BoundState> bound_states(const ControlVector& u, const BoxConstraints& box, double rel_tol) {
  if (u.size() != box.dim()) throw InvalidArgument("bound_states: size mismatch");
  std::vector<BoundState> s(static_cast<std::size_t>(u.size()), BoundState::inactive);
  for (int i = 0; i < u.size(); ++i) {
    const double tol = rel_tol * (box.upper()[i] - box.lower()[i]);
    if (u[i] <= box.lower()[i] + tol) {
      s[static_cast<std::size_t>(i)] = BoundState::lower;
    } else if (u[i] >= box.upper()[i] - tol) {
      s[static_cast<std::size_t>(i)] = BoundState::upper;
    }
  }
  return s;
}

KktSignReport kkt_sign_report(const ControlVector& u, const GradientVector& psi, const BoxConstraints& box,
                              double tol) {
  if (psi.size() != u.size()) throw InvalidArgument("kkt_sign_report: size mismatch");
  KktSignReport r;
  r.state = bound_states(u, box);
  r.violated.assign(r.state.size(), false);
  for (std::size_t i = 0; i < r.state.size(); ++i) {
    const double g = psi[static_cast<Eigen::Index>(i)];
    bool bad = false;
    switch (r.state[i]) {
      case BoundState::lower: bad = g < -tol; break;
      case BoundState::upper: bad = g > tol; break;
      case BoundState::inactive: bad = std::abs(g) > tol; break;
    }
    r.violated[i] = bad;
    r.violations += bad ? 1 : 0;
  }
  return r;
}

bool CriticalCone::is_trivial() const {
  for (auto c : constraint) {
    if (c != ConeConstraint::zero) return false;
  }
  return true;
}

bool CriticalCone::contains(const Eigen::VectorXd& v, double tol) const {
  if (v.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    switch (constraint[static_cast<std::size_t>(i)]) {
      case ConeConstraint::zero: if (std::abs(v[i]) > tol) return false; break;
      case ConeConstraint::nonnegative: if (v[i] < -tol) return false; break;
      case ConeConstraint::nonpositive: if (v[i] > tol) return false; break;
      case ConeConstraint::free: break;
    }
  }
  return true;
}

CriticalCone critical_cone(const ControlVector& u, const GradientVector& psi, const BoxConstraints& box,
                           double threshold, double active_rel_tol) {
  if (psi.size() != u.size()) throw InvalidArgument("critical_cone: size mismatch");
  if (!(threshold >= 0.0)) throw InvalidArgument("critical_cone: threshold must be nonnegative");
  const auto states = bound_states(u, box, active_rel_tol);
  CriticalCone cone;
  cone.threshold = threshold;
  cone.constraint.assign(states.size(), ConeConstraint::free);
  cone.strongly_active.assign(states.size(), false);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (std::abs(psi[static_cast<Eigen::Index>(i)]) > threshold) {
      cone.constraint[i] = ConeConstraint::zero;
      cone.strongly_active[i] = true;
    } else if (states[i] == BoundState::lower) {
      cone.constraint[i] = ConeConstraint::nonnegative;
    } else if (states[i] == BoundState::upper) {
      cone.constraint[i] = ConeConstraint::nonpositive;
    }
  }
  return cone;
}

ConeMinimum cone_min_rayleigh(const Eigen::MatrixXd& h, const CriticalCone& cone) {
  const int n = cone.dim();
  if (h.rows() != n || h.cols() != n) throw InvalidArgument("cone_min_rayleigh: matrix does not match the cone");
  std::vector<int> restricted;
  std::vector<int> always_free;
  for (int i = 0; i < n; ++i) {
    const auto c = cone.constraint[static_cast<std::size_t>(i)];
    if (c == ConeConstraint::free) always_free.push_back(i);
    if (c == ConeConstraint::nonnegative || c == ConeConstraint::nonpositive) restricted.push_back(i);
  }
  if (restricted.size() > 20) throw InvalidArgument("cone_min_rayleigh: too many sign-restricted components");

  ConeMinimum best;
  const Eigen::MatrixXd hs = 0.5 * (h + h.transpose());
  const std::size_t faces = std::size_t{1} << restricted.size();
  for (std::size_t mask = 0; mask < faces; ++mask) {
    std::vector<int> idx = always_free;
    for (std::size_t r = 0; r < restricted.size(); ++r) {
      if (mask & (std::size_t{1} << r)) idx.push_back(restricted[r]);
    }
    if (idx.empty()) continue;
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) sub(a, b) = hs(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    for (int e = 0; e < m; ++e) {
      if (es.eigenvalues()[e] >= best.value) break;
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      for (int a = 0; a < m; ++a) v[idx[static_cast<std::size_t>(a)]] = es.eigenvectors()(a, e);
      const double tol = 1e-12;
      if (cone.contains(v, tol)) {
        best = {es.eigenvalues()[e], v};
        break;
      }
      if (cone.contains(-v, tol)) {
        best = {es.eigenvalues()[e], -v};
        break;
      }
    }
  }
  return best;
}

}  // namespace pointflow
