#include "pointflow/taylor_hood.hpp"

#include "pointflow/errors.hpp"

namespace pointflow {

std::array<double, 6> P2Basis::values(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[0] * l[1],         4.0 * l[1] * l[2],         4.0 * l[2] * l[0]};
}

std::array<Vec2, 6> P2Basis::gradients(const std::array<double, 3>& l, const ElementGeometry& g) {
  const auto& d = g.grad_lambda;
  return {(4.0 * l[0] - 1.0) * d[0],         (4.0 * l[1] - 1.0) * d[1],         (4.0 * l[2] - 1.0) * d[2],
          4.0 * (l[0] * d[1] + l[1] * d[0]), 4.0 * (l[1] * d[2] + l[2] * d[1]), 4.0 * (l[2] * d[0] + l[0] * d[2])};
}

TaylorHoodSpace::TaylorHoodSpace(std::shared_ptr<const TriMesh> mesh)
    : mesh_(std::move(mesh)), locator_(*mesh_) {
  const int nn = mesh_->num_nodes();
  boundary_mask_.assign(static_cast<std::size_t>(n_u()), false);
  auto mark = [this](int s) {
    for (int c = 0; c < 2; ++c) boundary_mask_[static_cast<std::size_t>(vdof(s, c))] = true;
  };
  for (int i = 0; i < nn; ++i)
    if (mesh_->boundary_node_flags()[static_cast<std::size_t>(i)]) mark(i);
  for (int e = 0; e < mesh_->num_edges(); ++e)
    if (mesh_->is_boundary_edge(e)) mark(nn + e);
  for (int i = 0; i < n_u(); ++i)
    if (boundary_mask_[static_cast<std::size_t>(i)]) boundary_dofs_.push_back(i);
}

std::array<int, 6> TaylorHoodSpace::cell_dofs(int k) const {
  const auto& t = mesh_->triangles()[static_cast<std::size_t>(k)];
  const auto& e = mesh_->triangle_edges(k);
  const int nn = mesh_->num_nodes();
  return {t[0], t[1], t[2], nn + e[0], nn + e[1], nn + e[2]};
}

ElementGeometry TaylorHoodSpace::geometry(int k) const {
  const auto& t = mesh_->triangles()[static_cast<std::size_t>(k)];
  ElementGeometry g;
  for (int l = 0; l < 3; ++l) g.vertices[static_cast<std::size_t>(l)] = mesh_->nodes()[static_cast<std::size_t>(t[l])];
  const Vec2 a = g.vertices[0], b = g.vertices[1], c = g.vertices[2];
  const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
  g.area = 0.5 * det;
  // grad lambda_i = rot90(opposite edge) / det
  auto perp = [](const Vec2& v) { return Vec2(-v.y(), v.x()); };
  g.grad_lambda[0] = perp(c - b) / det;
  g.grad_lambda[1] = perp(a - c) / det;
  g.grad_lambda[2] = perp(b - a) / det;
  return g;
}

Vec2 TaylorHoodSpace::dof_point(int s) const {
  const int nn = mesh_->num_nodes();
  if (s < nn) return mesh_->nodes()[static_cast<std::size_t>(s)];
  const auto& e = mesh_->edges()[static_cast<std::size_t>(s - nn)];
  return 0.5 * (mesh_->nodes()[static_cast<std::size_t>(e.a)] + mesh_->nodes()[static_cast<std::size_t>(e.b)]);
}

FlowField zero_field(std::shared_ptr<const TaylorHoodSpace> space, FieldRole role) {
  FlowField f;
  f.velocity = Eigen::VectorXd::Zero(space->n_u());
  f.pressure = Eigen::VectorXd::Zero(space->n_p());
  f.space = std::move(space);
  f.role = role;
  return f;
}

Eigen::VectorXd interpolate_velocity(const TaylorHoodSpace& space, const VectorField& f) {
  Eigen::VectorXd v(space.n_u());
  for (int s = 0; s < space.n_scalar(); ++s) {
    const Vec2 val = f(space.dof_point(s));
    v[TaylorHoodSpace::vdof(s, 0)] = val.x();
    v[TaylorHoodSpace::vdof(s, 1)] = val.y();
  }
  return v;
}

Eigen::VectorXd interpolate_pressure(const TaylorHoodSpace& space, const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd p(space.n_p());
  for (int i = 0; i < space.n_p(); ++i) p[i] = f(space.mesh().nodes()[static_cast<std::size_t>(i)]);
  return p;
}

void velocity_on_cell(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, int k,
                      const std::array<double, 3>& l, const ElementGeometry& g, Vec2& value, Mat2& grad) {
  const auto dofs = space.cell_dofs(k);
  const auto N = P2Basis::values(l);
  const auto dN = P2Basis::gradients(l, g);
  value.setZero();
  grad.setZero();
  for (int a = 0; a < 6; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double ux = velocity[TaylorHoodSpace::vdof(dofs[ua], 0)];
    const double uy = velocity[TaylorHoodSpace::vdof(dofs[ua], 1)];
    value += N[ua] * Vec2(ux, uy);
    grad.row(0) += ux * dN[ua].transpose();
    grad.row(1) += uy * dN[ua].transpose();
  }
}

Vec2 evaluate_velocity_at(const TaylorHoodSpace& space, const Eigen::VectorXd& velocity, const Vec2& x) {
  if (velocity.size() != space.n_u()) throw InvalidArgument("evaluate_velocity_at: coefficient size mismatch");
  const auto loc = space.locator().locate(x);
  const auto dofs = space.cell_dofs(loc.triangle);
  const auto N = P2Basis::values(loc.barycentric);
  Vec2 out = Vec2::Zero();
  for (int a = 0; a < 6; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    out += N[ua] * Vec2(velocity[TaylorHoodSpace::vdof(dofs[ua], 0)], velocity[TaylorHoodSpace::vdof(dofs[ua], 1)]);
  }
  return out;
}

Vec2 evaluate_velocity_at(const FlowField& field, const Vec2& x) {
  return evaluate_velocity_at(*field.space, field.velocity, x);
}

Vec2 FlowField::velocity_at(const Vec2& x) const { return evaluate_velocity_at(*this, x); }

}  // namespace pointflow
