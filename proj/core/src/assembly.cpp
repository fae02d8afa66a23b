#include "pointflow/assembly.hpp"

#include "pointflow/errors.hpp"
#include "pointflow/quadrature.hpp"

namespace pointflow {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

constexpr int kStokesDegree = 4;
constexpr int kConvectionDegree = 6;

SparseMatrix from_triplets(int rows, int cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void check_velocity(const TaylorHoodSpace& space, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != space.n_u()) throw InvalidArgument(std::string(what) + ": velocity size does not match the space");
}

}  // namespace

SaddleSystem assemble_stokes(const TaylorHoodSpace& space, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("assemble_stokes: nu must be positive");
  const auto& rule = triangle_rule(kStokesDegree);
  const int nk = space.mesh().num_triangles();
  Triplets ta, tb, tm;
  ta.reserve(static_cast<std::size_t>(nk) * 72);
  tm.reserve(static_cast<std::size_t>(nk) * 72);
  tb.reserve(static_cast<std::size_t>(nk) * 36);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(space.n_p());

  for (int k = 0; k < nk; ++k) {
    const auto g = space.geometry(k);
    const auto dofs = space.cell_dofs(k);
    const auto& tri = space.mesh().triangles()[static_cast<std::size_t>(k)];
    Eigen::Matrix<double, 6, 6> kl = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 6> ml = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 3, 12> bl = Eigen::Matrix<double, 3, 12>::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double w = g.area * rule.weights[q];
      const auto N = P2Basis::values(l);
      const auto dN = P2Basis::gradients(l, g);
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          kl(a, b) += w * dN[static_cast<std::size_t>(a)].dot(dN[static_cast<std::size_t>(b)]);
          ml(a, b) += w * N[static_cast<std::size_t>(a)] * N[static_cast<std::size_t>(b)];
        }
      }
      for (int p = 0; p < 3; ++p) {
        for (int b = 0; b < 6; ++b) {
          for (int c = 0; c < 2; ++c) bl(p, 2 * b + c) -= w * l[static_cast<std::size_t>(p)] * dN[static_cast<std::size_t>(b)][c];
        }
      }
    }
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        for (int c = 0; c < 2; ++c) {
          const int i = TaylorHoodSpace::vdof(dofs[static_cast<std::size_t>(a)], c);
          const int j = TaylorHoodSpace::vdof(dofs[static_cast<std::size_t>(b)], c);
          ta.emplace_back(i, j, nu * kl(a, b));
          tm.emplace_back(i, j, ml(a, b));
        }
      }
    }
    for (int p = 0; p < 3; ++p) {
      mean[tri[static_cast<std::size_t>(p)]] += g.area / 3.0;
      for (int b = 0; b < 6; ++b)
        for (int c = 0; c < 2; ++c)
          tb.emplace_back(tri[static_cast<std::size_t>(p)], TaylorHoodSpace::vdof(dofs[static_cast<std::size_t>(b)], c),
                          bl(p, 2 * b + c));
    }
  }
  SaddleSystem sys;
  sys.nu = nu;
  sys.A = from_triplets(space.n_u(), space.n_u(), ta);
  sys.B = from_triplets(space.n_p(), space.n_u(), tb);
  sys.M = from_triplets(space.n_u(), space.n_u(), tm);
  sys.mean_weights = std::move(mean);
  return sys;
}

ConvectionBlocks assemble_convection(const TaylorHoodSpace& space, const Eigen::VectorXd& y) {
  check_velocity(space, y, "assemble_convection");
  const auto& rule = triangle_rule(kConvectionDegree);
  const int nk = space.mesh().num_triangles();
  Triplets t1, t2;
  t1.reserve(static_cast<std::size_t>(nk) * 72);
  t2.reserve(static_cast<std::size_t>(nk) * 144);
  for (int k = 0; k < nk; ++k) {
    const auto g = space.geometry(k);
    const auto dofs = space.cell_dofs(k);
    Eigen::Matrix<double, 6, 6> c1 = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 12, 12> c2 = Eigen::Matrix<double, 12, 12>::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double w = g.area * rule.weights[q];
      const auto N = P2Basis::values(l);
      const auto dN = P2Basis::gradients(l, g);
      Vec2 yv;
      Mat2 gy;
      velocity_on_cell(space, y, k, l, g, yv, gy);
      for (int a = 0; a < 6; ++a) {
        const double na = N[static_cast<std::size_t>(a)];
        for (int b = 0; b < 6; ++b) {
          const double nb = N[static_cast<std::size_t>(b)];
          c1(a, b) += w * yv.dot(dN[static_cast<std::size_t>(b)]) * na;
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) c2(2 * a + c, 2 * b + d) += w * na * nb * gy(c, d);
        }
      }
    }
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        for (int c = 0; c < 2; ++c) {
          const int i = TaylorHoodSpace::vdof(dofs[static_cast<std::size_t>(a)], c);
          t1.emplace_back(i, TaylorHoodSpace::vdof(dofs[static_cast<std::size_t>(b)], c), c1(a, b));
          for (int d = 0; d < 2; ++d)
            t2.emplace_back(i, TaylorHoodSpace::vdof(dofs[static_cast<std::size_t>(b)], d), c2(2 * a + c, 2 * b + d));
        }
      }
    }
  }
  return {from_triplets(space.n_u(), space.n_u(), t1), from_triplets(space.n_u(), space.n_u(), t2)};
}

ConvectionBlocks assemble_convection(const TaylorHoodSpace& space, const FlowField& y) {
  if (y.space.get() != &space) throw InvalidArgument("assemble_convection: field lives on a different space");
  return assemble_convection(space, y.velocity);
}

Eigen::VectorXd assemble_dirac_load(const TaylorHoodSpace& space, const DiracSourceSet& sources,
                                    std::span<const Vec2> amplitudes) {
  if (static_cast<int>(amplitudes.size()) != sources.size()) {
    throw InvalidArgument("assemble_dirac_load: one amplitude per source is required");
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(space.n_u());
  for (int i = 0; i < sources.size(); ++i) {
    const Vec2& t = sources.points()[static_cast<std::size_t>(i)];
    const Vec2& u = amplitudes[static_cast<std::size_t>(i)];
    const auto loc = space.locator().locate(t);  // NotFound propagates
    const auto dofs = space.cell_dofs(loc.triangle);
    const auto N = P2Basis::values(loc.barycentric);
    for (int a = 0; a < 6; ++a) {
      const double na = N[static_cast<std::size_t>(a)];
      if (na == 0.0) continue;
      for (int c = 0; c < 2; ++c) f[TaylorHoodSpace::vdof(dofs[static_cast<std::size_t>(a)], c)] += na * u[c];
    }
  }
  return f;
}

Eigen::VectorXd assemble_body_load(const TaylorHoodSpace& space, const VectorField& fn, int degree) {
  const auto& rule = triangle_rule(degree);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(space.n_u());
  for (int k = 0; k < space.mesh().num_triangles(); ++k) {
    const auto g = space.geometry(k);
    const auto dofs = space.cell_dofs(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double w = g.area * rule.weights[q];
      const Vec2 val = fn(g.map(l));
      const auto N = P2Basis::values(l);
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 2; ++c)
          f[TaylorHoodSpace::vdof(dofs[static_cast<std::size_t>(a)], c)] += w * N[static_cast<std::size_t>(a)] * val[c];
    }
  }
  return f;
}

Eigen::VectorXd assemble_trilinear(const TaylorHoodSpace& space, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  check_velocity(space, a, "assemble_trilinear");
  check_velocity(space, b, "assemble_trilinear");
  const auto& rule = triangle_rule(kConvectionDegree);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.n_u());
  for (int k = 0; k < space.mesh().num_triangles(); ++k) {
    const auto g = space.geometry(k);
    const auto dofs = space.cell_dofs(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double w = g.area * rule.weights[q];
      Vec2 av, bv;
      Mat2 ga, gb;
      velocity_on_cell(space, a, k, l, g, av, ga);
      velocity_on_cell(space, b, k, l, g, bv, gb);
      const Vec2 conv = gb * av;  // (a . grad) b
      const auto N = P2Basis::values(l);
      for (int s = 0; s < 6; ++s)
        for (int c = 0; c < 2; ++c)
          out[TaylorHoodSpace::vdof(dofs[static_cast<std::size_t>(s)], c)] += w * N[static_cast<std::size_t>(s)] * conv[c];
    }
  }
  return out;
}

Eigen::MatrixXd convective_gram(const TaylorHoodSpace& space, std::span<const Eigen::VectorXd> thetas,
                                const Eigen::VectorXd& z) {
  check_velocity(space, z, "convective_gram");
  for (const auto& t : thetas) check_velocity(space, t, "convective_gram");
  const auto m = static_cast<int>(thetas.size());
  const auto& rule = triangle_rule(kConvectionDegree);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  std::vector<Vec2> val(static_cast<std::size_t>(m));
  std::vector<Mat2> grad(static_cast<std::size_t>(m));
  for (int k = 0; k < space.mesh().num_triangles(); ++k) {
    const auto g = space.geometry(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double w = g.area * rule.weights[q];
      Vec2 zv;
      Mat2 gz;
      velocity_on_cell(space, z, k, l, g, zv, gz);
      for (int i = 0; i < m; ++i)
        velocity_on_cell(space, thetas[static_cast<std::size_t>(i)], k, l, g, val[static_cast<std::size_t>(i)],
                         grad[static_cast<std::size_t>(i)]);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          T(i, j) += w * (grad[static_cast<std::size_t>(j)] * val[static_cast<std::size_t>(i)]).dot(zv);
    }
  }
  return T;
}

double tensor_form_curvature(const TaylorHoodSpace& space, const Eigen::VectorXd& theta, const Eigen::VectorXd& z) {
  check_velocity(space, theta, "tensor_form_curvature");
  check_velocity(space, z, "tensor_form_curvature");
  const auto& rule = triangle_rule(kConvectionDegree);
  double sum = 0.0;
  for (int k = 0; k < space.mesh().num_triangles(); ++k) {
    const auto g = space.geometry(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      Vec2 tv, zv;
      Mat2 gt, gz;
      velocity_on_cell(space, theta, k, l, g, tv, gt);
      velocity_on_cell(space, z, k, l, g, zv, gz);
      sum += g.area * rule.weights[q] * tv.dot(gz * tv);  // theta_i theta_j d_j z_i
    }
  }
  return sum;
}

}  // namespace pointflow
