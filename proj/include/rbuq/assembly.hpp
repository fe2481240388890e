#pragma once

#include <array>
#include <vector>

#include "rbuq/kl.hpp"
#include "rbuq/mesh.hpp"
#include "rbuq/types.hpp"

namespace rbuq {

/// Finite element matrices and vectors of the affine decomposition
///   A(y,mu) = A0 + sum_k y_k Ay[k] + sum_p mu_p Amu[p]
/// on the interior (Dirichlet-eliminated) P1 space, together with the load
/// vector, the output functional and the Gram matrices.
///
/// A0 = stiffness - kappa0 * mass; Ay[k] = sigma*sqrt(lambda_k) * mass
/// weighted by the k-th KL eigenfunction (edge-midpoint quadrature);
/// Amu[p] = convection with unit velocity along axis p (skew-symmetric on
/// interior DOFs); gram_X = stiffness + mass (full H1 inner product);
/// mass_L2 = mass. All sparse matrices share one sparsity pattern, so affine
/// combinations reduce to scaled sums of the value arrays.
struct AffineOperatorSet {
  SpMat A0;
  std::vector<SpMat> Ay;
  std::array<SpMat, 2> Amu;
  Vector f_vec;
  Vector l_vec;
  SpMat gram_X;
  SpMat mass_L2;
  int M_FE = 0;
  int K = 0;

  /// In-place affine combination; `out` must carry the shared pattern
  /// (initialize with a copy of A0).
  void combine_into(SpMat& out, const Vector& y, const Eigen::Vector2d& mu) const {
    const Index nnz = A0.nonZeros();
    double* ov = out.valuePtr();
    const double* a0 = A0.valuePtr();
    for (Index i = 0; i < nnz; ++i) ov[i] = a0[i];
    for (int k = 0; k < K; ++k) {
      const double yk = y(k);
      const double* av = Ay[static_cast<std::size_t>(k)].valuePtr();
      for (Index i = 0; i < nnz; ++i) ov[i] += yk * av[i];
    }
    for (int p = 0; p < 2; ++p) {
      const double mp = mu(p);
      const double* cv = Amu[static_cast<std::size_t>(p)].valuePtr();
      for (Index i = 0; i < nnz; ++i) ov[i] += mp * cv[i];
    }
  }

  SpMat combine(const Vector& y, const Eigen::Vector2d& mu) const {
    SpMat out = A0;
    combine_into(out, y, mu);
    return out;
  }

  /// Symmetric part A0 + sum y_k Ay[k] (convection drops out exactly).
  SpMat symmetric_part(const Vector& y) const { return combine(y, Eigen::Vector2d::Zero()); }
};

namespace detail {

struct ElementGeometry {
  double area;
  Eigen::Matrix<double, 3, 2> grad; // gradients of the barycentric basis
  Eigen::Matrix<double, 3, 2> midpoints;
  // barycentric coordinates at the three edge midpoints (rows: quad point)
  static constexpr double kMidBary[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
};

inline ElementGeometry element_geometry(const Triangulation& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  Eigen::Vector2d p0 = mesh.nodes.row(tri[0]);
  Eigen::Vector2d p1 = mesh.nodes.row(tri[1]);
  Eigen::Vector2d p2 = mesh.nodes.row(tri[2]);
  ElementGeometry g;
  const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  g.area = 0.5 * det;
  g.grad.row(0) = Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x()) / det;
  g.grad.row(1) = Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x()) / det;
  g.grad.row(2) = Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x()) / det;
  g.midpoints.row(0) = 0.5 * (p0 + p1);
  g.midpoints.row(1) = 0.5 * (p1 + p2);
  g.midpoints.row(2) = 0.5 * (p2 + p0);
  return g;
}

using TripletList = std::vector<Eigen::Triplet<double>>;

inline SpMat from_triplets(int m, const TripletList& t) {
  SpMat A(m, m);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

} // namespace detail

/// Exact P1 integrals of the basis functions over the quadrant (0,1/2)^2.
/// Requires an even mesh so that every triangle lies inside or outside.
inline Vector assemble_output_functional(const Triangulation& mesh) {
  Vector l = Vector::Zero(mesh.n_interior);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    Eigen::Vector2d centroid =
        (mesh.nodes.row(tri[0]) + mesh.nodes.row(tri[1]) + mesh.nodes.row(tri[2])) / 3.0;
    if (centroid.x() <= 0.0 || centroid.y() <= 0.0) continue;
    const double area = mesh.triangle_area(static_cast<int>(t));
    for (int v = 0; v < 3; ++v) {
      const int dof = mesh.dof_of_node[static_cast<std::size_t>(tri[v])];
      if (dof >= 0) l(dof) += area / 3.0;
    }
  }
  return l;
}

/// Assembles all operators of the affine decomposition on the interior DOFs.
inline AffineOperatorSet assemble_operators(const Triangulation& mesh, const KlExpansion& kl,
                                            double kappa0, double sigma) {
  const int m = mesh.n_interior;
  const int K = kl.num_modes;

  AffineOperatorSet ops;
  ops.M_FE = m;
  ops.K = K;
  ops.f_vec = Vector::Zero(m);

  // One triplet list per matrix, all with the same (i,j) sequence so the
  // compressed patterns are identical.
  detail::TripletList t_stiff, t_mass, t_conv0, t_conv1;
  std::vector<detail::TripletList> t_kl(static_cast<std::size_t>(K));

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto g = detail::element_geometry(mesh, static_cast<int>(t));

    std::array<int, 3> dof;
    for (int v = 0; v < 3; ++v) dof[static_cast<std::size_t>(v)] = mesh.dof_of_node[static_cast<std::size_t>(tri[v])];

    // KL eigenfunction values at the edge midpoints, one row per mode
    Matrix kappa_q(K, 3);
    for (int k = 0; k < K; ++k) {
      for (int q = 0; q < 3; ++q) {
        kappa_q(k, q) = kl.eigenfunction(k, g.midpoints(q, 0), g.midpoints(q, 1));
      }
    }

    for (int i = 0; i < 3; ++i) {
      if (dof[static_cast<std::size_t>(i)] < 0) continue;
      ops.f_vec(dof[static_cast<std::size_t>(i)]) += g.area / 3.0;
      for (int j = 0; j < 3; ++j) {
        if (dof[static_cast<std::size_t>(j)] < 0) continue;
        const int r = dof[static_cast<std::size_t>(i)], c = dof[static_cast<std::size_t>(j)];

        const double stiff = g.area * g.grad.row(i).dot(g.grad.row(j));
        const double mass = g.area / 12.0 * (i == j ? 2.0 : 1.0);
        t_stiff.emplace_back(r, c, stiff);
        t_mass.emplace_back(r, c, mass);
        // convection: trial derivative, test value
        t_conv0.emplace_back(r, c, g.grad(j, 0) * g.area / 3.0);
        t_conv1.emplace_back(r, c, g.grad(j, 1) * g.area / 3.0);
        for (int k = 0; k < K; ++k) {
          double w = 0.0;
          for (int q = 0; q < 3; ++q) {
            w += kappa_q(k, q) * detail::ElementGeometry::kMidBary[q][i] *
                 detail::ElementGeometry::kMidBary[q][j];
          }
          t_kl[static_cast<std::size_t>(k)].emplace_back(r, c, g.area / 3.0 * w);
        }
      }
    }
  }

  const SpMat stiffness = detail::from_triplets(m, t_stiff);
  const SpMat mass = detail::from_triplets(m, t_mass);

  ops.A0 = stiffness - kappa0 * mass;
  ops.A0.makeCompressed();
  ops.gram_X = stiffness + mass;
  ops.gram_X.makeCompressed();
  ops.mass_L2 = mass;
  ops.Amu[0] = detail::from_triplets(m, t_conv0);
  ops.Amu[1] = detail::from_triplets(m, t_conv1);
  ops.Ay.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    SpMat w = detail::from_triplets(m, t_kl[static_cast<std::size_t>(k)]);
    ops.Ay.push_back(sigma * kl.sqrt_lambda(k) * w);
    ops.Ay.back().makeCompressed();
  }
  ops.l_vec = assemble_output_functional(mesh);

  // the fast affine combination relies on a shared pattern
  for (const SpMat* mat : {&ops.gram_X, &ops.mass_L2, &ops.Amu[0], &ops.Amu[1]}) {
    if (mat->nonZeros() != ops.A0.nonZeros())
      throw SolverError("assemble_operators: sparsity patterns diverged");
  }
  return ops;
}

/// Direct one-pass assembly of the parametrized bilinear form
///   a(w,v) = grad term - kappa0 (w,v) + sum_k y_k sigma sqrt(lambda_k)
///            (kappa_k w, v) + sum_p mu_p (d_p w, v)
/// with the reaction coefficient evaluated pointwise at the quadrature
/// points; the independent route for checking Galerkin consistency of the
/// affine set.
inline SpMat assemble_parametric_matrix(const Triangulation& mesh, const KlExpansion& kl,
                                        double kappa0, double sigma, const Vector& y,
                                        const Eigen::Vector2d& mu) {
  const int m = mesh.n_interior;
  detail::TripletList trip;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto g = detail::element_geometry(mesh, static_cast<int>(t));
    // coefficient of (w,v): -kappa0 + sigma sum_k sqrt(lambda_k) kappa_k y_k
    std::array<double, 3> coeff;
    for (int q = 0; q < 3; ++q) {
      double c = -kappa0;
      for (int k = 0; k < kl.num_modes; ++k) {
        c += sigma * kl.sqrt_lambda(k) * kl.eigenfunction(k, g.midpoints(q, 0), g.midpoints(q, 1)) *
             y(k);
      }
      coeff[static_cast<std::size_t>(q)] = c;
    }
    for (int i = 0; i < 3; ++i) {
      const int r = mesh.dof_of_node[static_cast<std::size_t>(tri[i])];
      if (r < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int c = mesh.dof_of_node[static_cast<std::size_t>(tri[j])];
        if (c < 0) continue;
        double value = g.area * g.grad.row(i).dot(g.grad.row(j));
        value += (mu(0) * g.grad(j, 0) + mu(1) * g.grad(j, 1)) * g.area / 3.0;
        double react = 0.0;
        for (int q = 0; q < 3; ++q) {
          react += coeff[static_cast<std::size_t>(q)] * detail::ElementGeometry::kMidBary[q][i] *
                   detail::ElementGeometry::kMidBary[q][j];
        }
        value += g.area / 3.0 * react;
        trip.emplace_back(r, c, value);
      }
    }
  }
  return detail::from_triplets(m, trip);
}

} // namespace rbuq
