#pragma once

#include "clusterfem/fe_space.hpp"
#include "clusterfem/quadrature.hpp"

#include <Eigen/Sparse>

#include <iosfwd>

namespace clusterfem {

/// Sparse symmetric matrix (full pattern stored). Stiffness and mass matrices
/// on the free dofs are symmetric positive definite.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;
    explicit SparseSymMatrix(Eigen::SparseMatrix<double> m) : m_(std::move(m)) { m_.makeCompressed(); }

    int n() const { return static_cast<int>(m_.rows()); }
    const Eigen::SparseMatrix<double>& matrix() const { return m_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return m_ * x; }

    /// max_ij |a_ij - a_ji|
    double symmetry_defect() const;

    /// Coordinate text format "i j value" (0-based), sorted by (i, j).
    void write_coordinate(std::ostream& out) const;

private:
    Eigen::SparseMatrix<double> m_;
};

enum class DofRange {
    free,  // Dirichlet rows/columns eliminated
    all,   // unconstrained space (tests and diagnostics)
};

/// Galerkin matrix of the Dirichlet form integral grad(u) . grad(v).
SparseSymMatrix assemble_stiffness(const FeSpace& space, DofRange range = DofRange::free);

/// Galerkin matrix of the L2 inner product integral u v.
SparseSymMatrix assemble_mass(const FeSpace& space, DofRange range = DofRange::free);

}  // namespace clusterfem
