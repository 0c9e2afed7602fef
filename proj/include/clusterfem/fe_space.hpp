#pragma once

#include "clusterfem/lagrange.hpp"
#include "clusterfem/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace clusterfem {

/// Continuous Lagrange space of degree 1..3 over a mesh, with homogeneous
/// Dirichlet constraints on the outer boundary and on both slit sides.
/// Constrained dofs are eliminated: coefficient vectors index free dofs only.
class FeSpace {
public:
    FeSpace(Mesh mesh, int degree);

    const Mesh& mesh() const { return mesh_; }
    int degree() const { return degree_; }
    const LagrangeBasis& basis() const { return *basis_; }

    int dim() const { return dim_; }              // number of free dofs
    int num_dofs() const { return num_dofs_; }    // including constrained
    int dofs_per_element() const { return basis_->num_nodes(); }

    int global_dof(int element, int local) const {
        return element_dofs_[static_cast<std::size_t>(element) * static_cast<std::size_t>(dofs_per_element()) +
                             static_cast<std::size_t>(local)];
    }
    bool is_free(int dof) const { return free_index_[static_cast<std::size_t>(dof)] >= 0; }
    int free_index(int dof) const { return free_index_[static_cast<std::size_t>(dof)]; }
    int free_to_dof(int free) const { return free_dofs_[static_cast<std::size_t>(free)]; }

    /// Coordinates of a (possibly constrained) global dof.
    Eigen::Vector2d dof_position(int dof) const { return dof_positions_[static_cast<std::size_t>(dof)]; }

    struct ElementGeometry {
        Eigen::Matrix2d jacobian;       // columns: v1 - v0, v2 - v0
        Eigen::Matrix2d inverse;        // jacobian^{-1}
        double det = 0.0;               // = 2 |T|
        double diameter = 0.0;          // h_T
        Eigen::Vector2d origin;         // v0
    };
    const ElementGeometry& geometry(int e) const { return geometry_[static_cast<std::size_t>(e)]; }

    Eigen::Vector2d map_to_physical(int e, double xi, double eta) const;
    Eigen::Vector2d map_to_reference(int e, double x, double y) const;

    /// Expand a free-dof vector to a full nodal vector (zeros at constraints).
    Eigen::VectorXd to_full(const Eigen::VectorXd& free_coefs) const;
    /// Local nodal values of a full vector on one element.
    Eigen::VectorXd gather(const Eigen::VectorXd& full, int e) const;

    double eval(const Eigen::VectorXd& full, int e, double xi, double eta) const;
    Eigen::Vector2d eval_gradient(const Eigen::VectorXd& full, int e, double xi, double eta) const;
    double eval_laplacian(const Eigen::VectorXd& full, int e, double xi, double eta) const;

    /// Nodal interpolant of f on all dofs, constraints included.
    Eigen::VectorXd interpolate(const std::function<double(double, double)>& f) const;

private:
    Mesh mesh_;
    int degree_;
    const LagrangeBasis* basis_;
    int num_dofs_ = 0;
    int dim_ = 0;
    std::vector<int> element_dofs_;
    std::vector<int> free_index_;
    std::vector<int> free_dofs_;
    std::vector<Eigen::Vector2d> dof_positions_;
    std::vector<ElementGeometry> geometry_;
};

inline FeSpace build_space(Mesh mesh, int degree) { return FeSpace(std::move(mesh), degree); }

/// Interpolation matrix from a coarse space into a space on a refinement of
/// the coarse mesh (same degree): rows are fine free dofs, columns coarse
/// free dofs, and P c represents the same function as c pointwise.
/// Throws std::invalid_argument if degrees differ or meshes are not nested.
Eigen::SparseMatrix<double> prolongation(const FeSpace& coarse, const FeSpace& fine);

}  // namespace clusterfem
