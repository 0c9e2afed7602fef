#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace clusterfem {

/// Nodal Lagrange basis of degree 1..3 on the reference triangle with
/// vertices (0,0), (1,0), (0,1) and equispaced nodes.
///
/// Local node order: the three vertices, then the nodes interior to edges
/// (v0,v1), (v1,v2), (v2,v0) — each traversed from its first to its second
/// vertex — and finally the interior nodes.
class LagrangeBasis {
public:
    explicit LagrangeBasis(int degree);

    int degree() const { return degree_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    const std::vector<std::array<double, 2>>& nodes() const { return nodes_; }

    double value(int i, double x, double y) const;
    Eigen::Vector2d gradient(int i, double x, double y) const;
    /// Reference Hessian entries (dxx, dxy, dyy).
    std::array<double, 3> hessian(int i, double x, double y) const;

    /// Values of all basis functions at (x, y), in local node order.
    Eigen::VectorXd values(double x, double y) const;

    static int nodes_for_degree(int degree) { return (degree + 1) * (degree + 2) / 2; }

private:
    int degree_;
    std::vector<std::array<double, 2>> nodes_;
    std::vector<std::array<int, 2>> monomials_;   // exponent pairs (a, b), a+b <= degree
    Eigen::MatrixXd coefficients_;                // row i: monomial coefficients of basis i
};

const LagrangeBasis& lagrange_basis(int degree);

}  // namespace clusterfem
