#pragma once

#include "clusterfem/fe_space.hpp"

#include <Eigen/Dense>

#include <vector>

namespace clusterfem {

/// Per-element squared indicator values.
struct IndicatorField {
    std::vector<double> squared;

    double total() const {
        double s = 0.0;
        for (double v : squared) s += v;
        return s;
    }
    int size() const { return static_cast<int>(squared.size()); }
};

/// One summand of a cluster residual: the element contribution is
///   h_T^2 | lambda * mass_part + Laplacian(grad_part) |_T^2
///   + h_T | jump of grad(grad_part) |_{boundary of T}^2,
/// with interior-edge jumps counted in full on both adjacent elements and no
/// jump on outer-boundary or slit edges. Coefficient vectors are full nodal
/// vectors (constraints included).
struct ResidualInput {
    double lambda = 0.0;
    Eigen::VectorXd mass_part;
    Eigen::VectorXd grad_part;
};

IndicatorField residual_indicators(const FeSpace& space, const std::vector<ResidualInput>& inputs);

/// Standard residual indicators for discrete eigenpairs: column j of
/// `vectors` (free dofs) carries eigenvalue values[j]; the result sums the
/// per-pair indicators over the cluster.
IndicatorField eta_indicators(const FeSpace& space, const Eigen::VectorXd& values,
                              const Eigen::MatrixXd& vectors);

}  // namespace clusterfem
