#pragma once

#include <array>
#include <vector>

namespace clusterfem {

/// Symmetric quadrature on the reference triangle. Points are barycentric,
/// weights are normalized to sum to 1, so for a physical triangle T
///     integral_T f = |T| * sum_q w_q f(x_q).
struct QuadratureRule {
    int order = 0;  // exact for polynomials up to this total degree
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
};

/// Rule exact for polynomials of the given total degree, order <= 8.
/// All returned rules have positive weights.
QuadratureRule quadrature(int order);

/// Gauss-Legendre rule on [0, 1]; weights sum to 1. Exact for polynomials of
/// degree 2 * num_points - 1. Supports 1..6 points.
struct EdgeQuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
};

EdgeQuadratureRule edge_quadrature(int num_points);

}  // namespace clusterfem
