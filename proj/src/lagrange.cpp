#include "clusterfem/lagrange.hpp"

#include <cmath>
#include <stdexcept>

namespace clusterfem {

namespace {

double int_pow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

}  // namespace

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
    if (degree < 1 || degree > 3) {
        throw std::invalid_argument("LagrangeBasis: degree must be 1, 2 or 3");
    }
    const double r = static_cast<double>(degree);
    nodes_.push_back({0.0, 0.0});
    nodes_.push_back({1.0, 0.0});
    nodes_.push_back({0.0, 1.0});
    for (int i = 1; i < degree; ++i) nodes_.push_back({i / r, 0.0});              // edge v0-v1
    for (int i = 1; i < degree; ++i) nodes_.push_back({1.0 - i / r, i / r});      // edge v1-v2
    for (int i = 1; i < degree; ++i) nodes_.push_back({0.0, 1.0 - i / r});        // edge v2-v0
    for (int a = 1; a < degree; ++a)                                              // interior
        for (int b = 1; a + b < degree; ++b) nodes_.push_back({a / r, b / r});

    for (int a = 0; a <= degree; ++a)
        for (int b = 0; a + b <= degree; ++b) monomials_.push_back({a, b});

    const int n = num_nodes();
    if (static_cast<int>(monomials_.size()) != n) {
        throw std::logic_error("LagrangeBasis: node/monomial count mismatch");
    }
    Eigen::MatrixXd vandermonde(n, n);
    for (int j = 0; j < n; ++j) {
        for (int m = 0; m < n; ++m) {
            vandermonde(j, m) = int_pow(nodes_[static_cast<std::size_t>(j)][0], monomials_[static_cast<std::size_t>(m)][0]) *
                                int_pow(nodes_[static_cast<std::size_t>(j)][1], monomials_[static_cast<std::size_t>(m)][1]);
        }
    }
    // basis_i(node_j) = delta_ij  =>  coefficients = V^{-T}
    coefficients_ = vandermonde.fullPivLu().inverse().transpose();
}

double LagrangeBasis::value(int i, double x, double y) const {
    double r = 0.0;
    for (std::size_t m = 0; m < monomials_.size(); ++m) {
        r += coefficients_(i, static_cast<int>(m)) *
             int_pow(x, monomials_[m][0]) * int_pow(y, monomials_[m][1]);
    }
    return r;
}

Eigen::Vector2d LagrangeBasis::gradient(int i, double x, double y) const {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (std::size_t m = 0; m < monomials_.size(); ++m) {
        const int a = monomials_[m][0], b = monomials_[m][1];
        const double c = coefficients_(i, static_cast<int>(m));
        if (a > 0) g[0] += c * a * int_pow(x, a - 1) * int_pow(y, b);
        if (b > 0) g[1] += c * b * int_pow(x, a) * int_pow(y, b - 1);
    }
    return g;
}

std::array<double, 3> LagrangeBasis::hessian(int i, double x, double y) const {
    std::array<double, 3> h{0.0, 0.0, 0.0};
    for (std::size_t m = 0; m < monomials_.size(); ++m) {
        const int a = monomials_[m][0], b = monomials_[m][1];
        const double c = coefficients_(i, static_cast<int>(m));
        if (a > 1) h[0] += c * a * (a - 1) * int_pow(x, a - 2) * int_pow(y, b);
        if (a > 0 && b > 0) h[1] += c * a * b * int_pow(x, a - 1) * int_pow(y, b - 1);
        if (b > 1) h[2] += c * b * (b - 1) * int_pow(x, a) * int_pow(y, b - 2);
    }
    return h;
}

Eigen::VectorXd LagrangeBasis::values(double x, double y) const {
    Eigen::VectorXd out(num_nodes());
    for (int i = 0; i < num_nodes(); ++i) out[i] = value(i, x, y);
    return out;
}

const LagrangeBasis& lagrange_basis(int degree) {
    static const LagrangeBasis p1(1), p2(2), p3(3);
    switch (degree) {
        case 1: return p1;
        case 2: return p2;
        case 3: return p3;
        default: throw std::invalid_argument("lagrange_basis: degree must be 1, 2 or 3");
    }
}

}  // namespace clusterfem
