// Independent oracles used by the test suites: exact monomial integration on
// the reference triangle, symbolic element matrices, an exhaustive minimal
// bulk-marking subset search, and a dense generalized eigensolver. These stay
// deliberately separate from the library's quadrature/assembly paths.
#pragma once

#include "clusterfem/assembly.hpp"
#include "clusterfem/fe_space.hpp"
#include "clusterfem/lagrange.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracles {

// integral over the reference triangle of x^a y^b = a! b! / (a + b + 2)!
inline double reference_monomial_integral(int a, int b) {
    auto factorial = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    return factorial(a) * factorial(b) / factorial(a + b + 2);
}

// Dense bivariate polynomial with exponents bounded by MaxDeg, supporting
// the product/integration needed for symbolic element matrices.
struct Poly2 {
    static constexpr int MaxDeg = 8;
    std::array<std::array<double, MaxDeg + 1>, MaxDeg + 1> c{};  // c[a][b] x^a y^b

    static Poly2 from_basis(const clusterfem::LagrangeBasis& basis, int i) {
        Poly2 p;
        // Reconstruct coefficients by sampling: fit on the monomial set of the
        // basis degree via its own nodes would reuse library internals, so fit
        // against a fresh Vandermonde at distinct sample points instead.
        const int r = basis.degree();
        std::vector<std::array<int, 2>> monos;
        for (int a = 0; a <= r; ++a)
            for (int b = 0; a + b <= r; ++b) monos.push_back({a, b});
        const int n = static_cast<int>(monos.size());
        std::vector<std::array<double, 2>> pts;
        for (int a = 0; a <= r; ++a)
            for (int b = 0; a + b <= r; ++b)
                pts.push_back({(a + 0.31) / (r + 1.0), (b + 0.47) / (r + 1.0)});
        Eigen::MatrixXd V(n, n);
        Eigen::VectorXd rhs(n);
        for (int k = 0; k < n; ++k) {
            for (int m = 0; m < n; ++m) {
                V(k, m) = std::pow(pts[static_cast<std::size_t>(k)][0], monos[static_cast<std::size_t>(m)][0]) *
                          std::pow(pts[static_cast<std::size_t>(k)][1], monos[static_cast<std::size_t>(m)][1]);
            }
            rhs[k] = basis.value(i, pts[static_cast<std::size_t>(k)][0], pts[static_cast<std::size_t>(k)][1]);
        }
        const Eigen::VectorXd sol = V.fullPivLu().solve(rhs);
        for (int m = 0; m < n; ++m) {
            p.c[static_cast<std::size_t>(monos[static_cast<std::size_t>(m)][0])]
               [static_cast<std::size_t>(monos[static_cast<std::size_t>(m)][1])] = sol[m];
        }
        return p;
    }

    Poly2 dx() const {
        Poly2 p;
        for (int a = 1; a <= MaxDeg; ++a)
            for (int b = 0; b <= MaxDeg; ++b)
                p.c[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b)] =
                    a * c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        return p;
    }
    Poly2 dy() const {
        Poly2 p;
        for (int a = 0; a <= MaxDeg; ++a)
            for (int b = 1; b <= MaxDeg; ++b)
                p.c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b - 1)] =
                    b * c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        return p;
    }
    Poly2 operator*(const Poly2& o) const {
        Poly2 p;
        for (int a = 0; a <= MaxDeg; ++a)
            for (int b = 0; b <= MaxDeg; ++b) {
                const double v = c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                if (v == 0.0) continue;
                for (int u = 0; a + u <= MaxDeg; ++u)
                    for (int w = 0; b + w <= MaxDeg; ++w)
                        p.c[static_cast<std::size_t>(a + u)][static_cast<std::size_t>(b + w)] +=
                            v * o.c[static_cast<std::size_t>(u)][static_cast<std::size_t>(w)];
            }
        return p;
    }
    double integrate_reference() const {
        double s = 0.0;
        for (int a = 0; a <= MaxDeg; ++a)
            for (int b = 0; b <= MaxDeg; ++b) {
                const double v = c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                if (v != 0.0) s += v * reference_monomial_integral(a, b);
            }
        return s;
    }
};

// Element stiffness/mass by exact polynomial integration (affine map).
inline Eigen::MatrixXd symbolic_element_stiffness(const clusterfem::FeSpace& space, int e) {
    const auto& basis = space.basis();
    const int n = basis.num_nodes();
    const auto& g = space.geometry(e);
    const Eigen::Matrix2d K = g.inverse;  // grad_phys = K^T grad_ref
    Eigen::MatrixXd out(n, n);
    std::vector<Poly2> dxs, dys;
    for (int i = 0; i < n; ++i) {
        const Poly2 p = Poly2::from_basis(basis, i);
        dxs.push_back(p.dx());
        dys.push_back(p.dy());
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            // (K^T gi) . (K^T gj) = gi^T (K K^T) gj
            const Eigen::Matrix2d S = K * K.transpose();
            const double xx = (dxs[static_cast<std::size_t>(i)] * dxs[static_cast<std::size_t>(j)]).integrate_reference();
            const double xy = (dxs[static_cast<std::size_t>(i)] * dys[static_cast<std::size_t>(j)]).integrate_reference();
            const double yx = (dys[static_cast<std::size_t>(i)] * dxs[static_cast<std::size_t>(j)]).integrate_reference();
            const double yy = (dys[static_cast<std::size_t>(i)] * dys[static_cast<std::size_t>(j)]).integrate_reference();
            out(i, j) = g.det * (S(0, 0) * xx + S(0, 1) * xy + S(1, 0) * yx + S(1, 1) * yy);
        }
    }
    return out;
}

inline Eigen::MatrixXd symbolic_element_mass(const clusterfem::FeSpace& space, int e) {
    const auto& basis = space.basis();
    const int n = basis.num_nodes();
    const auto& g = space.geometry(e);
    std::vector<Poly2> polys;
    for (int i = 0; i < n; ++i) polys.push_back(Poly2::from_basis(basis, i));
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out(i, j) = g.det * (polys[static_cast<std::size_t>(i)] * polys[static_cast<std::size_t>(j)]).integrate_reference();
    return out;
}

// Minimum cardinality over all subsets meeting the bulk criterion.
inline int exhaustive_min_marking(const std::vector<double>& squared, double theta) {
    const int m = static_cast<int>(squared.size());
    double total = 0.0;
    for (double v : squared) total += v;
    const double goal = theta * total;
    int best = std::numeric_limits<int>::max();
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < m; ++i) {
            if (mask & (1u << i)) {
                sum += squared[static_cast<std::size_t>(i)];
                ++count;
            }
        }
        if (sum >= goal) best = std::min(best, count);
    }
    return best;
}

// Dense generalized symmetric eigensolver on explicitly formed matrices.
inline Eigen::VectorXd dense_eigenvalues(const clusterfem::SparseSymMatrix& A,
                                         const clusterfem::SparseSymMatrix& B, int k) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(A.matrix()),
                                                                     Eigen::MatrixXd(B.matrix()));
    return solver.eigenvalues().head(k);
}

}  // namespace oracles
