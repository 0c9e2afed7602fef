#include "clusterfem/assembly.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <vector>

namespace clusterfem {

double SparseSymMatrix::symmetry_defect() const {
    const Eigen::SparseMatrix<double> d = Eigen::SparseMatrix<double>(m_.transpose()) - m_;
    double defect = 0.0;
    for (int k = 0; k < d.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it) {
            defect = std::max(defect, std::abs(it.value()));
        }
    }
    return defect;
}

void SparseSymMatrix::write_coordinate(std::ostream& out) const {
    std::vector<std::tuple<int, int, double>> entries;
    entries.reserve(static_cast<std::size_t>(m_.nonZeros()));
    for (int k = 0; k < m_.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m_, k); it; ++it) {
            entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    char buf[96];
    for (const auto& [i, j, v] : entries) {
        std::snprintf(buf, sizeof(buf), "%d %d %.17g", i, j, v);
        out << buf << '\n';
    }
}

namespace {

enum class Form { stiffness, mass };

SparseSymMatrix assemble(const FeSpace& space, Form form, DofRange range) {
    const auto& basis = space.basis();
    const int r = space.degree();
    const int nloc = space.dofs_per_element();
    const QuadratureRule rule = quadrature(form == Form::stiffness ? std::max(1, 2 * (r - 1)) : 2 * r);
    const int nq = static_cast<int>(rule.points.size());

    // Reference basis values / gradients at the quadrature points.
    Eigen::MatrixXd vals(nq, nloc);
    std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> grads(static_cast<std::size_t>(nq));
    for (int q = 0; q < nq; ++q) {
        const double xi = rule.points[static_cast<std::size_t>(q)][1];
        const double eta = rule.points[static_cast<std::size_t>(q)][2];
        grads[static_cast<std::size_t>(q)].resize(2, nloc);
        for (int i = 0; i < nloc; ++i) {
            vals(q, i) = basis.value(i, xi, eta);
            grads[static_cast<std::size_t>(q)].col(i) = basis.gradient(i, xi, eta);
        }
    }

    const bool constrained = (range == DofRange::free);
    const int n = constrained ? space.dim() : space.num_dofs();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(space.mesh().num_elements()) *
                     static_cast<std::size_t>(nloc) * static_cast<std::size_t>(nloc));

    Eigen::MatrixXd local(nloc, nloc);
    Eigen::Matrix<double, 2, Eigen::Dynamic> phys(2, nloc);
    for (int e = 0; e < space.mesh().num_elements(); ++e) {
        const auto& g = space.geometry(e);
        const double area = 0.5 * g.det;
        local.setZero();
        if (form == Form::stiffness) {
            const Eigen::Matrix2d invT = g.inverse.transpose();
            for (int q = 0; q < nq; ++q) {
                phys = invT * grads[static_cast<std::size_t>(q)];
                const double w = area * rule.weights[static_cast<std::size_t>(q)];
                local.noalias() += w * phys.transpose() * phys;
            }
        } else {
            for (int q = 0; q < nq; ++q) {
                const double w = area * rule.weights[static_cast<std::size_t>(q)];
                local.noalias() += w * vals.row(q).transpose() * vals.row(q);
            }
        }
        for (int i = 0; i < nloc; ++i) {
            const int gi = space.global_dof(e, i);
            const int ri = constrained ? space.free_index(gi) : gi;
            if (ri < 0) continue;
            for (int j = 0; j < nloc; ++j) {
                const int gj = space.global_dof(e, j);
                const int cj = constrained ? space.free_index(gj) : gj;
                if (cj < 0) continue;
                triplets.emplace_back(ri, cj, local(i, j));
            }
        }
    }

    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return SparseSymMatrix(std::move(m));
}

}  // namespace

SparseSymMatrix assemble_stiffness(const FeSpace& space, DofRange range) {
    return assemble(space, Form::stiffness, range);
}

SparseSymMatrix assemble_mass(const FeSpace& space, DofRange range) {
    return assemble(space, Form::mass, range);
}

}  // namespace clusterfem
