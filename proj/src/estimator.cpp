#include "clusterfem/estimator.hpp"

#include "clusterfem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clusterfem {

IndicatorField residual_indicators(const FeSpace& space, const std::vector<ResidualInput>& inputs) {
    const auto& mesh = space.mesh();
    const auto& basis = space.basis();
    const int r = space.degree();
    const int nloc = space.dofs_per_element();
    const int ncomp = static_cast<int>(inputs.size());
    if (ncomp == 0) throw std::invalid_argument("residual_indicators: empty cluster");
    for (const auto& in : inputs) {
        if (in.mass_part.size() != space.num_dofs() || in.grad_part.size() != space.num_dofs()) {
            throw std::invalid_argument("residual_indicators: coefficient vector length mismatch");
        }
    }

    IndicatorField field;
    field.squared.assign(static_cast<std::size_t>(mesh.num_elements()), 0.0);

    // Volume term, quadrature exact for the degree-2r integrand.
    const QuadratureRule vol_rule = quadrature(2 * r);
    const int nq = static_cast<int>(vol_rule.points.size());
    Eigen::MatrixXd vals(nq, nloc);
    std::vector<Eigen::MatrixXd> hess(static_cast<std::size_t>(nq));  // 3 x nloc: (dxx, dxy, dyy)
    for (int q = 0; q < nq; ++q) {
        const double xi = vol_rule.points[static_cast<std::size_t>(q)][1];
        const double eta = vol_rule.points[static_cast<std::size_t>(q)][2];
        hess[static_cast<std::size_t>(q)].resize(3, nloc);
        for (int i = 0; i < nloc; ++i) {
            vals(q, i) = basis.value(i, xi, eta);
            const auto h = basis.hessian(i, xi, eta);
            hess[static_cast<std::size_t>(q)].col(i) = Eigen::Vector3d{h[0], h[1], h[2]};
        }
    }

    Eigen::MatrixXd mass_local(nloc, ncomp), grad_local(nloc, ncomp);
    Eigen::VectorXd lambdas(ncomp);
    for (int j = 0; j < ncomp; ++j) lambdas[j] = inputs[static_cast<std::size_t>(j)].lambda;

    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& g = space.geometry(e);
        const double area = 0.5 * g.det;
        const double h = g.diameter;
        for (int j = 0; j < ncomp; ++j) {
            mass_local.col(j) = space.gather(inputs[static_cast<std::size_t>(j)].mass_part, e);
            grad_local.col(j) = space.gather(inputs[static_cast<std::size_t>(j)].grad_part, e);
        }
        // trace(K^T H K) = S00 hxx + 2 S01 hxy + S11 hyy with S = K K^T.
        const Eigen::Matrix2d S = g.inverse * g.inverse.transpose();
        const Eigen::Vector3d chain{S(0, 0), 2.0 * S(0, 1), S(1, 1)};
        double vol = 0.0;
        for (int q = 0; q < nq; ++q) {
            const Eigen::VectorXd reaction = (vals.row(q) * mass_local).transpose().cwiseProduct(lambdas);
            const Eigen::VectorXd laplac = (chain.transpose() * hess[static_cast<std::size_t>(q)] * grad_local).transpose();
            vol += area * vol_rule.weights[static_cast<std::size_t>(q)] * (reaction + laplac).squaredNorm();
        }
        field.squared[static_cast<std::size_t>(e)] += h * h * vol;
    }

    // Jump term on interior edges; each side receives the full jump norm.
    const EdgeQuadratureRule edge_rule = edge_quadrature((2 * r + 1 + 1) / 2);
    std::vector<std::uint64_t> keys;
    keys.reserve(mesh.edges().size());
    for (const auto& [key, info] : mesh.edges()) {
        if (info.incidence() == 2) keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());

    Eigen::MatrixXd local1(nloc, ncomp), local2(nloc, ncomp);
    Eigen::MatrixXd gref(2, nloc);
    for (const std::uint64_t key : keys) {
        const auto& info = mesh.edges().at(key);
        const auto vv = Mesh::edge_vertices(key);
        const auto& a = mesh.vertices()[static_cast<std::size_t>(vv[0])];
        const auto& b = mesh.vertices()[static_cast<std::size_t>(vv[1])];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const int e1 = info.elems[0], e2 = info.elems[1];
        for (int j = 0; j < ncomp; ++j) {
            local1.col(j) = space.gather(inputs[static_cast<std::size_t>(j)].grad_part, e1);
            local2.col(j) = space.gather(inputs[static_cast<std::size_t>(j)].grad_part, e2);
        }

        double jump = 0.0;
        for (std::size_t q = 0; q < edge_rule.points.size(); ++q) {
            const double s = edge_rule.points[q];
            const double x = a.x + s * (b.x - a.x);
            const double y = a.y + s * (b.y - a.y);
            Eigen::MatrixXd diff(2, ncomp);
            for (int side = 0; side < 2; ++side) {
                const int e = (side == 0) ? e1 : e2;
                const auto ref = space.map_to_reference(e, x, y);
                for (int i = 0; i < nloc; ++i) gref.col(i) = basis.gradient(i, ref[0], ref[1]);
                const Eigen::Matrix<double, 2, Eigen::Dynamic> gphys =
                    space.geometry(e).inverse.transpose() * gref;
                if (side == 0) {
                    diff.noalias() = gphys * local1;
                } else {
                    diff.noalias() -= gphys * local2;
                }
            }
            jump += len * edge_rule.weights[q] * diff.squaredNorm();
        }
        field.squared[static_cast<std::size_t>(e1)] += space.geometry(e1).diameter * jump;
        field.squared[static_cast<std::size_t>(e2)] += space.geometry(e2).diameter * jump;
    }
    return field;
}

IndicatorField eta_indicators(const FeSpace& space, const Eigen::VectorXd& values,
                              const Eigen::MatrixXd& vectors) {
    if (values.size() != vectors.cols()) {
        throw std::invalid_argument("eta_indicators: values/vectors count mismatch");
    }
    if (vectors.rows() != space.dim()) {
        throw std::invalid_argument("eta_indicators: vector length mismatch");
    }
    std::vector<ResidualInput> inputs(static_cast<std::size_t>(values.size()));
    for (int j = 0; j < values.size(); ++j) {
        inputs[static_cast<std::size_t>(j)].lambda = values[j];
        inputs[static_cast<std::size_t>(j)].mass_part = space.to_full(vectors.col(j));
        inputs[static_cast<std::size_t>(j)].grad_part = inputs[static_cast<std::size_t>(j)].mass_part;
    }
    return residual_indicators(space, inputs);
}

}  // namespace clusterfem
