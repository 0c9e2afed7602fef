#include "clusterfem/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clusterfem {

FeSpace::FeSpace(Mesh mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree), basis_(&lagrange_basis(degree)) {
    const int nv = mesh_.num_vertices();
    const int ne = mesh_.num_elements();
    const int per_edge = degree_ - 1;
    const int per_interior = (degree_ - 1) * (degree_ - 2) / 2;

    // Deterministic edge numbering: sort the edge keys once.
    std::vector<std::uint64_t> edge_keys;
    edge_keys.reserve(mesh_.edges().size());
    for (const auto& [key, info] : mesh_.edges()) edge_keys.push_back(key);
    std::sort(edge_keys.begin(), edge_keys.end());
    std::unordered_map<std::uint64_t, int> edge_index;
    edge_index.reserve(edge_keys.size());
    for (std::size_t i = 0; i < edge_keys.size(); ++i) edge_index[edge_keys[i]] = static_cast<int>(i);

    const int n_edges = static_cast<int>(edge_keys.size());
    num_dofs_ = nv + per_edge * n_edges + per_interior * ne;

    const int nloc = basis_->num_nodes();
    element_dofs_.assign(static_cast<std::size_t>(ne) * static_cast<std::size_t>(nloc), -1);
    for (int e = 0; e < ne; ++e) {
        const auto& t = mesh_.elements()[static_cast<std::size_t>(e)];
        int* dofs = &element_dofs_[static_cast<std::size_t>(e) * static_cast<std::size_t>(nloc)];
        dofs[0] = t.v[0];
        dofs[1] = t.v[1];
        dofs[2] = t.v[2];
        int local = 3;
        for (int k = 0; k < 3; ++k) {  // edges (v0,v1), (v1,v2), (v2,v0)
            const int a = t.v[k], b = t.v[(k + 1) % 3];
            const int base = nv + edge_index.at(Mesh::edge_key(a, b)) * per_edge;
            for (int i = 1; i <= per_edge; ++i) {
                // Global edge dofs run from the lower to the higher vertex id.
                const int slot = (a < b) ? (i - 1) : (per_edge - i);
                dofs[local++] = base + slot;
            }
        }
        const int ibase = nv + per_edge * n_edges + e * per_interior;
        for (int i = 0; i < per_interior; ++i) dofs[local++] = ibase + i;
    }

    // Constraints: every dof on the outer boundary or a slit side.
    std::vector<char> constrained(static_cast<std::size_t>(num_dofs_), 0);
    for (int v = 0; v < nv; ++v) {
        if (mesh_.vertex_on_boundary(v)) constrained[static_cast<std::size_t>(v)] = 1;
    }
    for (const auto& [key, info] : mesh_.edges()) {
        if (info.incidence() != 1) continue;
        const int base = nv + edge_index.at(key) * per_edge;
        for (int i = 0; i < per_edge; ++i) constrained[static_cast<std::size_t>(base + i)] = 1;
    }

    free_index_.assign(static_cast<std::size_t>(num_dofs_), -1);
    for (int d = 0; d < num_dofs_; ++d) {
        if (!constrained[static_cast<std::size_t>(d)]) {
            free_index_[static_cast<std::size_t>(d)] = static_cast<int>(free_dofs_.size());
            free_dofs_.push_back(d);
        }
    }
    dim_ = static_cast<int>(free_dofs_.size());

    // Dof coordinates (vertex dofs, then edge dofs low->high id, interior).
    dof_positions_.assign(static_cast<std::size_t>(num_dofs_), Eigen::Vector2d::Zero());
    for (int v = 0; v < nv; ++v) {
        const auto& p = mesh_.vertices()[static_cast<std::size_t>(v)];
        dof_positions_[static_cast<std::size_t>(v)] = {p.x, p.y};
    }
    for (std::size_t i = 0; i < edge_keys.size(); ++i) {
        const auto vv = Mesh::edge_vertices(edge_keys[i]);
        const auto& a = mesh_.vertices()[static_cast<std::size_t>(vv[0])];
        const auto& b = mesh_.vertices()[static_cast<std::size_t>(vv[1])];
        const int base = nv + static_cast<int>(i) * per_edge;
        for (int k = 1; k <= per_edge; ++k) {
            const double s = static_cast<double>(k) / degree_;
            dof_positions_[static_cast<std::size_t>(base + k - 1)] =
                Eigen::Vector2d{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
        }
    }

    geometry_.resize(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        const auto& t = mesh_.elements()[static_cast<std::size_t>(e)];
        const auto& p0 = mesh_.vertices()[static_cast<std::size_t>(t.v[0])];
        const auto& p1 = mesh_.vertices()[static_cast<std::size_t>(t.v[1])];
        const auto& p2 = mesh_.vertices()[static_cast<std::size_t>(t.v[2])];
        auto& g = geometry_[static_cast<std::size_t>(e)];
        g.jacobian << p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y;
        g.det = g.jacobian.determinant();
        g.inverse = g.jacobian.inverse();
        g.diameter = mesh_.element_diameter(e);
        g.origin = {p0.x, p0.y};
    }
    if (per_interior > 0) {
        const auto& nodes = basis_->nodes();
        const int ibase_all = nv + per_edge * n_edges;
        for (int e = 0; e < ne; ++e) {
            const auto& g = geometry_[static_cast<std::size_t>(e)];
            for (int i = 0; i < per_interior; ++i) {
                const auto& node = nodes[static_cast<std::size_t>(3 + 3 * per_edge + i)];
                dof_positions_[static_cast<std::size_t>(ibase_all + e * per_interior + i)] =
                    g.origin + g.jacobian * Eigen::Vector2d{node[0], node[1]};
            }
        }
    }
}

Eigen::Vector2d FeSpace::map_to_physical(int e, double xi, double eta) const {
    const auto& g = geometry_[static_cast<std::size_t>(e)];
    return g.origin + g.jacobian * Eigen::Vector2d{xi, eta};
}

Eigen::Vector2d FeSpace::map_to_reference(int e, double x, double y) const {
    const auto& g = geometry_[static_cast<std::size_t>(e)];
    return g.inverse * (Eigen::Vector2d{x, y} - g.origin);
}

Eigen::VectorXd FeSpace::to_full(const Eigen::VectorXd& free_coefs) const {
    if (free_coefs.size() != dim_) throw std::invalid_argument("to_full: coefficient length mismatch");
    Eigen::VectorXd full = Eigen::VectorXd::Zero(num_dofs_);
    for (int f = 0; f < dim_; ++f) full[free_dofs_[static_cast<std::size_t>(f)]] = free_coefs[f];
    return full;
}

Eigen::VectorXd FeSpace::gather(const Eigen::VectorXd& full, int e) const {
    const int nloc = dofs_per_element();
    Eigen::VectorXd local(nloc);
    for (int i = 0; i < nloc; ++i) local[i] = full[global_dof(e, i)];
    return local;
}

double FeSpace::eval(const Eigen::VectorXd& full, int e, double xi, double eta) const {
    const int nloc = dofs_per_element();
    double r = 0.0;
    for (int i = 0; i < nloc; ++i) r += full[global_dof(e, i)] * basis_->value(i, xi, eta);
    return r;
}

Eigen::Vector2d FeSpace::eval_gradient(const Eigen::VectorXd& full, int e, double xi, double eta) const {
    const auto& g = geometry_[static_cast<std::size_t>(e)];
    Eigen::Vector2d ref = Eigen::Vector2d::Zero();
    const int nloc = dofs_per_element();
    for (int i = 0; i < nloc; ++i) ref += full[global_dof(e, i)] * basis_->gradient(i, xi, eta);
    return g.inverse.transpose() * ref;
}

double FeSpace::eval_laplacian(const Eigen::VectorXd& full, int e, double xi, double eta) const {
    const auto& g = geometry_[static_cast<std::size_t>(e)];
    const Eigen::Matrix2d k = g.inverse;
    const int nloc = dofs_per_element();
    double lap = 0.0;
    for (int i = 0; i < nloc; ++i) {
        const double c = full[global_dof(e, i)];
        if (c == 0.0) continue;
        const auto h = basis_->hessian(i, xi, eta);
        Eigen::Matrix2d href;
        href << h[0], h[1], h[1], h[2];
        lap += c * (k.transpose() * href * k).trace();
    }
    return lap;
}

Eigen::VectorXd FeSpace::interpolate(const std::function<double(double, double)>& f) const {
    Eigen::VectorXd out(num_dofs_);
    for (int d = 0; d < num_dofs_; ++d) {
        const auto p = dof_positions_[static_cast<std::size_t>(d)];
        out[d] = f(p[0], p[1]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prolongation between nested spaces
// ---------------------------------------------------------------------------

namespace {

// Uniform spatial bin index over element bounding boxes, for point location.
class BinGrid {
public:
    explicit BinGrid(const Mesh& mesh) {
        xmin_ = ymin_ = 1e300;
        xmax_ = ymax_ = -1e300;
        for (const auto& v : mesh.vertices()) {
            xmin_ = std::min(xmin_, v.x);
            xmax_ = std::max(xmax_, v.x);
            ymin_ = std::min(ymin_, v.y);
            ymax_ = std::max(ymax_, v.y);
        }
        n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_elements()) / 2.0)));
        bins_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
        for (int e = 0; e < mesh.num_elements(); ++e) {
            const auto& t = mesh.elements()[static_cast<std::size_t>(e)];
            double exmin = 1e300, exmax = -1e300, eymin = 1e300, eymax = -1e300;
            for (int k = 0; k < 3; ++k) {
                const auto& v = mesh.vertices()[static_cast<std::size_t>(t.v[k])];
                exmin = std::min(exmin, v.x);
                exmax = std::max(exmax, v.x);
                eymin = std::min(eymin, v.y);
                eymax = std::max(eymax, v.y);
            }
            for (int bi = clamp_bin(bin_x(exmin)); bi <= clamp_bin(bin_x(exmax)); ++bi)
                for (int bj = clamp_bin(bin_y(eymin)); bj <= clamp_bin(bin_y(eymax)); ++bj)
                    bins_[static_cast<std::size_t>(bj) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(bi)]
                        .push_back(e);
        }
    }

    const std::vector<int>& candidates(double x, double y) const {
        const int bi = clamp_bin(bin_x(x));
        const int bj = clamp_bin(bin_y(y));
        return bins_[static_cast<std::size_t>(bj) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(bi)];
    }

private:
    int bin_x(double x) const { return static_cast<int>((x - xmin_) / (xmax_ - xmin_ + 1e-300) * n_); }
    int bin_y(double y) const { return static_cast<int>((y - ymin_) / (ymax_ - ymin_ + 1e-300) * n_); }
    int clamp_bin(int b) const { return std::clamp(b, 0, n_ - 1); }

    double xmin_, xmax_, ymin_, ymax_;
    int n_ = 1;
    std::vector<std::vector<int>> bins_;
};

}  // namespace

Eigen::SparseMatrix<double> prolongation(const FeSpace& coarse, const FeSpace& fine) {
    if (coarse.degree() != fine.degree()) {
        throw std::invalid_argument("prolongation: spaces must have the same degree");
    }
    const BinGrid grid(coarse.mesh());
    const auto& basis = coarse.basis();
    const int nloc = coarse.dofs_per_element();
    const double tol = 1e-10;

    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<char> row_done(static_cast<std::size_t>(fine.dim()), 0);

    for (int fe = 0; fe < fine.mesh().num_elements(); ++fe) {
        const auto& t = fine.mesh().elements()[static_cast<std::size_t>(fe)];
        const auto& verts = fine.mesh().vertices();
        const double cx = (verts[static_cast<std::size_t>(t.v[0])].x + verts[static_cast<std::size_t>(t.v[1])].x +
                           verts[static_cast<std::size_t>(t.v[2])].x) / 3.0;
        const double cy = (verts[static_cast<std::size_t>(t.v[0])].y + verts[static_cast<std::size_t>(t.v[1])].y +
                           verts[static_cast<std::size_t>(t.v[2])].y) / 3.0;
        int host = -1;
        for (int ce : grid.candidates(cx, cy)) {
            if (coarse.mesh().element_contains(ce, cx, cy, tol)) {
                host = ce;
                break;
            }
        }
        if (host < 0) throw std::invalid_argument("prolongation: meshes are not nested (stray fine element)");
        for (int k = 0; k < 3; ++k) {
            const auto& v = verts[static_cast<std::size_t>(t.v[k])];
            if (!coarse.mesh().element_contains(host, v.x, v.y, 1e-9)) {
                throw std::invalid_argument("prolongation: meshes are not nested (fine element crosses a coarse edge)");
            }
        }

        for (int i = 0; i < nloc; ++i) {
            const int fdof = fine.global_dof(fe, i);
            const int frow = fine.free_index(fdof);
            if (frow < 0 || row_done[static_cast<std::size_t>(frow)]) continue;
            row_done[static_cast<std::size_t>(frow)] = 1;
            const auto p = fine.dof_position(fdof);
            const auto ref = coarse.map_to_reference(host, p[0], p[1]);
            for (int j = 0; j < nloc; ++j) {
                const int col = coarse.free_index(coarse.global_dof(host, j));
                if (col < 0) continue;
                const double val = basis.value(j, ref[0], ref[1]);
                if (std::abs(val) > 1e-14) triplets.emplace_back(frow, col, val);
            }
        }
    }

    Eigen::SparseMatrix<double> P(fine.dim(), coarse.dim());
    P.setFromTriplets(triplets.begin(), triplets.end());
    P.makeCompressed();
    return P;
}

}  // namespace clusterfem
