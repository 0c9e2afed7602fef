#include "clusterfem/equivalence.hpp"

#include "clusterfem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace clusterfem {

TwoLevelSetting build_two_level(const Mesh& mesh, int degree, int offset, int cluster_size,
                                int fine_rounds, double tol, int buffer, std::uint64_t seed) {
    if (fine_rounds < 0) throw std::invalid_argument("build_two_level: fine_rounds must be >= 0");
    if (cluster_size < 1) throw std::invalid_argument("build_two_level: cluster size must be >= 1");

    const int k_solve = offset + cluster_size + std::max(1, buffer);

    FeSpace coarse(mesh, degree);
    if (coarse.dim() < k_solve) {
        throw std::invalid_argument("build_two_level: coarse space too small for the requested block");
    }

    SparseSymMatrix Ac = assemble_stiffness(coarse);
    SparseSymMatrix Bc = assemble_mass(coarse);
    SolveOptions copts;
    copts.seed = seed;
    EigenCluster coarse_pairs = smallest_eigenpairs(Ac, Bc, k_solve, tol, copts);

    TwoLevelSetting s{.coarse = coarse, .fine = coarse};
    s.offset = offset;
    s.cluster_size = cluster_size;
    s.fine_rounds = fine_rounds;
    s.coarse_stiffness = Ac;
    s.coarse_mass = Bc;
    s.coarse_values = coarse_pairs.values;
    s.coarse_vectors = coarse_pairs.vectors;

    if (fine_rounds == 0) {
        s.fine_stiffness = Ac;
        s.fine_mass = Bc;
        s.fine_values = coarse_pairs.values;
        s.fine_vectors = coarse_pairs.vectors;
        Eigen::SparseMatrix<double> eye(coarse.dim(), coarse.dim());
        eye.setIdentity();
        s.interpolation = eye;
    } else {
        s.fine = FeSpace(uniform_refine(mesh, fine_rounds), degree);
        s.interpolation = prolongation(s.coarse, s.fine);
        s.fine_stiffness = assemble_stiffness(s.fine);
        s.fine_mass = assemble_mass(s.fine);
        SolveOptions fopts;
        fopts.seed = seed;
        fopts.initial_guess = s.interpolation * coarse_pairs.vectors;
        EigenCluster fine_pairs = smallest_eigenpairs(s.fine_stiffness, s.fine_mass, k_solve, tol, fopts);
        s.fine_values = fine_pairs.values;
        s.fine_vectors = fine_pairs.vectors;
    }

    const Eigen::SparseMatrix<double> reduced =
        s.interpolation.transpose() * s.fine_stiffness.matrix() * s.interpolation;
    s.nestedness_defect = (reduced - s.coarse_stiffness.matrix()).norm() / s.coarse_stiffness.matrix().norm();
    if (s.nestedness_defect > 1e-10) {
        throw std::runtime_error("build_two_level: nestedness certification failed");
    }

    s.coarse_factor = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
    s.coarse_factor->compute(s.coarse_stiffness.matrix());
    if (s.coarse_factor->info() != Eigen::Success) {
        throw std::runtime_error("build_two_level: coarse stiffness factorization failed");
    }
    return s;
}

Eigen::VectorXd ritz_project(const TwoLevelSetting& s, int j) {
    if (j < 0 || j >= s.cluster_size) throw std::invalid_argument("ritz_project: cluster index out of range");
    const Eigen::VectorXd rhs = s.interpolation.transpose() * (s.fine_stiffness.matrix() * s.fine_vector(j));
    return s.coarse_factor->solve(rhs);
}

Eigen::VectorXd cluster_l2_project(const TwoLevelSetting& s, const Eigen::VectorXd& coarse_coefs) {
    if (coarse_coefs.size() != s.coarse.dim()) {
        throw std::invalid_argument("cluster_l2_project: coefficient length mismatch");
    }
    const auto cluster = s.coarse_vectors.middleCols(s.offset, s.cluster_size);
    const Eigen::VectorXd weights = cluster.transpose() * (s.coarse_mass.matrix() * coarse_coefs);
    return cluster * weights;
}

Eigen::VectorXd cluster_project_fine(const TwoLevelSetting& s, const Eigen::VectorXd& fine_coefs) {
    if (fine_coefs.size() != s.fine.dim()) {
        throw std::invalid_argument("cluster_project_fine: coefficient length mismatch");
    }
    const auto cluster = s.coarse_vectors.middleCols(s.offset, s.cluster_size);
    const Eigen::VectorXd lifted = s.interpolation.transpose() * (s.fine_mass.matrix() * fine_coefs);
    return cluster * (cluster.transpose() * lifted);
}

Eigen::VectorXd lambda_project(const TwoLevelSetting& s, int j) {
    return cluster_l2_project(s, ritz_project(s, j));
}

Eigen::MatrixXd alignment_matrix(const TwoLevelSetting& s) {
    const int N = s.cluster_size;
    const auto cluster = s.coarse_vectors.middleCols(s.offset, N);
    Eigen::MatrixXd M(N, N);
    for (int j = 0; j < N; ++j) {
        M.row(j) = (cluster.transpose() * (s.coarse_mass.matrix() * lambda_project(s, j))).transpose();
    }
    return M;
}

IndicatorField mu_indicators(const TwoLevelSetting& s) {
    std::vector<ResidualInput> inputs(static_cast<std::size_t>(s.cluster_size));
    for (int j = 0; j < s.cluster_size; ++j) {
        auto& in = inputs[static_cast<std::size_t>(j)];
        in.lambda = s.fine_value(j);
        in.mass_part = s.coarse.to_full(cluster_project_fine(s, s.fine_vector(j)));
        in.grad_part = s.coarse.to_full(lambda_project(s, j));
    }
    return residual_indicators(s.coarse, inputs);
}

IndicatorField coarse_eta_indicators(const TwoLevelSetting& s) {
    return eta_indicators(s.coarse, s.coarse_values.segment(s.offset, s.cluster_size),
                          s.coarse_vectors.middleCols(s.offset, s.cluster_size));
}

namespace {

// Per-element integral of (w + Laplacian(g))^2 for coarse full vectors w, g.
std::vector<double> volume_residual_norms(const FeSpace& space, const Eigen::VectorXd& w_full,
                                          const Eigen::VectorXd& g_full) {
    const auto& basis = space.basis();
    const int nloc = space.dofs_per_element();
    const QuadratureRule rule = quadrature(2 * space.degree());
    const int nq = static_cast<int>(rule.points.size());
    Eigen::MatrixXd vals(nq, nloc);
    std::vector<Eigen::MatrixXd> hess(static_cast<std::size_t>(nq));
    for (int q = 0; q < nq; ++q) {
        const double xi = rule.points[static_cast<std::size_t>(q)][1];
        const double eta = rule.points[static_cast<std::size_t>(q)][2];
        hess[static_cast<std::size_t>(q)].resize(3, nloc);
        for (int i = 0; i < nloc; ++i) {
            vals(q, i) = basis.value(i, xi, eta);
            const auto h = basis.hessian(i, xi, eta);
            hess[static_cast<std::size_t>(q)].col(i) = Eigen::Vector3d{h[0], h[1], h[2]};
        }
    }
    std::vector<double> out(static_cast<std::size_t>(space.mesh().num_elements()), 0.0);
    for (int e = 0; e < space.mesh().num_elements(); ++e) {
        const auto& g = space.geometry(e);
        const Eigen::Matrix2d S = g.inverse * g.inverse.transpose();
        const Eigen::Vector3d chain{S(0, 0), 2.0 * S(0, 1), S(1, 1)};
        const Eigen::VectorXd wl = space.gather(w_full, e);
        const Eigen::VectorXd gl = space.gather(g_full, e);
        double acc = 0.0;
        for (int q = 0; q < nq; ++q) {
            const double value = vals.row(q).dot(wl) + chain.dot(hess[static_cast<std::size_t>(q)] * gl);
            acc += 0.5 * g.det * rule.weights[static_cast<std::size_t>(q)] * value * value;
        }
        out[static_cast<std::size_t>(e)] = acc;
    }
    return out;
}

// Per-interior-edge integral of |jump of grad(g)|^2.
double total_jump_norm_sq(const FeSpace& space, const Eigen::VectorXd& g_full, double* max_edge = nullptr) {
    const auto& mesh = space.mesh();
    const auto& basis = space.basis();
    const int nloc = space.dofs_per_element();
    const EdgeQuadratureRule rule = edge_quadrature(space.degree() + 1);
    double total = 0.0;
    if (max_edge) *max_edge = 0.0;
    for (const auto& [key, info] : mesh.edges()) {
        if (info.incidence() != 2) continue;
        const auto vv = Mesh::edge_vertices(key);
        const auto& a = mesh.vertices()[static_cast<std::size_t>(vv[0])];
        const auto& b = mesh.vertices()[static_cast<std::size_t>(vv[1])];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        double edge_val = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double x = a.x + rule.points[q] * (b.x - a.x);
            const double y = a.y + rule.points[q] * (b.y - a.y);
            Eigen::Vector2d jump = Eigen::Vector2d::Zero();
            for (int side = 0; side < 2; ++side) {
                const int e = info.elems[side];
                const auto ref = space.map_to_reference(e, x, y);
                Eigen::Vector2d grad = Eigen::Vector2d::Zero();
                const Eigen::VectorXd gl = space.gather(g_full, e);
                for (int i = 0; i < nloc; ++i) grad += gl[i] * basis.gradient(i, ref[0], ref[1]);
                jump += (side == 0 ? 1.0 : -1.0) * (space.geometry(e).inverse.transpose() * grad);
            }
            edge_val += len * rule.weights[q] * jump.squaredNorm();
        }
        total += edge_val;
        if (max_edge) *max_edge = std::max(*max_edge, edge_val);
    }
    return total;
}

}  // namespace

IdentityResiduals check_identities(const TwoLevelSetting& s) {
    const int N = s.cluster_size;
    const auto cluster = s.coarse_vectors.middleCols(s.offset, N);
    const Eigen::MatrixXd M = alignment_matrix(s);
    IdentityResiduals out;

    for (int j = 0; j < N; ++j) {
        const double lam_fine = s.fine_value(j);
        const Eigen::VectorXd p_j = cluster_project_fine(s, s.fine_vector(j));
        const Eigen::VectorXd g_j = lambda_project(s, j);

        // Reaction-part expansion in the coarse eigenbasis.
        Eigen::VectorXd combo(N);
        for (int m = 0; m < N; ++m) combo[m] = s.coarse_value(m) * M(j, m);
        const Eigen::VectorXd diff = lam_fine * p_j - cluster * combo;
        const double norm = std::sqrt(diff.dot(s.coarse_mass.matrix() * diff));
        out.expansion_rel = std::max(out.expansion_rel, norm / lam_fine);

        // Row of the volume residual identity.
        const Eigen::VectorXd w_row = lam_fine * p_j - cluster * combo;  // reaction difference
        const Eigen::VectorXd g_row = g_j - cluster * M.row(j).transpose();
        const auto defect = volume_residual_norms(s.coarse, s.coarse.to_full(w_row), s.coarse.to_full(g_row));
        const auto scale = volume_residual_norms(s.coarse, Eigen::VectorXd(lam_fine * s.coarse.to_full(p_j)),
                                                 s.coarse.to_full(g_j));
        double scale_total = 0.0, defect_max = 0.0;
        for (double v : scale) scale_total += v;
        for (double v : defect) defect_max = std::max(defect_max, v);
        out.volume_rel = std::max(out.volume_rel, std::sqrt(defect_max) / std::sqrt(scale_total));

        // Row of the jump residual identity.
        double max_edge_defect = 0.0;
        total_jump_norm_sq(s.coarse, s.coarse.to_full(g_row), &max_edge_defect);
        const double jump_scale = total_jump_norm_sq(s.coarse, s.coarse.to_full(g_j));
        if (jump_scale > 0.0) {
            out.jump_rel = std::max(out.jump_rel, std::sqrt(max_edge_defect) / std::sqrt(jump_scale));
        }
    }
    return out;
}

AlignmentReport verify_lemma(const TwoLevelSetting& s) {
    const int N = s.cluster_size;
    AlignmentReport rep;
    rep.degree = s.coarse.degree();
    rep.offset = s.offset;
    rep.cluster_size = N;
    rep.coarse_dofs = s.coarse.dim();
    rep.fine_dofs = s.fine.dim();
    rep.fine_rounds = s.fine_rounds;
    rep.nestedness_defect = s.nestedness_defect;

    rep.alignment = alignment_matrix(s);
    rep.gram = rep.alignment * rep.alignment.transpose();

    // Surrogate fineness.
    rep.eps = 0.0;
    for (int j = 0; j < N; ++j) {
        const Eigen::VectorXd lifted = s.interpolation * lambda_project(s, j);
        const Eigen::VectorXd diff = s.fine_vector(j) - lifted;
        rep.eps = std::max(rep.eps, std::sqrt(diff.dot(s.fine_mass.matrix() * diff)));
    }
    rep.eps_threshold = std::sqrt(1.0 + 0.5 / N) - 1.0;
    rep.fineness_met = rep.eps <= rep.eps_threshold;

    // Norms via dense symmetric eigendecompositions of the N x N matrices.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(rep.gram);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mtm_eig(rep.alignment.transpose() * rep.alignment);
    rep.b_eig_min = gram_eig.eigenvalues().minCoeff();
    rep.b_eig_max = gram_eig.eigenvalues().maxCoeff();
    rep.norm_m_sq = mtm_eig.eigenvalues().maxCoeff();
    const double min_mtm = mtm_eig.eigenvalues().minCoeff();
    rep.norm_minv_sq = min_mtm > 0.0 ? 1.0 / min_mtm : std::numeric_limits<double>::infinity();
    rep.norm_consistency = std::abs(rep.b_eig_max - rep.norm_m_sq);

    rep.b_diag_min = rep.gram.diagonal().minCoeff();
    rep.b_diag_max = rep.gram.diagonal().maxCoeff();
    rep.b_offdiag_abs_rowsum_max = 0.0;
    for (int i = 0; i < N; ++i) {
        double row = 0.0;
        for (int j = 0; j < N; ++j) {
            if (j != i) row += std::abs(rep.gram(i, j));
        }
        rep.b_offdiag_abs_rowsum_max = std::max(rep.b_offdiag_abs_rowsum_max, row);
    }

    // Elementwise indicator ratio.
    const IndicatorField eta = coarse_eta_indicators(s);
    const IndicatorField mu = mu_indicators(s);
    rep.eta_total_sq = eta.total();
    rep.mu_total_sq = mu.total();
    rep.ratio_min = std::numeric_limits<double>::infinity();
    rep.ratio_max = 0.0;
    for (int e = 0; e < eta.size(); ++e) {
        const double et = eta.squared[static_cast<std::size_t>(e)];
        const double mt = mu.squared[static_cast<std::size_t>(e)];
        if (et <= 0.0 && mt <= 0.0) continue;
        const double ratio = et > 0.0 ? mt / et : std::numeric_limits<double>::infinity();
        rep.ratio_min = std::min(rep.ratio_min, ratio);
        rep.ratio_max = std::max(rep.ratio_max, ratio);
    }

    rep.identities = check_identities(s);
    rep.spectral_proxy = 0.0;
    for (int i = 0; i < s.coarse_values.size(); ++i) {
        if (i >= s.offset && i < s.offset + N) continue;
        for (int j = 0; j < N; ++j) {
            const double gap = std::abs(s.coarse_values[i] - s.fine_value(j));
            rep.spectral_proxy = std::max(rep.spectral_proxy, gap > 0.0
                                              ? s.fine_value(j) / gap
                                              : std::numeric_limits<double>::infinity());
        }
    }

    if (!rep.fineness_met) {
        rep.bounds_checked = false;
        rep.bounds_hold = false;
        return rep;
    }

    rep.bounds_checked = true;
    const double tol = 1e-9;
    auto check = [&rep](bool ok, const std::string& what) {
        if (!ok) rep.violations.push_back(what);
    };
    check(rep.norm_m_sq <= 1.5 + tol, "norm_M_sq exceeds 3/2");
    check(rep.norm_minv_sq <= 2.0 + tol, "norm_Minv_sq exceeds 2");
    const double lo = (2.0 * N - 1.0) / (2.0 * N);
    const double hi = (2.0 * N + 1.0) / (2.0 * N);
    check(rep.b_diag_min >= lo - tol, "B diagonal below (2N-1)/2N");
    check(rep.b_diag_max <= hi + tol, "B diagonal above (2N+1)/2N");
    check(rep.b_offdiag_abs_rowsum_max <= (N - 1.0) / (2.0 * N) + tol, "off-diagonal row sum above (N-1)/2N");
    check(rep.b_eig_min >= 0.5 - tol, "Gram eigenvalue below 1/2");
    check(rep.b_eig_max <= 1.5 + tol, "Gram eigenvalue above 3/2");
    const double rel = 1e-8;
    check(rep.ratio_min >= 0.5 * (1.0 - rel), "elementwise mu^2/eta^2 below 1/2");
    check(rep.ratio_max <= 3.0 * (1.0 + rel), "elementwise mu^2/eta^2 above 3");
    rep.bounds_hold = rep.violations.empty();
    return rep;
}

namespace {

void kv(std::ostream& out, const char* key, double value) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << key << '=' << buf << '\n';
}

}  // namespace

void write_report(const AlignmentReport& rep, std::ostream& out) {
    out << "degree=" << rep.degree << '\n';
    out << "cluster_offset=" << rep.offset << '\n';
    out << "cluster_size=" << rep.cluster_size << '\n';
    out << "coarse_dofs=" << rep.coarse_dofs << '\n';
    out << "fine_dofs=" << rep.fine_dofs << '\n';
    out << "fine_rounds=" << rep.fine_rounds << '\n';
    kv(out, "nestedness_defect", rep.nestedness_defect);
    kv(out, "eps_surrogate", rep.eps);
    kv(out, "eps_threshold", rep.eps_threshold);
    out << "fineness_met=" << (rep.fineness_met ? 1 : 0) << '\n';
    kv(out, "norm_M_sq", rep.norm_m_sq);
    kv(out, "norm_Minv_sq", rep.norm_minv_sq);
    kv(out, "B_diag_min", rep.b_diag_min);
    kv(out, "B_diag_max", rep.b_diag_max);
    kv(out, "B_offdiag_abs_rowsum_max", rep.b_offdiag_abs_rowsum_max);
    kv(out, "B_eig_min", rep.b_eig_min);
    kv(out, "B_eig_max", rep.b_eig_max);
    kv(out, "norm_consistency", rep.norm_consistency);
    kv(out, "mu_eta_ratio_min", rep.ratio_min);
    kv(out, "mu_eta_ratio_max", rep.ratio_max);
    kv(out, "eta_total_sq", rep.eta_total_sq);
    kv(out, "mu_total_sq", rep.mu_total_sq);
    kv(out, "identity_expansion_rel", rep.identities.expansion_rel);
    kv(out, "identity_volume_rel", rep.identities.volume_rel);
    kv(out, "identity_jump_rel", rep.identities.jump_rel);
    kv(out, "spectral_gap_proxy_computed_spectrum_only", rep.spectral_proxy);
    out << "bounds_checked=" << (rep.bounds_checked ? 1 : 0) << '\n';
    out << "bounds_hold=" << (rep.bounds_hold ? 1 : 0) << '\n';
    if (!rep.fineness_met) out << "status=fineness condition not met\n";
    else out << "status=" << (rep.bounds_hold ? "ok" : "bounds violated") << '\n';
    out << "violation_count=" << rep.violations.size() << '\n';
    for (std::size_t i = 0; i < rep.violations.size(); ++i) {
        out << "violation_" << (i + 1) << '=' << rep.violations[i] << '\n';
    }
}

}  // namespace clusterfem
