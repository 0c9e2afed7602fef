#pragma once

#include "clusterfem/assembly.hpp"
#include "clusterfem/eigensolver.hpp"
#include "clusterfem/estimator.hpp"
#include "clusterfem/fe_space.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace clusterfem {

/// A coarse space nested in a fine reference space (same degree), with the
/// eigenvalue cluster solved in both. The fine space stands in for the
/// continuous problem: nestedness makes the projection identities exact up
/// to solver tolerance.
struct TwoLevelSetting {
    FeSpace coarse;
    FeSpace fine;
    SparseSymMatrix coarse_stiffness, coarse_mass;
    SparseSymMatrix fine_stiffness, fine_mass;
    Eigen::SparseMatrix<double> interpolation;  // fine.dim x coarse.dim

    int offset = 0;        // n
    int cluster_size = 0;  // N, cluster indices n+1 .. n+N (1-based)
    Eigen::VectorXd coarse_values, fine_values;    // n + N + buffer entries
    Eigen::MatrixXd coarse_vectors, fine_vectors;  // matching columns
    int fine_rounds = 0;
    double nestedness_defect = 0.0;  // rel. Frobenius defect of P^T A_f P = A_c

    std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> coarse_factor;

    double coarse_value(int j) const { return coarse_values[offset + j]; }
    double fine_value(int j) const { return fine_values[offset + j]; }
    Eigen::VectorXd coarse_vector(int j) const { return coarse_vectors.col(offset + j); }
    Eigen::VectorXd fine_vector(int j) const { return fine_vectors.col(offset + j); }
};

TwoLevelSetting build_two_level(const Mesh& mesh, int degree, int offset, int cluster_size,
                                int fine_rounds, double tol = 1e-10, int buffer = 4,
                                std::uint64_t seed = 0x5eed2024u);

/// Energy projection of the j-th fine cluster vector onto the coarse space:
/// solves A_c g = P^T A_f u_j. Cluster index j is 0-based within the cluster.
Eigen::VectorXd ritz_project(const TwoLevelSetting& s, int j);

/// L2 projection of a coarse function onto the span of the coarse cluster
/// vectors.
Eigen::VectorXd cluster_l2_project(const TwoLevelSetting& s, const Eigen::VectorXd& coarse_coefs);

/// L2 projection of a fine function onto the span of the coarse cluster
/// vectors (result in coarse coefficients).
Eigen::VectorXd cluster_project_fine(const TwoLevelSetting& s, const Eigen::VectorXd& fine_coefs);

/// Aligned representative of the j-th fine cluster vector: the cluster L2
/// projection of its energy projection.
Eigen::VectorXd lambda_project(const TwoLevelSetting& s, int j);

/// Residual indicators of the aligned cluster: reaction part uses the fine
/// eigenvalue times the cluster L2 projection of the fine vector, principal
/// part the aligned representative. Same conventions as eta_indicators.
IndicatorField mu_indicators(const TwoLevelSetting& s);

/// Computable indicators of the coarse cluster itself.
IndicatorField coarse_eta_indicators(const TwoLevelSetting& s);

/// N x N alignment matrix with entries (Lambda u_j, u_{l,m})_{L2}.
Eigen::MatrixXd alignment_matrix(const TwoLevelSetting& s);

/// Residuals of the exact algebraic identities of the nested setting:
///  - expansion: the reaction-part expansion of the aligned cluster in the
///    coarse eigenbasis (relative to the fine eigenvalue),
///  - volume/jump: per-element rows of the residual identity
///    (aligned residual) = M (coarse residual), relative to the row scale.
struct IdentityResiduals {
    double expansion_rel = 0.0;
    double volume_rel = 0.0;
    double jump_rel = 0.0;
};

IdentityResiduals check_identities(const TwoLevelSetting& s);

struct AlignmentReport {
    int degree = 0;
    int offset = 0;
    int cluster_size = 0;
    long coarse_dofs = 0, fine_dofs = 0;
    int fine_rounds = 0;
    double nestedness_defect = 0.0;

    Eigen::MatrixXd alignment;  // M
    Eigen::MatrixXd gram;       // B = M M^T

    double eps = 0.0;            // surrogate fineness: max_j |u_j - Lambda u_j|_L2
    double eps_threshold = 0.0;  // sqrt(1 + 1/(2N)) - 1
    bool fineness_met = false;

    double norm_m_sq = 0.0;      // |M|_2^2
    double norm_minv_sq = 0.0;   // |M^{-1}|_2^2 (inf when singular)
    double b_diag_min = 0.0, b_diag_max = 0.0;
    double b_offdiag_abs_rowsum_max = 0.0;
    double b_eig_min = 0.0, b_eig_max = 0.0;
    double norm_consistency = 0.0;  // |lambda_max(B) - lambda_max(M^T M)|

    double ratio_min = 0.0, ratio_max = 0.0;  // elementwise mu^2 / eta^2
    double eta_total_sq = 0.0, mu_total_sq = 0.0;

    IdentityResiduals identities;
    double spectral_proxy = 0.0;  // per-mesh gap proxy over the computed spectrum only

    bool bounds_checked = false;
    bool bounds_hold = false;
    std::vector<std::string> violations;
};

/// Populate the report; when the fineness condition holds, assert the
/// two-sided equivalence package (norm bounds, Gershgorin data, eigenvalue
/// range of the Gram matrix, elementwise indicator ratios). Above the
/// threshold nothing is asserted and the report says so.
AlignmentReport verify_lemma(const TwoLevelSetting& s);

/// Flat key=value text, one metric per line.
void write_report(const AlignmentReport& report, std::ostream& out);

}  // namespace clusterfem
