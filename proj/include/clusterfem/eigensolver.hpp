#pragma once

#include "clusterfem/assembly.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace clusterfem {

/// Ascending eigenvalues of the pencil A x = lambda B x with B-orthonormal
/// vectors and per-pair residuals |A x - lambda B x| / |B x|.
struct EigenCluster {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;    // dim x k, column j pairs with values[j]
    Eigen::VectorXd residuals;
    int iterations = 0;
};

struct EigensolveFailure : std::runtime_error {
    EigensolveFailure(const std::string& what, Eigen::VectorXd best)
        : std::runtime_error(what), best_residuals(std::move(best)) {}
    Eigen::VectorXd best_residuals;
};

struct SolveOptions {
    int max_iterations = 500;
    /// Fixed seed for the deterministic start block (reproducible runs).
    std::uint64_t seed = 0x5eed2024u;
    /// Extra block vectors beyond k; -1 means max(4, k/2).
    int extra_block = -1;
    /// Optional warm-start columns (prolongated eigenvectors of a coarser
    /// space, say); missing columns are filled deterministically.
    Eigen::MatrixXd initial_guess;
};

/// k smallest eigenpairs of A x = lambda B x (A, B symmetric positive
/// definite) by shift-invert block subspace iteration with a sparse Cholesky
/// factorization of A and Rayleigh-Ritz extraction. Converged when every
/// requested pair satisfies residual <= tol * lambda.
///
/// Results are deterministic up to sign and up to orthogonal rotation within
/// groups of numerically equal eigenvalues (relative gap < 1e-9).
/// Throws EigensolveFailure when the iteration budget is exhausted.
EigenCluster smallest_eigenpairs(const SparseSymMatrix& A, const SparseSymMatrix& B, int k,
                                 double tol = 1e-10, const SolveOptions& options = {});

/// max_ij |x_i^T B x_j - delta_ij|
double b_orthonormality_defect(const SparseSymMatrix& B, const Eigen::MatrixXd& vectors);

}  // namespace clusterfem
