#include "clusterfem/eigensolver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace clusterfem {

namespace {

// Platform-independent deterministic fill in [-1, 1).
class DeterministicUniform {
public:
    explicit DeterministicUniform(std::uint64_t seed) : state_(seed ? seed : 1u) {}

    double next() {
        // xorshift64*
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        const std::uint64_t bits = state_ * 0x2545F4914F6CDD1DULL;
        return static_cast<double>(bits >> 11) * (2.0 / 9007199254740992.0) - 1.0;
    }

private:
    std::uint64_t state_;
};

EigenCluster finish(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                    const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B, int k,
                    int iterations) {
    EigenCluster out;
    out.values = values.head(k);
    out.vectors = vectors.leftCols(k);
    out.residuals.resize(k);
    for (int j = 0; j < k; ++j) {
        const Eigen::VectorXd bx = B * out.vectors.col(j);
        const Eigen::VectorXd res = A * out.vectors.col(j) - out.values[j] * bx;
        out.residuals[j] = res.norm() / bx.norm();
    }
    out.iterations = iterations;
    return out;
}

}  // namespace

EigenCluster smallest_eigenpairs(const SparseSymMatrix& A, const SparseSymMatrix& B, int k, double tol,
                                 const SolveOptions& options) {
    const int n = A.n();
    if (B.n() != n) throw std::invalid_argument("smallest_eigenpairs: dimension mismatch");
    if (k < 1 || k > n) throw std::invalid_argument("smallest_eigenpairs: need 1 <= k <= dim");
    if (tol <= 0.0) throw std::invalid_argument("smallest_eigenpairs: tol must be positive");

    const int extra = options.extra_block >= 0 ? options.extra_block : std::max(4, k / 2);
    const int p = std::min(n, k + extra);

    if (p >= n || n <= 32) {
        // The block spans the whole space: solve densely.
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(
            Eigen::MatrixXd(A.matrix()), Eigen::MatrixXd(B.matrix()));
        if (dense.info() != Eigen::Success) throw std::runtime_error("smallest_eigenpairs: dense solve failed");
        return finish(dense.eigenvalues(), dense.eigenvectors(), A.matrix(), B.matrix(), k, 0);
    }

    Eigen::MatrixXd X(n, p);
    DeterministicUniform rng(options.seed);
    const int guess_cols = std::min<int>(static_cast<int>(options.initial_guess.cols()), p);
    if (guess_cols > 0 && options.initial_guess.rows() != n) {
        throw std::invalid_argument("smallest_eigenpairs: initial guess has wrong row count");
    }
    for (int j = 0; j < p; ++j) {
        if (j < guess_cols) {
            X.col(j) = options.initial_guess.col(j);
        } else {
            for (int i = 0; i < n; ++i) X(i, j) = rng.next();
        }
    }

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A.matrix());
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("smallest_eigenpairs: Cholesky factorization of A failed (matrix not SPD?)");
    }

    Eigen::VectorXd values;
    Eigen::VectorXd best_residuals = Eigen::VectorXd::Constant(k, 1e300);
    for (int it = 1; it <= options.max_iterations; ++it) {
        // Shift-invert step (shift 0: A is SPD), then re-orthonormalize.
        Eigen::MatrixXd Y = llt.solve(B.matrix() * X);
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);

        // Rayleigh-Ritz on the block.
        const Eigen::MatrixXd AQ = A.matrix() * Q;
        const Eigen::MatrixXd BQ = B.matrix() * Q;
        const Eigen::MatrixXd Sa = Q.transpose() * AQ;
        const Eigen::MatrixXd Sb = Q.transpose() * BQ;
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> small(Sa, Sb);
        if (small.info() != Eigen::Success) {
            throw std::runtime_error("smallest_eigenpairs: Rayleigh-Ritz projection failed");
        }
        X = Q * small.eigenvectors();
        values = small.eigenvalues();

        bool converged = true;
        for (int j = 0; j < k; ++j) {
            const Eigen::VectorXd bx = BQ * small.eigenvectors().col(j);
            const Eigen::VectorXd res = AQ * small.eigenvectors().col(j) - values[j] * bx;
            const double rel = res.norm() / bx.norm();
            best_residuals[j] = std::min(best_residuals[j], rel);
            if (!(rel <= tol * std::abs(values[j]))) converged = false;
        }
        if (converged) return finish(values, X, A.matrix(), B.matrix(), k, it);
    }

    throw EigensolveFailure("smallest_eigenpairs: no convergence within " +
                                std::to_string(options.max_iterations) + " block iterations; best residual " +
                                std::to_string(best_residuals.maxCoeff()),
                            best_residuals);
}

double b_orthonormality_defect(const SparseSymMatrix& B, const Eigen::MatrixXd& vectors) {
    const Eigen::MatrixXd gram = vectors.transpose() * (B.matrix() * vectors);
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

}  // namespace clusterfem
