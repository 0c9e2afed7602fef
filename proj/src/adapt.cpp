#include "clusterfem/adapt.hpp"

#include "clusterfem/assembly.hpp"
#include "clusterfem/eigensolver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace clusterfem {

std::vector<int> doerfler_mark(const IndicatorField& indicators, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("doerfler_mark: theta must be in (0, 1]");
    }
    const int n = indicators.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double va = indicators.squared[static_cast<std::size_t>(a)];
        const double vb = indicators.squared[static_cast<std::size_t>(b)];
        return va != vb ? va > vb : a < b;
    });

    // Total accumulated in sorted order so that theta = 1 terminates exactly
    // at the last nonzero entry.
    double total = 0.0;
    for (int e : order) total += indicators.squared[static_cast<std::size_t>(e)];
    if (total <= 0.0) return {};

    const double goal = theta * total;
    std::vector<int> marked;
    double acc = 0.0;
    for (int e : order) {
        marked.push_back(e);
        acc += indicators.squared[static_cast<std::size_t>(e)];
        if (acc >= goal) break;
    }
    return marked;
}

int default_subdivisions(DomainSpec domain) {
    switch (domain) {
        case DomainSpec::unit_square: return 2;
        case DomainSpec::square2: return 4;
        case DomainSpec::slit: return 4;
        case DomainSpec::lshape: return 2;
    }
    return 2;
}

ConvergenceHistory run_afem(const AfemConfig& config) {
    if (config.cluster_size < 1) throw std::invalid_argument("run_afem: cluster size must be >= 1");
    if (config.cluster_offset < 0) throw std::invalid_argument("run_afem: cluster offset must be >= 0");
    if (!(config.theta > 0.0 && config.theta <= 1.0)) {
        throw std::invalid_argument("run_afem: theta must be in (0, 1]");
    }
    if (config.degree < 1 || config.degree > 3) throw std::invalid_argument("run_afem: degree must be 1..3");

    ConvergenceHistory history;
    history.config = config;

    const int n = config.cluster_offset;
    const int N = config.cluster_size;
    const int k_solve = n + N + std::max(1, config.buffer);

    const int subdiv = config.subdivisions > 0 ? config.subdivisions : default_subdivisions(config.domain);
    Mesh mesh = build_initial(config.domain, subdiv);
    FeSpace space(mesh, config.degree);
    for (int guard = 0; space.dim() < k_solve && guard < 24; ++guard) {
        mesh = uniform_refine(mesh, 1);
        space = FeSpace(mesh, config.degree);
    }
    if (space.dim() < k_solve) throw std::invalid_argument("run_afem: cannot reach a space large enough for the block");

    FeSpace prev_space = space;
    Eigen::MatrixXd prev_vectors;

    for (int iteration = 0;; ++iteration) {
        const auto t0 = std::chrono::steady_clock::now();
        const SparseSymMatrix A = assemble_stiffness(space);
        const SparseSymMatrix B = assemble_mass(space);

        SolveOptions opts;
        opts.seed = config.seed;
        if (prev_vectors.cols() > 0) {
            opts.initial_guess = Eigen::SparseMatrix<double>(prolongation(prev_space, space)) * prev_vectors;
        }
        EigenCluster pairs;
        try {
            pairs = smallest_eigenpairs(A, B, k_solve, config.solver_tol, opts);
        } catch (const EigensolveFailure& failure) {
            history.solver_failed = true;
            history.failure_message = failure.what();
            return history;
        }

        const IndicatorField indicators =
            eta_indicators(space, pairs.values.segment(n, N), pairs.vectors.middleCols(n, N));

        AfemRecord rec;
        rec.iteration = iteration;
        rec.n_elements = mesh.num_elements();
        rec.n_dofs = space.dim();
        rec.eta_total = std::sqrt(indicators.total());
        rec.lambdas.assign(pairs.values.data(), pairs.values.data() + n + N);
        rec.gap_low = (n == 0) ? 1.0 : (pairs.values[n] - pairs.values[n - 1]) / pairs.values[n];
        rec.gap_high = (pairs.values[n + N] - pairs.values[n + N - 1]) / pairs.values[n + N];
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (rec.gap_low < 1e-6 || rec.gap_high < 1e-6) {
            history.warnings.push_back("iteration " + std::to_string(iteration) +
                                       ": discrete gap at the cluster boundary below 1e-6 relative");
        }
        history.records.push_back(std::move(rec));

        if (space.dim() >= config.max_dofs) break;
        if (config.eta_tolerance > 0.0 && history.records.back().eta_total <= config.eta_tolerance) {
            history.converged_by_eta = true;
            break;
        }
        const std::vector<int> marked = doerfler_mark(indicators, config.theta);
        if (marked.empty()) {
            history.converged_by_eta = true;
            break;
        }

        Mesh refined = refine(mesh, marked);
        prev_space = std::move(space);
        prev_vectors = pairs.vectors;
        mesh = std::move(refined);
        space = FeSpace(mesh, config.degree);
    }
    return history;
}

}  // namespace clusterfem
