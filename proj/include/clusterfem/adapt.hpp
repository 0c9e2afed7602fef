#pragma once

#include "clusterfem/estimator.hpp"
#include "clusterfem/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clusterfem {

/// Smallest element set carrying at least a theta-fraction of the total
/// squared indicator: sort by squared value descending (ties by ascending
/// element id) and take the shortest prefix reaching the bound. An all-zero
/// field yields the empty set (converged).
std::vector<int> doerfler_mark(const IndicatorField& indicators, double theta);

struct AfemConfig {
    DomainSpec domain = DomainSpec::unit_square;
    int subdivisions = 0;  // 0: per-domain default (square 2, square2/slit 4, lshape 2)
    int degree = 1;
    int cluster_offset = 0;  // n: the cluster is the eigenvalue indices n+1 .. n+N
    int cluster_size = 1;    // N
    double theta = 0.5;
    long max_dofs = 3000;
    double solver_tol = 1e-10;
    int buffer = 4;          // extra converged pairs beyond the cluster
    double eta_tolerance = 0.0;  // optional early stop on total eta (0: disabled)
    std::uint64_t seed = 0x5eed2024u;
};

struct AfemRecord {
    int iteration = 0;
    int n_elements = 0;
    long n_dofs = 0;
    double eta_total = 0.0;           // sqrt of the summed squared indicators
    std::vector<double> lambdas;      // lambda_1 .. lambda_{n+N}
    double gap_low = 0.0;             // relative gap below the cluster
    double gap_high = 0.0;            // relative gap above the cluster
    double seconds = 0.0;             // wall time of this iteration
};

struct ConvergenceHistory {
    AfemConfig config;
    std::vector<AfemRecord> records;
    bool solver_failed = false;
    std::string failure_message;
    bool converged_by_eta = false;
    std::vector<std::string> warnings;  // cluster-separation diagnostics
};

int default_subdivisions(DomainSpec domain);

/// The solve -> estimate -> mark -> refine loop. Each iteration solves for
/// n + N + buffer eigenpairs, estimates over the cluster, records history and
/// refines until the dof budget is met. The initial mesh is refined uniformly
/// until the space can hold the requested block. Eigensolver failure aborts
/// with the partial history.
ConvergenceHistory run_afem(const AfemConfig& config);

}  // namespace clusterfem
