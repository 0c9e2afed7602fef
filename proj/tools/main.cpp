// Command-line front end: adaptive eigenvalue cluster experiments (CSV per
// marking parameter) and two-level estimator-equivalence reports.

#include "clusterfem/adapt.hpp"
#include "clusterfem/equivalence.hpp"
#include "clusterfem/history_io.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct RunArgs {
    std::string domain = "square";
    int degree = 1;
    std::vector<int> cluster{0, 1};  // n, N
    std::vector<double> thetas{0.5};
    long max_dofs = 2000;
    double tol = 1e-10;
    std::string out = ".";
    std::uint64_t seed = 0x5eed2024u;
    int subdivisions = 0;
    int buffer = 4;
    double eta_tol = 0.0;
};

struct EquivalenceArgs {
    std::string domain = "square";
    int degree = 1;
    std::vector<int> cluster{0, 1};
    int coarse_refines = 1;
    int fine_rounds = 2;
    double tol = 1e-10;
    std::string out = "equivalence_report.txt";
    int subdivisions = 0;
    std::uint64_t seed = 0x5eed2024u;
    int buffer = 4;
};

std::string theta_tag(double theta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", theta);
    return buf;
}

int run_experiment(const RunArgs& args) {
    if (args.cluster.size() != 2) {
        std::cerr << "error: --cluster expects n,N\n";
        return 2;
    }
    std::filesystem::create_directories(args.out);
    int status = 0;
    for (double theta : args.thetas) {
        clusterfem::AfemConfig cfg;
        cfg.domain = clusterfem::domain_from_string(args.domain);
        cfg.subdivisions = args.subdivisions;
        cfg.degree = args.degree;
        cfg.cluster_offset = args.cluster[0];
        cfg.cluster_size = args.cluster[1];
        cfg.theta = theta;
        cfg.max_dofs = args.max_dofs;
        cfg.solver_tol = args.tol;
        cfg.buffer = args.buffer;
        cfg.eta_tolerance = args.eta_tol;
        cfg.seed = args.seed;

        const clusterfem::ConvergenceHistory history = clusterfem::run_afem(cfg);

        const std::string name = std::string("afem_") + args.domain + "_r" + std::to_string(args.degree) +
                                 "_n" + std::to_string(cfg.cluster_offset) + "_N" +
                                 std::to_string(cfg.cluster_size) + "_theta" + theta_tag(theta) + ".csv";
        const std::filesystem::path path = std::filesystem::path(args.out) / name;
        std::ofstream file(path);
        if (!file) {
            std::cerr << "error: cannot open " << path << " for writing\n";
            return 2;
        }
        clusterfem::write_history_csv(history, file);
        std::cout << path.string() << ": " << history.records.size() << " iterations";
        if (!history.records.empty()) {
            std::cout << ", final dofs " << history.records.back().n_dofs << ", final eta "
                      << history.records.back().eta_total;
        }
        std::cout << '\n';
        for (const auto& w : history.warnings) std::cerr << "warning: " << w << '\n';
        if (history.solver_failed) {
            std::cerr << "error: eigensolver failed: " << history.failure_message << '\n';
            status = 1;
        }
    }
    return status;
}

int run_equivalence(const EquivalenceArgs& args) {
    if (args.cluster.size() != 2) {
        std::cerr << "error: --cluster expects n,N\n";
        return 2;
    }
    const auto domain = clusterfem::domain_from_string(args.domain);
    const int subdiv = args.subdivisions > 0 ? args.subdivisions : clusterfem::default_subdivisions(domain);
    clusterfem::Mesh mesh = clusterfem::build_initial(domain, subdiv);
    if (args.coarse_refines > 0) mesh = clusterfem::uniform_refine(mesh, args.coarse_refines);

    const clusterfem::TwoLevelSetting setting = clusterfem::build_two_level(
        mesh, args.degree, args.cluster[0], args.cluster[1], args.fine_rounds, args.tol, args.buffer,
        args.seed);
    const clusterfem::AlignmentReport report = clusterfem::verify_lemma(setting);

    if (auto parent = std::filesystem::path(args.out).parent_path(); !parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream file(args.out);
    if (!file) {
        std::cerr << "error: cannot open " << args.out << " for writing\n";
        return 2;
    }
    file << "domain=" << args.domain << '\n';
    clusterfem::write_report(report, file);

    if (!report.fineness_met) {
        std::cout << args.out << ": fineness condition not met (eps " << report.eps << " > threshold "
                  << report.eps_threshold << "), nothing asserted\n";
        return 0;
    }
    std::cout << args.out << ": bounds " << (report.bounds_hold ? "hold" : "VIOLATED") << " (eps "
              << report.eps << " <= threshold " << report.eps_threshold << ")\n";
    return report.bounds_hold ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("CLUSTERFEM_THREADS")) {
        Eigen::setNbThreads(std::max(1, std::atoi(threads)));
    }

    CLI::App app{"Adaptive FEM for Laplace eigenvalue clusters on polygonal and slit domains"};
    app.require_subcommand(0, 1);

    RunArgs run;
    app.add_option("--domain", run.domain, "square | square2 | slit | lshape")->capture_default_str();
    app.add_option("--degree", run.degree, "polynomial degree 1..3")->capture_default_str();
    app.add_option("--cluster", run.cluster, "cluster offset and size: n,N")->delimiter(',')->expected(2);
    app.add_option("--theta", run.thetas, "marking parameter(s), comma separated")->delimiter(',');
    app.add_option("--max-dofs", run.max_dofs, "dof budget")->capture_default_str();
    app.add_option("--tol", run.tol, "eigensolver relative residual tolerance")->capture_default_str();
    app.add_option("--out", run.out, "output directory for CSV files")->capture_default_str();
    app.add_option("--seed", run.seed, "seed for the eigensolver start block")->capture_default_str();
    app.add_option("--subdivisions", run.subdivisions, "initial macro-grid subdivisions (0: default)");
    app.add_option("--buffer", run.buffer, "extra converged eigenpairs beyond the cluster")
        ->capture_default_str();
    app.add_option("--eta-tol", run.eta_tol, "optional stop when total eta falls below this");

    EquivalenceArgs eq;
    CLI::App* eq_cmd = app.add_subcommand(
        "equivalence", "two-level report certifying the practical/aligned estimator equivalence");
    eq_cmd->add_option("--domain", eq.domain, "square | square2 | slit | lshape")->capture_default_str();
    eq_cmd->add_option("--degree", eq.degree, "polynomial degree 1..3")->capture_default_str();
    eq_cmd->add_option("--cluster", eq.cluster, "cluster offset and size: n,N")->delimiter(',')->expected(2);
    eq_cmd->add_option("--coarse-refines", eq.coarse_refines, "uniform refinement rounds of the coarse mesh")
        ->capture_default_str();
    eq_cmd->add_option("--fine-rounds", eq.fine_rounds, "uniform rounds separating fine from coarse")
        ->capture_default_str();
    eq_cmd->add_option("--tol", eq.tol, "eigensolver relative residual tolerance")->capture_default_str();
    eq_cmd->add_option("--out", eq.out, "report file path")->capture_default_str();
    eq_cmd->add_option("--subdivisions", eq.subdivisions, "initial macro-grid subdivisions (0: default)");
    eq_cmd->add_option("--seed", eq.seed, "seed for the eigensolver start block")->capture_default_str();
    eq_cmd->add_option("--buffer", eq.buffer, "extra converged eigenpairs beyond the cluster")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (eq_cmd->parsed()) return run_equivalence(eq);
        return run_experiment(run);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
}
