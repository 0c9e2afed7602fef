#include "clusterfem/history_io.hpp"

#include "clusterfem/rate_fit.hpp"

#include <cstdio>
#include <ostream>
#include <vector>

namespace clusterfem {

namespace {

const char* format(char (&buf)[48], double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_history_csv(const ConvergenceHistory& history, std::ostream& out, int fit_points) {
    const auto& cfg = history.config;
    const int n_lambda = cfg.cluster_offset + cfg.cluster_size;
    char buf[48];

    out << "iter,n_elems,n_dofs,eta_total";
    for (int j = 1; j <= n_lambda; ++j) out << ",lambda_" << j;
    out << ",gap_low,gap_high\n";

    for (const auto& rec : history.records) {
        out << rec.iteration << ',' << rec.n_elements << ',' << rec.n_dofs << ','
            << format(buf, rec.eta_total);
        for (double lam : rec.lambdas) out << ',' << format(buf, lam);
        out << ',' << format(buf, rec.gap_low) << ',' << format(buf, rec.gap_high) << '\n';
    }

    out << "# domain=" << to_string(cfg.domain) << " subdivisions="
        << (cfg.subdivisions > 0 ? cfg.subdivisions : default_subdivisions(cfg.domain))
        << " degree=" << cfg.degree << " cluster_offset=" << cfg.cluster_offset
        << " cluster_size=" << cfg.cluster_size << " theta=" << format(buf, cfg.theta) << '\n';
    out << "# max_dofs=" << cfg.max_dofs << " solver_tol=";
    out << format(buf, cfg.solver_tol) << " buffer=" << cfg.buffer << " eta_tolerance=";
    out << format(buf, cfg.eta_tolerance) << " seed=" << cfg.seed << '\n';
    for (const auto& w : history.warnings) out << "# warning: " << w << '\n';
    if (history.solver_failed) out << "# solver_failed=1 message=" << history.failure_message << '\n';
    if (history.converged_by_eta) out << "# converged_by_eta=1\n";

    if (history.records.size() >= 3) {
        std::vector<double> dofs, eta;
        dofs.reserve(history.records.size());
        eta.reserve(history.records.size());
        for (const auto& rec : history.records) {
            dofs.push_back(static_cast<double>(rec.n_dofs));
            eta.push_back(rec.eta_total);
        }
        const RateFit fit = fit_rate(dofs, eta, fit_points);
        out << "# slope=" << format(buf, fit.slope) << " q=" << fit.points_used << " fit_residual=";
        out << format(buf, fit.residual) << '\n';
    }
}

}  // namespace clusterfem
