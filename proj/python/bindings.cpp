#include "clusterfem/adapt.hpp"
#include "clusterfem/assembly.hpp"
#include "clusterfem/eigensolver.hpp"
#include "clusterfem/equivalence.hpp"
#include "clusterfem/estimator.hpp"
#include "clusterfem/fe_space.hpp"
#include "clusterfem/rate_fit.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace clusterfem;

namespace {

Eigen::MatrixXd vertex_array(const Mesh& mesh) {
    Eigen::MatrixXd out(mesh.num_vertices(), 2);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        out(v, 0) = mesh.vertices()[static_cast<std::size_t>(v)].x;
        out(v, 1) = mesh.vertices()[static_cast<std::size_t>(v)].y;
    }
    return out;
}

Eigen::MatrixXi element_array(const Mesh& mesh) {
    Eigen::MatrixXi out(mesh.num_elements(), 3);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        for (int k = 0; k < 3; ++k) out(e, k) = mesh.elements()[static_cast<std::size_t>(e)].v[k];
    }
    return out;
}

py::tuple matrix_triplets(const SparseSymMatrix& m) {
    const auto& s = m.matrix();
    std::vector<int> rows, cols;
    std::vector<double> vals;
    rows.reserve(static_cast<std::size_t>(s.nonZeros()));
    cols.reserve(static_cast<std::size_t>(s.nonZeros()));
    vals.reserve(static_cast<std::size_t>(s.nonZeros()));
    for (int k = 0; k < s.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(s, k); it; ++it) {
            rows.push_back(static_cast<int>(it.row()));
            cols.push_back(static_cast<int>(it.col()));
            vals.push_back(it.value());
        }
    }
    return py::make_tuple(rows, cols, vals);
}

IndicatorField field_from_array(const Eigen::VectorXd& squared) {
    IndicatorField f;
    f.squared.assign(squared.data(), squared.data() + squared.size());
    return f;
}

py::dict history_dict(const ConvergenceHistory& history) {
    py::list iters, elems, dofs, eta, gap_low, gap_high, lambdas;
    for (const auto& rec : history.records) {
        iters.append(rec.iteration);
        elems.append(rec.n_elements);
        dofs.append(rec.n_dofs);
        eta.append(rec.eta_total);
        gap_low.append(rec.gap_low);
        gap_high.append(rec.gap_high);
        lambdas.append(rec.lambdas);
    }
    py::dict out;
    out["iter"] = iters;
    out["n_elems"] = elems;
    out["n_dofs"] = dofs;
    out["eta_total"] = eta;
    out["lambdas"] = lambdas;
    out["gap_low"] = gap_low;
    out["gap_high"] = gap_high;
    out["solver_failed"] = history.solver_failed;
    out["converged_by_eta"] = history.converged_by_eta;
    out["warnings"] = history.warnings;
    return out;
}

py::dict report_dict(const AlignmentReport& rep) {
    py::dict out;
    out["degree"] = rep.degree;
    out["cluster_offset"] = rep.offset;
    out["cluster_size"] = rep.cluster_size;
    out["coarse_dofs"] = rep.coarse_dofs;
    out["fine_dofs"] = rep.fine_dofs;
    out["fine_rounds"] = rep.fine_rounds;
    out["nestedness_defect"] = rep.nestedness_defect;
    out["alignment"] = rep.alignment;
    out["gram"] = rep.gram;
    out["eps_surrogate"] = rep.eps;
    out["eps_threshold"] = rep.eps_threshold;
    out["fineness_met"] = rep.fineness_met;
    out["norm_M_sq"] = rep.norm_m_sq;
    out["norm_Minv_sq"] = rep.norm_minv_sq;
    out["B_diag_min"] = rep.b_diag_min;
    out["B_diag_max"] = rep.b_diag_max;
    out["B_offdiag_abs_rowsum_max"] = rep.b_offdiag_abs_rowsum_max;
    out["B_eig_min"] = rep.b_eig_min;
    out["B_eig_max"] = rep.b_eig_max;
    out["mu_eta_ratio_min"] = rep.ratio_min;
    out["mu_eta_ratio_max"] = rep.ratio_max;
    out["eta_total_sq"] = rep.eta_total_sq;
    out["mu_total_sq"] = rep.mu_total_sq;
    out["identity_expansion_rel"] = rep.identities.expansion_rel;
    out["identity_volume_rel"] = rep.identities.volume_rel;
    out["identity_jump_rel"] = rep.identities.jump_rel;
    out["bounds_checked"] = rep.bounds_checked;
    out["bounds_hold"] = rep.bounds_hold;
    out["violations"] = rep.violations;
    return out;
}

}  // namespace

PYBIND11_MODULE(_clusterfem, m) {
    m.doc() = "Adaptive Lagrange finite elements for Laplace eigenvalue clusters in 2D";

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("num_vertices", &Mesh::num_vertices)
        .def_property_readonly("num_elements", &Mesh::num_elements)
        .def("vertices", &vertex_array)
        .def("elements", &element_array)
        .def("min_angle", &Mesh::min_angle)
        .def("max_diameter", &Mesh::max_diameter)
        .def("audit_conforming", &Mesh::audit_conforming)
        .def("dump", &Mesh::dump_string);

    m.def("build_initial",
          [](const std::string& domain, int subdivisions) {
              return build_initial(domain_from_string(domain), subdivisions);
          },
          py::arg("domain"), py::arg("subdivisions"));
    m.def("refine", &refine, py::arg("mesh"), py::arg("marked"));
    m.def("uniform_refine", &uniform_refine, py::arg("mesh"), py::arg("rounds"));

    py::class_<FeSpace>(m, "FeSpace")
        .def(py::init<Mesh, int>(), py::arg("mesh"), py::arg("degree"))
        .def_property_readonly("dim", &FeSpace::dim)
        .def_property_readonly("num_dofs", &FeSpace::num_dofs)
        .def_property_readonly("degree", &FeSpace::degree);

    py::class_<SparseSymMatrix>(m, "SparseSymMatrix")
        .def_property_readonly("n", &SparseSymMatrix::n)
        .def("triplets", &matrix_triplets, "COO data as (rows, cols, values)");

    m.def("assemble_stiffness",
          [](const FeSpace& space, bool constrained) {
              return assemble_stiffness(space, constrained ? DofRange::free : DofRange::all);
          },
          py::arg("space"), py::arg("constrained") = true);
    m.def("assemble_mass",
          [](const FeSpace& space, bool constrained) {
              return assemble_mass(space, constrained ? DofRange::free : DofRange::all);
          },
          py::arg("space"), py::arg("constrained") = true);

    m.def("prolongation",
          [](const FeSpace& coarse, const FeSpace& fine) -> Eigen::SparseMatrix<double> {
              return prolongation(coarse, fine);
          },
          py::arg("coarse"), py::arg("fine"));

    m.def("smallest_eigenpairs",
          [](const SparseSymMatrix& A, const SparseSymMatrix& B, int k, double tol, std::uint64_t seed) {
              SolveOptions opts;
              opts.seed = seed;
              const EigenCluster pairs = smallest_eigenpairs(A, B, k, tol, opts);
              return py::make_tuple(pairs.values, pairs.vectors, pairs.residuals);
          },
          py::arg("A"), py::arg("B"), py::arg("k"), py::arg("tol") = 1e-10,
          py::arg("seed") = 0x5eed2024u,
          "k smallest generalized eigenpairs; returns (values, vectors, residuals)");

    m.def("eta_indicators",
          [](const FeSpace& space, const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors) {
              const IndicatorField field = eta_indicators(space, values, vectors);
              return Eigen::Map<const Eigen::VectorXd>(field.squared.data(),
                                                       static_cast<Eigen::Index>(field.squared.size()))
                  .eval();
          },
          py::arg("space"), py::arg("values"), py::arg("vectors"),
          "per-element squared residual indicators of the cluster");

    m.def("doerfler_mark",
          [](const Eigen::VectorXd& squared, double theta) {
              return doerfler_mark(field_from_array(squared), theta);
          },
          py::arg("squared"), py::arg("theta"));

    m.def("run_afem",
          [](const std::string& domain, int degree, int cluster_offset, int cluster_size, double theta,
             long max_dofs, double tol, int subdivisions, std::uint64_t seed) {
              AfemConfig config;
              config.domain = domain_from_string(domain);
              config.degree = degree;
              config.cluster_offset = cluster_offset;
              config.cluster_size = cluster_size;
              config.theta = theta;
              config.max_dofs = max_dofs;
              config.solver_tol = tol;
              config.subdivisions = subdivisions;
              config.seed = seed;
              return history_dict(run_afem(config));
          },
          py::arg("domain") = "square", py::arg("degree") = 1, py::arg("cluster_offset") = 0,
          py::arg("cluster_size") = 1, py::arg("theta") = 0.5, py::arg("max_dofs") = 2000,
          py::arg("tol") = 1e-10, py::arg("subdivisions") = 0, py::arg("seed") = 0x5eed2024u,
          "solve -> estimate -> mark -> refine until the dof budget is met");

    m.def("two_level_report",
          [](const std::string& domain, int degree, int cluster_offset, int cluster_size,
             int coarse_refines, int fine_rounds, double tol, int subdivisions) {
              const DomainSpec spec = domain_from_string(domain);
              Mesh mesh = build_initial(spec, subdivisions > 0 ? subdivisions : default_subdivisions(spec));
              if (coarse_refines > 0) mesh = uniform_refine(mesh, coarse_refines);
              const TwoLevelSetting s =
                  build_two_level(mesh, degree, cluster_offset, cluster_size, fine_rounds, tol);
              return report_dict(verify_lemma(s));
          },
          py::arg("domain") = "square", py::arg("degree") = 1, py::arg("cluster_offset") = 0,
          py::arg("cluster_size") = 1, py::arg("coarse_refines") = 1, py::arg("fine_rounds") = 2,
          py::arg("tol") = 1e-10, py::arg("subdivisions") = 0,
          "two-level estimator-equivalence certification report");

    m.def("fit_rate",
          [](const std::vector<double>& dofs, const std::vector<double>& eta, int q) {
              const RateFit fit = fit_rate(dofs, eta, q);
              return py::make_tuple(fit.slope, fit.points_used, fit.residual);
          },
          py::arg("dofs"), py::arg("eta"), py::arg("q") = 4,
          "least-squares slope of log(eta) vs log(dofs) over the last q points");

    m.attr("__version__") = "0.1.0";
}
