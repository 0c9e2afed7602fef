#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clusterfem/equivalence.hpp"
#include "clusterfem/quadrature.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace clusterfem;

namespace {

// (f, g)_{L2} for two coarse functions by direct quadrature, independent of
// the assembled mass matrix.
double quadrature_inner_product(const FeSpace& space, const Eigen::VectorXd& f_full,
                                const Eigen::VectorXd& g_full) {
    const QuadratureRule rule = quadrature(8);
    double total = 0.0;
    for (int e = 0; e < space.mesh().num_elements(); ++e) {
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double xi = rule.points[q][1], eta = rule.points[q][2];
            acc += rule.weights[q] * space.eval(f_full, e, xi, eta) * space.eval(g_full, e, xi, eta);
        }
        total += 0.5 * space.geometry(e).det * acc;
    }
    return total;
}

TwoLevelSetting square_setting(int degree, int offset, int N, int coarse_refines, int fine_rounds) {
    Mesh mesh = build_initial(DomainSpec::unit_square, 2);
    if (coarse_refines > 0) mesh = uniform_refine(mesh, coarse_refines);
    return build_two_level(mesh, degree, offset, N, fine_rounds);
}

}  // namespace

TEST_CASE("two-level construction certifies nestedness and ordering") {
    const TwoLevelSetting s = square_setting(2, 0, 4, 1, 1);
    CHECK(s.nestedness_defect <= 1e-10);
    const Eigen::SparseMatrix<double> Bred =
        s.interpolation.transpose() * s.fine_mass.matrix() * s.interpolation;
    CHECK((Bred - s.coarse_mass.matrix()).norm() <= 1e-10 * s.coarse_mass.matrix().norm());
    for (int j = 0; j < 4; ++j) {
        CHECK(s.coarse_value(j) >= s.fine_value(j) * (1.0 - 1e-10));
    }
}

TEST_CASE("fine eigenvalues match the dense oracle on a small setting") {
    const TwoLevelSetting s = square_setting(1, 0, 3, 0, 1);
    REQUIRE(s.fine.dim() <= 400);
    const Eigen::VectorXd dense = oracles::dense_eigenvalues(s.fine_stiffness, s.fine_mass, 3);
    for (int j = 0; j < 3; ++j) {
        CHECK(s.fine_values[j] == doctest::Approx(dense[j]).epsilon(1e-9));
    }
}

TEST_CASE("energy projection: defining relation, eigen-relation restriction, optimality") {
    const TwoLevelSetting s = square_setting(2, 0, 2, 0, 2);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int j = 0; j < 2; ++j) {
        const Eigen::VectorXd g = ritz_project(s, j);
        const Eigen::VectorXd rhs = s.interpolation.transpose() * (s.fine_stiffness.matrix() * s.fine_vector(j));
        CHECK((s.coarse_stiffness.matrix() * g - rhs).norm() <= 1e-10 * rhs.norm());

        // The fine eigen-relation restricted to the coarse space.
        const Eigen::VectorXd mass_rhs =
            s.interpolation.transpose() * (s.fine_mass.matrix() * s.fine_vector(j));
        CHECK((rhs - s.fine_value(j) * mass_rhs).norm() <= 1e-9 * rhs.norm());

        // Energy-norm best approximation among random competitors.
        const Eigen::VectorXd lifted_g = s.interpolation * g;
        const Eigen::VectorXd err = s.fine_vector(j) - lifted_g;
        const double best = err.dot(s.fine_stiffness.matrix() * err);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd c(s.coarse.dim());
            for (int i = 0; i < c.size(); ++i) c[i] = dist(rng);
            const Eigen::VectorXd diff = s.fine_vector(j) - s.interpolation * c;
            CHECK(best <= diff.dot(s.fine_stiffness.matrix() * diff) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("cluster projection fixes the cluster and kills its complement") {
    const TwoLevelSetting s = square_setting(1, 0, 3, 1, 1);
    for (int m = 0; m < 3; ++m) {
        const Eigen::VectorXd u = s.coarse_vector(m);
        CHECK((cluster_l2_project(s, u) - u).norm() <= 1e-10);
    }
    // A vector B-orthogonal to the cluster projects to zero: use the next
    // eigenvector beyond the cluster.
    const Eigen::VectorXd beyond = s.coarse_vectors.col(3);
    CHECK(cluster_l2_project(s, beyond).norm() <= 1e-9);
    // Idempotence.
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(s.coarse.dim(), -1.0, 2.0);
    const Eigen::VectorXd once = cluster_l2_project(s, v);
    CHECK((cluster_l2_project(s, once) - once).norm() <= 1e-12 * (1.0 + once.norm()));
}

TEST_CASE("degenerate two-level setting: every projection is the identity") {
    const TwoLevelSetting s = square_setting(2, 0, 3, 1, 0);
    for (int j = 0; j < 3; ++j) {
        CHECK((ritz_project(s, j) - s.fine_vector(j)).norm() <= 1e-9);
        CHECK((lambda_project(s, j) - s.fine_vector(j)).norm() <= 1e-9);
    }
    const IndicatorField eta = coarse_eta_indicators(s);
    const IndicatorField mu = mu_indicators(s);
    for (int e = 0; e < eta.size(); ++e) {
        CHECK(mu.squared[static_cast<std::size_t>(e)] ==
              doctest::Approx(eta.squared[static_cast<std::size_t>(e)]).epsilon(1e-10));
    }
}

TEST_CASE("alignment matrix agrees with quadrature-level inner products") {
    const TwoLevelSetting s = square_setting(2, 0, 2, 0, 1);
    const Eigen::MatrixXd M = alignment_matrix(s);
    for (int j = 0; j < 2; ++j) {
        const Eigen::VectorXd lam_full = s.coarse.to_full(lambda_project(s, j));
        for (int m = 0; m < 2; ++m) {
            const Eigen::VectorXd um_full = s.coarse.to_full(s.coarse_vector(m));
            CHECK(M(j, m) == doctest::Approx(quadrature_inner_product(s.coarse, lam_full, um_full))
                                 .epsilon(1e-11));
        }
    }
    // The L2 projection contracts: |Lambda u| <= |G u|.
    for (int j = 0; j < 2; ++j) {
        const Eigen::VectorXd g = ritz_project(s, j);
        const Eigen::VectorXd lam = lambda_project(s, j);
        const double ng = std::sqrt(g.dot(s.coarse_mass.matrix() * g));
        const double nl = std::sqrt(lam.dot(s.coarse_mass.matrix() * lam));
        CHECK(nl <= ng + 1e-12);
    }
}

TEST_CASE("algebraic identities hold to solver tolerance") {
    for (int degree : {1, 2}) {
        const TwoLevelSetting s = square_setting(degree, 0, 4, degree == 1 ? 1 : 0, 2);
        const IdentityResiduals res = check_identities(s);
        CHECK(res.expansion_rel <= 1e-9);
        CHECK(res.volume_rel <= 1e-9);
        CHECK(res.jump_rel <= 1e-9);
    }
}

TEST_CASE("fineness threshold values") {
    const TwoLevelSetting s4 = square_setting(1, 0, 4, 1, 1);
    const AlignmentReport rep4 = verify_lemma(s4);
    CHECK(rep4.eps_threshold == doctest::Approx(std::sqrt(9.0 / 8.0) - 1.0).epsilon(1e-15));
    CHECK(rep4.eps_threshold == doctest::Approx(0.0606602).epsilon(1e-5));

    const TwoLevelSetting s1 = square_setting(1, 0, 1, 1, 1);
    const AlignmentReport rep1 = verify_lemma(s1);
    CHECK(rep1.eps_threshold == doctest::Approx(std::sqrt(1.5) - 1.0).epsilon(1e-15));
}

TEST_CASE("single eigenvalue: scalar alignment within eps of one") {
    const TwoLevelSetting s = square_setting(3, 0, 1, 0, 2);
    const AlignmentReport rep = verify_lemma(s);
    REQUIRE(rep.fineness_met);
    CHECK(rep.alignment.rows() == 1);
    CHECK(std::abs(rep.alignment(0, 0)) >= 1.0 - rep.eps - 1e-12);
    CHECK(std::abs(rep.alignment(0, 0)) <= 1.0 + rep.eps + 1e-12);
    CHECK(rep.bounds_checked);
    CHECK(rep.bounds_hold);
}

TEST_CASE("equivalence bounds hold once the fineness condition is met") {
    const TwoLevelSetting s = square_setting(2, 0, 4, 1, 2);
    const AlignmentReport rep = verify_lemma(s);
    REQUIRE(rep.fineness_met);
    CHECK(rep.bounds_checked);
    CHECK(rep.bounds_hold);
    CHECK(rep.norm_m_sq <= 1.5 + 1e-9);
    CHECK(rep.norm_minv_sq <= 2.0 + 1e-9);
    CHECK(rep.b_diag_min >= 7.0 / 8.0 - 1e-9);
    CHECK(rep.b_diag_max <= 9.0 / 8.0 + 1e-9);
    CHECK(rep.b_offdiag_abs_rowsum_max <= 3.0 / 8.0 + 1e-9);
    CHECK(rep.b_eig_min >= 0.5 - 1e-9);
    CHECK(rep.b_eig_max <= 1.5 + 1e-9);
    CHECK(rep.ratio_min >= 0.5 * (1.0 - 1e-8));
    CHECK(rep.ratio_max <= 3.0 * (1.0 + 1e-8));
    CHECK(rep.norm_consistency <= 1e-12);

    std::ostringstream out;
    write_report(rep, out);
    CHECK(out.str().find("norm_M_sq=") != std::string::npos);
    CHECK(out.str().find("status=ok") != std::string::npos);
}

TEST_CASE("coarse settings report the unmet fineness condition without asserting") {
    Mesh mesh = build_initial(DomainSpec::slit, 4);
    const TwoLevelSetting s = build_two_level(mesh, 1, 0, 4, 1);
    const AlignmentReport rep = verify_lemma(s);
    CHECK(!rep.fineness_met);
    CHECK(!rep.bounds_checked);
    std::ostringstream out;
    write_report(rep, out);
    CHECK(out.str().find("fineness condition not met") != std::string::npos);
}

TEST_CASE("mu is invariant under sign flips and equal-eigenvalue rotations of the fine cluster") {
    // Unit square cluster {1..3}: the second and third eigenvalues coincide.
    TwoLevelSetting s = square_setting(1, 0, 3, 1, 1);
    REQUIRE(std::abs(s.fine_value(1) - s.fine_value(2)) <= 1e-9 * s.fine_value(2));
    const IndicatorField base = mu_indicators(s);

    TwoLevelSetting flipped = s;
    flipped.fine_vectors.col(s.offset) *= -1.0;
    const IndicatorField after_flip = mu_indicators(flipped);

    TwoLevelSetting rotated = s;
    const double a = 1.234;
    rotated.fine_vectors.col(s.offset + 1) =
        std::cos(a) * s.fine_vectors.col(s.offset + 1) + std::sin(a) * s.fine_vectors.col(s.offset + 2);
    rotated.fine_vectors.col(s.offset + 2) =
        -std::sin(a) * s.fine_vectors.col(s.offset + 1) + std::cos(a) * s.fine_vectors.col(s.offset + 2);
    const IndicatorField after_rot = mu_indicators(rotated);

    for (int e = 0; e < base.size(); ++e) {
        const double ref = base.squared[static_cast<std::size_t>(e)];
        CHECK(after_flip.squared[static_cast<std::size_t>(e)] == doctest::Approx(ref).epsilon(1e-10));
        CHECK(after_rot.squared[static_cast<std::size_t>(e)] == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("surrogate fineness decreases under coarse refinement with a fixed reference") {
    const Mesh base = build_initial(DomainSpec::unit_square, 2);
    // Same fine mesh in both settings: base + 2 rounds.
    const TwoLevelSetting coarse_setting = build_two_level(base, 1, 0, 2, 2);
    const TwoLevelSetting finer_setting = build_two_level(uniform_refine(base, 1), 1, 0, 2, 1);
    CHECK(finer_setting.fine.dim() == coarse_setting.fine.dim());
    const AlignmentReport a = verify_lemma(coarse_setting);
    const AlignmentReport b = verify_lemma(finer_setting);
    CHECK(b.eps <= a.eps + 1e-9);
}

TEST_CASE("reliability proxy: aligned error is bounded by the computable estimator") {
    const TwoLevelSetting s = square_setting(2, 0, 4, 1, 2);
    double error_sq = 0.0;
    for (int j = 0; j < s.cluster_size; ++j) {
        const Eigen::VectorXd err = s.fine_vector(j) - s.interpolation * lambda_project(s, j);
        error_sq += err.dot(s.fine_stiffness.matrix() * err);
    }
    const double eta_sq = coarse_eta_indicators(s).total();
    const double observed_c = error_sq / eta_sq;
    MESSAGE("reliability constant: ", observed_c);
    CHECK(observed_c > 0.0);
    CHECK(observed_c <= 10.0);
}
