#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clusterfem/assembly.hpp"
#include "clusterfem/fe_space.hpp"
#include "clusterfem/quadrature.hpp"

#include <cmath>
#include <random>

using namespace clusterfem;

namespace {

int interior_entity_dim(const Mesh& mesh, int degree) {
    int interior_vertices = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.vertex_on_boundary(v)) ++interior_vertices;
    }
    int interior_edges = 0;
    for (const auto& [key, info] : mesh.edges()) {
        if (info.incidence() == 2) ++interior_edges;
    }
    return interior_vertices + (degree - 1) * interior_edges +
           (degree - 1) * (degree - 2) / 2 * mesh.num_elements();
}

Eigen::VectorXd random_free(const FeSpace& space, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd c(space.dim());
    for (int i = 0; i < space.dim(); ++i) c[i] = dist(rng);
    return c;
}

}  // namespace

TEST_CASE("space dimensions on the four-triangle square") {
    const Mesh mesh = build_initial(DomainSpec::unit_square, 1);
    CHECK(FeSpace(mesh, 1).dim() == 1);   // center vertex
    CHECK(FeSpace(mesh, 2).dim() == 5);   // center + 4 interior edges
    CHECK(FeSpace(mesh, 3).dim() == 13);  // 1 + 2*4 + 1*4
    CHECK_THROWS_AS(FeSpace(mesh, 4), std::invalid_argument);
    CHECK_THROWS_AS(FeSpace(mesh, 0), std::invalid_argument);
}

TEST_CASE("space dimension matches the interior entity count") {
    std::mt19937 rng(7);
    for (DomainSpec domain : {DomainSpec::unit_square, DomainSpec::slit, DomainSpec::lshape}) {
        Mesh mesh = build_initial(domain, domain == DomainSpec::slit ? 4 : 2);
        for (int round = 0; round < 3; ++round) {
            std::vector<int> marked;
            for (int e = 0; e < mesh.num_elements(); ++e) {
                if (rng() % 3 == 0) marked.push_back(e);
            }
            mesh = refine(mesh, marked);
            for (int r = 1; r <= 3; ++r) {
                CHECK(FeSpace(mesh, r).dim() == interior_entity_dim(mesh, r));
            }
        }
    }
}

TEST_CASE("functions are continuous across interior edges") {
    std::mt19937 rng(99);
    const Mesh mesh = refine(uniform_refine(build_initial(DomainSpec::slit, 4), 1), {3, 7, 11, 40});
    for (int r = 1; r <= 3; ++r) {
        FeSpace space(mesh, r);
        const Eigen::VectorXd full = space.to_full(random_free(space, rng));
        const auto rule = edge_quadrature(r + 1);
        for (const auto& [key, info] : mesh.edges()) {
            if (info.incidence() != 2) continue;
            const auto vv = Mesh::edge_vertices(key);
            const auto& a = mesh.vertices()[static_cast<std::size_t>(vv[0])];
            const auto& b = mesh.vertices()[static_cast<std::size_t>(vv[1])];
            for (double s : rule.points) {
                const double x = a.x + s * (b.x - a.x);
                const double y = a.y + s * (b.y - a.y);
                const auto r0 = space.map_to_reference(info.elems[0], x, y);
                const auto r1 = space.map_to_reference(info.elems[1], x, y);
                const double v0 = space.eval(full, info.elems[0], r0[0], r0[1]);
                const double v1 = space.eval(full, info.elems[1], r1[0], r1[1]);
                CHECK(v0 == doctest::Approx(v1).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("partition of unity at random points") {
    const Mesh mesh = refine(build_initial(DomainSpec::lshape, 2), {0, 5, 9});
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0.05, 0.95);
    for (int r = 1; r <= 3; ++r) {
        FeSpace space(mesh, r);
        const Eigen::VectorXd ones = space.interpolate([](double, double) { return 1.0; });
        for (int e = 0; e < mesh.num_elements(); e += 3) {
            const double a = dist(rng), b = dist(rng) * (1.0 - a);
            CHECK(space.eval(ones, e, a, b) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("prolongation of the identical mesh is the identity") {
    const Mesh mesh = build_initial(DomainSpec::unit_square, 2);
    for (int r = 1; r <= 3; ++r) {
        FeSpace space(mesh, r);
        const Eigen::SparseMatrix<double> P = prolongation(space, space);
        CHECK(P.rows() == space.dim());
        CHECK(P.cols() == space.dim());
        Eigen::SparseMatrix<double> eye(space.dim(), space.dim());
        eye.setIdentity();
        CHECK((P - eye).norm() == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("degree-1 prolongation averages the split edge endpoints") {
    const Mesh coarse_mesh = uniform_refine(build_initial(DomainSpec::unit_square, 1), 1);
    std::vector<int> all(static_cast<std::size_t>(coarse_mesh.num_elements()));
    for (int e = 0; e < coarse_mesh.num_elements(); ++e) all[static_cast<std::size_t>(e)] = e;
    const Mesh fine_mesh = refine(coarse_mesh, all);
    FeSpace coarse(coarse_mesh, 1), fine(fine_mesh, 1);
    const Eigen::MatrixXd P = Eigen::MatrixXd(prolongation(coarse, fine));

    // For every bisected interior edge with two free endpoints, the new
    // midpoint row must be exactly 1/2 at each endpoint column.
    int checked = 0;
    for (const auto& [key, info] : coarse_mesh.edges()) {
        if (info.incidence() != 2) continue;
        const auto vv = Mesh::edge_vertices(key);
        if (coarse_mesh.vertex_on_boundary(vv[0]) || coarse_mesh.vertex_on_boundary(vv[1])) continue;
        const auto& a = coarse_mesh.vertices()[static_cast<std::size_t>(vv[0])];
        const auto& b = coarse_mesh.vertices()[static_cast<std::size_t>(vv[1])];
        int mid = -1;
        for (int v = coarse_mesh.num_vertices(); v < fine_mesh.num_vertices(); ++v) {
            const auto& p = fine_mesh.vertices()[static_cast<std::size_t>(v)];
            if (std::abs(p.x - 0.5 * (a.x + b.x)) < 1e-14 && std::abs(p.y - 0.5 * (a.y + b.y)) < 1e-14) {
                mid = v;
                break;
            }
        }
        REQUIRE(mid >= 0);
        const int row = fine.free_index(mid);
        REQUIRE(row >= 0);
        for (int col = 0; col < P.cols(); ++col) {
            const int cdof = coarse.free_to_dof(col);
            const double expected = (cdof == vv[0] || cdof == vv[1]) ? 0.5 : 0.0;
            CHECK(P(row, col) == doctest::Approx(expected).epsilon(1e-14));
        }
        ++checked;
    }
    CHECK(checked >= 4);
}

TEST_CASE("prolongation reproduces coarse functions pointwise") {
    std::mt19937 rng(23);
    for (DomainSpec domain : {DomainSpec::slit, DomainSpec::lshape}) {
        Mesh mesh = build_initial(domain, domain == DomainSpec::slit ? 4 : 2);
        mesh = refine(mesh, {1, 2});
        const Mesh fine = refine(uniform_refine(mesh, 1), {0, 3, 17});
        for (int r = 1; r <= 3; ++r) {
            FeSpace cs(mesh, r), fs(fine, r);
            const Eigen::SparseMatrix<double> P = prolongation(cs, fs);
            const Eigen::VectorXd c = random_free(cs, rng);
            const Eigen::VectorXd cfull = cs.to_full(c);
            const Eigen::VectorXd ffull = fs.to_full(P * c);
            const auto rule = quadrature(4);
            double worst = 0.0;
            for (int fe = 0; fe < fine.num_elements(); ++fe) {
                for (const auto& pt : rule.points) {
                    const auto x = fs.map_to_physical(fe, pt[1], pt[2]);
                    // Quadrature points are interior points of the fine
                    // element, so exactly one coarse element contains them.
                    int host = -1;
                    for (int ce = 0; ce < mesh.num_elements(); ++ce) {
                        const auto ref = cs.map_to_reference(ce, x[0], x[1]);
                        if (ref[0] >= -1e-12 && ref[1] >= -1e-12 && ref[0] + ref[1] <= 1.0 + 1e-12) {
                            host = ce;
                            const double cv = cs.eval(cfull, ce, ref[0], ref[1]);
                            const double fv = fs.eval(ffull, fe, pt[1], pt[2]);
                            worst = std::max(worst, std::abs(cv - fv));
                            break;
                        }
                    }
                    CHECK(host >= 0);
                }
            }
            CHECK(worst <= 1e-12);
        }
    }
}

TEST_CASE("prolongation rejects mismatched inputs") {
    const Mesh mesh = build_initial(DomainSpec::unit_square, 1);
    FeSpace p1(mesh, 1), p2(mesh, 2);
    CHECK_THROWS_AS(prolongation(p1, p2), std::invalid_argument);

    const Mesh a = refine(mesh, {0});
    const Mesh b = refine(mesh, {1});
    FeSpace sa(a, 1), sb(b, 1);
    CHECK_THROWS_AS(prolongation(sa, sb), std::invalid_argument);
}
