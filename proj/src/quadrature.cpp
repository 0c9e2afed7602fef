#include "clusterfem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace clusterfem {

namespace {

void add_point(QuadratureRule& rule, double l0, double l1, double l2, double w) {
    rule.points.push_back({l0, l1, l2});
    rule.weights.push_back(w);
}

// Orbit of a point with barycentric coordinates (1-2a, a, a).
void add_orbit3(QuadratureRule& rule, double a, double w) {
    const double b = 1.0 - 2.0 * a;
    add_point(rule, b, a, a, w);
    add_point(rule, a, b, a, w);
    add_point(rule, a, a, b, w);
}

// Orbit of (a, b, 1-a-b) under all six permutations.
void add_orbit6(QuadratureRule& rule, double a, double b, double w) {
    const double c = 1.0 - a - b;
    add_point(rule, a, b, c, w);
    add_point(rule, a, c, b, w);
    add_point(rule, b, a, c, w);
    add_point(rule, b, c, a, w);
    add_point(rule, c, a, b, w);
    add_point(rule, c, b, a, w);
}

}  // namespace

QuadratureRule quadrature(int order) {
    if (order < 0 || order > 8) {
        throw std::invalid_argument("quadrature: supported orders are 0..8");
    }
    QuadratureRule rule;
    if (order <= 1) {
        rule.order = 1;
        add_point(rule, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0);
    } else if (order == 2) {
        rule.order = 2;
        add_orbit3(rule, 1.0 / 6.0, 1.0 / 3.0);
    } else if (order <= 4) {
        // 6-point rule, exact to degree 4.
        rule.order = 4;
        add_orbit3(rule, 0.445948490915965, 0.223381589678011);
        add_orbit3(rule, 0.091576213509771, 0.109951743655322);
    } else if (order == 5) {
        // 7-point rule with closed-form coefficients.
        rule.order = 5;
        const double s = std::sqrt(15.0);
        add_point(rule, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0);
        add_orbit3(rule, (6.0 - s) / 21.0, (155.0 - s) / 1200.0);
        add_orbit3(rule, (6.0 + s) / 21.0, (155.0 + s) / 1200.0);
    } else if (order == 6) {
        // 12-point rule, exact to degree 6.
        rule.order = 6;
        add_orbit3(rule, 0.249286745170910, 0.116786275726379);
        add_orbit3(rule, 0.063089014491502, 0.050844906370207);
        add_orbit6(rule, 0.310352451033785, 0.053145049844816, 0.082851075618374);
    } else {
        // 16-point rule, exact to degree 8 (used for orders 7 and 8).
        rule.order = 8;
        add_point(rule, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.144315607677787);
        add_orbit3(rule, 0.459292588292723, 0.095091634267285);
        add_orbit3(rule, 0.170569307751760, 0.103217370534718);
        add_orbit3(rule, 0.050547228317031, 0.032458497623198);
        add_orbit6(rule, 0.263112829634638, 0.728492392955404, 0.027230314174435);
    }
    return rule;
}

EdgeQuadratureRule edge_quadrature(int num_points) {
    // Abscissas/weights on [-1, 1], mapped to [0, 1] with unit weight sum.
    EdgeQuadratureRule rule;
    std::vector<double> x, w;
    switch (num_points) {
        case 1:
            x = {0.0};
            w = {2.0};
            break;
        case 2: {
            const double a = 1.0 / std::sqrt(3.0);
            x = {-a, a};
            w = {1.0, 1.0};
            break;
        }
        case 3: {
            const double a = std::sqrt(3.0 / 5.0);
            x = {-a, 0.0, a};
            w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
            break;
        }
        case 4: {
            const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
            const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
            x = {-b, -a, a, b};
            w = {wb, wa, wa, wb};
            break;
        }
        case 5: {
            const double a = 1.0 / 3.0 * std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0));
            const double b = 1.0 / 3.0 * std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0));
            const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
            const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
            x = {-b, -a, 0.0, a, b};
            w = {wb, wa, 128.0 / 225.0, wa, wb};
            break;
        }
        case 6: {
            const double x1 = 0.238619186083197, w1 = 0.467913934572691;
            const double x2 = 0.661209386466265, w2 = 0.360761573048139;
            const double x3 = 0.932469514203152, w3 = 0.171324492379170;
            x = {-x3, -x2, -x1, x1, x2, x3};
            w = {w3, w2, w1, w1, w2, w3};
            break;
        }
        default:
            throw std::invalid_argument("edge_quadrature: 1..6 points supported");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        rule.points.push_back(0.5 * (x[i] + 1.0));
        rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
}

}  // namespace clusterfem
