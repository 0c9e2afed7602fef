#include "clusterfem/rate_fit.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace clusterfem {

RateFit fit_rate(std::span<const double> dofs, std::span<const double> eta, int q) {
    if (dofs.size() != eta.size()) throw std::invalid_argument("fit_rate: length mismatch");
    const int available = static_cast<int>(dofs.size());
    const int use = std::min(q, available);
    if (use < 3) throw std::invalid_argument("fit_rate: need at least 3 points");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const std::size_t start = static_cast<std::size_t>(available - use);
    for (std::size_t i = start; i < dofs.size(); ++i) {
        if (!(dofs[i] > 0.0) || !(eta[i] > 0.0)) throw std::invalid_argument("fit_rate: nonpositive data");
        const double x = std::log(dofs[i]);
        const double y = std::log(eta[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(use);
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissas");

    RateFit fit;
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.points_used = use;
    const double intercept = (sy - fit.slope * sx) / m;
    double ss = 0.0;
    for (std::size_t i = start; i < dofs.size(); ++i) {
        const double d = std::log(eta[i]) - (intercept + fit.slope * std::log(dofs[i]));
        ss += d * d;
    }
    fit.residual = std::sqrt(ss / m);
    return fit;
}

}  // namespace clusterfem
