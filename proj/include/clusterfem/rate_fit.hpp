#pragma once

#include <span>

namespace clusterfem {

/// Least-squares slope of log(eta) against log(dofs) over the last q points.
struct RateFit {
    double slope = 0.0;
    int points_used = 0;
    double residual = 0.0;  // root-mean-square fit residual in log space
};

RateFit fit_rate(std::span<const double> dofs, std::span<const double> eta, int q);

}  // namespace clusterfem
