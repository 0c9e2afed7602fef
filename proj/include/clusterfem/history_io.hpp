#pragma once

#include "clusterfem/adapt.hpp"

#include <iosfwd>

namespace clusterfem {

/// CSV with columns iter, n_elems, n_dofs, eta_total, lambda_1..lambda_{n+N},
/// gap_low, gap_high, followed by "#"-prefixed metadata lines (full config,
/// warnings, and the fitted rate "# slope=..." over the last `fit_points`
/// iterations when at least three are available). Numbers are written with
/// 17 significant digits so repeated runs diff clean.
void write_history_csv(const ConvergenceHistory& history, std::ostream& out, int fit_points = 4);

}  // namespace clusterfem
