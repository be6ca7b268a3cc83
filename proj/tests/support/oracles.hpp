#pragma once

#include <vector>

#include "semiprox/baselines.hpp"
#include "semiprox/ccg.hpp"
#include "semiprox/linalg.hpp"

namespace semiprox::testing {

/// Euclidean projection onto {(x, v): ||x||_nuc <= v <= vcap}, joint in (x, v).
CcgPoint project_nuclear_epigraph(ConstMatrixView a, double beta, double vcap);

/// Projected-gradient oracle for min (q/2)||u - c||^2 + theta v over the
/// truncated nuclear epigraph; independent of the conditional-gradient path.
CcgPoint projected_gradient_epigraph(const DenseMatrix& c, double q, double theta,
                                     double vcap, int max_iters, double tol);

/// Plain accelerated proximal gradient on the smoothed composite model with
/// the exact SVD prox and fixed step; returns every iterate, for reduction
/// checks against the production loop.
std::vector<Vec> reference_fista(const CompositeModel& model, double gamma, int iters);

}  // namespace semiprox::testing
