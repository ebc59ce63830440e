#pragma once

// Pieces of the lower-bound argument behind the global-minimum condition,
// exposed so each inequality can be tested on its own.

#include <cstddef>

#include "seqhop/analysis.hpp"
#include "seqhop/core.hpp"

namespace seqhop::bounds {

/// E(s_m, m) with delta weights when consecutive frames are orthogonal:
/// lambda d / 2 + 2 mu d - 2 d.
double energy_at_target(std::size_t d, const ModelParams& params);

/// (lambda/2 + lambda_f) t^2 - (2 lambda_f + 2) sqrt(d) t
double quadratic_bound(double t, std::size_t d, const ModelParams& params);

/// Minimizer of quadratic_bound: (2 lambda_f + 2) sqrt(d) / (lambda + 2 lambda_f).
double quadratic_bound_argmin(std::size_t d, const ModelParams& params);

/// Lower bound on E(s, m) for |s| = t with delta weights and normalized patterns:
/// quadratic_bound(t) + lambda_f d.
double energy_lower_bound(double t, std::size_t d, const ModelParams& params);

/// Lower bound on E(s, m) - E(s_m, m):
/// quadratic_bound(t) + lambda_f d + 2 d - lambda d / 2 - 2 mu d.
double delta_e_lower_bound(double t, std::size_t d, const ModelParams& params);

/// Right-hand side of the unsimplified condition, before the lambda/2 - 2 + 2 mu
/// terms are dropped: G_p(lambda_f) + lambda/2 - 2 + 2 mu.
double intermediate_condition_rhs(const ModelParams& params, ConditionVariant variant = ConditionVariant::square());

} // namespace seqhop::bounds
