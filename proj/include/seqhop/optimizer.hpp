#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "seqhop/core.hpp"

namespace seqhop {

/// First trial step of each backtracking line search.
enum class StepRule {
    Constant,        // always step_size
    BarzilaiBorwein, // <dx, dx> / <dx, dg> from the previous step, capped at step_size
};

struct OptimizerSettings {
    double step_size = 1.0;        // fixed step, or the largest trial step when backtracking
    double tol = 1e-5;             // infinity-norm tolerance on gradient and on step
    std::size_t max_iters = 500;
    bool line_search = true;
    double backtrack_factor = 0.5; // in (0, 1)
    double armijo_c = 1e-4;        // in (0, 1)
    StepRule step_rule = StepRule::BarzilaiBorwein;

    void validate() const;
};

enum class StopReason {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    LineSearchFailed,
};

std::string_view to_string(StopReason reason);
std::string_view to_string(StepRule rule);
StepRule parse_step_rule(std::string_view name);

struct MinimizeResult {
    FrameVector x_star;
    std::size_t iterations = 0;
    bool converged = false;
    StopReason reason = StopReason::MaxIterations;
    std::vector<double> energy_trace; // energy at x0 followed by one entry per accepted step
    double final_grad_norm = 0.0;     // infinity norm
};

using EnergyFn = std::function<double(const FrameVector&)>;
using GradientFn = std::function<FrameVector(const FrameVector&)>;

/// Steepest descent s <- s - alpha grad E(s).
///
/// With line_search, alpha starts at the step_rule's trial step (step_size
/// on the first iteration) and is multiplied by backtrack_factor until the
/// Armijo condition
/// E(s - alpha g) <= E(s) - armijo_c alpha |g|^2 holds. Otherwise alpha is
/// step_size. Stops on |g|_inf <= tol or |delta s|_inf <= tol (converged) or
/// after max_iters accepted steps. Throws NumericsError on a non-finite
/// energy, gradient or iterate.
MinimizeResult minimize(const EnergyFn& energy, const GradientFn& gradient, const FrameVector& x0,
                        const OptimizerSettings& settings);

/// Time-dependent gradient field for the continuous flow.
using TimeGradientFn = std::function<FrameVector(const FrameVector&, double)>;

struct FlowSample {
    double t;
    FrameVector state;
};

/// Explicit Euler integration of ds/dt = -grad E(s, t) from t0 to t1.
/// Returns every step including the initial state; the last step is
/// shortened to land exactly on t1.
std::vector<FlowSample> gradient_flow(const TimeGradientFn& gradient, const FrameVector& x0, double t0, double t1,
                                      double dt);

} // namespace seqhop
