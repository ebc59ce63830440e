#include "seqhop/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seqhop {

namespace {

constexpr int kMaxBacktracks = 80;

FrameVector checked_gradient(const GradientFn& gradient, const FrameVector& x, std::size_t iteration) {
    FrameVector g = gradient(x);
    if (g.dim() != x.dim()) throw DimensionError("gradient dimension does not match the state");
    if (!g.all_finite()) throw NumericsError("non-finite gradient", iteration);
    return g;
}

double checked_energy(const EnergyFn& energy, const FrameVector& x, std::size_t iteration) {
    const double e = energy(x);
    if (!std::isfinite(e)) throw NumericsError("non-finite energy", iteration);
    return e;
}

} // namespace

void OptimizerSettings::validate() const {
    if (!(step_size > 0.0) || !std::isfinite(step_size)) throw ParamError("step_size must be finite and > 0");
    if (!(tol > 0.0)) throw ParamError("tol must be > 0");
    if (max_iters == 0) throw ParamError("max_iters must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) throw ParamError("backtrack_factor must be in (0, 1)");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ParamError("armijo_c must be in (0, 1)");
}

std::string_view to_string(StepRule rule) {
    return rule == StepRule::Constant ? "constant" : "barzilai_borwein";
}

StepRule parse_step_rule(std::string_view name) {
    if (name == "constant") return StepRule::Constant;
    if (name == "barzilai_borwein" || name == "bb") return StepRule::BarzilaiBorwein;
    throw ParamError("unknown step rule '" + std::string(name) + "' (expected constant or barzilai_borwein)");
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
    case StopReason::GradientTolerance: return "gradient_tolerance";
    case StopReason::StepTolerance: return "step_tolerance";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::LineSearchFailed: return "line_search_failed";
    }
    return "unknown";
}

MinimizeResult minimize(const EnergyFn& energy, const GradientFn& gradient, const FrameVector& x0,
                        const OptimizerSettings& settings) {
    settings.validate();
    if (!x0.all_finite()) throw NumericsError("non-finite initial state", 0);

    MinimizeResult result{x0, 0, false, StopReason::MaxIterations, {}, 0.0};
    FrameVector& x = result.x_star;
    double e = checked_energy(energy, x, 0);
    FrameVector g = checked_gradient(gradient, x, 0);
    result.energy_trace.push_back(e);
    double next_trial = settings.step_size;

    for (std::size_t iter = 1;; ++iter) {
        const double g_inf = inf_norm(g);
        result.final_grad_norm = g_inf;
        if (g_inf <= settings.tol) {
            result.converged = true;
            result.reason = StopReason::GradientTolerance;
            return result;
        }
        if (result.iterations >= settings.max_iters) {
            result.reason = StopReason::MaxIterations;
            return result;
        }

        double alpha = settings.line_search ? next_trial : settings.step_size;
        FrameVector trial = x;
        double e_trial = 0.0;
        if (settings.line_search) {
            const double g_sq = squared_norm(g);
            bool accepted = false;
            for (int attempt = 0; attempt < kMaxBacktracks; ++attempt) {
                trial = x;
                trial.axpy(-alpha, g);
                e_trial = energy(trial);
                // Overshooting into overflow is treated as a failed trial, not an error.
                if (std::isfinite(e_trial) && e_trial <= e - settings.armijo_c * alpha * g_sq) {
                    accepted = true;
                    break;
                }
                alpha *= settings.backtrack_factor;
            }
            if (!accepted) {
                result.reason = StopReason::LineSearchFailed;
                return result;
            }
        } else {
            trial.axpy(-alpha, g);
            e_trial = checked_energy(energy, trial, iter);
        }
        if (!trial.all_finite()) throw NumericsError("non-finite iterate", iter);

        FrameVector g_next = checked_gradient(gradient, trial, iter);
        if (settings.step_rule == StepRule::BarzilaiBorwein) {
            // dx = -alpha g, so <dx,dx>/<dx,dg> = alpha |g|^2 / <g, g - g_next>.
            double curvature = 0.0;
            for (std::size_t i = 0; i < g.dim(); ++i) curvature += g[i] * (g[i] - g_next[i]);
            const double bb = alpha * squared_norm(g) / curvature;
            next_trial = (curvature > 0.0 && std::isfinite(bb)) ? std::clamp(bb, 1e-12, settings.step_size)
                                                                : settings.step_size;
        }

        x = std::move(trial);
        e = e_trial;
        ++result.iterations;
        result.energy_trace.push_back(e);
        g = std::move(g_next);

        if (alpha * g_inf <= settings.tol) {
            result.final_grad_norm = inf_norm(g);
            result.converged = true;
            result.reason = StopReason::StepTolerance;
            return result;
        }
    }
}

std::vector<FlowSample> gradient_flow(const TimeGradientFn& gradient, const FrameVector& x0, double t0, double t1,
                                      double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParamError("flow step dt must be finite and > 0");
    if (!(t1 > t0)) throw ParamError("flow end time must exceed start time");
    if (!x0.all_finite()) throw NumericsError("non-finite initial state", 0);

    const double span = t1 - t0;
    auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    if (steps == 0) steps = 1;

    std::vector<FlowSample> trajectory;
    trajectory.reserve(steps + 1);
    trajectory.push_back({t0, x0});
    FrameVector s = x0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        const double t_next = (i + 1 == steps) ? t1 : t0 + static_cast<double>(i + 1) * dt;
        const FrameVector g = gradient(s, t);
        if (g.dim() != s.dim()) throw DimensionError("gradient dimension does not match the state");
        s.axpy(-(t_next - t), g);
        if (!s.all_finite()) throw NumericsError("non-finite flow state", i + 1);
        trajectory.push_back({t_next, s});
    }
    return trajectory;
}

} // namespace seqhop
