#include "seqhop/analysis.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "seqhop/bounds.hpp"
#include "seqhop/energy.hpp"
#include "seqhop/kernel.hpp"

namespace seqhop {

ConditionVariant ConditionVariant::from_exponent(int exponent) {
    if (exponent != 2 && exponent != 3) {
        throw ParamError("condition variant exponent must be 2 or 3, got " + std::to_string(exponent));
    }
    return ConditionVariant(exponent);
}

double g_of_lambda_f(double lambda_f, double lambda, ConditionVariant variant) {
    const double denom_base = lambda + 2.0 * lambda_f;
    if (!(denom_base > 0.0)) throw ParamError("lambda + 2 lambda_f must be > 0");
    const double numer = (2.0 * lambda_f + 2.0) * (2.0 * lambda_f + 2.0) * (0.5 * lambda + lambda_f);
    return numer / std::pow(denom_base, variant.exponent());
}

bool check_condition(double lambda_f, double lambda, ConditionVariant variant) {
    return lambda_f > g_of_lambda_f(lambda_f, lambda, variant);
}

double critical_lambda_f(double lambda, ConditionVariant variant) {
    constexpr double lo = 1e-6;
    constexpr double hi = 1e6;
    constexpr int scan_points = 2400;
    auto excess = [&](double x) { return x - g_of_lambda_f(x, lambda, variant); };

    if (excess(lo) > 0.0) return lo;

    // Coarse log scan for the first sign change, then bisection.
    const double log_lo = std::log(lo);
    const double log_step = (std::log(hi) - log_lo) / scan_points;
    double a = lo;
    double b = std::numeric_limits<double>::quiet_NaN();
    for (int i = 1; i <= scan_points; ++i) {
        const double x = (i == scan_points) ? hi : std::exp(log_lo + log_step * i);
        if (excess(x) > 0.0) {
            b = x;
            break;
        }
        a = x;
    }
    if (std::isnan(b)) {
        throw NoCrossingError("lambda_f never exceeds G(lambda_f) in [1e-6, 1e6] for lambda = " +
                              std::to_string(lambda) + ", exponent " + std::to_string(variant.exponent()));
    }
    while (b - a > 1e-9) {
        const double mid = 0.5 * (a + b);
        if (excess(mid) > 0.0) {
            b = mid;
        } else {
            a = mid;
        }
    }

    const double log_b = std::log(b * (1.0 + 1e-6));
    for (int i = 0; i < 100; ++i) {
        const double x = std::exp(log_b + (std::log(hi) - log_b) * i / 99.0);
        if (!check_condition(x, lambda, variant)) {
            throw NoCrossingError("condition fails again at lambda_f = " + std::to_string(x) +
                                  " above the first crossing " + std::to_string(b));
        }
    }
    return b;
}

std::vector<Figure1Row> figure1_data(const std::vector<double>& lambdas, const std::vector<double>& lambda_f_grid,
                                     ConditionVariant variant) {
    std::vector<Figure1Row> rows;
    rows.reserve(lambdas.size() * lambda_f_grid.size());
    for (double lambda : lambdas) {
        for (double lambda_f : lambda_f_grid) {
            rows.push_back({lambda, lambda_f, g_of_lambda_f(lambda_f, lambda, variant), lambda_f});
        }
    }
    return rows;
}

void write_figure1_csv(std::ostream& out, const std::vector<Figure1Row>& rows) {
    const auto old_precision = out.precision(17);
    out << "lambda,lambda_f,G,identity\n";
    for (const auto& r : rows) out << r.lambda << ',' << r.lambda_f << ',' << r.g << ',' << r.identity << '\n';
    out.precision(old_precision);
}

// ---- landscapes ------------------------------------------------------------

void GridSpec::validate() const {
    if (!(x_max > x_min) || !(y_max > y_min)) throw ParamError("grid bounds need max > min on both axes");
    if (resolution < 2) throw ParamError("grid resolution must be at least 2");
}

double GridSpec::x(std::size_t i) const { return x_min + cell_x() * static_cast<double>(i); }
double GridSpec::y(std::size_t j) const { return y_min + cell_y() * static_cast<double>(j); }

FrameVector LandscapeGrid::argmin() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < energy.size(); ++i) {
        if (energy[i] < energy[best]) best = i;
    }
    return FrameVector{spec.x(best % spec.resolution), spec.y(best / spec.resolution)};
}

LandscapeGrid sample_grid(const std::function<double(const FrameVector&)>& energy, const GridSpec& grid) {
    grid.validate();
    LandscapeGrid out;
    out.spec = grid;
    const std::size_t n = grid.resolution;
    out.energy.assign(n * n, 0.0);
    parallel_for(n, [&](std::size_t iy) {
        for (std::size_t ix = 0; ix < n; ++ix) out.energy[iy * n + ix] = energy(FrameVector{grid.x(ix), grid.y(iy)});
    });
    return out;
}

LandscapeGrid landscape_grid(const PatternStore& store, double beta, double lambda, double sigma, double t,
                             const GridSpec& grid) {
    if (store.dim() != 2) {
        throw DimensionError("landscape sampling needs a 2-D store, got d = " + std::to_string(store.dim()));
    }
    const KernelWeights weights = normalized_weights(t, store.size(), sigma);
    LandscapeGrid out =
        sample_grid([&](const FrameVector& s) { return surface_energy(s, store, weights, beta, lambda); }, grid);
    out.t = t;
    return out;
}

void write_landscape_csv(std::ostream& out, const LandscapeGrid& grid) {
    const auto old_precision = out.precision(17);
    out << "# t=" << grid.t << '\n' << "x,y,energy\n";
    const std::size_t n = grid.spec.resolution;
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            out << grid.spec.x(ix) << ',' << grid.spec.y(iy) << ',' << grid.at(ix, iy) << '\n';
        }
    }
    out.precision(old_precision);
}

std::size_t nearest_pattern(const PatternStore& store, const FrameVector& point) {
    std::size_t best = 0;
    double best_dist = squared_distance(store[0], point);
    for (std::size_t k = 1; k < store.size(); ++k) {
        const double dist = squared_distance(store[k], point);
        if (dist < best_dist) {
            best = k;
            best_dist = dist;
        }
    }
    return best;
}

double surface_jump(const PatternStore& store, double beta, double lambda, double sigma, const FrameVector& s_at,
                    std::size_t t_from, std::size_t t_to) {
    if (t_from >= store.size() || t_to >= store.size()) throw IndexError("surface jump time outside the store");
    if (t_from == t_to) return 0.0;
    return simplified_energy(s_at, static_cast<double>(t_to), store, beta, lambda, sigma) -
           simplified_energy(s_at, static_cast<double>(t_from), store, beta, lambda, sigma);
}

PatternStore morphing_demo_store() {
    return PatternStore::verbatim({FrameVector{1.0, 0.0}, FrameVector{0.0, 1.0}, FrameVector{1.0, 1.0},
                                   FrameVector{-1.0, 0.0}, FrameVector{0.0, -1.0}, FrameVector{-1.0, -1.0}});
}

// ---- bound chain -------------------------------------------------------------

namespace bounds {

double energy_at_target(std::size_t d, const ModelParams& p) {
    const double dd = static_cast<double>(d);
    return 0.5 * p.lambda * dd + 2.0 * p.mu * dd - 2.0 * dd;
}

double quadratic_bound(double t, std::size_t d, const ModelParams& p) {
    return (0.5 * p.lambda + p.lambda_f) * t * t - (2.0 * p.lambda_f + 2.0) * std::sqrt(static_cast<double>(d)) * t;
}

double quadratic_bound_argmin(std::size_t d, const ModelParams& p) {
    const double denom = p.lambda + 2.0 * p.lambda_f;
    if (!(denom > 0.0)) throw ParamError("lambda + 2 lambda_f must be > 0");
    return (2.0 * p.lambda_f + 2.0) * std::sqrt(static_cast<double>(d)) / denom;
}

double energy_lower_bound(double t, std::size_t d, const ModelParams& p) {
    return quadratic_bound(t, d, p) + p.lambda_f * static_cast<double>(d);
}

double delta_e_lower_bound(double t, std::size_t d, const ModelParams& p) {
    return energy_lower_bound(t, d, p) - energy_at_target(d, p);
}

double intermediate_condition_rhs(const ModelParams& p, ConditionVariant variant) {
    return g_of_lambda_f(p.lambda_f, p.lambda, variant) + 0.5 * p.lambda - 2.0 + 2.0 * p.mu;
}

} // namespace bounds

} // namespace seqhop
