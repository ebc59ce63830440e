#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "seqhop/core.hpp"

namespace seqhop {

/// Power of (lambda + 2 lambda_f) in the denominator of G. Both forms of
/// the global-minimum condition are in circulation; the cubic one is the
/// default.
class ConditionVariant {
public:
    static ConditionVariant cubic() { return ConditionVariant(3); }
    static ConditionVariant square() { return ConditionVariant(2); }
    /// Throws ParamError unless exponent is 2 or 3.
    static ConditionVariant from_exponent(int exponent);

    int exponent() const noexcept { return exponent_; }

    friend bool operator==(ConditionVariant, ConditionVariant) = default;

private:
    explicit ConditionVariant(int exponent) : exponent_(exponent) {}
    int exponent_;
};

/// G(lambda_f) = (2 lambda_f + 2)^2 (lambda/2 + lambda_f) / (lambda + 2 lambda_f)^p
double g_of_lambda_f(double lambda_f, double lambda, ConditionVariant variant = ConditionVariant::cubic());

/// lambda_f > G(lambda_f): s_m is the global minimizer at step m in the
/// delta-weight limit.
bool check_condition(double lambda_f, double lambda, ConditionVariant variant = ConditionVariant::cubic());

/// Smallest lambda_f in [1e-6, 1e6] where lambda_f - G(lambda_f) turns
/// positive, refined by bisection to 1e-9. The condition is re-checked on a
/// log-spaced sample above the crossing; NoCrossingError if there is no
/// crossing or the condition fails again above it.
double critical_lambda_f(double lambda, ConditionVariant variant = ConditionVariant::cubic());

struct Figure1Row {
    double lambda;
    double lambda_f;
    double g;
    double identity; // lambda_f, the G = lambda_f reference line
};

/// One row per (lambda, lambda_f) pair, lambda-major.
std::vector<Figure1Row> figure1_data(const std::vector<double>& lambdas, const std::vector<double>& lambda_f_grid,
                                     ConditionVariant variant = ConditionVariant::cubic());

/// CSV with header `lambda,lambda_f,G,identity`.
void write_figure1_csv(std::ostream& out, const std::vector<Figure1Row>& rows);

// ---- energy landscapes of 2-D stores ---------------------------------------

struct GridSpec {
    double x_min = -1.5;
    double x_max = 1.5;
    double y_min = -1.5;
    double y_max = 1.5;
    std::size_t resolution = 61; // nodes per axis

    void validate() const;
    double x(std::size_t i) const;
    double y(std::size_t j) const;
    double cell_x() const { return (x_max - x_min) / static_cast<double>(resolution - 1); }
    double cell_y() const { return (y_max - y_min) / static_cast<double>(resolution - 1); }
};

/// Energies at grid nodes, row-major with y as the row index.
struct LandscapeGrid {
    GridSpec spec;
    double t = 0.0;
    std::vector<double> energy;

    double at(std::size_t ix, std::size_t iy) const { return energy[iy * spec.resolution + ix]; }
    /// Node with the lowest energy; first in row-major order on ties.
    FrameVector argmin() const;
};

/// simplified_energy at time t sampled on the grid. The store must be 2-D.
LandscapeGrid landscape_grid(const PatternStore& store, double beta, double lambda, double sigma, double t,
                             const GridSpec& grid);

/// Same sampling for an arbitrary energy of a 2-D state.
LandscapeGrid sample_grid(const std::function<double(const FrameVector&)>& energy, const GridSpec& grid);

/// Writes `# t=<value>` then `x,y,energy` rows in node order.
void write_landscape_csv(std::ostream& out, const LandscapeGrid& grid);

/// Index of the stored pattern nearest (Euclidean) to point; smallest index on ties.
std::size_t nearest_pattern(const PatternStore& store, const FrameVector& point);

/// E(s, t_to) - E(s, t_from) on the simplified surface: the energy change at
/// a fixed state when the time-indexed surface switches.
double surface_jump(const PatternStore& store, double beta, double lambda, double sigma, const FrameVector& s_at,
                    std::size_t t_from, std::size_t t_to);

/// The six 2-D vectors used to illustrate the morphing surfaces, verbatim
/// (norms 1 and sqrt 2, not renormalized).
PatternStore morphing_demo_store();

} // namespace seqhop
