#include "seqhop/kernel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "seqhop/errors.hpp"

namespace seqhop {

namespace {

void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParamError("kernel width sigma must be finite and > 0");
}

void check_center(double m, std::size_t n) {
    if (n == 0) throw ParamError("kernel needs at least one pattern");
    if (!std::isfinite(m) || m < 0.0 || m > static_cast<double>(n - 1)) {
        throw ParamError("kernel center " + std::to_string(m) + " outside [0, " + std::to_string(n - 1) + "]");
    }
}

// Subnormal results are flushed to zero so tiny sigma reproduces the delta limit.
double flush(double w) { return w < std::numeric_limits<double>::min() ? 0.0 : w; }

} // namespace

double KernelWeights::sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double raw_kernel(double m, double k, double sigma) {
    check_sigma(sigma);
    const double diff = m - k;
    return flush(std::exp(-(diff * diff) / (2.0 * sigma * sigma)));
}

KernelWeights normalized_weights(double m, std::size_t n, double sigma) {
    check_sigma(sigma);
    check_center(m, n);

    // Shift exponents by the nearest pattern's so at least one weight is 1
    // even when every raw value would underflow (tiny sigma, fractional m).
    const double nearest = std::round(m);
    const double two_var = 2.0 * sigma * sigma;
    const double shift = (m - nearest) * (m - nearest) / two_var;

    KernelWeights out;
    out.center = m;
    out.weights.resize(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double diff = m - static_cast<double>(k);
        out.weights[k] = flush(std::exp(shift - diff * diff / two_var));
        total += out.weights[k];
    }
    for (double& w : out.weights) w /= total;
    return out;
}

KernelWeights delta_weights(std::size_t m, std::size_t n) {
    if (m >= n) {
        throw IndexError("delta weight index " + std::to_string(m) + " out of range for " + std::to_string(n) +
                         " patterns");
    }
    KernelWeights out;
    out.center = static_cast<double>(m);
    out.weights.assign(n, 0.0);
    out.weights[m] = 1.0;
    return out;
}

KernelWeights quadrature_weights(double t, std::size_t n, double sigma, double step) {
    check_sigma(sigma);
    check_center(t, n);
    if (!(step > 0.0) || step > 1.0) throw ParamError("quadrature step must be in (0, 1]");
    const double per_unit = 1.0 / step;
    const auto nodes_per_unit = static_cast<std::size_t>(std::llround(per_unit));
    if (std::abs(per_unit - static_cast<double>(nodes_per_unit)) > 1e-9 * per_unit) {
        throw ParamError("quadrature step must divide 1 exactly");
    }

    KernelWeights out;
    out.center = t;
    out.weights.assign(n, 0.0);
    if (n == 1) {
        out.weights[0] = 1.0;
        return out;
    }

    const double h = 1.0 / static_cast<double>(nodes_per_unit);
    const std::size_t last = (n - 1) * nodes_per_unit;
    const double two_var = 2.0 * sigma * sigma;
    const double nearest = std::round(t);
    const double shift = (t - nearest) * (t - nearest) / two_var;
    for (std::size_t j = 0; j <= last; ++j) {
        const double tau = static_cast<double>(j) * h;
        const double end_factor = (j == 0 || j == last) ? 0.5 : 1.0;
        const double diff = t - tau;
        const double mass = end_factor * h * flush(std::exp(shift - diff * diff / two_var));
        const std::size_t below = j / nodes_per_unit;
        const std::size_t offset = j % nodes_per_unit;
        if (2 * offset == nodes_per_unit) {
            // Halfway nodes belong equally to both neighbours.
            out.weights[below] += 0.5 * mass;
            out.weights[below + 1] += 0.5 * mass;
        } else {
            out.weights[2 * offset < nodes_per_unit ? below : below + 1] += mass;
        }
    }
    double total = 0.0;
    for (double w : out.weights) total += w;
    for (double& w : out.weights) w /= total;
    return out;
}

} // namespace seqhop
