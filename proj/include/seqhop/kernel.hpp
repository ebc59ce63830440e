#pragma once

#include <cstddef>
#include <vector>

namespace seqhop {

/// Nonnegative per-pattern temporal weights centered at time `center`.
struct KernelWeights {
    std::vector<double> weights;
    double center = 0.0;

    std::size_t size() const noexcept { return weights.size(); }
    double operator[](std::size_t k) const { return weights[k]; }
    double sum() const;
};

/// Gaussian temporal kernel exp(-(m - k)^2 / (2 sigma^2)).
double raw_kernel(double m, double k, double sigma);

/// Gaussian weights over patterns 0..n-1, normalized to sum to one.
/// Fractional centers are allowed. Offsets whose weight underflows stay 0.
KernelWeights normalized_weights(double m, std::size_t n, double sigma);

/// One-hot weights at pattern m (the sigma -> 0 limit).
KernelWeights delta_weights(std::size_t m, std::size_t n);

/// Weights for the continuous-time energy: trapezoidal quadrature of the
/// Gaussian kernel on [0, n-1] with node spacing `step`, where the node at
/// tau contributes to pattern round(tau). `step` must divide 1. Normalized.
KernelWeights quadrature_weights(double t, std::size_t n, double sigma, double step);

} // namespace seqhop
