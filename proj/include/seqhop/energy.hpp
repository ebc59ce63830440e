#pragma once

#include <cstddef>
#include <vector>

#include "seqhop/core.hpp"
#include "seqhop/kernel.hpp"

namespace seqhop {

/// Interaction function of the kernel-weighted energy.
enum class Functional {
    Exp, // -sum_k K_k exp(beta <s, s_k>)
    Lse, // -(1/beta) log sum_k K_k exp(beta <s, s_k>)
};

/// Term-by-term value of the movie energy at one state.
struct EnergyBreakdown {
    double regularization = 0.0; // (lambda/2) |s|^2
    double fidelity = 0.0;       // lambda_f |s - s_m|^2
    double continuity = 0.0;     // mu |s - prev|^2
    double lse = 0.0;            // -(1/beta) log sum_k w_k exp(beta <s, s_k>)
    double max_term = 0.0;       // -max_k <s, s_k>
    double total = 0.0;
};

struct SoftmaxProbs {
    std::vector<double> p;
    std::size_t argmax_index = 0;
};

/// <s, s_k> for every stored pattern, in pattern order.
std::vector<double> similarities(const FrameVector& s, const PatternStore& store);

/// Index of the largest similarity; ties go to the smallest index.
std::size_t argmax_similarity(const std::vector<double>& sims);

/// log sum_k K_k exp(beta * sims_k), shifted by the largest exponent before
/// exponentiating. Zero weights are skipped; all-zero weights throw
/// DegenerateWeightsError.
double log_weighted_exp_sum(const std::vector<double>& sims, const KernelWeights& weights, double beta);

/// log sum_k K_k exp(beta <s, s_k>): the log of the (positive) interaction
/// sum. This is the safe way to evaluate the exponential functional when
/// beta * d is large.
double exp_log_magnitude(const FrameVector& s, const PatternStore& store, const KernelWeights& weights, double beta);

/// Kernel-weighted energy with the selected interaction function plus the
/// (lambda/2)|s|^2 regularizer. The exponential functional is only usable
/// while exp(beta <s, s_k>) is representable; overflow throws NumericsError.
double general_energy(const FrameVector& s, const PatternStore& store, const KernelWeights& weights,
                      Functional functional, double beta, double lambda);

/// Gradient of general_energy.
FrameVector general_gradient(const FrameVector& s, const PatternStore& store, const KernelWeights& weights,
                             Functional functional, double beta, double lambda);

/// -beta sum_k K_k exp(beta <s, s_k>) s_k + lambda s.
FrameVector exp_gradient(const FrameVector& s, const PatternStore& store, const KernelWeights& weights, double beta,
                         double lambda);

/// Weighted softmax p_k = K_k e^{beta<s,s_k>} / sum_j K_j e^{beta<s,s_j>}.
/// beta = 0 returns the weights themselves.
SoftmaxProbs softmax_pk(const FrameVector& s, const PatternStore& store, double beta, const KernelWeights& weights);

// ---- movie energy ---------------------------------------------------------
//
// E(s, m) = (lambda/2)|s|^2 + lambda_f |s - s_m|^2 + mu |s - prev|^2
//           - (1/beta) log sum_k w_k(m) exp(beta <s, s_k>) - max_k <s, s_k>
//
// prev is the frame retrieved at step m-1 (zero at m = 0). The default
// weights are normalized_weights(m, N, sigma).

EnergyBreakdown movie_energy(const FrameVector& s, std::size_t m, const PatternStore& store,
                             const ModelParams& params, const FrameVector& prev);
EnergyBreakdown movie_energy(const FrameVector& s, std::size_t m, const PatternStore& store,
                             const ModelParams& params, const FrameVector& prev, const KernelWeights& weights);

FrameVector movie_gradient(const FrameVector& s, std::size_t m, const PatternStore& store, const ModelParams& params,
                           const FrameVector& prev);
FrameVector movie_gradient(const FrameVector& s, std::size_t m, const PatternStore& store, const ModelParams& params,
                           const FrameVector& prev, const KernelWeights& weights);

/// Movie energy without fidelity and continuity, at a possibly fractional
/// time t: (lambda/2)|s|^2 + lse + max term, weights normalized at t.
double simplified_energy(const FrameVector& s, double t, const PatternStore& store, double beta, double lambda,
                         double sigma);
FrameVector simplified_gradient(const FrameVector& s, double t, const PatternStore& store, double beta, double lambda,
                                double sigma);

/// Same three terms with caller-supplied weights.
double surface_energy(const FrameVector& s, const PatternStore& store, const KernelWeights& weights, double beta,
                      double lambda);
FrameVector surface_gradient(const FrameVector& s, const PatternStore& store, const KernelWeights& weights,
                             double beta, double lambda);

/// Continuous-time analog: the weighted sum over patterns becomes a
/// trapezoidal quadrature of the kernel over tau in [0, N-1]; patterns are
/// only defined at integer tau (see quadrature_weights).
double continuous_energy(const FrameVector& s, double t, const PatternStore& store, double beta, double lambda,
                         double sigma, double quadrature_step);
FrameVector continuous_gradient(const FrameVector& s, double t, const PatternStore& store, double beta,
                                double lambda, double sigma, double quadrature_step);

} // namespace seqhop
