#include "seqhop/energy.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace seqhop {

namespace {

// Below this many multiply-adds per pass the thread start-up costs more than it saves.
constexpr std::size_t kParallelWork = std::size_t{1} << 16;

constexpr std::size_t kBlock = 4096;

void check_weights(const PatternStore& store, const KernelWeights& weights) {
    if (weights.size() != store.size()) {
        throw DimensionError("kernel has " + std::to_string(weights.size()) + " weights for " +
                             std::to_string(store.size()) + " patterns");
    }
}

void check_state(const FrameVector& s, const PatternStore& store) {
    if (s.dim() != store.dim()) {
        throw DimensionError("state dimension " + std::to_string(s.dim()) + " does not match store dimension " +
                             std::to_string(store.dim()));
    }
}

// out += sum_k coeffs[k] * s_k. Each coordinate is summed in pattern order,
// so splitting coordinates across workers leaves the result unchanged.
void accumulate_patterns(const PatternStore& store, const std::vector<double>& coeffs, FrameVector& out) {
    const std::size_t d = store.dim();
    const std::size_t blocks = (d + kBlock - 1) / kBlock;
    const bool wide = store.size() * d >= kParallelWork;
    parallel_for(
        blocks,
        [&](std::size_t b) {
            const std::size_t begin = b * kBlock;
            const std::size_t end = std::min(d, begin + kBlock);
            for (std::size_t k = 0; k < store.size(); ++k) {
                const double c = coeffs[k];
                if (c == 0.0) continue;
                const auto pattern = store[k].values();
                for (std::size_t i = begin; i < end; ++i) out[i] += c * pattern[i];
            }
        },
        wide ? 2 : std::numeric_limits<std::size_t>::max());
}

// Softmax numerators relative to the largest exponent; returns the shift and
// the normalizing sum so callers can rebuild the log-sum.
struct ShiftedExp {
    std::vector<double> terms;
    double shift = 0.0;
    double sum = 0.0;
};

ShiftedExp shifted_exp(const std::vector<double>& sims, const KernelWeights& weights, double beta) {
    if (weights.size() != sims.size()) throw DimensionError("weights and similarities differ in length");
    ShiftedExp out;
    out.terms.assign(sims.size(), 0.0);
    out.shift = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sims.size(); ++k) {
        if (weights[k] < 0.0) throw ParamError("kernel weights must be nonnegative");
        if (weights[k] == 0.0) continue;
        out.shift = std::max(out.shift, std::log(weights[k]) + beta * sims[k]);
    }
    if (out.shift == -std::numeric_limits<double>::infinity()) {
        throw DegenerateWeightsError("all kernel weights are zero");
    }
    if (!std::isfinite(out.shift)) throw NumericsError("non-finite log-sum-exp exponent", 0);
    for (std::size_t k = 0; k < sims.size(); ++k) {
        if (weights[k] == 0.0) continue;
        out.terms[k] = std::exp(std::log(weights[k]) + beta * sims[k] - out.shift);
        out.sum += out.terms[k];
    }
    return out;
}

double regularizer(const FrameVector& s, double lambda) { return 0.5 * lambda * squared_norm(s); }

} // namespace

std::vector<double> similarities(const FrameVector& s, const PatternStore& store) {
    check_state(s, store);
    std::vector<double> out(store.size());
    const bool wide = store.size() * store.dim() >= kParallelWork;
    parallel_for(
        store.size(), [&](std::size_t k) { out[k] = dot(s, store[k]); },
        wide ? 2 : std::numeric_limits<std::size_t>::max());
    return out;
}

std::size_t argmax_similarity(const std::vector<double>& sims) {
    if (sims.empty()) throw EmptyInputError("no similarities to maximize");
    std::size_t best = 0;
    for (std::size_t k = 1; k < sims.size(); ++k) {
        if (sims[k] > sims[best]) best = k;
    }
    return best;
}

double log_weighted_exp_sum(const std::vector<double>& sims, const KernelWeights& weights, double beta) {
    const ShiftedExp e = shifted_exp(sims, weights, beta);
    return e.shift + std::log(e.sum);
}

double exp_log_magnitude(const FrameVector& s, const PatternStore& store, const KernelWeights& weights, double beta) {
    check_weights(store, weights);
    return log_weighted_exp_sum(similarities(s, store), weights, beta);
}

double general_energy(const FrameVector& s, const PatternStore& store, const KernelWeights& weights,
                      Functional functional, double beta, double lambda) {
    check_weights(store, weights);
    const double log_sum = exp_log_magnitude(s, store, weights, beta);
    if (functional == Functional::Lse) {
        if (!(beta > 0.0)) throw ParamError("the log-sum-exp functional needs beta > 0");
        return regularizer(s, lambda) - log_sum / beta;
    }
    const double magnitude = std::exp(log_sum);
    if (!std::isfinite(magnitude)) {
        throw NumericsError("exponential functional overflows (log magnitude " + std::to_string(log_sum) +
                                "); use exp_log_magnitude",
                            0);
    }
    return regularizer(s, lambda) - magnitude;
}

SoftmaxProbs softmax_pk(const FrameVector& s, const PatternStore& store, double beta, const KernelWeights& weights) {
    check_weights(store, weights);
    const ShiftedExp e = shifted_exp(similarities(s, store), weights, beta);
    SoftmaxProbs out;
    out.p.resize(e.terms.size());
    for (std::size_t k = 0; k < e.terms.size(); ++k) {
        out.p[k] = e.terms[k] / e.sum;
        if (out.p[k] > out.p[out.argmax_index]) out.argmax_index = k;
    }
    return out;
}

FrameVector general_gradient(const FrameVector& s, const PatternStore& store, const KernelWeights& weights,
                             Functional functional, double beta, double lambda) {
    check_weights(store, weights);
    const ShiftedExp e = shifted_exp(similarities(s, store), weights, beta);

    // Both forms are a multiple of the softmax-weighted pattern mean:
    // LSE scale 1, EXP scale beta * sum_k K_k exp(beta <s, s_k>).
    double scale = 1.0;
    if (functional == Functional::Exp) {
        scale = beta * std::exp(e.shift + std::log(e.sum));
        if (!std::isfinite(scale)) throw NumericsError("exponential functional gradient overflows", 0);
    } else if (!(beta > 0.0)) {
        throw ParamError("the log-sum-exp functional needs beta > 0");
    }

    std::vector<double> coeffs(e.terms.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] = -scale * (e.terms[k] / e.sum);

    FrameVector grad = s;
    grad *= lambda;
    accumulate_patterns(store, coeffs, grad);
    return grad;
}

FrameVector exp_gradient(const FrameVector& s, const PatternStore& store, const KernelWeights& weights, double beta,
                         double lambda) {
    return general_gradient(s, store, weights, Functional::Exp, beta, lambda);
}

// ---- movie energy ---------------------------------------------------------

EnergyBreakdown movie_energy(const FrameVector& s, std::size_t m, const PatternStore& store,
                             const ModelParams& params, const FrameVector& prev) {
    params.validate();
    return movie_energy(s, m, store, params, prev,
                        normalized_weights(static_cast<double>(m), store.size(), params.sigma));
}

EnergyBreakdown movie_energy(const FrameVector& s, std::size_t m, const PatternStore& store,
                             const ModelParams& params, const FrameVector& prev, const KernelWeights& weights) {
    params.validate();
    check_state(s, store);
    check_weights(store, weights);
    require_same_dim(prev, s, "previous frame");
    const FrameVector& target = store.at(m);

    const std::vector<double> sims = similarities(s, store);
    EnergyBreakdown e;
    e.regularization = regularizer(s, params.lambda);
    e.fidelity = params.lambda_f * squared_distance(s, target);
    e.continuity = params.mu * squared_distance(s, prev);
    e.lse = -log_weighted_exp_sum(sims, weights, params.beta) / params.beta;
    e.max_term = -sims[argmax_similarity(sims)];
    e.total = e.regularization + e.fidelity + e.continuity + e.lse + e.max_term;
    return e;
}

FrameVector movie_gradient(const FrameVector& s, std::size_t m, const PatternStore& store, const ModelParams& params,
                           const FrameVector& prev) {
    params.validate();
    return movie_gradient(s, m, store, params, prev,
                          normalized_weights(static_cast<double>(m), store.size(), params.sigma));
}

FrameVector movie_gradient(const FrameVector& s, std::size_t m, const PatternStore& store, const ModelParams& params,
                           const FrameVector& prev, const KernelWeights& weights) {
    params.validate();
    check_state(s, store);
    check_weights(store, weights);
    require_same_dim(prev, s, "previous frame");
    const FrameVector& target = store.at(m);

    const std::vector<double> sims = similarities(s, store);
    const ShiftedExp e = shifted_exp(sims, weights, params.beta);
    std::vector<double> coeffs(sims.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] = -(e.terms[k] / e.sum);
    coeffs[argmax_similarity(sims)] -= 1.0;

    const double own = params.lambda + 2.0 * params.lambda_f + 2.0 * params.mu;
    FrameVector grad = s;
    grad *= own;
    grad.axpy(-2.0 * params.lambda_f, target);
    grad.axpy(-2.0 * params.mu, prev);
    accumulate_patterns(store, coeffs, grad);
    return grad;
}

// ---- simplified and continuous surfaces ------------------------------------

double surface_energy(const FrameVector& s, const PatternStore& store, const KernelWeights& weights, double beta,
                      double lambda) {
    if (!(beta > 0.0)) throw ParamError("beta must be > 0");
    check_state(s, store);
    check_weights(store, weights);
    const std::vector<double> sims = similarities(s, store);
    const double lse = -log_weighted_exp_sum(sims, weights, beta) / beta;
    return regularizer(s, lambda) + lse - sims[argmax_similarity(sims)];
}

FrameVector surface_gradient(const FrameVector& s, const PatternStore& store, const KernelWeights& weights,
                             double beta, double lambda) {
    if (!(beta > 0.0)) throw ParamError("beta must be > 0");
    check_state(s, store);
    check_weights(store, weights);
    const std::vector<double> sims = similarities(s, store);
    const ShiftedExp e = shifted_exp(sims, weights, beta);
    std::vector<double> coeffs(sims.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] = -(e.terms[k] / e.sum);
    coeffs[argmax_similarity(sims)] -= 1.0;

    FrameVector grad = s;
    grad *= lambda;
    accumulate_patterns(store, coeffs, grad);
    return grad;
}

double simplified_energy(const FrameVector& s, double t, const PatternStore& store, double beta, double lambda,
                         double sigma) {
    return surface_energy(s, store, normalized_weights(t, store.size(), sigma), beta, lambda);
}

FrameVector simplified_gradient(const FrameVector& s, double t, const PatternStore& store, double beta, double lambda,
                                double sigma) {
    return surface_gradient(s, store, normalized_weights(t, store.size(), sigma), beta, lambda);
}

double continuous_energy(const FrameVector& s, double t, const PatternStore& store, double beta, double lambda,
                         double sigma, double quadrature_step) {
    return surface_energy(s, store, quadrature_weights(t, store.size(), sigma, quadrature_step), beta, lambda);
}

FrameVector continuous_gradient(const FrameVector& s, double t, const PatternStore& store, double beta,
                                double lambda, double sigma, double quadrature_step) {
    return surface_gradient(s, store, quadrature_weights(t, store.size(), sigma, quadrature_step), beta, lambda);
}

} // namespace seqhop
