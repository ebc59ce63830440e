#include "seqhop/retrieval.hpp"

#include <chrono>
#include <cmath>

#include "seqhop/energy.hpp"

namespace seqhop {

void RetrievalConfig::validate() const {
    params.validate();
    optimizer.validate();
    if (!(mse_threshold > 0.0)) throw ParamError("mse_threshold must be > 0");
    if (!(scene_mse_threshold > 0.0)) throw ParamError("scene_mse_threshold must be > 0");
}

double mse_k(const FrameVector& original, const FrameVector& retrieved) {
    return squared_distance(original, retrieved) / static_cast<double>(original.dim());
}

double accuracy_eta(const std::vector<double>& mse, double threshold) {
    if (mse.empty()) throw EmptyInputError("accuracy needs at least one frame");
    if (!(threshold > 0.0)) throw ParamError("accuracy threshold must be > 0");
    std::size_t hits = 0;
    for (double v : mse) {
        if (v < threshold) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(mse.size());
}

std::size_t count_scene_changes(const PatternStore& store, double scene_mse_threshold) {
    std::size_t cuts = 0;
    for (std::size_t k = 1; k < store.size(); ++k) {
        if (mse_k(store[k - 1], store[k]) > scene_mse_threshold) ++cuts;
    }
    return cuts;
}

FrameRetrieval retrieve_frame(const PatternStore& store, const RetrievalConfig& config, std::size_t m,
                              const FrameVector& prev) {
    const KernelWeights weights = normalized_weights(static_cast<double>(m), store.size(), config.params.sigma);
    const ModelParams& params = config.params;
    auto energy = [&](const FrameVector& s) { return movie_energy(s, m, store, params, prev, weights).total; };
    auto gradient = [&](const FrameVector& s) { return movie_gradient(s, m, store, params, prev, weights); };

    FrameRetrieval out{minimize(energy, gradient, prev, config.optimizer), 0.0};
    out.energy_final = out.minimize.energy_trace.back();
    return out;
}

RetrievalResult retrieve_sequence(const PatternStore& store, const RetrievalConfig& config) {
    config.validate();
    if (!store.is_normalized()) throw ParamError("retrieval needs a normalized pattern store");

    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = store.size();
    RetrievalResult out;
    out.retrieved.reserve(n);
    RetrievalReport& report = out.report;

    FrameVector prev = FrameVector::zeros(store.dim());
    for (std::size_t m = 0; m < n; ++m) {
        FrameRetrieval frame = [&] {
            try {
                return retrieve_frame(store, config, m, prev);
            } catch (const NumericsError& err) {
                throw err.with_frame(m);
            }
        }();
        report.iterations.push_back(frame.minimize.iterations);
        report.energy_final.push_back(frame.energy_final);
        report.converged.push_back(frame.minimize.converged);
        if (config.record_energy_traces) report.energy_traces.push_back(frame.minimize.energy_trace);
        out.retrieved.push_back(std::move(frame.minimize.x_star));
        prev = out.retrieved.back();
    }

    report.mse.reserve(n);
    for (std::size_t m = 0; m < n; ++m) report.mse.push_back(mse_k(store[m], out.retrieved[m]));
    report.eta = accuracy_eta(report.mse, config.mse_threshold);
    report.scene_changes = count_scene_changes(store, config.scene_mse_threshold);
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

} // namespace seqhop
