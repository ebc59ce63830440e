#pragma once

#include <cstddef>
#include <vector>

#include "seqhop/core.hpp"
#include "seqhop/optimizer.hpp"

namespace seqhop {

struct RetrievalConfig {
    ModelParams params;
    OptimizerSettings optimizer;
    double mse_threshold = 0.05;
    double scene_mse_threshold = 0.5;
    bool record_energy_traces = false;

    void validate() const;
};

struct RetrievalReport {
    std::vector<double> mse;
    double eta = 0.0; // percent of frames with mse below the threshold
    std::vector<std::size_t> iterations;
    std::vector<double> energy_final;
    std::vector<bool> converged;
    std::size_t scene_changes = 0;
    double wall_time_s = 0.0;
    std::vector<std::vector<double>> energy_traces; // only when record_energy_traces
};

struct RetrievalResult {
    std::vector<FrameVector> retrieved;
    RetrievalReport report;
};

struct FrameRetrieval {
    MinimizeResult minimize;
    double energy_final = 0.0;
};

/// Minimizes the step-m movie energy warm-started from `prev`, which is also
/// the continuity anchor. Pass the zero vector for m = 0.
FrameRetrieval retrieve_frame(const PatternStore& store, const RetrievalConfig& config, std::size_t m,
                              const FrameVector& prev);

/// Plays the store back frame by frame: frame m starts from, and is held
/// close to, the frame retrieved at m-1. Numerical failures are rethrown
/// with the frame index attached.
RetrievalResult retrieve_sequence(const PatternStore& store, const RetrievalConfig& config);

/// (1/d) |original - retrieved|^2
double mse_k(const FrameVector& original, const FrameVector& retrieved);

/// 100 * (number of entries strictly below threshold) / size.
double accuracy_eta(const std::vector<double>& mse, double threshold);

/// Number of k >= 1 whose MSE against frame k-1 exceeds the threshold.
std::size_t count_scene_changes(const PatternStore& store, double scene_mse_threshold);

} // namespace seqhop
