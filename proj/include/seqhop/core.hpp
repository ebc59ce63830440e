#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "seqhop/errors.hpp"

namespace seqhop {

/// Dense real state or stored pattern of dimension d.
///
/// Construction only enforces d >= 1; finiteness is checked where data
/// enters the system (PatternStore, frame loaders) and by the optimizer.
class FrameVector {
public:
    explicit FrameVector(std::size_t d);
    explicit FrameVector(std::vector<double> values);
    FrameVector(std::initializer_list<double> values);

    static FrameVector zeros(std::size_t d) { return FrameVector(d); }

    std::size_t dim() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const std::vector<double>& data() const noexcept { return values_; }

    bool all_finite() const noexcept;

    FrameVector& operator+=(const FrameVector& other);
    FrameVector& operator-=(const FrameVector& other);
    FrameVector& operator*=(double scale);

    /// this += scale * other
    void axpy(double scale, const FrameVector& other);

    friend bool operator==(const FrameVector&, const FrameVector&) = default;

private:
    std::vector<double> values_;
};

FrameVector operator+(FrameVector a, const FrameVector& b);
FrameVector operator-(FrameVector a, const FrameVector& b);
FrameVector operator*(double scale, FrameVector v);

/// Sum of a_i * b_i in a fixed reduction order (eight strided lanes, then a
/// fixed pairwise combine). Bit-identical across runs and worker counts.
double dot(const FrameVector& a, const FrameVector& b);
double squared_norm(const FrameVector& v);
double norm(const FrameVector& v);
double inf_norm(const FrameVector& v);
double squared_distance(const FrameVector& a, const FrameVector& b);

/// Rescales v to Euclidean norm sqrt(d).
FrameVector normalize_frame(const FrameVector& v);

/// Ordered immutable list of patterns sharing one dimension.
class PatternStore {
public:
    /// Normalizes every frame to norm sqrt(d).
    static PatternStore normalized(std::vector<FrameVector> frames);
    /// Keeps the frames as given; the store is marked normalized only if
    /// every frame already has squared norm d within 1e-9 relative.
    static PatternStore verbatim(std::vector<FrameVector> frames);

    std::size_t size() const noexcept { return patterns_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool is_normalized() const noexcept { return normalized_; }

    const FrameVector& operator[](std::size_t k) const { return patterns_[k]; }
    const FrameVector& at(std::size_t k) const;
    const std::vector<FrameVector>& patterns() const noexcept { return patterns_; }

private:
    PatternStore(std::vector<FrameVector> patterns, bool normalized);

    std::vector<FrameVector> patterns_;
    std::size_t dim_ = 0;
    bool normalized_ = false;
};

/// Scalar hyperparameters of the time-dependent energy.
struct ModelParams {
    double beta = 1.0;      // softmax sharpness, > 0
    double lambda = 0.01;   // regularization, >= 0
    double lambda_f = 500.0; // fidelity, >= 0
    double mu = 0.001;      // continuity, >= 0
    double sigma = 2.0;     // temporal kernel width, > 0

    /// Throws ParamError on any violated constraint.
    void validate() const;
};

void require_same_dim(const FrameVector& a, const FrameVector& b, const char* what);

// ---- deterministic parallelism --------------------------------------------

/// Worker cap from SEQHOP_THREADS (read on every call); defaults to the
/// hardware concurrency, minimum 1.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Work is split into contiguous chunks; each
/// index is processed exactly once, so results written to per-index slots
/// are independent of the worker count. Runs inline when n < min_parallel
/// or only one worker is allowed.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t min_parallel = 2);

} // namespace seqhop
