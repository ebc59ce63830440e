#include "seqhop/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace seqhop {

FrameVector::FrameVector(std::size_t d) : values_(d, 0.0) {
    if (d == 0) throw DimensionError("frame dimension must be at least 1");
}

FrameVector::FrameVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DimensionError("frame dimension must be at least 1");
}

FrameVector::FrameVector(std::initializer_list<double> values) : FrameVector(std::vector<double>(values)) {}

bool FrameVector::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

FrameVector& FrameVector::operator+=(const FrameVector& other) {
    require_same_dim(*this, other, "frame addition");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

FrameVector& FrameVector::operator-=(const FrameVector& other) {
    require_same_dim(*this, other, "frame subtraction");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

FrameVector& FrameVector::operator*=(double scale) {
    for (double& v : values_) v *= scale;
    return *this;
}

void FrameVector::axpy(double scale, const FrameVector& other) {
    require_same_dim(*this, other, "axpy");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other.values_[i];
}

FrameVector operator+(FrameVector a, const FrameVector& b) { return a += b; }
FrameVector operator-(FrameVector a, const FrameVector& b) { return a -= b; }
FrameVector operator*(double scale, FrameVector v) { return v *= scale; }

void require_same_dim(const FrameVector& a, const FrameVector& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(a.dim()) +
                             " vs " + std::to_string(b.dim()));
    }
}

namespace {

constexpr std::size_t kLanes = 8;

// Sum of f(i) over [0, n) with eight interleaved accumulators combined as a
// fixed pairwise tree. The shape depends only on n, so the result is
// bit-identical on every run while the lanes keep the FPU pipeline busy.
template <typename Term>
double lane_sum(std::size_t n, Term&& term) {
    double acc[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (std::size_t l = 0; l < kLanes; ++l) acc[l] += term(i + l);
    }
    for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += term(i);
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

} // namespace

double dot(const FrameVector& a, const FrameVector& b) {
    require_same_dim(a, b, "dot");
    const double* x = a.values().data();
    const double* y = b.values().data();
    return lane_sum(a.dim(), [x, y](std::size_t i) { return x[i] * y[i]; });
}

double squared_norm(const FrameVector& v) {
    const double* x = v.values().data();
    return lane_sum(v.dim(), [x](std::size_t i) { return x[i] * x[i]; });
}

double norm(const FrameVector& v) { return std::sqrt(squared_norm(v)); }

double inf_norm(const FrameVector& v) {
    double m = 0.0;
    for (double x : v.values()) m = std::max(m, std::abs(x));
    return m;
}

double squared_distance(const FrameVector& a, const FrameVector& b) {
    require_same_dim(a, b, "squared_distance");
    const double* x = a.values().data();
    const double* y = b.values().data();
    return lane_sum(a.dim(), [x, y](std::size_t i) {
        const double diff = x[i] - y[i];
        return diff * diff;
    });
}

FrameVector normalize_frame(const FrameVector& v) {
    const double n = norm(v);
    if (!(n > 0.0)) throw ZeroNormError("cannot normalize a zero-norm frame");
    if (!std::isfinite(n)) throw ZeroNormError("cannot normalize a frame with non-finite norm");
    FrameVector out = v;
    out *= std::sqrt(static_cast<double>(v.dim())) / n;
    return out;
}

// ---- PatternStore ---------------------------------------------------------

namespace {

void check_frames(const std::vector<FrameVector>& frames) {
    if (frames.empty()) throw EmptyInputError("pattern store needs at least one pattern");
    const std::size_t d = frames.front().dim();
    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (frames[k].dim() != d) {
            throw DimensionError("pattern " + std::to_string(k) + " has dimension " +
                                 std::to_string(frames[k].dim()) + ", expected " + std::to_string(d));
        }
        if (!frames[k].all_finite()) throw ParamError("pattern " + std::to_string(k) + " has non-finite values");
    }
}

bool has_norm_sqrt_d(const FrameVector& v) {
    const double d = static_cast<double>(v.dim());
    return std::abs(squared_norm(v) - d) <= 1e-9 * d;
}

} // namespace

PatternStore::PatternStore(std::vector<FrameVector> patterns, bool normalized)
    : patterns_(std::move(patterns)), dim_(patterns_.front().dim()), normalized_(normalized) {}

PatternStore PatternStore::normalized(std::vector<FrameVector> frames) {
    check_frames(frames);
    for (auto& f : frames) f = normalize_frame(f);
    return PatternStore(std::move(frames), true);
}

PatternStore PatternStore::verbatim(std::vector<FrameVector> frames) {
    check_frames(frames);
    const bool all_normalized = std::all_of(frames.begin(), frames.end(), has_norm_sqrt_d);
    return PatternStore(std::move(frames), all_normalized);
}

const FrameVector& PatternStore::at(std::size_t k) const {
    if (k >= patterns_.size()) {
        throw IndexError("pattern index " + std::to_string(k) + " out of range for store of size " +
                         std::to_string(patterns_.size()));
    }
    return patterns_[k];
}

void ModelParams::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(beta) || !finite(lambda) || !finite(lambda_f) || !finite(mu) || !finite(sigma))
        throw ParamError("model parameters must be finite");
    if (beta <= 0.0) throw ParamError("beta must be > 0");
    if (sigma <= 0.0) throw ParamError("sigma must be > 0");
    if (lambda < 0.0) throw ParamError("lambda must be >= 0");
    if (lambda_f < 0.0) throw ParamError("lambda_f must be >= 0");
    if (mu < 0.0) throw ParamError("mu must be >= 0");
}

// ---- parallelism ----------------------------------------------------------

std::size_t worker_count() {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("SEQHOP_THREADS");
    if (env == nullptr || *env == '\0') return hw;
    std::size_t cap = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, cap);
    if (ec != std::errc() || ptr != end || cap == 0) return hw;
    return cap;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t min_parallel) {
    const std::size_t workers = std::min(worker_count(), n);
    if (workers <= 1 || n < min_parallel) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run_chunk = [&](std::size_t begin, std::size_t end) {
        try {
            for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    const std::size_t chunk = (n + workers - 1) / workers;
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            threads.emplace_back(run_chunk, begin, end);
        }
        run_chunk(0, std::min(n, chunk));
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace seqhop
