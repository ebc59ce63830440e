#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqhop/core.hpp"

namespace seqhop {

struct FrameShape {
    std::uint32_t width = 1;
    std::uint32_t height = 1;
    std::uint32_t channels = 3;

    std::size_t dim() const noexcept {
        return static_cast<std::size_t>(width) * height * channels;
    }
    void validate() const;

    friend bool operator==(const FrameShape&, const FrameShape&) = default;
};

std::string to_string(const FrameShape& shape);

struct LoadedFrame {
    FrameVector frame;
    FrameShape shape;
};

enum class FrameFormat { Ppm, Raw };

/// File extension without the dot: "ppm" or "shf".
std::string_view extension(FrameFormat format);
FrameFormat parse_format(std::string_view name);

// Binary PPM (P6, maxval 255). Pixels map to [0, 1] by v / 255, channel
// interleaved, row-major. Saving clamps to [0, 1] and rounds half away from zero.
LoadedFrame load_ppm(const std::filesystem::path& path);
LoadedFrame decode_ppm(std::string_view bytes);
void save_ppm(const FrameVector& frame, const FrameShape& shape, const std::filesystem::path& path);
std::string encode_ppm(const FrameVector& frame, const FrameShape& shape);

// SHF1 raw tensors: "SHF1", width, height, channels as little-endian u32,
// then d little-endian IEEE-754 binary32 values. Loads widen to double;
// saves narrow with round-to-nearest-even.
LoadedFrame load_raw(const std::filesystem::path& path);
LoadedFrame decode_raw(std::string_view bytes);
void save_raw(const FrameVector& frame, const FrameShape& shape, const std::filesystem::path& path);
std::string encode_raw(const FrameVector& frame, const FrameShape& shape);

LoadedFrame load_frame(const std::filesystem::path& path, FrameFormat format);
void save_frame(const FrameVector& frame, const FrameShape& shape, const std::filesystem::path& path,
                FrameFormat format);

/// 1-based first frame p and frame count n.
struct FrameWindow {
    std::size_t p = 1;
    std::size_t n = 1;
};

struct FrameSequence {
    PatternStore store;           // normalized to norm sqrt(d)
    FrameShape shape;
    std::vector<double> source_norms; // Euclidean norm of each frame before normalization
    std::vector<std::filesystem::path> files;
};

/// Frame files of the given format in `dir`, ordered by byte-wise filename comparison.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir, FrameFormat format);

/// Loads every frame file (or the requested window of them), checks they
/// share one shape and normalizes each to norm sqrt(d).
FrameSequence load_sequence(const std::filesystem::path& dir, FrameFormat format,
                            std::optional<FrameWindow> window = std::nullopt);

/// `frame_%06d.<ext>`
std::string frame_file_name(std::size_t index, FrameFormat format);

/// Scales a normalized frame back to its source norm: frame * norm / sqrt(d).
FrameVector denormalize(const FrameVector& frame, double source_norm);

void write_norms(const std::filesystem::path& path, const std::vector<double>& norms);
std::vector<double> read_norms(const std::filesystem::path& path);

struct SyntheticSpec {
    FrameShape shape{32, 32, 3};
    std::size_t n = 50;
    double drift = 0.05;           // amplitude of the smooth per-step perturbation
    std::vector<std::size_t> cuts; // frames replaced by an unrelated fresh frame
    std::uint64_t seed = 1;

    void validate() const;
};

struct SyntheticSequence {
    std::vector<FrameVector> frames; // raw pixel values in [0, 1]
    PatternStore store;              // the same frames normalized
    FrameShape shape;
};

/// Deterministic test sequence. Fresh frames use intensities u^6 with u
/// uniform on [0, 1], so independent frames have normalized correlation near
/// 0.27 and cross-cut MSE near 1.5. Each step adds drift * sin of a random
/// spatial phase ramp and clamps to [0, 1].
SyntheticSequence synthesize_sequence(const SyntheticSpec& spec);

} // namespace seqhop
