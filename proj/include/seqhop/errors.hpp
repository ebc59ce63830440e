#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace seqhop {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ZeroNormError : public Error {
public:
    using Error::Error;
};

class ParamError : public Error {
public:
    using Error::Error;
};

// A requested frame window that does not fit the available frames.
class WindowError : public ParamError {
public:
    using ParamError::ParamError;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class DegenerateWeightsError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class NoCrossingError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (at byte " + std::to_string(byte_offset) + ")"), offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class ShapeMismatchError : public Error {
public:
    ShapeMismatchError(const std::string& what, std::string file)
        : Error(what), file_(std::move(file)) {}

    const std::string& file() const noexcept { return file_; }

private:
    std::string file_;
};

/// Non-finite energy, gradient or state during an iterative solve.
///
/// Carries the optimizer iteration at which it was detected and, once the
/// retrieval driver has seen it, the frame index being retrieved.
class NumericsError : public Error {
public:
    NumericsError(const std::string& what, std::size_t iteration,
                  std::optional<std::size_t> frame = std::nullopt)
        : Error(compose(what, iteration, frame)), detail_(what), iteration_(iteration), frame_(frame) {}

    std::size_t iteration() const noexcept { return iteration_; }
    std::optional<std::size_t> frame() const noexcept { return frame_; }
    const std::string& detail() const noexcept { return detail_; }

    NumericsError with_frame(std::size_t frame) const { return NumericsError(detail_, iteration_, frame); }

private:
    static std::string compose(const std::string& what, std::size_t iteration,
                               std::optional<std::size_t> frame) {
        std::string msg = what + " at iteration " + std::to_string(iteration);
        if (frame) msg += " of frame " + std::to_string(*frame);
        return msg;
    }

    std::string detail_;
    std::size_t iteration_;
    std::optional<std::size_t> frame_;
};

} // namespace seqhop
