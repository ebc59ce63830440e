#include "seqhop/frameio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace seqhop {

namespace fs = std::filesystem;

void FrameShape::validate() const {
    if (width == 0 || height == 0 || channels == 0) throw ParamError("frame shape dimensions must be positive");
}

std::string to_string(const FrameShape& shape) {
    return std::to_string(shape.width) + "x" + std::to_string(shape.height) + "x" + std::to_string(shape.channels);
}

std::string_view extension(FrameFormat format) { return format == FrameFormat::Ppm ? "ppm" : "shf"; }

FrameFormat parse_format(std::string_view name) {
    if (name == "ppm") return FrameFormat::Ppm;
    if (name == "raw" || name == "shf") return FrameFormat::Raw;
    throw ParamError("unknown frame format '" + std::string(name) + "' (expected ppm or raw)");
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path.string());
    return std::move(buf).str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

template <typename Fn>
auto with_path(const fs::path& path, Fn&& fn) {
    try {
        return fn();
    } catch (const FormatError& err) {
        throw FormatError(path.string() + ": " + err.what(), err.byte_offset());
    }
}

void check_frame_shape(const FrameVector& frame, const FrameShape& shape) {
    shape.validate();
    if (frame.dim() != shape.dim()) {
        throw DimensionError("frame of dimension " + std::to_string(frame.dim()) + " does not fit shape " +
                             to_string(shape));
    }
}

// ---- PPM header parsing ----

class PpmHeaderReader {
public:
    PpmHeaderReader(std::string_view bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

    std::size_t pos() const { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = static_cast<unsigned char>(bytes_[pos_]);
            if (std::isspace(c)) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else {
                break;
            }
        }
    }

    std::uint32_t number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        std::uint64_t value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + static_cast<std::uint64_t>(bytes_[pos_] - '0');
            if (value > std::numeric_limits<std::uint32_t>::max()) throw FormatError(std::string(what) + " too large", start);
            ++pos_;
        }
        if (pos_ == start) throw FormatError(std::string("expected ") + what, start);
        return static_cast<std::uint32_t>(value);
    }

    void single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw FormatError("expected whitespace before pixel data", pos_);
        }
        ++pos_;
    }

private:
    std::string_view bytes_;
    std::size_t pos_;
};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
    return v;
}

constexpr std::string_view kRawMagic = "SHF1";
constexpr std::size_t kRawHeader = 16;

} // namespace

// ---- PPM ------------------------------------------------------------------

LoadedFrame decode_ppm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw FormatError("not a binary PPM (magic P6)", 0);
    PpmHeaderReader header(bytes, 2);
    const std::uint32_t width = header.number("width");
    const std::uint32_t height = header.number("height");
    header.skip_space_and_comments();
    const std::size_t maxval_at = header.pos();
    const std::uint32_t maxval = header.number("maxval");
    if (width == 0 || height == 0) throw FormatError("zero image dimension", 2);
    if (maxval != 255) throw FormatError("unsupported maxval " + std::to_string(maxval) + " (need 255)", maxval_at);
    header.single_whitespace();

    const FrameShape shape{width, height, 3};
    const std::size_t data_at = header.pos();
    const std::size_t d = shape.dim();
    if (bytes.size() - data_at < d) {
        throw FormatError("truncated pixel data: " + std::to_string(bytes.size() - data_at) + " of " +
                              std::to_string(d) + " bytes",
                          bytes.size());
    }
    if (bytes.size() - data_at > d) throw FormatError("trailing bytes after pixel data", data_at + d);

    std::vector<double> values(d);
    for (std::size_t i = 0; i < d; ++i) {
        values[i] = static_cast<double>(static_cast<unsigned char>(bytes[data_at + i])) / 255.0;
    }
    return {FrameVector(std::move(values)), shape};
}

LoadedFrame load_ppm(const fs::path& path) {
    const std::string bytes = read_file(path);
    return with_path(path, [&] { return decode_ppm(bytes); });
}

std::string encode_ppm(const FrameVector& frame, const FrameShape& shape) {
    check_frame_shape(frame, shape);
    if (shape.channels != 3) throw ParamError("PPM frames need 3 channels, got " + std::to_string(shape.channels));
    std::string out = "P6\n" + std::to_string(shape.width) + " " + std::to_string(shape.height) + "\n255\n";
    out.reserve(out.size() + frame.dim());
    for (double v : frame.values()) {
        const double clamped = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
        // std::round rounds halfway cases away from zero.
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::round(clamped * 255.0))));
    }
    return out;
}

void save_ppm(const FrameVector& frame, const FrameShape& shape, const fs::path& path) {
    write_file(path, encode_ppm(frame, shape));
}

// ---- SHF1 raw ---------------------------------------------------------------

std::string encode_raw(const FrameVector& frame, const FrameShape& shape) {
    check_frame_shape(frame, shape);
    std::string out(kRawMagic);
    out.reserve(kRawHeader + 4 * frame.dim());
    put_u32(out, shape.width);
    put_u32(out, shape.height);
    put_u32(out, shape.channels);
    for (double v : frame.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

LoadedFrame decode_raw(std::string_view bytes) {
    if (bytes.size() < kRawMagic.size() || bytes.substr(0, kRawMagic.size()) != kRawMagic) {
        throw FormatError("bad magic (expected SHF1)", 0);
    }
    if (bytes.size() < kRawHeader) throw FormatError("truncated header", bytes.size());
    const FrameShape shape{get_u32(bytes, 4), get_u32(bytes, 8), get_u32(bytes, 12)};
    if (shape.width == 0 || shape.height == 0 || shape.channels == 0) throw FormatError("zero frame dimension", 4);
    const std::size_t d = shape.dim();
    const std::size_t payload = bytes.size() - kRawHeader;
    if (payload / 4 < d) {
        throw FormatError("truncated payload: " + std::to_string(payload) + " of " + std::to_string(4 * d) + " bytes",
                          bytes.size());
    }
    if (payload != 4 * d) throw FormatError("trailing bytes after payload", kRawHeader + 4 * d);

    std::vector<double> values(d);
    for (std::size_t i = 0; i < d; ++i) {
        values[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, kRawHeader + 4 * i)));
    }
    return {FrameVector(std::move(values)), shape};
}

LoadedFrame load_raw(const fs::path& path) {
    const std::string bytes = read_file(path);
    return with_path(path, [&] { return decode_raw(bytes); });
}

void save_raw(const FrameVector& frame, const FrameShape& shape, const fs::path& path) {
    write_file(path, encode_raw(frame, shape));
}

LoadedFrame load_frame(const fs::path& path, FrameFormat format) {
    return format == FrameFormat::Ppm ? load_ppm(path) : load_raw(path);
}

void save_frame(const FrameVector& frame, const FrameShape& shape, const fs::path& path, FrameFormat format) {
    if (format == FrameFormat::Ppm) {
        save_ppm(frame, shape, path);
    } else {
        save_raw(frame, shape, path);
    }
}

// ---- sequences ------------------------------------------------------------

std::vector<fs::path> list_frame_files(const fs::path& dir, FrameFormat format) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    const std::string wanted = "." + std::string(extension(format));
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().extension().string() == wanted) files.push_back(entry.path());
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    // std::string comparison is byte-wise and locale independent.
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

FrameSequence load_sequence(const fs::path& dir, FrameFormat format, std::optional<FrameWindow> window) {
    std::vector<fs::path> files = list_frame_files(dir, format);
    if (files.empty()) {
        throw EmptyInputError("no ." + std::string(extension(format)) + " frames in " + dir.string());
    }
    if (window) {
        if (window->p == 0 || window->n == 0) throw WindowError("window needs p >= 1 and N >= 1");
        const std::size_t last = window->p + window->n - 1;
        if (last > files.size()) {
            throw WindowError("window p=" + std::to_string(window->p) + ", N=" + std::to_string(window->n) +
                              " needs frames up to " + std::to_string(last) + " but " + dir.string() + " has " +
                              std::to_string(files.size()));
        }
        files = std::vector<fs::path>(files.begin() + static_cast<std::ptrdiff_t>(window->p - 1),
                                      files.begin() + static_cast<std::ptrdiff_t>(last));
    }

    std::vector<LoadedFrame> loaded(files.size(), LoadedFrame{FrameVector(1), {}});
    parallel_for(files.size(), [&](std::size_t i) { loaded[i] = load_frame(files[i], format); });

    const FrameShape shape = loaded.front().shape;
    std::vector<FrameVector> frames;
    std::vector<double> norms;
    frames.reserve(loaded.size());
    norms.reserve(loaded.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        if (!(loaded[i].shape == shape)) {
            throw ShapeMismatchError(files[i].string() + " has shape " + to_string(loaded[i].shape) + ", expected " +
                                         to_string(shape),
                                     files[i].string());
        }
        const double n = norm(loaded[i].frame);
        if (!(n > 0.0)) throw ZeroNormError(files[i].string() + " is an all-zero frame");
        norms.push_back(n);
        frames.push_back(std::move(loaded[i].frame));
    }
    return FrameSequence{PatternStore::normalized(std::move(frames)), shape, std::move(norms), std::move(files)};
}

std::string frame_file_name(std::size_t index, FrameFormat format) {
    std::ostringstream name;
    name << "frame_" << std::setw(6) << std::setfill('0') << index << '.' << extension(format);
    return name.str();
}

FrameVector denormalize(const FrameVector& frame, double source_norm) {
    FrameVector out = frame;
    out *= source_norm / std::sqrt(static_cast<double>(frame.dim()));
    return out;
}

void write_norms(const fs::path& path, const std::vector<double>& norms) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (double n : norms) out << n << '\n';
    write_file(path, out.str());
}

std::vector<double> read_norms(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<double> norms;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            std::size_t used = 0;
            norms.push_back(std::stod(line, &used));
            if (used != line.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw IoError(path.string() + ": bad norm on line " + std::to_string(line_no));
        }
    }
    return norms;
}

// ---- synthetic sequences ----------------------------------------------------

void SyntheticSpec::validate() const {
    shape.validate();
    if (n == 0) throw ParamError("synthetic sequence needs N >= 1");
    if (!(drift >= 0.0) || !std::isfinite(drift)) throw ParamError("drift must be finite and >= 0");
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        if (cuts[i] < 1 || cuts[i] > n - 1) throw ParamError("cut index " + std::to_string(cuts[i]) + " outside [1, N-1]");
        if (i > 0 && cuts[i] <= cuts[i - 1]) throw ParamError("cut indices must be strictly increasing");
    }
}

namespace {

// 53-bit uniform in [0, 1) from the raw engine output so the stream does not
// depend on the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> fresh_frame(std::mt19937_64& rng, std::size_t d) {
    std::vector<double> values(d);
    for (double& v : values) v = std::pow(uniform01(rng), 6.0);
    return values;
}

} // namespace

SyntheticSequence synthesize_sequence(const SyntheticSpec& spec) {
    spec.validate();
    const FrameShape& shape = spec.shape;
    const std::size_t d = shape.dim();
    std::mt19937_64 rng(spec.seed);

    std::vector<FrameVector> frames;
    frames.reserve(spec.n);
    std::vector<double> current = fresh_frame(rng, d);
    frames.emplace_back(current);
    std::size_t next_cut = 0;
    constexpr double two_pi = 6.283185307179586;
    for (std::size_t k = 1; k < spec.n; ++k) {
        if (next_cut < spec.cuts.size() && spec.cuts[next_cut] == k) {
            current = fresh_frame(rng, d);
            ++next_cut;
        } else if (spec.drift > 0.0) {
            const double fx = 1.0 + std::floor(uniform01(rng) * 3.0);
            const double fy = 1.0 + std::floor(uniform01(rng) * 3.0);
            const double phase = two_pi * uniform01(rng);
            for (std::uint32_t y = 0; y < shape.height; ++y) {
                for (std::uint32_t x = 0; x < shape.width; ++x) {
                    const double ramp = fx * x / shape.width + fy * y / shape.height;
                    const double delta = spec.drift * std::sin(two_pi * ramp + phase);
                    for (std::uint32_t c = 0; c < shape.channels; ++c) {
                        double& v = current[(static_cast<std::size_t>(y) * shape.width + x) * shape.channels + c];
                        v = std::clamp(v + delta, 0.0, 1.0);
                    }
                }
            }
        }
        frames.emplace_back(current);
    }

    // An all-black frame cannot be normalized; nudge it (only reachable at tiny d).
    for (auto& f : frames) {
        if (!(norm(f) > 0.0)) f[0] = 1.0 / 255.0;
    }
    PatternStore store = PatternStore::normalized(frames);
    return SyntheticSequence{std::move(frames), std::move(store), shape};
}

} // namespace seqhop
