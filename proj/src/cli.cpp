#include "seqhop/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqhop/analysis.hpp"
#include "seqhop/frameio.hpp"
#include "seqhop/retrieval.hpp"

namespace seqhop::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Every knob of every subcommand. Flags override the --config file, which
/// overrides these defaults.
struct RunConfig {
    std::string input;
    std::string output;
    std::string retrieved;
    std::string format = "ppm";
    std::size_t p = 1;
    std::size_t n = 0; // 0: all frames from p on
    ModelParams params;
    OptimizerSettings optimizer;
    bool fixed_step = false;
    std::string step_rule = "barzilai_borwein";
    double threshold = 0.05;
    double scene_threshold = 0.5;
    std::uint64_t seed = 1;

    // synth
    std::uint32_t width = 32;
    std::uint32_t height = 32;
    std::uint32_t channels = 3;
    double drift = 0.05;
    std::string cuts;

    // stability
    int variant = 3;
    std::string lambdas = "0,1,2.5,5";
    std::string lambda_f_grid = "0.1:10:100";

    // landscape
    std::string builtin;
    std::string grid = "-1.5,1.5,-1.5,1.5,61";
    std::string times = "0,1,2,3";
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    return parts;
}

double parse_double(const std::string& text, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("bad ") + what + " value '" + text + "'");
    }
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> values;
    for (const auto& part : split(text, ',')) {
        if (!part.empty()) values.push_back(parse_double(part, what));
    }
    if (values.empty()) throw ConfigError(std::string("empty ") + what + " list");
    return values;
}

std::vector<double> parse_range(const std::string& text, const char* what) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError(std::string(what) + " must be min:max:count");
    const double lo = parse_double(parts[0], what);
    const double hi = parse_double(parts[1], what);
    const double count = parse_double(parts[2], what);
    if (!(hi > lo) || count < 2 || count != std::floor(count)) {
        throw ConfigError(std::string(what) + " needs max > min and an integer count >= 2");
    }
    std::vector<double> values;
    const auto n = static_cast<std::size_t>(count);
    for (std::size_t i = 0; i < n; ++i) values.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1.0));
    return values;
}

GridSpec parse_grid(const std::string& text) {
    const auto v = parse_list(text, "grid");
    if (v.size() != 5 || v[4] != std::floor(v[4]) || v[4] < 2) {
        throw ConfigError("grid must be xmin,xmax,ymin,ymax,resolution with integer resolution >= 2");
    }
    GridSpec g{v[0], v[1], v[2], v[3], static_cast<std::size_t>(v[4])};
    if (!(g.x_max > g.x_min) || !(g.y_max > g.y_min)) throw ConfigError("grid needs max > min on both axes");
    return g;
}

std::vector<std::size_t> parse_cuts(const std::string& text) {
    std::vector<std::size_t> cuts;
    for (const auto& part : split(text, ',')) {
        if (part.empty()) continue;
        const double v = parse_double(part, "cut");
        if (v < 0 || v != std::floor(v)) throw ConfigError("cut indices must be nonnegative integers");
        cuts.push_back(static_cast<std::size_t>(v));
    }
    return cuts;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

RetrievalConfig retrieval_config(const RunConfig& cfg) {
    RetrievalConfig rc;
    rc.params = cfg.params;
    rc.optimizer = cfg.optimizer;
    rc.optimizer.line_search = !cfg.fixed_step;
    rc.optimizer.step_rule = parse_step_rule(cfg.step_rule);
    rc.mse_threshold = cfg.threshold;
    rc.scene_mse_threshold = cfg.scene_threshold;
    return rc;
}

json config_echo(const RunConfig& cfg, std::size_t n_effective) {
    const RetrievalConfig rc = retrieval_config(cfg);
    return json{
        {"input", cfg.input},
        {"output", cfg.output},
        {"format", cfg.format},
        {"p", cfg.p},
        {"n", n_effective},
        {"beta", rc.params.beta},
        {"sigma", rc.params.sigma},
        {"lambda", rc.params.lambda},
        {"lambda_f", rc.params.lambda_f},
        {"mu", rc.params.mu},
        {"step_size", rc.optimizer.step_size},
        {"tol", rc.optimizer.tol},
        {"max_iters", rc.optimizer.max_iters},
        {"line_search", rc.optimizer.line_search},
        {"backtrack_factor", rc.optimizer.backtrack_factor},
        {"armijo_c", rc.optimizer.armijo_c},
        {"step_rule", std::string(to_string(rc.optimizer.step_rule))},
        {"mse_threshold", rc.mse_threshold},
        {"scene_mse_threshold", rc.scene_mse_threshold},
    };
}

// ---- subcommands -------------------------------------------------------------

int cmd_retrieve(const RunConfig& cfg, std::ostream& out) {
    if (cfg.input.empty() || cfg.output.empty()) throw ConfigError("retrieve needs --input and --output");
    const FrameFormat format = parse_format(cfg.format);
    const RetrievalConfig rc = retrieval_config(cfg);
    rc.validate();

    std::optional<FrameWindow> window;
    if (cfg.p != 1 || cfg.n != 0) {
        std::size_t n = cfg.n;
        if (n == 0) {
            const std::size_t available = list_frame_files(cfg.input, format).size();
            if (cfg.p > available) {
                throw WindowError("window start p=" + std::to_string(cfg.p) + " is past the last of " +
                                  std::to_string(available) + " frames");
            }
            n = available - cfg.p + 1;
        }
        window = FrameWindow{cfg.p, n};
    }
    const FrameSequence seq = load_sequence(cfg.input, format, window);
    const RetrievalResult result = retrieve_sequence(seq.store, rc);
    const RetrievalReport& report = result.report;

    const fs::path out_dir(cfg.output);
    ensure_dir(out_dir);
    for (std::size_t k = 0; k < result.retrieved.size(); ++k) {
        save_frame(denormalize(result.retrieved[k], seq.source_norms[k]), seq.shape,
                   out_dir / frame_file_name(k, format), format);
    }
    write_norms(out_dir / "norms.txt", seq.source_norms);

    const std::size_t n = seq.store.size();
    json doc{
        {"mse", report.mse},
        {"eta", report.eta},
        {"iterations", report.iterations},
        {"energy_final", report.energy_final},
        {"converged", report.converged},
        {"scene_changes", report.scene_changes},
        {"wall_time_s", report.wall_time_s},
        {"d", seq.store.dim()},
        {"N", n},
        {"config", config_echo(cfg, n)},
    };
    write_json(out_dir / "report.json", doc);

    out << std::fixed << std::setprecision(1) << "p=" << cfg.p << " N=" << n << " d=" << seq.store.dim()
        << std::defaultfloat << std::setprecision(6) << " beta=" << rc.params.beta << " sigma=" << rc.params.sigma
        << " lambda=" << rc.params.lambda << " lambda_f=" << rc.params.lambda_f << " mu=" << rc.params.mu
        << std::fixed << std::setprecision(1) << " eta=" << report.eta << " S=" << report.scene_changes
        << std::setprecision(3) << " time=" << report.wall_time_s << "s" << std::defaultfloat << '\n';
    return kOk;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
    if (cfg.output.empty()) throw ConfigError("synth needs --output");
    const FrameFormat format = parse_format(cfg.format);
    SyntheticSpec spec;
    spec.shape = {cfg.width, cfg.height, cfg.channels};
    spec.n = cfg.n == 0 ? 50 : cfg.n;
    spec.drift = cfg.drift;
    spec.cuts = parse_cuts(cfg.cuts);
    spec.seed = cfg.seed;
    if (format == FrameFormat::Ppm && spec.shape.channels != 3) throw ConfigError("ppm output needs 3 channels");
    const SyntheticSequence seq = synthesize_sequence(spec);

    const fs::path out_dir(cfg.output);
    ensure_dir(out_dir);
    for (std::size_t k = 0; k < seq.frames.size(); ++k) {
        save_frame(seq.frames[k], seq.shape, out_dir / frame_file_name(k, format), format);
    }
    out << "wrote " << seq.frames.size() << " frames of shape " << to_string(seq.shape) << " to " << out_dir.string()
        << '\n';
    return kOk;
}

int cmd_stability(const RunConfig& cfg, std::ostream& out) {
    if (cfg.output.empty()) throw ConfigError("stability needs --output (CSV path)");
    const ConditionVariant variant = ConditionVariant::from_exponent(cfg.variant);
    const std::vector<double> lambdas = parse_list(cfg.lambdas, "lambdas");
    const std::vector<double> grid = parse_range(cfg.lambda_f_grid, "lambda-f-grid");
    for (double l : lambdas) {
        if (l < 0.0) throw ConfigError("lambdas must be >= 0");
    }
    if (grid.front() <= 0.0) throw ConfigError("lambda_f grid must be > 0");

    const auto rows = figure1_data(lambdas, grid, variant);
    const fs::path path(cfg.output);
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    std::ofstream csv(path);
    if (!csv) throw IoError("cannot write " + path.string());
    write_figure1_csv(csv, rows);
    if (!csv) throw IoError("write failed for " + path.string());

    for (double l : lambdas) {
        out << "lambda=" << l << " critical_lambda_f=";
        try {
            out << std::setprecision(9) << critical_lambda_f(l, variant) << std::setprecision(6);
        } catch (const NoCrossingError&) {
            out << "none";
        }
        out << '\n';
    }
    out << "wrote " << rows.size() << " rows to " << path.string() << '\n';
    return kOk;
}

int cmd_landscape(const RunConfig& cfg, const CLI::App& app, std::ostream& out) {
    if (cfg.output.empty()) throw ConfigError("landscape needs --output (directory)");
    ModelParams params = cfg.params;
    std::optional<PatternStore> store;
    if (cfg.builtin == "morphing") {
        store = morphing_demo_store();
        // Instance defaults unless overridden explicitly.
        if (app.count("--beta") == 0) params.beta = 100.0;
        if (app.count("--lambda") == 0) params.lambda = 1.0;
        if (app.count("--sigma") == 0) params.sigma = std::sqrt(0.5);
    } else if (!cfg.builtin.empty()) {
        throw ConfigError("unknown builtin store '" + cfg.builtin + "' (expected morphing)");
    } else if (!cfg.input.empty()) {
        store = load_sequence(cfg.input, parse_format(cfg.format)).store;
    } else {
        throw ConfigError("landscape needs --input or --builtin");
    }
    if (store->dim() != 2) {
        throw ConfigError("landscape needs a 2-D store, got d = " + std::to_string(store->dim()));
    }
    if (!(params.beta > 0.0) || !(params.sigma > 0.0)) throw ConfigError("beta and sigma must be > 0");

    const GridSpec grid = parse_grid(cfg.grid);
    const std::vector<double> times = parse_list(cfg.times, "times");
    for (double t : times) {
        if (t < 0.0 || t > static_cast<double>(store->size() - 1)) {
            throw ConfigError("time " + std::to_string(t) + " outside [0, N-1]");
        }
    }

    const fs::path out_dir(cfg.output);
    ensure_dir(out_dir);
    for (double t : times) {
        const LandscapeGrid surface = landscape_grid(*store, params.beta, params.lambda, params.sigma, t, grid);
        std::ostringstream name;
        name << "landscape_t" << t << ".csv";
        std::ofstream csv(out_dir / name.str());
        if (!csv) throw IoError("cannot write " + (out_dir / name.str()).string());
        write_landscape_csv(csv, surface);
        const FrameVector best = surface.argmin();
        out << "t=" << t << " argmin=(" << best[0] << "," << best[1] << ") nearest=s" << nearest_pattern(*store, best)
            << '\n';
    }
    return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
    if (cfg.input.empty() || cfg.retrieved.empty()) throw ConfigError("eval needs --input and --retrieved");
    const FrameFormat format = parse_format(cfg.format);
    if (!(cfg.threshold > 0.0)) throw ConfigError("threshold must be > 0");
    const FrameSequence original = load_sequence(cfg.input, format);
    const FrameSequence retrieved = load_sequence(cfg.retrieved, format);
    if (original.store.size() != retrieved.store.size()) {
        throw IoError("frame count mismatch: " + std::to_string(original.store.size()) + " original vs " +
                      std::to_string(retrieved.store.size()) + " retrieved");
    }
    if (!(original.shape == retrieved.shape)) {
        throw ShapeMismatchError("shape mismatch: " + to_string(original.shape) + " vs " + to_string(retrieved.shape),
                                 cfg.retrieved);
    }

    std::vector<double> mse;
    for (std::size_t k = 0; k < original.store.size(); ++k) mse.push_back(mse_k(original.store[k], retrieved.store[k]));
    const double eta = accuracy_eta(mse, cfg.threshold);

    const fs::path out_dir = cfg.output.empty() ? fs::path(cfg.retrieved) : fs::path(cfg.output);
    ensure_dir(out_dir);
    write_json(out_dir / "eval.json", json{{"mse", mse}, {"eta", eta}, {"mse_threshold", cfg.threshold}});

    out << std::setprecision(6);
    for (std::size_t k = 0; k < mse.size(); ++k) out << "MSE_" << k << "=" << mse[k] << '\n';
    out << std::fixed << std::setprecision(1) << "eta=" << eta << std::defaultfloat << '\n';
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Sequential temporal-kernel Hopfield retrieval"};
    app.set_config("--config", "", "Flat TOML/INI key = value file; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--input", cfg.input, "Input frame directory");
    app.add_option("--output", cfg.output, "Output directory (CSV path for stability)");
    app.add_option("--retrieved", cfg.retrieved, "Retrieved frame directory (eval)");
    app.add_option("--format", cfg.format, "Frame format: ppm or raw")->check(CLI::IsMember({"ppm", "raw", "shf"}));
    app.add_option("--p", cfg.p, "1-based first frame of the window")->check(CLI::PositiveNumber);
    app.add_option("--n", cfg.n, "Number of frames")->check(CLI::PositiveNumber);
    app.add_option("--beta", cfg.params.beta, "Softmax sharpness");
    app.add_option("--sigma", cfg.params.sigma, "Temporal kernel width");
    app.add_option("--lambda", cfg.params.lambda, "Regularization weight");
    app.add_option("--lambda-f", cfg.params.lambda_f, "Fidelity weight");
    app.add_option("--mu", cfg.params.mu, "Continuity weight");
    app.add_option("--tol", cfg.optimizer.tol, "Optimizer tolerance (infinity norm)");
    app.add_option("--max-iters", cfg.optimizer.max_iters, "Optimizer iteration cap");
    app.add_option("--step-size", cfg.optimizer.step_size, "Fixed or initial step size");
    app.add_flag("--fixed-step", cfg.fixed_step, "Disable backtracking line search");
    app.add_option("--step-rule", cfg.step_rule, "First trial step: barzilai_borwein or constant")
        ->check(CLI::IsMember({"barzilai_borwein", "bb", "constant"}));
    app.add_option("--threshold", cfg.threshold, "MSE threshold for accuracy");
    app.add_option("--scene-threshold", cfg.scene_threshold, "Consecutive-frame MSE marking a scene change");
    app.add_option("--seed", cfg.seed, "Synthetic sequence seed");
    app.add_option("--width", cfg.width, "Synthetic frame width");
    app.add_option("--height", cfg.height, "Synthetic frame height");
    app.add_option("--channels", cfg.channels, "Synthetic frame channels");
    app.add_option("--drift", cfg.drift, "Synthetic per-step drift amplitude");
    app.add_option("--cuts", cfg.cuts, "Synthetic scene-cut indices, comma separated");
    app.add_option("--variant", cfg.variant, "Condition denominator exponent (2 or 3)");
    app.add_option("--lambdas", cfg.lambdas, "Comma-separated lambda values (stability)");
    app.add_option("--lambda-f-grid", cfg.lambda_f_grid, "lambda_f grid min:max:count (stability)");
    app.add_option("--builtin", cfg.builtin, "Built-in 2-D store (landscape): morphing");
    app.add_option("--grid", cfg.grid, "Landscape grid xmin,xmax,ymin,ymax,resolution");
    app.add_option("--times", cfg.times, "Comma-separated landscape times");

    auto* retrieve = app.add_subcommand("retrieve", "Retrieve a frame sequence and report MSE / accuracy");
    auto* synth = app.add_subcommand("synth", "Write a synthetic frame sequence");
    auto* stability = app.add_subcommand("stability", "Global-minimum condition curves and critical lambda_f");
    auto* landscape = app.add_subcommand("landscape", "Sample 2-D energy surfaces over time");
    auto* eval = app.add_subcommand("eval", "Compare original and retrieved frame directories");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("seqhop");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (retrieve->parsed()) return cmd_retrieve(cfg, out);
        if (synth->parsed()) return cmd_synth(cfg, out);
        if (stability->parsed()) return cmd_stability(cfg, out);
        if (landscape->parsed()) return cmd_landscape(cfg, app, out);
        if (eval->parsed()) return cmd_eval(cfg, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ParamError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericsError& e) {
        err << "numerics error: " << e.what() << '\n';
        return kNumericsError;
    } catch (const Error& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoError;
    }
    return kConfigError;
}

} // namespace seqhop::cli
