#ifndef SVQ_EXPERIMENT_HPP
#define SVQ_EXPERIMENT_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "svq/analysis.hpp"
#include "svq/datagen.hpp"
#include "svq/image.hpp"
#include "svq/persist.hpp"
#include "svq/trainer.hpp"

namespace svq {

// ---------------------------------------------------------------------------
// flat key=value experiment description

struct GeneratorConfig {
    std::string kind;            // circle | torus | multi_targets | correlated_pair |
                                 // waveforms | ecg_synth | texture | interdigitated
    int dim = 32;                // 1-D experiments
    int num_targets = 2;         // multi_targets
    int sep_min = 4, sep_max = 8; // correlated_pair
    int channels = 8;            // ecg_synth
    bool whiten = false;
    int whiten_fit = 4096;       // samples used to fit the whitener
    int width = 128, height = 128;       // texture images
    double correlation_length = 7.0;
    bool orientation_bands = false;
    int window = 9;              // patch window for image experiments
    int normalize_window = 9;
    double normalize_epsilon = 0.01;

    // input dimension seen by the first stage
    int input_dim() const {
        if (kind == "circle") return 2;
        if (kind == "torus") return 4;
        if (kind == "ecg_synth") return channels;
        if (kind == "texture" || kind == "interdigitated") return window * window;
        return dim;
    }
};

struct StageConfig {
    int codes = 0;
    std::string layout = "ring"; // ring | line | grid
    int rows = 1, cols = 0;
    bool wrap = true;
    int radius = -1;             // -1: full coverage
    int leak_radius = 0;
    double leak_sigma = 1.0;
    int n = 10;
    double weight_start = 1.0, weight_end = 1.0;

    Topology topology() const {
        const int extent = std::max(rows, cols);
        const int r = radius >= 0 ? radius : extent;
        if (layout == "ring") return Topology::ring(codes, r);
        if (layout == "line") return Topology::line(codes, r);
        return Topology::grid(rows, cols, wrap, r);
    }

    LeakageKernel kernel(const Topology& topo) const {
        return leak_radius == 0 ? LeakageKernel::identity(codes)
                                : LeakageKernel::gaussian(topo, leak_radius, leak_sigma);
    }
};

struct ExperimentSpec {
    std::string name;
    std::uint64_t seed = 1;
    GeneratorConfig generator;
    std::vector<StageConfig> stages;
    TrainConfig train;
    std::vector<std::string> analyses;

    static ExperimentSpec parse(const std::string& text);
    static ExperimentSpec parse_file(const std::string& path) {
        return parse(read_file(path));
    }
    void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct SpecParser {
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("line " + std::to_string(line) + ": " + msg);
    }

    int to_int(const std::string& v) const {
        try {
            std::size_t pos = 0;
            const int out = std::stoi(v, &pos);
            if (pos != v.size()) fail("invalid integer '" + v + "'");
            return out;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            fail("invalid integer '" + v + "'");
        }
    }

    double to_double(const std::string& v) const {
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) fail("invalid number '" + v + "'");
            return out;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            fail("invalid number '" + v + "'");
        }
    }

    bool to_bool(const std::string& v) const {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        fail("invalid boolean '" + v + "' (use true/false)");
    }
};

} // namespace detail

inline ExperimentSpec ExperimentSpec::parse(const std::string& text) {
    ExperimentSpec spec;
    detail::SpecParser p;
    std::istringstream in(text);
    std::string raw;
    std::set<std::string> seen;
    int max_stage = 0;

    auto stage_at = [&](int k) -> StageConfig& {
        if (static_cast<int>(spec.stages.size()) < k) spec.stages.resize(k);
        max_stage = std::max(max_stage, k);
        return spec.stages[k - 1];
    };

    while (std::getline(in, raw)) {
        ++p.line;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) p.fail("expected key=value, got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) p.fail("empty key");
        if (!seen.insert(key).second) p.fail("duplicate key '" + key + "'");

        auto& g = spec.generator;
        auto& t = spec.train;
        if (key == "name") spec.name = value;
        else if (key == "seed") { t.seed = spec.seed = static_cast<std::uint64_t>(p.to_int(value)); }
        else if (key == "generator.kind") g.kind = value;
        else if (key == "generator.dim") g.dim = p.to_int(value);
        else if (key == "generator.num_targets") g.num_targets = p.to_int(value);
        else if (key == "generator.sep_min") g.sep_min = p.to_int(value);
        else if (key == "generator.sep_max") g.sep_max = p.to_int(value);
        else if (key == "generator.channels") g.channels = p.to_int(value);
        else if (key == "generator.whiten") g.whiten = p.to_bool(value);
        else if (key == "generator.whiten_fit") g.whiten_fit = p.to_int(value);
        else if (key == "generator.width") g.width = p.to_int(value);
        else if (key == "generator.height") g.height = p.to_int(value);
        else if (key == "generator.correlation_length") g.correlation_length = p.to_double(value);
        else if (key == "generator.orientation_bands") g.orientation_bands = p.to_bool(value);
        else if (key == "generator.window") g.window = p.to_int(value);
        else if (key == "generator.normalize_window") g.normalize_window = p.to_int(value);
        else if (key == "generator.normalize_epsilon") g.normalize_epsilon = p.to_double(value);
        else if (key == "train.steps") t.steps = p.to_int(value);
        else if (key == "train.batch") t.batch_size = p.to_int(value);
        else if (key == "train.rate") t.rate = p.to_double(value);
        else if (key == "train.rate_end") t.rate_end = p.to_double(value);
        else if (key == "train.decay") {
            if (value == "constant") t.decay = TrainConfig::Decay::Constant;
            else if (value == "linear") t.decay = TrainConfig::Decay::Linear;
            else if (value == "step") t.decay = TrainConfig::Decay::Step;
            else p.fail("invalid decay '" + value + "' (constant|linear|step)");
        }
        else if (key == "train.init_scale") t.init_scale = p.to_double(value);
        else if (key == "train.trace_every") t.trace_every = p.to_int(value);
        else if (key == "train.divergence_factor") t.divergence_factor = p.to_double(value);
        else if (key == "analyses") {
            std::istringstream list(value);
            std::string item;
            while (std::getline(list, item, ',')) {
                item = detail::trim(item);
                if (!item.empty()) spec.analyses.push_back(item);
            }
        }
        else if (key.rfind("stage", 0) == 0) {
            const auto dot = key.find('.');
            if (dot == std::string::npos) p.fail("unknown key '" + key + "'");
            const std::string num = key.substr(5, dot - 5);
            if (num.empty() ||
                num.find_first_not_of("0123456789") != std::string::npos)
                p.fail("unknown key '" + key + "'");
            const int k = p.to_int(num);
            if (k < 1 || k > 8) p.fail("stage index out of range in '" + key + "'");
            StageConfig& s = stage_at(k);
            const std::string field = key.substr(dot + 1);
            if (field == "codes") s.codes = p.to_int(value);
            else if (field == "layout") s.layout = value;
            else if (field == "rows") s.rows = p.to_int(value);
            else if (field == "cols") s.cols = p.to_int(value);
            else if (field == "wrap") s.wrap = p.to_bool(value);
            else if (field == "radius") s.radius = p.to_int(value);
            else if (field == "leak_radius") s.leak_radius = p.to_int(value);
            else if (field == "leak_sigma") s.leak_sigma = p.to_double(value);
            else if (field == "n") s.n = p.to_int(value);
            else if (field == "weight_start") s.weight_start = p.to_double(value);
            else if (field == "weight_end") s.weight_end = p.to_double(value);
            else p.fail("unknown key '" + key + "'");
        }
        else p.fail("unknown key '" + key + "'");
    }

    // fill layout defaults before validation
    for (auto& s : spec.stages) {
        if (s.layout != "grid") {
            s.rows = 1;
            if (s.cols == 0) s.cols = s.codes;
        }
    }
    spec.validate();
    return spec;
}

inline void ExperimentSpec::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("spec: " + msg); };
    if (name.empty()) fail("missing name");
    static const std::set<std::string> kinds = {
        "circle", "torus", "multi_targets", "correlated_pair",
        "waveforms", "ecg_synth", "texture", "interdigitated"};
    if (!kinds.count(generator.kind))
        fail("unknown generator.kind '" + generator.kind + "'");
    if (stages.empty()) fail("at least one stage is required");
    for (std::size_t k = 0; k < stages.size(); ++k) {
        const auto& s = stages[k];
        const std::string tag = "stage" + std::to_string(k + 1);
        if (s.codes < 1) fail(tag + ".codes must be positive");
        if (s.layout != "ring" && s.layout != "line" && s.layout != "grid")
            fail(tag + ".layout must be ring, line or grid");
        if (s.layout == "grid" && s.rows * s.cols != s.codes)
            fail(tag + ": rows*cols must equal codes");
        if (s.layout != "grid" && s.cols != s.codes)
            fail(tag + ": cols must equal codes for ring/line layouts");
        if (s.n < 1) fail(tag + ".n must be at least 1");
        if (s.leak_radius < 0) fail(tag + ".leak_radius must be non-negative");
    }
    if (train.steps < 1) fail("train.steps must be positive");
    if (train.batch_size < 1) fail("train.batch must be positive");

    static const std::set<std::string> known_analyses = {
        "stationarity", "arc_profiles", "classification", "localization",
        "waveforms", "ecg_periods", "topographic", "image_coding", "dominance"};
    for (const auto& a : analyses) {
        if (!known_analyses.count(a)) fail("unknown analysis '" + a + "'");
        if (a == "arc_profiles" && generator.input_dim() != 2)
            fail("arc_profiles requires a 2-dimensional (circle) generator");
        if (a == "classification" && generator.kind != "torus")
            fail("classification requires the torus generator");
        if (a == "waveforms" && generator.kind != "waveforms")
            fail("waveforms analysis requires the waveforms generator");
        if (a == "ecg_periods" && generator.kind != "ecg_synth")
            fail("ecg_periods requires the ecg_synth generator");
        if (a == "topographic" && stages[0].codes < 3)
            fail("topographic requires at least 3 codes");
        if (a == "image_coding" &&
            generator.kind != "texture" && generator.kind != "interdigitated")
            fail("image_coding requires an image generator");
        if (a == "dominance" && generator.kind != "interdigitated")
            fail("dominance requires the interdigitated generator");
    }
}

// ---------------------------------------------------------------------------
// data pipeline assembly

struct DataContext {
    int dim = 0;
    DataSource source;
    // image experiments (preprocessed)
    bool has_images = false;
    ImageData train_image;
    ImageData image_a, image_b; // interdigitation components, normalized
    int window = 0;
    // ecg
    std::shared_ptr<EcgSynth> synth;
    bool whitened = false;
    WhitenTransform whitener;
};

inline DataContext build_data(const ExperimentSpec& spec) {
    const auto& g = spec.generator;
    DataContext ctx;
    ctx.dim = g.input_dim();
    Rng setup = Rng(spec.seed).derive(100); // generator construction stream

    if (g.kind == "circle") {
        ctx.source = [](Rng& rng) { return sample_circle(rng); };
    } else if (g.kind == "torus") {
        ctx.source = [](Rng& rng) { return sample_torus(rng); };
    } else if (g.kind == "multi_targets") {
        const int dim = g.dim, targets = g.num_targets;
        ctx.source = [dim, targets](Rng& rng) {
            return sample_multi_targets(dim, targets, rng);
        };
    } else if (g.kind == "correlated_pair") {
        const int dim = g.dim, lo = g.sep_min, hi = g.sep_max;
        ctx.source = [dim, lo, hi](Rng& rng) {
            return sample_correlated_pair(dim, lo, hi, rng);
        };
    } else if (g.kind == "waveforms") {
        const int dim = g.dim;
        ctx.source = [dim](Rng& rng) { return sample_waveforms(dim, rng); };
    } else if (g.kind == "ecg_synth") {
        ctx.synth = std::make_shared<EcgSynth>(g.channels, setup.uniform_int(1 << 30) + 1);
        if (g.whiten) {
            Rng fit_rng = Rng(spec.seed).derive(101);
            EcgSynth fit_synth = *ctx.synth;
            std::vector<Vec> fit;
            fit.reserve(g.whiten_fit);
            for (int i = 0; i < g.whiten_fit; ++i) fit.push_back(fit_synth.step(fit_rng));
            ctx.whitener = fit_whitener(fit);
            ctx.whitened = true;
        }
        auto synth = ctx.synth;
        const bool white = ctx.whitened;
        const WhitenTransform w = ctx.whitener;
        ctx.source = [synth, white, w](Rng& rng) {
            const Vec x = synth->step(rng);
            return white ? w.apply(x) : x;
        };
    } else { // texture | interdigitated
        Rng tex_rng = Rng(spec.seed).derive(102);
        ImageData raw_a = make_texture(g.width, g.height, g.correlation_length,
                                       g.orientation_bands, tex_rng);
        if (g.kind == "texture") {
            ctx.train_image =
                local_normalize(raw_a, g.normalize_window, g.normalize_epsilon);
        } else {
            Rng tex_rng_b = Rng(spec.seed).derive(103);
            // second component gets a different correlation length so the two
            // textures are statistically distinguishable
            ImageData raw_b = make_texture(g.width, g.height,
                                           std::max(2.0, g.correlation_length * 0.5),
                                           !g.orientation_bands, tex_rng_b);
            ctx.train_image = local_normalize(interdigitate(raw_a, raw_b),
                                              g.normalize_window, g.normalize_epsilon);
            ctx.image_a = local_normalize(raw_a, g.normalize_window, g.normalize_epsilon);
            ctx.image_b = local_normalize(raw_b, g.normalize_window, g.normalize_epsilon);
        }
        ctx.has_images = true;
        ctx.window = g.window;
        const ImageData img = ctx.train_image;
        const int window = g.window;
        ctx.source = [img, window](Rng& rng) { return sample_patch(img, window, rng); };
    }
    return ctx;
}

inline std::vector<Stage> build_stages(const ExperimentSpec& spec) {
    std::vector<Stage> stages;
    Rng init_rng = Rng(spec.seed).derive(200);
    int input_dim = spec.generator.input_dim();
    for (const auto& sc : spec.stages) {
        auto [cb, resp] = init_model(input_dim, sc.codes, spec.train.init_scale, init_rng);
        Topology topo = sc.topology();
        LeakageKernel kernel = sc.kernel(topo);
        stages.push_back({Svq{std::move(cb), std::move(resp), topo, std::move(kernel)},
                          sc.n});
        input_dim = sc.codes;
    }
    return stages;
}

inline WeightSchedule build_schedule(const ExperimentSpec& spec) {
    WeightSchedule schedule;
    for (const auto& sc : spec.stages) {
        schedule.start.push_back(sc.weight_start);
        schedule.end.push_back(sc.weight_end);
    }
    return schedule;
}

// ---------------------------------------------------------------------------
// the run pipeline: generator -> training -> analyses -> manifest

struct RunResult {
    std::vector<std::string> files; // relative to the output directory
    TrainResult training;
};

namespace detail {

inline Batch draw_batch(const DataSource& source, int count, Rng& rng) {
    Batch batch;
    batch.samples.reserve(count);
    for (int i = 0; i < count; ++i) batch.samples.push_back(source(rng));
    return batch;
}

// rescale arbitrary-range pixels into [0,1] for PGM rendering
inline ImageData rescaled(const ImageData& img) {
    double lo = img.pixels[0], hi = img.pixels[0];
    for (double v : img.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    ImageData out = img;
    const double span = hi > lo ? hi - lo : 1.0;
    for (auto& v : out.pixels) v = (v - lo) / span;
    return out;
}

} // namespace detail

inline RunResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                bool run_analyses = true) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);
    auto path = [&](const std::string& file) { return out_dir + "/" + file; };

    RunResult result;
    auto emit = [&](const std::string& file) { result.files.push_back(file); };

    DataContext data = build_data(spec);
    std::vector<Stage> stages = build_stages(spec);
    WeightSchedule schedule = build_schedule(spec);
    TrainConfig cfg = spec.train;
    cfg.seed = spec.seed;
    cfg.n = spec.stages[0].n;

    result.training = train_chain(stages, schedule, cfg, data.source);
    result.training.write_trace_csv(path("trace.csv"));
    emit("trace.csv");

    for (std::size_t k = 0; k < stages.size(); ++k) {
        const std::string file =
            stages.size() == 1 ? "model.svq" : "model_stage" + std::to_string(k + 1) + ".svq";
        save_model(stages[k].model, path(file));
        emit(file);
    }

    const Svq& model = stages[0].model;
    Rng analysis_rng = Rng(spec.seed).derive(300);

    if (run_analyses) {
        for (const auto& a : spec.analyses) {
            if (a == "stationarity") {
                Batch batch = detail::draw_batch(data.source, 256, analysis_rng);
                auto recon_res =
                    stationarity_residual_recon(model, spec.stages[0].n, batch);
                const double post_res =
                    stationarity_residual_posterior(model, spec.stages[0].n, batch);
                CsvWriter csv(path("stationarity.csv"));
                csv.row({"metric", "code", "value"});
                for (std::size_t y = 0; y < recon_res.residual.size(); ++y)
                    csv.row({"recon_residual", fmt(static_cast<int>(y + 1)),
                             recon_res.applicable[y] ? fmt(recon_res.residual[y]) : "n/a"});
                csv.row({"posterior_residual_max", "", fmt(post_res)});
                emit("stationarity.csv");
            } else if (a == "arc_profiles") {
                CsvWriter widths(path("arc_profiles.csv"));
                widths.row({"code", "width"});
                CsvWriter points(path("arc_profile_points.csv"));
                points.row({"code", "theta", "prob"});
                for (int y = 0; y < model.num_codes(); ++y) {
                    auto prof = arc_profile(model, y);
                    widths.row({fmt(y + 1), fmt(prof.width)});
                    for (std::size_t i = 0; i < prof.theta.size(); ++i)
                        points.row({fmt(y + 1), fmt(prof.theta[i]), fmt(prof.prob[i])});
                }
                emit("arc_profiles.csv");
                emit("arc_profile_points.csv");
            } else if (a == "classification") {
                auto res = classify_encoding(model);
                {
                    CsvWriter csv(path("classification.csv"));
                    csv.row({"label", "factorial_fraction"});
                    csv.row({res.label_name(), fmt(res.factorial_fraction)});
                }
                CsvWriter codes(path("classification_codes.csv"));
                codes.row({"code", "active", "rho"});
                for (int y = 0; y < model.num_codes(); ++y)
                    codes.row({fmt(y + 1), res.active[y] ? "1" : "0",
                               res.active[y] ? fmt(res.rho[y]) : "n/a"});
                emit("classification.csv");
                emit("classification_codes.csv");
            } else if (a == "localization") {
                auto metrics = localization_metrics(model.codebook);
                CsvWriter csv(path("localization.csv"));
                csv.row({"code", "participation", "runs"});
                for (int y = 0; y < model.num_codes(); ++y)
                    csv.row({fmt(y + 1), fmt(metrics[y].participation),
                             fmt(metrics[y].runs)});
                emit("localization.csv");
            } else if (a == "waveforms") {
                const std::vector<Vec> refs = {waveform_sine(model.dim()),
                                               waveform_square(model.dim())};
                auto matches = match_waveforms(model.codebook, refs);
                // activity from the mean posterior over a fresh batch
                Batch batch = detail::draw_batch(data.source, 256, analysis_rng);
                Vec mean_post(model.num_codes(), 0.0);
                const auto members = model.topology.neighbourhoods();
                for (const auto& x : batch.samples) {
                    const Vec post = model.posterior(x, members);
                    for (int y = 0; y < model.num_codes(); ++y) mean_post[y] += post[y];
                }
                CsvWriter csv(path("waveform_match.csv"));
                csv.row({"code", "active", "reference", "correlation", "shift"});
                for (int y = 0; y < model.num_codes(); ++y) {
                    const bool active = mean_post[y] / batch.size() >
                                        1.0 / (10.0 * model.num_codes());
                    csv.row({fmt(y + 1), active ? "1" : "0",
                             fmt(matches[y].reference + 1), fmt(matches[y].correlation),
                             fmt(matches[y].shift)});
                }
                emit("waveform_match.csv");
            } else if (a == "ecg_periods") {
                // fresh stream through the trained responses
                EcgSynth stream = *data.synth;
                Rng stream_rng = Rng(spec.seed).derive(301);
                const int steps = 4000;
                std::vector<Vec> inputs;
                inputs.reserve(steps);
                for (int t = 0; t < steps; ++t) {
                    Vec x = stream.step(stream_rng);
                    inputs.push_back(data.whitened ? data.whitener.apply(x) : x);
                }
                const int min_lag =
                    std::max(2, static_cast<int>(stream.foetal_period() * 0.6));
                const int max_lag = static_cast<int>(stream.maternal_period() * 1.5);
                CsvWriter csv(path("ecg_periods.csv"));
                csv.row({"code", "period"});
                for (int y = 0; y < model.num_codes(); ++y) {
                    auto series = response_stream(model.response, y, inputs);
                    csv.row({fmt(y + 1), fmt(dominant_period(series, min_lag, max_lag))});
                }
                emit("ecg_periods.csv");
            } else if (a == "topographic") {
                const double score =
                    topographic_order(model.codebook, model.topology, spec.seed ^ 0x70ull);
                CsvWriter csv(path("topographic.csv"));
                csv.row({"score"});
                csv.row({fmt(score)});
                emit("topographic.csv");
            } else if (a == "image_coding") {
                auto coding = encode_image(model, data.train_image, data.window, 1);
                write_pgm(path("activity.pgm"), coding.activity.width,
                          coding.activity.height, detail::rescaled(coding.activity).pixels);
                write_pgm(path("reconstruction.pgm"), coding.reconstruction.width,
                          coding.reconstruction.height,
                          detail::rescaled(coding.reconstruction).pixels);
                // mean-squared error against the global-mean baseline
                double mean = 0.0;
                for (double v : data.train_image.pixels) mean += v;
                mean /= data.train_image.pixels.size();
                double mse = 0.0, baseline = 0.0;
                for (std::size_t i = 0; i < data.train_image.pixels.size(); ++i) {
                    const double d = coding.reconstruction.pixels[i] -
                                     data.train_image.pixels[i];
                    const double b = mean - data.train_image.pixels[i];
                    mse += d * d;
                    baseline += b * b;
                }
                mse /= data.train_image.pixels.size();
                baseline /= data.train_image.pixels.size();
                CsvWriter csv(path("image_coding.csv"));
                csv.row({"sparsity", "mse", "baseline_mse"});
                csv.row({fmt(coding.sparsity), fmt(mse), fmt(baseline)});
                emit("activity.pgm");
                emit("reconstruction.pgm");
                emit("image_coding.csv");
            } else if (a == "dominance") {
                auto res = dominance_map(model, data.image_a, data.image_b, data.window,
                                         2000, spec.seed ^ 0xd0ull);
                write_pgm(path("dominance.pgm"), res.map.width, res.map.height,
                          res.map.pixels);
                CsvWriter csv(path("dominance.csv"));
                csv.row({"contiguity"});
                csv.row({fmt(res.contiguity)});
                emit("dominance.pgm");
                emit("dominance.csv");
            }
        }
    }

    {
        std::ofstream manifest(path("manifest.txt"));
        if (!manifest) throw IoError("cannot open for writing: " + path("manifest.txt"));
        for (const auto& file : result.files)
            manifest << hash_file_hex(path(file)) << "  " << file << "\n";
    }
    emit("manifest.txt");
    return result;
}

} // namespace svq

#endif
