#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "svq/experiment.hpp"
#include "svq/gradcheck.hpp"

namespace {

// SVQ_THREADS caps worker parallelism; unset falls back to the hardware count
int max_threads() {
    if (const char* env = std::getenv("SVQ_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

int run_spec(const std::string& spec_path, const std::string& out_dir,
             std::int64_t seed_override, bool analyses) {
    svq::ExperimentSpec spec = svq::ExperimentSpec::parse_file(spec_path);
    if (seed_override >= 0) {
        spec.seed = static_cast<std::uint64_t>(seed_override);
        spec.train.seed = spec.seed;
    }
    const std::string dir = out_dir.empty() ? spec.name : out_dir;
    svq::RunResult res = svq::run_experiment(spec, dir, analyses);
    std::cout << spec.name << ": wrote " << res.files.size() << " files to " << dir
              << " (holdout " << svq::fmt(res.training.initial_holdout) << " -> "
              << svq::fmt(res.training.final_holdout) << ")\n";
    return 0;
}

void write_batch_csv(const std::string& path, const std::vector<svq::Vec>& rows) {
    svq::CsvWriter csv(path);
    std::vector<std::string> header;
    for (std::size_t i = 0; i < rows.at(0).size(); ++i)
        header.push_back("x" + std::to_string(i + 1));
    csv.row(header);
    for (const auto& r : rows) {
        std::vector<std::string> cells;
        for (double v : r) cells.push_back(svq::fmt(v));
        csv.row(cells);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic vector quantiser: training, diagnostics and experiments"};
    app.require_subcommand(1);

    // --- run / train -------------------------------------------------------
    std::string spec_path, out;
    std::int64_t seed_override = -1;
    auto* run = app.add_subcommand("run", "run a full experiment spec (train + analyses)");
    run->add_option("--spec", spec_path, "experiment spec file")->required();
    run->add_option("--out", out, "output directory (default: the spec name)");
    run->add_option("--seed", seed_override, "override the spec seed");

    auto* train = app.add_subcommand("train", "train from a spec, skipping analyses");
    train->add_option("--spec", spec_path, "experiment spec file")->required();
    train->add_option("--out", out, "output directory (default: the spec name)");
    train->add_option("--seed", seed_override, "override the spec seed");

    // --- datagen -----------------------------------------------------------
    std::string kind = "circle", dg_out = "data.csv";
    int count = 100, dim = 32, num_targets = 2, sep_min = 4, sep_max = 8, channels = 8;
    int width = 128, height = 128;
    double correlation_length = 7.0;
    bool orientation_bands = false;
    std::uint64_t dg_seed = 1;
    auto* datagen = app.add_subcommand(
        "datagen", "write a sample batch as CSV (or a texture as PGM)");
    datagen->add_option("--kind", kind,
                        "circle|torus|multi_targets|correlated_pair|waveforms|"
                        "ecg_synth|texture")
        ->required();
    datagen->add_option("--count", count, "number of samples (default 100)");
    datagen->add_option("--dim", dim, "vector dimension for 1-D kinds (default 32)");
    datagen->add_option("--num-targets", num_targets, "multi_targets bump count");
    datagen->add_option("--sep-min", sep_min, "correlated_pair minimum separation");
    datagen->add_option("--sep-max", sep_max, "correlated_pair maximum separation");
    datagen->add_option("--channels", channels, "ecg_synth channel count");
    datagen->add_option("--width", width, "texture width");
    datagen->add_option("--height", height, "texture height");
    datagen->add_option("--correlation-length", correlation_length,
                        "texture correlation length in pixels");
    datagen->add_flag("--orientation-bands", orientation_bands,
                      "locally oriented texture filtering");
    datagen->add_option("--seed", dg_seed, "generator seed (default 1)");
    datagen->add_option("--out", dg_out, "output path (default data.csv)");

    // --- analyze -----------------------------------------------------------
    std::string model_path, analysis = "localization", an_out = "analysis.csv";
    std::uint64_t an_seed = 1;
    auto* analyze =
        app.add_subcommand("analyze", "run a model-only diagnostic on a saved model");
    analyze->add_option("--model", model_path, "saved model file")->required();
    analyze->add_option("--analysis", analysis,
                        "classification|localization|topographic|arc_profiles");
    analyze->add_option("--seed", an_seed, "seed for seeded diagnostics");
    analyze->add_option("--out", an_out, "output CSV path");

    // --- sweep -------------------------------------------------------------
    std::vector<int> sweep_m = {8}, sweep_n = {5, 10, 15, 20};
    int sweep_seeds = 5, sweep_steps = 20000, sweep_batch = 32;
    double sweep_rate = 0.05, sweep_rate_end = 0.005;
    std::uint64_t sweep_seed = 1;
    std::string sweep_out = "stability.csv";
    auto* sweep = app.add_subcommand("sweep", "torus stability sweep over (M, n) cells");
    sweep->add_option("--M", sweep_m, "codebook sizes")->delimiter(',');
    sweep->add_option("--n", sweep_n, "sample counts")->delimiter(',');
    sweep->add_option("--seeds", sweep_seeds, "seeds per cell (default 5)");
    sweep->add_option("--steps", sweep_steps, "training steps per run (default 20000)");
    sweep->add_option("--batch", sweep_batch, "batch size (default 32)");
    sweep->add_option("--rate", sweep_rate, "initial learning rate (default 0.05)");
    sweep->add_option("--rate-end", sweep_rate_end, "final learning rate (default 0.005)");
    sweep->add_option("--seed", sweep_seed, "base seed (default 1)");
    sweep->add_option("--out", sweep_out, "output CSV path (default stability.csv)");

    // --- gradcheck ---------------------------------------------------------
    int gc_instances = 20;
    std::uint64_t gc_seed = 1;
    double gc_step = 1e-5, gc_tol = 1e-5;
    std::string gc_out = "gradcheck.csv";
    auto* gradcheck = app.add_subcommand(
        "gradcheck", "compare analytic gradients against finite differences");
    gradcheck->add_option("--instances", gc_instances, "random instances (default 20)");
    gradcheck->add_option("--seed", gc_seed, "seed (default 1)");
    gradcheck->add_option("--step", gc_step, "finite-difference step (default 1e-5)");
    gradcheck->add_option("--tol", gc_tol, "relative error tolerance (default 1e-5)");
    gradcheck->add_option("--out", gc_out, "output CSV path (default gradcheck.csv)");

    try {
        app.parse(argc, argv);

        if (run->parsed()) return run_spec(spec_path, out, seed_override, true);
        if (train->parsed()) return run_spec(spec_path, out, seed_override, false);

        if (datagen->parsed()) {
            svq::Rng rng(dg_seed);
            if (kind == "texture") {
                svq::ImageData img = svq::make_texture(width, height, correlation_length,
                                                       orientation_bands, rng);
                svq::write_pgm(dg_out, img.width, img.height, img.pixels);
            } else {
                std::vector<svq::Vec> rows;
                rows.reserve(count);
                if (kind == "circle")
                    for (int i = 0; i < count; ++i) rows.push_back(svq::sample_circle(rng));
                else if (kind == "torus")
                    for (int i = 0; i < count; ++i) rows.push_back(svq::sample_torus(rng));
                else if (kind == "multi_targets")
                    for (int i = 0; i < count; ++i)
                        rows.push_back(svq::sample_multi_targets(dim, num_targets, rng));
                else if (kind == "correlated_pair")
                    for (int i = 0; i < count; ++i)
                        rows.push_back(svq::sample_correlated_pair(dim, sep_min, sep_max, rng));
                else if (kind == "waveforms")
                    for (int i = 0; i < count; ++i)
                        rows.push_back(svq::sample_waveforms(dim, rng));
                else if (kind == "ecg_synth") {
                    svq::EcgSynth synth(channels, dg_seed);
                    for (int i = 0; i < count; ++i) rows.push_back(synth.step(rng));
                } else
                    throw svq::ConfigError("datagen: unknown kind '" + kind + "'");
                write_batch_csv(dg_out, rows);
            }
            std::cout << "wrote " << dg_out << "\n";
            return 0;
        }

        if (analyze->parsed()) {
            svq::Svq model = svq::load_model(model_path);
            if (analysis == "classification") {
                auto res = svq::classify_encoding(model);
                svq::CsvWriter csv(an_out);
                csv.row({"label", "factorial_fraction"});
                csv.row({res.label_name(), svq::fmt(res.factorial_fraction)});
            } else if (analysis == "localization") {
                auto metrics = svq::localization_metrics(model.codebook);
                svq::CsvWriter csv(an_out);
                csv.row({"code", "participation", "runs"});
                for (int y = 0; y < model.num_codes(); ++y)
                    csv.row({svq::fmt(y + 1), svq::fmt(metrics[y].participation),
                             svq::fmt(metrics[y].runs)});
            } else if (analysis == "topographic") {
                svq::CsvWriter csv(an_out);
                csv.row({"score"});
                csv.row({svq::fmt(
                    svq::topographic_order(model.codebook, model.topology, an_seed))});
            } else if (analysis == "arc_profiles") {
                svq::CsvWriter csv(an_out);
                csv.row({"code", "width"});
                for (int y = 0; y < model.num_codes(); ++y)
                    csv.row({svq::fmt(y + 1), svq::fmt(svq::arc_profile(model, y).width)});
            } else {
                throw svq::ConfigError("analyze: unknown analysis '" + analysis + "'");
            }
            std::cout << "wrote " << an_out << "\n";
            return 0;
        }

        if (sweep->parsed()) {
            svq::TrainConfig cfg;
            cfg.steps = sweep_steps;
            cfg.batch_size = sweep_batch;
            cfg.rate = sweep_rate;
            cfg.rate_end = sweep_rate_end;
            cfg.seed = sweep_seed;
            auto table =
                svq::stability_sweep(sweep_m, sweep_n, sweep_seeds, cfg, max_threads());
            table.write_csv(sweep_out);
            std::cout << "wrote " << sweep_out << " (" << table.cells.size()
                      << " cells)\n";
            return 0;
        }

        if (gradcheck->parsed()) {
            auto report = svq::check_gradients(gc_instances, gc_seed, gc_step, gc_tol);
            report.write_csv(gc_out);
            std::cout << "wrote " << gc_out << ": "
                      << (report.all_pass() ? "all pass" : "FAILURES") << "\n";
            return report.all_pass() ? 0 : 1;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const svq::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const svq::DegenerateResponseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const svq::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const svq::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
