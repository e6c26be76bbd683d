#ifndef SVQ_ANALYSIS_HPP
#define SVQ_ANALYSIS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <string>
#include <vector>

#include "svq/datagen.hpp"
#include "svq/image.hpp"
#include "svq/io.hpp"
#include "svq/model.hpp"
#include "svq/objective.hpp"
#include "svq/trainer.hpp"

namespace svq {

// ---------------------------------------------------------------------------
// stationarity diagnostics

struct StationarityReconResult {
    std::vector<double> residual; // Euclidean norm per code
    std::vector<bool> applicable; // false when the code has no posterior mass

    double max_applicable() const {
        double r = 0.0;
        for (std::size_t y = 0; y < residual.size(); ++y)
            if (applicable[y]) r = std::max(r, residual[y]);
        return r;
    }
};

// Residual of the reconstruction-vector stationarity condition
//   n E[x|y] = x'(y) + (n-1) E[ mean_recon(x) | y ]
// with Pr(x|y) realized as posterior-weighted batch averages.
inline StationarityReconResult stationarity_residual_recon(const Svq& model, int n,
                                                           const Batch& batch) {
    const int m = model.num_codes();
    const int dim = model.dim();
    const auto members = model.topology.neighbourhoods();
    StationarityReconResult out;
    out.residual.assign(m, 0.0);
    out.applicable.assign(m, false);

    std::vector<double> mass(m, 0.0);
    std::vector<Vec> ex(m, Vec(dim, 0.0));       // unnormalized E[x|y]
    std::vector<Vec> emean(m, Vec(dim, 0.0));    // unnormalized E[mean_recon|y]
    PosteriorWorkspace ws;
    for (int i = 0; i < batch.size(); ++i) {
        const Vec& x = batch.samples[i];
        ws.compute(model.response, members, model.leakage, x);
        const Vec recon = mean_reconstruction(model.codebook, ws.leaked);
        for (int y = 0; y < m; ++y) {
            const double w = batch.weight(i) * ws.leaked[y];
            if (w == 0.0) continue;
            mass[y] += w;
            for (int k = 0; k < dim; ++k) {
                ex[y][k] += w * x[k];
                emean[y][k] += w * recon[k];
            }
        }
    }
    for (int y = 0; y < m; ++y) {
        if (mass[y] <= 0.0) continue;
        out.applicable[y] = true;
        double acc = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double lhs = n * ex[y][k] / mass[y];
            const double rhs = model.codebook.recon[y][k] + (n - 1) * emean[y][k] / mass[y];
            acc += (lhs - rhs) * (lhs - rhs);
        }
        out.residual[y] = std::sqrt(acc);
    }
    return out;
}

// Max over batch samples and codes with posterior mass above the floor of the
// posterior stationarity bracket
//   | sum_{y'} (Pr(y'|x) - delta_{y,y'}) x'(y') . ( x'(y')/2 - n x
//     + (n-1) sum_{y''} Pr(y''|x) x'(y'') ) |
inline double stationarity_residual_posterior(const Svq& model, int n, const Batch& batch,
                                              double mass_floor = 1e-6) {
    const int m = model.num_codes();
    const int dim = model.dim();
    const auto members = model.topology.neighbourhoods();
    double worst = 0.0;
    PosteriorWorkspace ws;
    for (int i = 0; i < batch.size(); ++i) {
        const Vec& x = batch.samples[i];
        ws.compute(model.response, members, model.leakage, x);
        const Vec recon = mean_reconstruction(model.codebook, ws.leaked);
        // inner factor x'(y').(x'(y')/2 - n x + (n-1) recon) per y'
        Vec inner(m);
        for (int yp = 0; yp < m; ++yp) {
            double acc = 0.0;
            for (int k = 0; k < dim; ++k)
                acc += model.codebook.recon[yp][k] *
                       (0.5 * model.codebook.recon[yp][k] - n * x[k] + (n - 1) * recon[k]);
            inner[yp] = acc;
        }
        double weighted = 0.0;
        for (int yp = 0; yp < m; ++yp) weighted += ws.leaked[yp] * inner[yp];
        for (int y = 0; y < m; ++y) {
            if (ws.leaked[y] <= mass_floor) continue;
            worst = std::max(worst, std::fabs(weighted - inner[y]));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// torus encoding classification

struct EncodingResult {
    enum class Label { Joint, Factorial, Mixed };
    Label label = Label::Mixed;
    std::vector<double> rho;  // dependence ratio per code, NaN when inactive
    std::vector<bool> active;
    double factorial_fraction = 0.0;

    std::string label_name() const {
        switch (label) {
            case Label::Joint: return "joint";
            case Label::Factorial: return "factorial";
            default: return "mixed";
        }
    }
};

// Evaluate the posterior on a G x G grid of torus angles; a code whose
// response varies along only one angle (dependence ratio below the
// threshold) counts as factorial-type.
inline EncodingResult classify_encoding(const Svq& model, int grid = 64,
                                        double rho_threshold = 0.25,
                                        double majority = 0.75) {
    if (model.dim() != 4)
        throw ConfigError("classify_encoding: expects a torus model with dim 4");
    const int m = model.num_codes();
    const auto members = model.topology.neighbourhoods();

    // response table per code over the angle grid
    std::vector<std::vector<double>> table(m, std::vector<double>(grid * grid));
    std::vector<double> peak(m, 0.0);
    PosteriorWorkspace ws;
    for (int i = 0; i < grid; ++i) {
        const double t1 = 2.0 * M_PI * i / grid;
        for (int j = 0; j < grid; ++j) {
            const double t2 = 2.0 * M_PI * j / grid;
            const Vec x = {std::cos(t1), std::sin(t1), std::cos(t2), std::sin(t2)};
            ws.compute(model.response, members, model.leakage, x);
            for (int y = 0; y < m; ++y) {
                table[y][i * grid + j] = ws.leaked[y];
                peak[y] = std::max(peak[y], ws.leaked[y]);
            }
        }
    }

    EncodingResult out;
    out.rho.assign(m, std::numeric_limits<double>::quiet_NaN());
    out.active.assign(m, false);
    int active_count = 0, factorial_count = 0;
    const double active_floor = 1.0 / (10.0 * m);
    for (int y = 0; y < m; ++y) {
        if (peak[y] < active_floor) continue;
        out.active[y] = true;
        ++active_count;
        // marginal profiles: average over the other angle
        Vec a1(grid, 0.0), a2(grid, 0.0);
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) {
                a1[i] += table[y][i * grid + j] / grid;
                a2[j] += table[y][i * grid + j] / grid;
            }
        auto variance = [&](const Vec& prof) {
            double mean = 0.0;
            for (double v : prof) mean += v;
            mean /= grid;
            double var = 0.0;
            for (double v : prof) var += (v - mean) * (v - mean);
            return var / grid;
        };
        const double v1 = variance(a1), v2 = variance(a2);
        const double hi = std::max(v1, v2), lo = std::min(v1, v2);
        out.rho[y] = hi > 0.0 ? lo / hi : 1.0;
        if (out.rho[y] < rho_threshold) ++factorial_count;
    }
    out.factorial_fraction =
        active_count > 0 ? static_cast<double>(factorial_count) / active_count : 0.0;
    out.label = out.factorial_fraction >= majority ? EncodingResult::Label::Factorial
              : out.factorial_fraction <= 1.0 - majority ? EncodingResult::Label::Joint
                                                         : EncodingResult::Label::Mixed;
    return out;
}

// ---------------------------------------------------------------------------
// circle arc profiles

struct ArcProfile {
    Vec theta;     // grid of angles
    Vec prob;      // posterior of the chosen code along the grid
    double width;  // measure of { theta : prob > max/2 } in radians
};

inline ArcProfile arc_profile(const Svq& model, int code, int resolution = 1024) {
    if (model.dim() != 2)
        throw ConfigError("arc_profile: expects a circle model with dim 2");
    const auto members = model.topology.neighbourhoods();
    ArcProfile out;
    out.theta.resize(resolution);
    out.prob.resize(resolution);
    PosteriorWorkspace ws;
    double peak = 0.0;
    for (int i = 0; i < resolution; ++i) {
        const double t = 2.0 * M_PI * i / resolution;
        ws.compute(model.response, members, model.leakage,
                   {std::cos(t), std::sin(t)});
        out.theta[i] = t;
        out.prob[i] = ws.leaked[code];
        peak = std::max(peak, ws.leaked[code]);
    }
    int above = 0;
    for (double v : out.prob)
        if (v > 0.5 * peak) ++above;
    out.width = 2.0 * M_PI * above / resolution;
    return out;
}

// ---------------------------------------------------------------------------
// localization of reconstruction rows

struct LocalizationMetrics {
    double participation = 0.0;  // (sum v^2)^2 / sum v^4, in [1, dim]
    int runs = 0;                // circular above-half-max runs after baseline removal
};

inline LocalizationMetrics localization_of_row(const Vec& row) {
    LocalizationMetrics out;
    double s2 = 0.0, s4 = 0.0;
    for (double v : row) {
        s2 += v * v;
        s4 += v * v * v * v;
    }
    out.participation = s4 > 0.0 ? s2 * s2 / s4 : static_cast<double>(row.size());

    const int dim = static_cast<int>(row.size());
    double lo = row[0], hi = row[0];
    for (double v : row) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 0.0) {
        out.runs = 1; // flat row: one (degenerate) region
        return out;
    }
    const double threshold = lo + 0.5 * (hi - lo);
    std::vector<bool> mask(dim);
    for (int i = 0; i < dim; ++i) mask[i] = row[i] > threshold;
    int runs = 0;
    for (int i = 0; i < dim; ++i)
        if (mask[i] && !mask[(i + dim - 1) % dim]) ++runs;
    out.runs = runs == 0 ? 1 : runs; // all-above mask wraps into one run
    return out;
}

inline std::vector<LocalizationMetrics> localization_metrics(const Codebook& codebook) {
    std::vector<LocalizationMetrics> out;
    out.reserve(codebook.num_codes());
    for (const auto& row : codebook.recon) out.push_back(localization_of_row(row));
    return out;
}

// ---------------------------------------------------------------------------
// waveform matching

struct WaveformMatch {
    int reference = -1;   // index of the best-matching reference
    double correlation = 0.0;
    int shift = 0;        // cyclic shift of the best match
};

// max over cyclic shifts of the zero-mean normalized cross-correlation
inline double best_cyclic_correlation(const Vec& row, const Vec& ref, int* shift_out) {
    const int dim = static_cast<int>(row.size());
    double row_mean = 0.0, ref_mean = 0.0;
    for (int i = 0; i < dim; ++i) {
        row_mean += row[i];
        ref_mean += ref[i];
    }
    row_mean /= dim;
    ref_mean /= dim;
    double row_norm = 0.0, ref_norm = 0.0;
    for (int i = 0; i < dim; ++i) {
        row_norm += (row[i] - row_mean) * (row[i] - row_mean);
        ref_norm += (ref[i] - ref_mean) * (ref[i] - ref_mean);
    }
    const double denom = std::sqrt(row_norm * ref_norm);
    if (denom <= 0.0) {
        if (shift_out) *shift_out = 0;
        return 0.0;
    }
    double best = -2.0;
    int best_shift = 0;
    for (int s = 0; s < dim; ++s) {
        double acc = 0.0;
        for (int i = 0; i < dim; ++i)
            acc += (row[i] - row_mean) * (ref[(i + s) % dim] - ref_mean);
        if (acc / denom > best) {
            best = acc / denom;
            best_shift = s;
        }
    }
    if (shift_out) *shift_out = best_shift;
    return best;
}

inline std::vector<WaveformMatch> match_waveforms(const Codebook& codebook,
                                                  const std::vector<Vec>& references) {
    std::vector<WaveformMatch> out(codebook.num_codes());
    for (int y = 0; y < codebook.num_codes(); ++y) {
        for (std::size_t r = 0; r < references.size(); ++r) {
            if (static_cast<int>(references[r].size()) != codebook.dim)
                throw ConfigError("match_waveforms: reference dimension mismatch");
            int shift = 0;
            const double corr = best_cyclic_correlation(codebook.recon[y],
                                                        references[r], &shift);
            if (corr > out[y].correlation || out[y].reference < 0) {
                out[y].reference = static_cast<int>(r);
                out[y].correlation = corr;
                out[y].shift = shift;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// topographic order

inline double cosine_similarity(const Vec& a, const Vec& b) {
    const double denom = std::sqrt(sqnorm(a) * sqnorm(b));
    return denom > 0.0 ? dot(a, b) / denom : 0.0;
}

// Mean cosine similarity of reconstruction rows over adjacent code pairs
// minus the mean over seeded random non-adjacent pairs. Positive scores mean
// neighbours in the array look alike.
inline double topographic_order(const Codebook& codebook, const Topology& topology,
                                std::uint64_t seed = 1, int null_pairs = 1000) {
    const int m = topology.size();
    double adjacent = 0.0;
    int adjacent_count = 0;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            if (topology.chebyshev(a, b) == 1) {
                adjacent += cosine_similarity(codebook.recon[a], codebook.recon[b]);
                ++adjacent_count;
            }
    if (adjacent_count == 0) return 0.0;
    adjacent /= adjacent_count;

    Rng rng(seed);
    double distant = 0.0;
    int distant_count = 0;
    while (distant_count < null_pairs) {
        const int a = rng.uniform_int(m), b = rng.uniform_int(m);
        if (a == b || topology.chebyshev(a, b) <= 1) continue;
        distant += cosine_similarity(codebook.recon[a], codebook.recon[b]);
        ++distant_count;
    }
    return adjacent - distant / null_pairs;
}

// ---------------------------------------------------------------------------
// image coding

struct ImageCoding {
    ImageData activity;        // per-code peak posterior on the code grid
    ImageData reconstruction;  // overlap-averaged decoded image
    double sparsity = 0.0;     // mean fraction of codes above half-max per window
};

inline ImageCoding encode_image(const Svq& model, const ImageData& img, int window,
                                int stride) {
    if (window > img.width || window > img.height)
        throw ConfigError("encode_image: window larger than image");
    if (stride < 1) throw ConfigError("encode_image: stride must be positive");
    if (window * window != model.dim())
        throw ConfigError("encode_image: window does not match model dimension");
    const int m = model.num_codes();
    const auto members = model.topology.neighbourhoods();

    ImageCoding out;
    out.activity = ImageData(model.topology.cols(), model.topology.rows());
    out.reconstruction = ImageData(img.width, img.height);
    std::vector<double> coverage(img.pixels.size(), 0.0);
    PosteriorWorkspace ws;
    Vec patch(window * window);
    long positions = 0;
    double sparsity_acc = 0.0;

    for (int r0 = 0; r0 + window <= img.height; r0 += stride) {
        for (int c0 = 0; c0 + window <= img.width; c0 += stride) {
            for (int dr = 0; dr < window; ++dr)
                for (int dc = 0; dc < window; ++dc)
                    patch[dr * window + dc] = img.at(r0 + dr, c0 + dc);
            ws.compute(model.response, members, model.leakage, patch);
            double peak = 0.0;
            for (int y = 0; y < m; ++y) {
                out.activity.pixels[y] = std::max(out.activity.pixels[y], ws.leaked[y]);
                peak = std::max(peak, ws.leaked[y]);
            }
            int above = 0;
            for (int y = 0; y < m; ++y)
                if (ws.leaked[y] > 0.5 * peak) ++above;
            sparsity_acc += static_cast<double>(above) / m;
            ++positions;

            const Vec recon = mean_reconstruction(model.codebook, ws.leaked);
            for (int dr = 0; dr < window; ++dr)
                for (int dc = 0; dc < window; ++dc) {
                    const std::size_t idx =
                        static_cast<std::size_t>(r0 + dr) * img.width + (c0 + dc);
                    out.reconstruction.pixels[idx] += recon[dr * window + dc];
                    coverage[idx] += 1.0;
                }
        }
    }
    for (std::size_t i = 0; i < coverage.size(); ++i)
        if (coverage[i] > 0.0) out.reconstruction.pixels[i] /= coverage[i];
    out.sparsity = positions > 0 ? sparsity_acc / positions : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// dominance map

struct DominanceResult {
    std::vector<int> label;  // +1: image a dominates the code, -1: image b
    double contiguity = 0.0; // fraction of adjacent code pairs sharing a label
    ImageData map;           // binary rendering on the code grid
};

// Mean posterior per code over seeded patch sets from each (preprocessed)
// image; the sign of the difference labels the code. The posterior rather
// than the raw response: raw sigmoid responses carry a global per-image gain
// (every code fires harder on the finer-grained texture), and the
// patch-competitive posterior cancels it, leaving relative specialisation.
inline DominanceResult dominance_map(const Svq& model, const ImageData& img_a,
                                     const ImageData& img_b, int window,
                                     int patches_per_image = 2000,
                                     std::uint64_t seed = 1) {
    const int m = model.num_codes();
    Vec mean_a(m, 0.0), mean_b(m, 0.0);
    Rng rng_a(seed), rng_b(seed + 1);
    for (int t = 0; t < patches_per_image; ++t) {
        const Vec qa = model.posterior(sample_patch(img_a, window, rng_a));
        const Vec qb = model.posterior(sample_patch(img_b, window, rng_b));
        for (int y = 0; y < m; ++y) {
            mean_a[y] += qa[y];
            mean_b[y] += qb[y];
        }
    }

    DominanceResult out;
    out.label.resize(m);
    out.map = ImageData(model.topology.cols(), model.topology.rows());
    for (int y = 0; y < m; ++y) {
        out.label[y] = mean_a[y] >= mean_b[y] ? 1 : -1;
        out.map.pixels[y] = out.label[y] > 0 ? 1.0 : 0.0;
    }

    int shared = 0, pairs = 0;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            if (model.topology.chebyshev(a, b) == 1) {
                ++pairs;
                if (out.label[a] == out.label[b]) ++shared;
            }
    out.contiguity = pairs > 0 ? static_cast<double>(shared) / pairs : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// response streams and period detection

// w(y).x + b(y) for one code over a sequence of inputs
inline std::vector<double> response_stream(const ResponseModel& model, int code,
                                           const std::vector<Vec>& inputs) {
    std::vector<double> out;
    out.reserve(inputs.size());
    for (const auto& x : inputs)
        out.push_back(dot(model.weights[code], x) + model.biases[code]);
    return out;
}

// lag of the autocorrelation peak within [min_lag, max_lag]
inline double dominant_period(const std::vector<double>& series, int min_lag, int max_lag) {
    const int len = static_cast<int>(series.size());
    if (max_lag >= len || min_lag < 1 || min_lag > max_lag)
        throw ConfigError("dominant_period: bad lag range");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= len;
    double best = -std::numeric_limits<double>::infinity();
    int best_lag = min_lag;
    for (int lag = min_lag; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (int t = 0; t + lag < len; ++t)
            acc += (series[t] - mean) * (series[t + lag] - mean);
        acc /= (len - lag);
        if (acc > best) {
            best = acc;
            best_lag = lag;
        }
    }
    return best_lag;
}

// ---------------------------------------------------------------------------
// stability sweep over (M, n) cells on the torus

struct StabilityCell {
    int m = 0;
    int n = 0;
    int joint = 0;
    int factorial = 0;
    int mixed = 0;
    int failed = 0;
    double factorial_fraction = 0.0;
};

struct StabilityTable {
    std::vector<StabilityCell> cells;

    void write_csv(const std::string& path) const {
        CsvWriter csv(path);
        csv.row({"M", "n", "seeds", "joint", "factorial", "mixed", "failed",
                 "factorial_fraction"});
        for (const auto& c : cells)
            csv.row({fmt(c.m), fmt(c.n), fmt(c.joint + c.factorial + c.mixed + c.failed),
                     fmt(c.joint), fmt(c.factorial), fmt(c.mixed), fmt(c.failed),
                     fmt(c.factorial_fraction)});
    }
};

// Train one torus model per (M, n, seed) cell and classify its encoding.
// Diverged runs count as failed cells rather than aborting the sweep. Runs
// are independent with per-run seeds, so results do not depend on the thread
// count.
inline StabilityTable stability_sweep(const std::vector<int>& m_values,
                                      const std::vector<int>& n_values, int seeds,
                                      const TrainConfig& base, int threads = 1) {
    struct Job {
        int cell, m, n, seed;
    };
    std::vector<Job> jobs;
    StabilityTable table;
    for (int m : m_values) {
        for (int n : n_values) {
            const int cell = static_cast<int>(table.cells.size());
            table.cells.push_back({m, n, 0, 0, 0, 0, 0.0});
            for (int s = 0; s < seeds; ++s) jobs.push_back({cell, m, n, s});
        }
    }

    enum class Outcome { Joint, Factorial, Mixed, Failed };
    std::vector<Outcome> outcomes(jobs.size());
    auto run_job = [&](const Job& job) {
        TrainConfig cfg = base;
        cfg.n = job.n;
        cfg.seed = base.seed + 1000ull * job.seed;
        Rng init_rng(cfg.seed ^ 0x5157ull);
        auto [cb, resp] = init_model(4, job.m, cfg.init_scale, init_rng);
        Svq model{std::move(cb), std::move(resp), Topology::ring(job.m, job.m),
                  LeakageKernel::identity(job.m)};
        DataSource source = [](Rng& rng) { return sample_torus(rng); };
        try {
            train(model, cfg, source);
        } catch (const DivergenceError&) {
            return Outcome::Failed;
        }
        switch (classify_encoding(model).label) {
            case EncodingResult::Label::Joint: return Outcome::Joint;
            case EncodingResult::Label::Factorial: return Outcome::Factorial;
            default: return Outcome::Mixed;
        }
    };

    threads = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = run_job(jobs[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++)
                    outcomes[i] = run_job(jobs[i]);
            });
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto& cell = table.cells[jobs[i].cell];
        switch (outcomes[i]) {
            case Outcome::Joint: ++cell.joint; break;
            case Outcome::Factorial: ++cell.factorial; break;
            case Outcome::Mixed: ++cell.mixed; break;
            case Outcome::Failed: ++cell.failed; break;
        }
    }
    for (auto& cell : table.cells) {
        const int done = cell.joint + cell.factorial + cell.mixed;
        cell.factorial_fraction =
            done > 0 ? static_cast<double>(cell.factorial) / done : 0.0;
    }
    return table;
}

} // namespace svq

#endif
