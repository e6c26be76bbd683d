#ifndef SVQ_DATAGEN_HPP
#define SVQ_DATAGEN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "svq/objective.hpp"
#include "svq/rng.hpp"

namespace svq {

// point uniformly distributed on the unit circle
inline Vec sample_circle(Rng& rng) {
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    return {std::cos(theta), std::sin(theta)};
}

// point uniformly distributed on a 2-torus: two independent unit circles
inline Vec sample_torus(Rng& rng) {
    const double t1 = rng.uniform(0.0, 2.0 * M_PI);
    const double t2 = rng.uniform(0.0, 2.0 * M_PI);
    return {std::cos(t1), std::sin(t1), std::cos(t2), std::sin(t2)};
}

// circular distance between pixel indices
inline double ring_distance(int a, int b, int dim) {
    int d = std::abs(a - b) % dim;
    return std::min(d, dim - d);
}

// add a unit-height Gaussian bump with circular wraparound
inline void add_bump(Vec& x, int center, double sigma) {
    const int dim = static_cast<int>(x.size());
    for (int i = 0; i < dim; ++i) {
        const double d = ring_distance(i, center, dim);
        x[i] += std::exp(-d * d / (2.0 * sigma * sigma));
    }
}

// Sum of unit-height sigma=2 Gaussian bumps at independent uniform integer
// positions, plus per-pixel uniform [0, 0.5] noise. noise=false is a test
// hook for the closed-form bump shape.
inline Vec sample_multi_targets(int dim, int num_targets, Rng& rng, bool noise = true) {
    if (dim < 8) throw ConfigError("sample_multi_targets: dim must be at least 8");
    Vec x(dim, 0.0);
    for (int t = 0; t < num_targets; ++t) add_bump(x, rng.uniform_int(dim), 2.0);
    if (noise)
        for (auto& v : x) v += rng.uniform(0.0, 0.5);
    return x;
}

// Two sigma=1.5 bumps: first centre uniform, separation a uniform integer in
// [sep_min, sep_max], circular wraparound.
inline Vec sample_correlated_pair(int dim, int sep_min, int sep_max, Rng& rng,
                                  int* center_out = nullptr, int* sep_out = nullptr) {
    if (sep_min < 1 || sep_min > sep_max || sep_max >= dim / 2)
        throw ConfigError("sample_correlated_pair: need 0 < sep_min <= sep_max < dim/2");
    Vec x(dim, 0.0);
    const int c1 = rng.uniform_int(dim);
    const int sep = sep_min + rng.uniform_int(sep_max - sep_min + 1);
    add_bump(x, c1, 1.5);
    add_bump(x, (c1 + sep) % dim, 1.5);
    if (center_out) *center_out = c1;
    if (sep_out) *sep_out = sep;
    return x;
}

struct WaveformParams {
    double amp1 = 1.0;   // sinusoid, two periods across the window
    double amp2 = 0.5;   // square wave, period dim/4
    double noise_std = 0.05;
};

// the two reference waveforms at zero phase
inline Vec waveform_sine(int dim, double amp = 1.0) {
    Vec w(dim);
    for (int t = 0; t < dim; ++t) w[t] = amp * std::sin(2.0 * M_PI * 2.0 * t / dim);
    return w;
}

inline Vec waveform_square(int dim, double amp = 0.5) {
    Vec w(dim);
    const int period = dim / 4;
    for (int t = 0; t < dim; ++t) w[t] = (t % period) < period / 2 ? amp : -amp;
    return w;
}

// Superposition of the two waveforms at independent uniform cyclic shifts,
// plus Gaussian noise.
inline Vec sample_waveforms(int dim, Rng& rng, const WaveformParams& params = {}) {
    if (dim < 16) throw ConfigError("sample_waveforms: dim must be at least 16");
    const Vec w1 = waveform_sine(dim, params.amp1);
    const Vec w2 = waveform_square(dim, params.amp2);
    const int phi1 = rng.uniform_int(dim);
    const int phi2 = rng.uniform_int(dim);
    Vec x(dim);
    for (int t = 0; t < dim; ++t) {
        x[t] = w1[(t + phi1) % dim] + w2[(t + phi2) % dim];
        if (params.noise_std > 0.0) x[t] += params.noise_std * rng.gaussian();
    }
    return x;
}

// Synthetic stand-in for a maternal+foetal ECG: two periodic spike trains
// with incommensurate periods (ratio 1.8) mixed into `channels` channels by
// a fixed random matrix, plus Gaussian noise. Call step() once per time
// sample.
class EcgSynth {
public:
    EcgSynth(int channels, std::uint64_t mixing_seed, double maternal_period = 40.0,
             double foetal_amp = 0.25, double noise_std = 0.1)
        : channels_(channels),
          maternal_period_(maternal_period),
          foetal_period_(maternal_period / 1.8),
          foetal_amp_(foetal_amp),
          noise_std_(noise_std) {
        if (channels < 2) throw ConfigError("EcgSynth: need at least 2 channels");
        Rng rng(mixing_seed);
        mixing_.assign(channels, Vec(2));
        for (auto& row : mixing_)
            for (auto& v : row) v = rng.uniform(-1.0, 1.0);
    }

    double maternal_period() const { return maternal_period_; }
    double foetal_period() const { return foetal_period_; }
    const std::vector<Vec>& mixing() const { return mixing_; }

    // latent spike trains at integer time t (1 on the sample where a new
    // period boundary is crossed, else 0)
    static double spike(long t, double period) {
        return std::floor(t / period) > std::floor((t - 1) / period) ? 1.0 : 0.0;
    }

    Vec latents(long t) const {
        return {spike(t, maternal_period_), foetal_amp_ * spike(t, foetal_period_)};
    }

    Vec step(Rng& rng) {
        const Vec s = latents(t_++);
        Vec x(channels_);
        for (int c = 0; c < channels_; ++c) {
            x[c] = mixing_[c][0] * s[0] + mixing_[c][1] * s[1];
            if (noise_std_ > 0.0) x[c] += noise_std_ * rng.gaussian();
        }
        return x;
    }

private:
    int channels_;
    double maternal_period_, foetal_period_, foetal_amp_, noise_std_;
    std::vector<Vec> mixing_;
    long t_ = 1;
};

// Affine map that takes a batch to zero mean and identity covariance; keeps
// enough to apply the same map to held-out data.
struct WhitenTransform {
    Vec mean;
    std::vector<Vec> matrix; // symmetric inverse square root of the covariance

    Vec apply(const Vec& x) const {
        const int dim = static_cast<int>(mean.size());
        Vec out(dim, 0.0);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) out[i] += matrix[i][j] * (x[j] - mean[j]);
        return out;
    }
};

inline WhitenTransform fit_whitener(const std::vector<Vec>& samples) {
    if (samples.empty()) throw ConfigError("fit_whitener: empty batch");
    const int dim = static_cast<int>(samples[0].size());
    const int count = static_cast<int>(samples.size());
    WhitenTransform t;
    t.mean.assign(dim, 0.0);
    for (const auto& x : samples)
        for (int i = 0; i < dim; ++i) t.mean[i] += x[i];
    for (auto& v : t.mean) v /= count;

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& x : samples) {
        Eigen::VectorXd d(dim);
        for (int i = 0; i < dim; ++i) d[i] = x[i] - t.mean[i];
        cov += d * d.transpose();
    }
    cov /= count;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const auto& vals = eig.eigenvalues();
    const double floor = vals[dim - 1] * 1e-10;
    int null_dirs = 0;
    for (int i = 0; i < dim; ++i)
        if (vals[i] <= floor) ++null_dirs;
    if (null_dirs > 0 || vals[dim - 1] <= 0.0)
        throw ConfigError("fit_whitener: covariance is rank deficient (" +
                          std::to_string(null_dirs) + " null directions)");

    Eigen::MatrixXd inv_sqrt = eig.eigenvectors() *
                               vals.cwiseInverse().cwiseSqrt().asDiagonal() *
                               eig.eigenvectors().transpose();
    t.matrix.assign(dim, Vec(dim));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) t.matrix[i][j] = inv_sqrt(i, j);
    return t;
}

inline std::pair<std::vector<Vec>, WhitenTransform> whiten(const std::vector<Vec>& samples) {
    WhitenTransform t = fit_whitener(samples);
    std::vector<Vec> out;
    out.reserve(samples.size());
    for (const auto& x : samples) out.push_back(t.apply(x));
    return {std::move(out), std::move(t)};
}

} // namespace svq

#endif
