#ifndef SVQ_IMAGE_HPP
#define SVQ_IMAGE_HPP

#include <cmath>
#include <vector>

#include "svq/model.hpp"
#include "svq/rng.hpp"

namespace svq {

// grayscale image, row-major, values in [0,1] unless locally normalized
struct ImageData {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    ImageData() = default;
    ImageData(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw ConfigError("ImageData: dimensions must be positive");
    }

    double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
    // edge-clamped access
    double at_clamped(int row, int col) const {
        row = row < 0 ? 0 : (row >= height ? height - 1 : row);
        col = col < 0 ? 0 : (col >= width ? width - 1 : col);
        return at(row, col);
    }
};

// Convolve with a truncated Gaussian (optionally anisotropic and rotated),
// edge-clamped. The degenerate limit of a constant kernel maps any input to
// a flat image, which the tests use as a sanity hook.
inline ImageData filter_gaussian(const ImageData& img, double sigma_major,
                                 double sigma_minor, double angle) {
    const int half = static_cast<int>(std::ceil(3.0 * std::max(sigma_major, sigma_minor)));
    const double ca = std::cos(angle), sa = std::sin(angle);
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1) * (2 * half + 1));
    double total = 0.0;
    for (int dr = -half; dr <= half; ++dr) {
        for (int dc = -half; dc <= half; ++dc) {
            const double u = ca * dc + sa * dr;
            const double v = -sa * dc + ca * dr;
            const double w = std::exp(-0.5 * (u * u / (sigma_major * sigma_major) +
                                              v * v / (sigma_minor * sigma_minor)));
            kernel[(dr + half) * (2 * half + 1) + (dc + half)] = w;
            total += w;
        }
    }
    for (auto& w : kernel) w /= total;

    ImageData out(img.width, img.height);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            double acc = 0.0;
            for (int dr = -half; dr <= half; ++dr)
                for (int dc = -half; dc <= half; ++dc)
                    acc += kernel[(dr + half) * (2 * half + 1) + (dc + half)] *
                           img.at_clamped(r + dr, c + dc);
            out.at(r, c) = acc;
        }
    }
    return out;
}

// Filtered Gaussian noise with the empirical autocorrelation falling to 1/e
// within correlation_length pixels, rescaled to [0,1]. orientation_bands
// switches to an anisotropic filter whose orientation varies smoothly across
// the image, giving locally oriented structure.
inline ImageData make_texture(int width, int height, double correlation_length,
                              bool orientation_bands, Rng& rng) {
    if (correlation_length < 2.0 || correlation_length > 20.0)
        throw ConfigError("make_texture: correlation_length must be in [2, 20]");
    ImageData noise(width, height);
    for (auto& v : noise.pixels) v = rng.gaussian();

    const double sigma = 0.48 * correlation_length;
    ImageData out(width, height);
    if (!orientation_bands) {
        out = filter_gaussian(noise, sigma, sigma, 0.0);
    } else {
        // smooth orientation field from a second noise image
        ImageData field(width, height);
        for (auto& v : field.pixels) v = rng.gaussian();
        field = filter_gaussian(field, 4.0 * sigma, 4.0 * sigma, 0.0);
        double fmin = field.pixels[0], fmax = field.pixels[0];
        for (double v : field.pixels) {
            fmin = std::min(fmin, v);
            fmax = std::max(fmax, v);
        }
        const double span = fmax > fmin ? fmax - fmin : 1.0;
        // per-pixel oriented filtering; images stay small so brute force is fine
        const double s_major = 2.0 * sigma, s_minor = 0.5 * sigma;
        const int half = static_cast<int>(std::ceil(3.0 * s_major));
        for (int r = 0; r < height; ++r) {
            for (int c = 0; c < width; ++c) {
                const double angle = M_PI * (field.at(r, c) - fmin) / span;
                const double ca = std::cos(angle), sa = std::sin(angle);
                double acc = 0.0, wsum = 0.0;
                for (int dr = -half; dr <= half; ++dr) {
                    for (int dc = -half; dc <= half; ++dc) {
                        const double u = ca * dc + sa * dr;
                        const double v = -sa * dc + ca * dr;
                        const double w = std::exp(-0.5 * (u * u / (s_major * s_major) +
                                                          v * v / (s_minor * s_minor)));
                        acc += w * noise.at_clamped(r + dr, c + dc);
                        wsum += w;
                    }
                }
                out.at(r, c) = acc / wsum;
            }
        }
    }

    double lo = out.pixels[0], hi = out.pixels[0];
    for (double v : out.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (auto& v : out.pixels) v = (v - lo) / span;
    return out;
}

// chessboard interleave: a on even-parity pixels, b on odd
inline ImageData interdigitate(const ImageData& a, const ImageData& b) {
    if (a.width != b.width || a.height != b.height)
        throw ConfigError("interdigitate: image dimensions differ");
    ImageData out(a.width, a.height);
    for (int r = 0; r < a.height; ++r)
        for (int c = 0; c < a.width; ++c)
            out.at(r, c) = ((r + c) % 2 == 0) ? a.at(r, c) : b.at(r, c);
    return out;
}

// subtract the local mean and divide by the local standard deviation over a
// window x window patch, edge-clamped
inline ImageData local_normalize(const ImageData& img, int window, double epsilon) {
    if (window < 3 || window % 2 == 0)
        throw ConfigError("local_normalize: window must be odd and at least 3");
    const int half = window / 2;
    ImageData out(img.width, img.height);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            double sum = 0.0, sum2 = 0.0;
            for (int dr = -half; dr <= half; ++dr) {
                for (int dc = -half; dc <= half; ++dc) {
                    const double v = img.at_clamped(r + dr, c + dc);
                    sum += v;
                    sum2 += v * v;
                }
            }
            const double count = static_cast<double>(window) * window;
            const double mean = sum / count;
            const double var = std::max(sum2 / count - mean * mean, 0.0);
            out.at(r, c) = (img.at(r, c) - mean) / std::sqrt(var + epsilon);
        }
    }
    return out;
}

// row-major flattening of a uniformly positioned square patch
inline Vec sample_patch(const ImageData& img, int window, Rng& rng) {
    if (window > img.width || window > img.height)
        throw ConfigError("sample_patch: window larger than image");
    const int r0 = rng.uniform_int(img.height - window + 1);
    const int c0 = rng.uniform_int(img.width - window + 1);
    Vec out(static_cast<std::size_t>(window) * window);
    for (int dr = 0; dr < window; ++dr)
        for (int dc = 0; dc < window; ++dc)
            out[dr * window + dc] = img.at(r0 + dr, c0 + dc);
    return out;
}

} // namespace svq

#endif
