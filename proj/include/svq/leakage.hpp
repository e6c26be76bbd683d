#ifndef SVQ_LEAKAGE_HPP
#define SVQ_LEAKAGE_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "svq/errors.hpp"
#include "svq/topology.hpp"

namespace svq {

// Probability leakage table. Column y' holds Pr(y|y') for targets y inside
// the leakage neighbourhood of y'; each column sums to 1.
class LeakageKernel {
public:
    // identity kernel (no leakage)
    static LeakageKernel identity(int num_codes) {
        LeakageKernel k;
        k.radius_ = 0;
        k.sigma_ = 1.0;
        k.cols_.resize(num_codes);
        for (int y = 0; y < num_codes; ++y) k.cols_[y] = {{y, 1.0}};
        return k;
    }

    // Deterministic discretization of a Gaussian leak: Pr(y|y') proportional
    // to exp(-||pos(y)-pos(y')||^2 / (2 sigma^2)) inside the Chebyshev ball
    // of the given radius, renormalized per source column.
    static LeakageKernel gaussian(const Topology& topology, int radius, double sigma) {
        if (sigma <= 0.0) throw ConfigError("LeakageKernel: sigma must be positive");
        if (radius < 0) throw ConfigError("LeakageKernel: negative radius");
        LeakageKernel k;
        const int max_extent = std::max(topology.rows(), topology.cols()) - 1;
        if (radius > max_extent) {
            k.clipped_ = true;
            radius = max_extent;
        }
        k.radius_ = radius;
        k.sigma_ = sigma;
        k.cols_.resize(topology.size());
        for (int src = 0; src < topology.size(); ++src) {
            double total = 0.0;
            auto& col = k.cols_[src];
            for (int tgt : topology.ball(src, radius)) {
                const double w = std::exp(-topology.dist2(tgt, src) / (2.0 * sigma * sigma));
                col.push_back({tgt, w});
                total += w;
            }
            for (auto& [tgt, w] : col) w /= total;
        }
        return k;
    }

    int num_codes() const { return static_cast<int>(cols_.size()); }
    int radius() const { return radius_; }
    double sigma() const { return sigma_; }
    bool clipped() const { return clipped_; }
    bool is_identity() const { return radius_ == 0; }

    const std::vector<std::pair<int, double>>& column(int src) const { return cols_[src]; }

    // out[y] = sum_{y'} Pr(y|y') in[y']
    void apply(const std::vector<double>& in, std::vector<double>& out) const {
        out.assign(in.size(), 0.0);
        for (int src = 0; src < num_codes(); ++src) {
            const double v = in[src];
            if (v == 0.0) continue;
            for (const auto& [tgt, w] : cols_[src]) out[tgt] += w * v;
        }
    }

    // adjoint: out[y'] = sum_y Pr(y|y') in[y], the leak-weighted average of
    // downstream values seen from each source
    void apply_adjoint(const std::vector<double>& in, std::vector<double>& out) const {
        out.assign(in.size(), 0.0);
        for (int src = 0; src < num_codes(); ++src) {
            double acc = 0.0;
            for (const auto& [tgt, w] : cols_[src]) acc += w * in[tgt];
            out[src] = acc;
        }
    }

private:
    int radius_ = 0;
    double sigma_ = 1.0;
    bool clipped_ = false;
    std::vector<std::vector<std::pair<int, double>>> cols_;
};

inline std::vector<double> apply_leakage(const LeakageKernel& kernel,
                                         const std::vector<double>& posterior) {
    if (kernel.num_codes() != static_cast<int>(posterior.size()))
        throw ConfigError("apply_leakage: kernel and posterior sizes differ");
    std::vector<double> out;
    kernel.apply(posterior, out);
    return out;
}

} // namespace svq

#endif
