#ifndef SVQ_MODEL_HPP
#define SVQ_MODEL_HPP

#include <cmath>
#include <string>
#include <vector>

#include "svq/errors.hpp"
#include "svq/leakage.hpp"
#include "svq/rng.hpp"
#include "svq/topology.hpp"

namespace svq {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sqnorm(const Vec& a) { return dot(a, a); }

inline double sqdist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Reconstruction vectors x'(y), one row per code.
struct Codebook {
    int dim = 0;
    std::vector<Vec> recon;   // recon[y] has length dim

    int num_codes() const { return static_cast<int>(recon.size()); }
};

// Sigmoid response parameters: weight row w(y) and bias b(y) per code.
struct ResponseModel {
    std::vector<Vec> weights; // weights[y] has length dim
    Vec biases;

    int num_codes() const { return static_cast<int>(biases.size()); }
    int dim() const { return weights.empty() ? 0 : static_cast<int>(weights[0].size()); }
};

// numerically stable sigmoid
inline double sigmoid(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

// response value Q(x|y)
inline double response(const ResponseModel& model, int y, const Vec& x) {
    if (y < 0 || y >= model.num_codes())
        throw ConfigError("response: code index out of range");
    if (static_cast<int>(x.size()) != model.dim())
        throw ConfigError("response: input dimension mismatch");
    return sigmoid(dot(model.weights[y], x) + model.biases[y]);
}

inline Vec all_responses(const ResponseModel& model, const Vec& x) {
    Vec q(model.num_codes());
    for (int y = 0; y < model.num_codes(); ++y)
        q[y] = sigmoid(dot(model.weights[y], x) + model.biases[y]);
    return q;
}

// posterior with no neighbourhood restriction: Q(x|y) / sum Q
inline Vec posterior_infinite(const ResponseModel& model, const Vec& x) {
    Vec q = all_responses(model, x);
    double total = 0.0;
    for (double v : q) total += v;
    if (total <= 0.0)
        throw DegenerateResponseError("posterior_infinite: every response underflowed to zero");
    for (double& v : q) v /= total;
    return q;
}

// Per-sample forward pass with a finite neighbourhood. Keeps the per-context
// conditional table P and its marginal p around because the gradients reuse
// them.
struct PosteriorWorkspace {
    Vec q;                             // Q(x|y)
    std::vector<Vec> context_probs;    // P[y'] aligned with members[y']
    Vec p;                             // p_y = sum over contexts containing y of P(y|x;y')
    Vec posterior;                     // pre-leakage: p / M
    Vec leaked;                        // post-leakage posterior

    void compute(const ResponseModel& model,
                 const std::vector<std::vector<int>>& members,
                 const LeakageKernel& kernel, const Vec& x) {
        const int m = model.num_codes();
        q = all_responses(model, x);
        context_probs.resize(m);
        p.assign(m, 0.0);
        for (int ctx = 0; ctx < m; ++ctx) {
            const auto& mem = members[ctx];
            double total = 0.0;
            for (int y : mem) total += q[y];
            if (total <= 0.0)
                throw DegenerateResponseError(
                    "posterior_finite: every response in neighbourhood of code " +
                    std::to_string(ctx + 1) + " underflowed to zero");
            auto& pc = context_probs[ctx];
            pc.resize(mem.size());
            for (std::size_t i = 0; i < mem.size(); ++i) {
                pc[i] = q[mem[i]] / total;
                p[mem[i]] += pc[i];
            }
        }
        posterior.resize(m);
        for (int y = 0; y < m; ++y) posterior[y] = p[y] / m;
        if (kernel.is_identity()) {
            leaked = posterior;
        } else {
            kernel.apply(posterior, leaked);
        }
    }
};

// posterior with lateral inhibition restricted to N(y'), averaged over all
// M contexts (no leakage applied here)
inline Vec posterior_finite(const ResponseModel& model, const Topology& topology,
                            const Vec& x) {
    PosteriorWorkspace ws;
    ws.compute(model, topology.neighbourhoods(),
               LeakageKernel::identity(model.num_codes()), x);
    return ws.posterior;
}

// n independent categorical draws from the posterior
inline std::vector<int> encode(const Vec& posterior, int n, Rng& rng) {
    if (n < 1) throw ConfigError("encode: n must be at least 1");
    std::vector<int> codes(n);
    for (int i = 0; i < n; ++i) codes[i] = sample_categorical(posterior, rng);
    return codes;
}

// mean of the selected reconstruction rows
inline Vec reconstruct(const Codebook& codebook, const std::vector<int>& codes) {
    Vec out(codebook.dim, 0.0);
    for (int y : codes) {
        if (y < 0 || y >= codebook.num_codes())
            throw ConfigError("reconstruct: code index out of range");
        for (int i = 0; i < codebook.dim; ++i) out[i] += codebook.recon[y][i];
    }
    const double inv = 1.0 / static_cast<double>(codes.size());
    for (double& v : out) v *= inv;
    return out;
}

// posterior-weighted superposition of reconstruction rows
inline Vec mean_reconstruction(const Codebook& codebook, const Vec& posterior) {
    if (static_cast<int>(posterior.size()) != codebook.num_codes())
        throw ConfigError("mean_reconstruction: posterior size mismatch");
    Vec out(codebook.dim, 0.0);
    for (int y = 0; y < codebook.num_codes(); ++y) {
        const double w = posterior[y];
        if (w == 0.0) continue;
        for (int i = 0; i < codebook.dim; ++i) out[i] += w * codebook.recon[y][i];
    }
    return out;
}

// Everything a trained encoder carries, bundled for convenience.
struct Svq {
    Codebook codebook;
    ResponseModel response;
    Topology topology;
    LeakageKernel leakage;

    int dim() const { return codebook.dim; }
    int num_codes() const { return codebook.num_codes(); }

    // leakage-smoothed finite-neighbourhood posterior (the trained forward model)
    Vec posterior(const Vec& x) const {
        PosteriorWorkspace ws;
        ws.compute(response, topology.neighbourhoods(), leakage, x);
        return ws.leaked;
    }

    // hot-loop variant with the neighbour table precomputed once by the caller
    Vec posterior(const Vec& x, const std::vector<std::vector<int>>& members) const {
        PosteriorWorkspace ws;
        ws.compute(response, members, leakage, x);
        return ws.leaked;
    }
};

} // namespace svq

#endif
