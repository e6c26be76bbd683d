#ifndef SVQ_OBJECTIVE_HPP
#define SVQ_OBJECTIVE_HPP

#include <cmath>
#include <vector>

#include "svq/model.hpp"

namespace svq {

// Training batch: an empirical stand-in for the input PDF. Empty weights
// mean uniform.
struct Batch {
    std::vector<Vec> samples;
    Vec weights;

    int size() const { return static_cast<int>(samples.size()); }
    double weight(int i) const { return weights.empty() ? 1.0 : weights[i]; }
    double total_weight() const {
        if (weights.empty()) return static_cast<double>(samples.size());
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

struct ObjectiveValue {
    double d1 = 0.0;
    double d2 = 0.0;
    double total() const { return d1 + d2; }
};

struct Gradients {
    std::vector<Vec> recon;
    std::vector<Vec> weights;
    Vec biases;

    void init(int num_codes, int dim) {
        recon.assign(num_codes, Vec(dim, 0.0));
        weights.assign(num_codes, Vec(dim, 0.0));
        biases.assign(num_codes, 0.0);
    }
    void scale(double s) {
        for (auto& r : recon)
            for (double& v : r) v *= s;
        for (auto& r : weights)
            for (double& v : r) v *= s;
        for (double& v : biases) v *= s;
    }
};

// Everything computed for one sample: the posterior workspace plus the
// distortion pieces. d[y] = x - x'(y), e[y] = ||d[y]||^2, dbar = x - mean
// reconstruction (equivalently sum_y leaked[y] d[y]).
struct SampleEval {
    PosteriorWorkspace ws;
    std::vector<Vec> d;
    Vec e;
    Vec dbar;
    double d1c = 0.0;
    double d2c = 0.0;

    void compute(const Codebook& codebook, const ResponseModel& model,
                 const std::vector<std::vector<int>>& members,
                 const LeakageKernel& kernel, int n, const Vec& x) {
        const int m = codebook.num_codes();
        const int dim = codebook.dim;
        ws.compute(model, members, kernel, x);
        d.assign(m, Vec(dim));
        e.assign(m, 0.0);
        dbar.assign(dim, 0.0);
        d1c = 0.0;
        for (int y = 0; y < m; ++y) {
            double ee = 0.0;
            for (int i = 0; i < dim; ++i) {
                const double v = x[i] - codebook.recon[y][i];
                d[y][i] = v;
                ee += v * v;
            }
            e[y] = ee;
            const double rho = ws.leaked[y];
            d1c += rho * ee;
            for (int i = 0; i < dim; ++i) dbar[i] += rho * d[y][i];
        }
        d1c *= 2.0 / n;
        d2c = (2.0 * (n - 1) / n) * sqnorm(dbar);
    }
};

// D1 + D2 on the batch, with the leakage-smoothed finite-neighbourhood
// posterior as the encoder (weighted batch average replaces the x-integral).
inline ObjectiveValue eval_objective(const Codebook& codebook, const ResponseModel& model,
                                     const Topology& topology, const LeakageKernel& kernel,
                                     int n, const Batch& batch) {
    if (n < 1) throw ConfigError("eval_objective: n must be at least 1");
    if (batch.size() == 0) throw ConfigError("eval_objective: empty batch");
    const auto members = topology.neighbourhoods();
    SampleEval se;
    ObjectiveValue out;
    for (int i = 0; i < batch.size(); ++i) {
        se.compute(codebook, model, members, kernel, n, batch.samples[i]);
        out.d1 += batch.weight(i) * se.d1c;
        out.d2 += batch.weight(i) * se.d2c;
    }
    const double inv = 1.0 / batch.total_weight();
    out.d1 *= inv;
    out.d2 *= inv;
    return out;
}

// Accumulate the gradient contribution of one evaluated sample into grads,
// scaled by wgt. The derivative w.r.t. log Q(x|y) is
//   (1/M) [ p_y a_y - sum_{y' : y in N(y')} P(y|x;y') sum_{z in N(y')} P(z|x;y') a_z ]
// where a = (leak adjoint of) the per-code cost
//   c_z = (2/n) e_z + (4(n-1)/n) (d_z . dbar)  [+ upstream_cost_z].
// The optional upstream_cost contracts with the leaked posterior; it carries
// a downstream stage's objective into this encoder's parameters (already
// scaled by the downstream weights, so obj_weight does not touch it).
// input_grad, when requested, receives the gradient w.r.t. the sample x.
inline void accumulate_sample_gradients(const Codebook& codebook, const ResponseModel& model,
                                        const std::vector<std::vector<int>>& members,
                                        const LeakageKernel& kernel, int n, const Vec& x,
                                        const SampleEval& se, double wgt, Gradients& grads,
                                        const Vec* upstream_cost = nullptr,
                                        Vec* input_grad = nullptr,
                                        double obj_weight = 1.0) {
    const int m = codebook.num_codes();
    const int dim = codebook.dim;
    const double d2_factor = 4.0 * (n - 1) / n;

    Vec cost(m);
    for (int y = 0; y < m; ++y) {
        cost[y] = obj_weight * ((2.0 / n) * se.e[y] + d2_factor * dot(se.d[y], se.dbar));
        if (upstream_cost) cost[y] += (*upstream_cost)[y];
    }

    Vec a;
    if (kernel.is_identity()) {
        a = cost;
    } else {
        kernel.apply_adjoint(cost, a);
    }

    // per-context contraction t[y'] = sum_{z in N(y')} P(z|x;y') a_z
    Vec t(m, 0.0);
    for (int ctx = 0; ctx < m; ++ctx) {
        const auto& mem = members[ctx];
        const auto& pc = se.ws.context_probs[ctx];
        double acc = 0.0;
        for (std::size_t i = 0; i < mem.size(); ++i) acc += pc[i] * a[mem[i]];
        t[ctx] = acc;
    }

    Vec glogq(m);
    for (int y = 0; y < m; ++y) glogq[y] = se.ws.p[y] * a[y];
    for (int ctx = 0; ctx < m; ++ctx) {
        const auto& mem = members[ctx];
        const auto& pc = se.ws.context_probs[ctx];
        for (std::size_t i = 0; i < mem.size(); ++i) glogq[mem[i]] -= pc[i] * t[ctx];
    }
    const double inv_m = 1.0 / m;
    for (int y = 0; y < m; ++y) glogq[y] *= inv_m;

    for (int y = 0; y < m; ++y) {
        // response parameters: d logQ / db = 1-Q, d logQ / dw = (1-Q) x
        const double gb = glogq[y] * (1.0 - se.ws.q[y]);
        grads.biases[y] += wgt * gb;
        for (int i = 0; i < dim; ++i) grads.weights[y][i] += wgt * gb * x[i];
        // reconstruction rows, from D1 and D2 directly
        const double rho = se.ws.leaked[y];
        for (int i = 0; i < dim; ++i)
            grads.recon[y][i] += wgt * obj_weight * (-(4.0 / n) * rho * se.d[y][i]
                                                     - d2_factor * rho * se.dbar[i]);
    }

    if (input_grad) {
        // direct D1+D2 route collapses to 4 dbar; the rest flows through logQ
        input_grad->assign(dim, 0.0);
        for (int i = 0; i < dim; ++i) (*input_grad)[i] = 4.0 * obj_weight * se.dbar[i];
        for (int y = 0; y < m; ++y) {
            const double gq = glogq[y] * (1.0 - se.ws.q[y]);
            for (int i = 0; i < dim; ++i)
                (*input_grad)[i] += gq * model.weights[y][i];
        }
    }
}

// gradient of eval_objective().total w.r.t. all parameters, as one pass
inline Gradients eval_gradients(const Codebook& codebook, const ResponseModel& model,
                                const Topology& topology, const LeakageKernel& kernel,
                                int n, const Batch& batch,
                                ObjectiveValue* value_out = nullptr) {
    const auto members = topology.neighbourhoods();
    Gradients grads;
    grads.init(codebook.num_codes(), codebook.dim);
    ObjectiveValue val;
    SampleEval se;
    for (int i = 0; i < batch.size(); ++i) {
        se.compute(codebook, model, members, kernel, n, batch.samples[i]);
        val.d1 += batch.weight(i) * se.d1c;
        val.d2 += batch.weight(i) * se.d2c;
        accumulate_sample_gradients(codebook, model, members, kernel, n,
                                    batch.samples[i], se, batch.weight(i), grads);
    }
    const double inv = 1.0 / batch.total_weight();
    grads.scale(inv);
    val.d1 *= inv;
    val.d2 *= inv;
    if (value_out) *value_out = val;
    return grads;
}

inline std::vector<Vec> grad_recon(const Codebook& codebook, const ResponseModel& model,
                                   const Topology& topology, const LeakageKernel& kernel,
                                   int n, const Batch& batch) {
    return eval_gradients(codebook, model, topology, kernel, n, batch).recon;
}

struct ResponseGradients {
    std::vector<Vec> weights;
    Vec biases;
};

inline ResponseGradients grad_response(const Codebook& codebook, const ResponseModel& model,
                                       const Topology& topology, const LeakageKernel& kernel,
                                       int n, const Batch& batch) {
    Gradients g = eval_gradients(codebook, model, topology, kernel, n, batch);
    return {std::move(g.weights), std::move(g.biases)};
}

// Monte-Carlo estimate of the true n-sample distortion (the quantity D1+D2
// bounds): 2 avg_x E ||x - mean of n sampled reconstruction rows||^2.
// Each draw averages over the whole batch, so the per-draw values are i.i.d.
// and the standard error is std / sqrt(draws).
struct DistortionEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

inline DistortionEstimate estimate_true_distortion(const Codebook& codebook,
                                                   const ResponseModel& model,
                                                   const Topology& topology,
                                                   const LeakageKernel& kernel,
                                                   int n, const Batch& batch,
                                                   int draws, Rng& rng) {
    if (draws < 1) throw ConfigError("estimate_true_distortion: draws must be at least 1");
    const auto members = topology.neighbourhoods();
    std::vector<Vec> posteriors(batch.size());
    PosteriorWorkspace ws;
    for (int i = 0; i < batch.size(); ++i) {
        ws.compute(model, members, kernel, batch.samples[i]);
        posteriors[i] = ws.leaked;
    }
    const double inv_w = 1.0 / batch.total_weight();
    double sum = 0.0, sum2 = 0.0;
    std::vector<int> codes(n);
    for (int t = 0; t < draws; ++t) {
        double value = 0.0;
        for (int i = 0; i < batch.size(); ++i) {
            for (int k = 0; k < n; ++k) codes[k] = sample_categorical(posteriors[i], rng);
            value += batch.weight(i) * 2.0 * sqdist(batch.samples[i],
                                                    reconstruct(codebook, codes));
        }
        value *= inv_w;
        sum += value;
        sum2 += value * value;
    }
    DistortionEstimate est;
    est.mean = sum / draws;
    if (draws > 1) {
        const double var = (sum2 - sum * sum / draws) / (draws - 1);
        est.std_error = std::sqrt(var > 0.0 ? var / draws : 0.0);
    }
    return est;
}

} // namespace svq

#endif
