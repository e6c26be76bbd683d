#ifndef SVQ_TRAINER_HPP
#define SVQ_TRAINER_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "svq/io.hpp"
#include "svq/objective.hpp"

namespace svq {

// produces one training vector per call
using DataSource = std::function<Vec(Rng&)>;

struct TrainConfig {
    int n = 10;
    int batch_size = 32;
    int steps = 20000;
    double rate = 0.05;
    double rate_end = 0.005;
    enum class Decay { Constant, Linear, Step } decay = Decay::Linear;
    std::uint64_t seed = 1;
    bool reproducible = true;
    double init_scale = 0.01;
    int trace_every = 100;
    double divergence_factor = 10.0;

    double learning_rate(int step) const {
        switch (decay) {
            case Decay::Constant:
                return rate;
            case Decay::Linear:
                return steps > 1 ? rate + (rate_end - rate) * step / (steps - 1) : rate;
            case Decay::Step: {
                // halve at each quarter of the run
                double r = rate;
                for (int q = 1; q <= 3; ++q)
                    if (step >= q * steps / 4) r *= 0.5;
                return r;
            }
        }
        return rate;
    }
};

// reconstruction rows, weights and biases i.i.d. uniform in [-scale, scale]
inline std::pair<Codebook, ResponseModel> init_model(int dim, int m, double scale, Rng& rng) {
    if (scale <= 0.0) throw ConfigError("init_model: scale must be positive");
    Codebook cb;
    cb.dim = dim;
    cb.recon.assign(m, Vec(dim));
    ResponseModel resp;
    resp.weights.assign(m, Vec(dim));
    resp.biases.assign(m, 0.0);
    for (int y = 0; y < m; ++y) {
        for (int i = 0; i < dim; ++i) cb.recon[y][i] = rng.uniform(-scale, scale);
        for (int i = 0; i < dim; ++i) resp.weights[y][i] = rng.uniform(-scale, scale);
        resp.biases[y] = rng.uniform(-scale, scale);
    }
    return {std::move(cb), std::move(resp)};
}

struct TraceRow {
    int step = 0;
    int stage = 0; // 1-based in reports
    double d1 = 0.0;
    double d2 = 0.0;
    double total = 0.0;
    double learning_rate = 0.0;
    double weight = 1.0;
};

struct TrainResult {
    std::vector<TraceRow> trace;
    double initial_holdout = 0.0;
    double final_holdout = 0.0;

    void write_trace_csv(const std::string& path) const {
        CsvWriter csv(path);
        csv.row({"step", "stage", "d1", "d2", "total", "learning_rate", "weight"});
        for (const auto& r : trace)
            csv.row({fmt(r.step), fmt(r.stage), fmt(r.d1), fmt(r.d2), fmt(r.total),
                     fmt(r.learning_rate), fmt(r.weight)});
    }
};

// One encoder in a chain, together with its sample count.
struct Stage {
    Svq model;
    int n = 1;
};

// Per-stage objective weights, linearly interpolated over the run.
struct WeightSchedule {
    Vec start;
    Vec end;

    Vec at(int step, int steps) const {
        Vec w(start.size());
        const double t = steps > 1 ? static_cast<double>(step) / (steps - 1) : 0.0;
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = start[k] + (end[k] - start[k]) * t;
        return w;
    }
};

namespace detail {

struct StageScratch {
    std::vector<std::vector<int>> members;
    SampleEval se;
    Gradients grads;
    Vec input;       // the stage's input for the current sample
    Vec input_grad;  // backpropagated gradient w.r.t. that input
    double d1_acc = 0.0, d2_acc = 0.0;
};

inline void apply_update(Svq& model, const Gradients& grads, double rate, double inv_batch) {
    const int m = model.num_codes();
    const int dim = model.dim();
    const double s = rate * inv_batch;
    for (int y = 0; y < m; ++y) {
        for (int i = 0; i < dim; ++i) {
            model.codebook.recon[y][i] -= s * grads.recon[y][i];
            model.response.weights[y][i] -= s * grads.weights[y][i];
        }
        model.response.biases[y] -= s * grads.biases[y];
    }
}

} // namespace detail

// weighted chain objective on a fixed batch (evaluation only)
inline double chain_objective(const std::vector<Stage>& stages, const Vec& weights,
                              const Batch& batch) {
    std::vector<std::vector<std::vector<int>>> members(stages.size());
    for (std::size_t k = 0; k < stages.size(); ++k)
        members[k] = stages[k].model.topology.neighbourhoods();
    double total = 0.0;
    SampleEval se;
    for (const auto& x : batch.samples) {
        Vec input = x;
        for (std::size_t k = 0; k < stages.size(); ++k) {
            se.compute(stages[k].model.codebook, stages[k].model.response, members[k],
                       stages[k].model.leakage, stages[k].n, input);
            total += weights[k] * (se.d1c + se.d2c);
            if (k + 1 < stages.size()) input = se.ws.leaked;
        }
    }
    return total / batch.size();
}

// full composite gradient of chain_objective w.r.t. every stage's parameters
inline std::vector<Gradients> chain_gradients(const std::vector<Stage>& stages,
                                              const Vec& weights, const Batch& batch) {
    const int num_stages = static_cast<int>(stages.size());
    std::vector<std::vector<std::vector<int>>> members(num_stages);
    std::vector<Gradients> grads(num_stages);
    for (int k = 0; k < num_stages; ++k) {
        members[k] = stages[k].model.topology.neighbourhoods();
        grads[k].init(stages[k].model.num_codes(), stages[k].model.dim());
    }
    std::vector<SampleEval> evals(num_stages);
    std::vector<Vec> inputs(num_stages);
    std::vector<Vec> input_grads(num_stages);
    for (const auto& x : batch.samples) {
        for (int k = 0; k < num_stages; ++k) {
            inputs[k] = k == 0 ? x : evals[k - 1].ws.leaked;
            evals[k].compute(stages[k].model.codebook, stages[k].model.response, members[k],
                             stages[k].model.leakage, stages[k].n, inputs[k]);
        }
        for (int k = num_stages - 1; k >= 0; --k) {
            const Vec* upstream = k + 1 < num_stages ? &input_grads[k + 1] : nullptr;
            Vec* input_grad = k > 0 ? &input_grads[k] : nullptr;
            accumulate_sample_gradients(stages[k].model.codebook, stages[k].model.response,
                                        members[k], stages[k].model.leakage, stages[k].n,
                                        inputs[k], evals[k], 1.0, grads[k], upstream,
                                        input_grad, weights[k]);
        }
    }
    for (auto& g : grads) g.scale(1.0 / batch.size());
    return grads;
}

// Stochastic-gradient descent on the weighted sum of per-stage D1+D2
// objectives. Stage k>1 consumes the leakage-smoothed posterior of stage
// k-1; gradients flow back through that posterior by the chain rule. Fresh
// batch per step. Aborts when any stage's objective exceeds the divergence
// guard relative to its value on the first batch.
inline TrainResult train_chain(std::vector<Stage>& stages, const WeightSchedule& schedule,
                               const TrainConfig& config, const DataSource& source) {
    const int num_stages = static_cast<int>(stages.size());
    if (num_stages == 0) throw ConfigError("train_chain: no stages");
    if (static_cast<int>(schedule.start.size()) != num_stages ||
        static_cast<int>(schedule.end.size()) != num_stages)
        throw ConfigError("train_chain: weight schedule size does not match stage count");
    for (int k = 1; k < num_stages; ++k)
        if (stages[k].model.dim() != stages[k - 1].model.num_codes())
            throw ConfigError("train_chain: stage " + std::to_string(k + 1) +
                              " input dimension must equal the previous stage's code count");

    Rng master(config.seed);
    Rng data_rng = master.derive(0);
    Rng holdout_rng = master.derive(1);

    std::vector<detail::StageScratch> scratch(num_stages);
    for (int k = 0; k < num_stages; ++k) {
        scratch[k].members = stages[k].model.topology.neighbourhoods();
        scratch[k].grads.init(stages[k].model.num_codes(), stages[k].model.dim());
    }

    // held-out batch for the before/after comparison
    Batch holdout;
    holdout.samples.reserve(config.batch_size);
    for (int i = 0; i < config.batch_size; ++i) holdout.samples.push_back(source(holdout_rng));

    auto eval_chain_total = [&](const Batch& batch, const Vec& weights) {
        double total = 0.0;
        SampleEval se;
        for (const auto& x : batch.samples) {
            Vec input = x;
            for (int k = 0; k < num_stages; ++k) {
                se.compute(stages[k].model.codebook, stages[k].model.response,
                           scratch[k].members, stages[k].model.leakage, stages[k].n, input);
                total += weights[k] * (se.d1c + se.d2c);
                if (k + 1 < num_stages) input = se.ws.leaked;
            }
        }
        return total / batch.size();
    };

    TrainResult result;
    Vec initial_totals(num_stages, 0.0);
    bool have_initial = false;
    const double inv_batch = 1.0 / config.batch_size;

    for (int step = 0; step < config.steps; ++step) {
        const Vec weights = schedule.at(step, config.steps);
        const double rate = config.learning_rate(step);

        for (int k = 0; k < num_stages; ++k) {
            auto& s = scratch[k];
            s.grads.init(stages[k].model.num_codes(), stages[k].model.dim());
            s.d1_acc = s.d2_acc = 0.0;
        }

        for (int i = 0; i < config.batch_size; ++i) {
            Vec x = source(data_rng);
            // forward through every stage
            for (int k = 0; k < num_stages; ++k) {
                auto& s = scratch[k];
                s.input = k == 0 ? std::move(x) : scratch[k - 1].se.ws.leaked;
                s.se.compute(stages[k].model.codebook, stages[k].model.response,
                             s.members, stages[k].model.leakage, stages[k].n, s.input);
                s.d1_acc += s.se.d1c;
                s.d2_acc += s.se.d2c;
            }
            // backward, carrying the downstream cost into each earlier stage
            for (int k = num_stages - 1; k >= 0; --k) {
                auto& s = scratch[k];
                const Vec* upstream = k + 1 < num_stages ? &scratch[k + 1].input_grad : nullptr;
                Vec* input_grad = k > 0 ? &s.input_grad : nullptr;
                accumulate_sample_gradients(stages[k].model.codebook,
                                            stages[k].model.response, s.members,
                                            stages[k].model.leakage, stages[k].n, s.input,
                                            s.se, 1.0, s.grads, upstream, input_grad,
                                            weights[k]);
            }
        }

        for (int k = 0; k < num_stages; ++k) {
            const double total = (scratch[k].d1_acc + scratch[k].d2_acc) * inv_batch;
            if (!have_initial) initial_totals[k] = total;
            if (have_initial && total > config.divergence_factor *
                                            std::max(initial_totals[k], 1e-12))
                throw DivergenceError("train: stage " + std::to_string(k + 1) +
                                      " objective " + fmt(total) + " exceeded " +
                                      fmt(config.divergence_factor) + "x its initial value " +
                                      fmt(initial_totals[k]) + " at step " +
                                      std::to_string(step));
        }
        have_initial = true;

        if (step % config.trace_every == 0 || step == config.steps - 1) {
            for (int k = 0; k < num_stages; ++k) {
                TraceRow row;
                row.step = step;
                row.stage = k + 1;
                row.d1 = scratch[k].d1_acc * inv_batch;
                row.d2 = scratch[k].d2_acc * inv_batch;
                row.total = row.d1 + row.d2;
                row.learning_rate = rate;
                row.weight = weights[k];
                result.trace.push_back(row);
            }
        }

        if (step == 0)
            result.initial_holdout = eval_chain_total(holdout, weights);

        // objective weights are already baked into the accumulated gradients
        for (int k = 0; k < num_stages; ++k)
            detail::apply_update(stages[k].model, scratch[k].grads, rate, inv_batch);
    }

    result.final_holdout =
        eval_chain_total(holdout, schedule.at(config.steps - 1, config.steps));
    return result;
}

// single-encoder convenience wrapper; identical behaviour to a one-stage
// chain with unit weight
inline TrainResult train(Svq& model, const TrainConfig& config, const DataSource& source) {
    std::vector<Stage> stages{{model, config.n}};
    WeightSchedule schedule{{1.0}, {1.0}};
    TrainResult result = train_chain(stages, schedule, config, source);
    model = std::move(stages[0].model);
    return result;
}

} // namespace svq

#endif
