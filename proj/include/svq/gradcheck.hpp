#ifndef SVQ_GRADCHECK_HPP
#define SVQ_GRADCHECK_HPP

#include <string>
#include <vector>

#include "svq/io.hpp"
#include "svq/objective.hpp"

namespace svq {

struct GradCheckEntry {
    int instance_id = 0;
    std::string block;
    double max_rel_err = 0.0;
    bool pass = false;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double tolerance = 1e-5;

    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }

    void write_csv(const std::string& path) const {
        CsvWriter csv(path);
        csv.row({"instance_id", "block", "max_rel_err", "pass"});
        for (const auto& e : entries)
            csv.row({fmt(e.instance_id), e.block, fmt(e.max_rel_err),
                     e.pass ? "1" : "0"});
    }
};

struct GradCheckInstance {
    Codebook codebook;
    ResponseModel response;
    Topology topology = Topology::ring(1, 0);
    LeakageKernel kernel = LeakageKernel::identity(1);
    int n = 1;
    Batch batch;
};

inline GradCheckInstance random_gradcheck_instance(int m, int dim, int n,
                                                   int radius, bool leak, Rng& rng) {
    GradCheckInstance inst;
    inst.n = n;
    // pick a layout that fits M; grids exercise the 2-d neighbourhood code
    if (m == 4) {
        inst.topology = Topology::grid(2, 2, rng.uniform() < 0.5, radius);
    } else if (m == 6 && rng.uniform() < 0.5) {
        inst.topology = Topology::grid(2, 3, rng.uniform() < 0.5, radius);
    } else if (rng.uniform() < 0.5) {
        inst.topology = Topology::ring(m, radius);
    } else {
        inst.topology = Topology::line(m, radius);
    }
    inst.kernel = leak ? LeakageKernel::gaussian(inst.topology, 1, 1.0)
                       : LeakageKernel::identity(m);
    inst.codebook.dim = dim;
    inst.codebook.recon.assign(m, Vec(dim));
    inst.response.weights.assign(m, Vec(dim));
    inst.response.biases.assign(m, 0.0);
    for (int y = 0; y < m; ++y) {
        for (int i = 0; i < dim; ++i) {
            inst.codebook.recon[y][i] = rng.uniform(-1.0, 1.0);
            inst.response.weights[y][i] = rng.uniform(-1.0, 1.0);
        }
        inst.response.biases[y] = rng.uniform(-1.0, 1.0);
    }
    const int batch_size = 3 + rng.uniform_int(4);
    inst.batch.samples.assign(batch_size, Vec(dim));
    for (auto& s : inst.batch.samples)
        for (auto& v : s) v = rng.uniform(-1.0, 1.0);
    return inst;
}

namespace detail {

inline double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return std::fabs(analytic - numeric) / denom;
}

// central finite difference of the total objective w.r.t. one scalar slot
template <typename Getter>
double fd_slot(GradCheckInstance& inst, Getter&& slot, double step) {
    double& v = slot(inst);
    const double saved = v;
    v = saved + step;
    const double hi = eval_objective(inst.codebook, inst.response, inst.topology,
                                     inst.kernel, inst.n, inst.batch).total();
    v = saved - step;
    const double lo = eval_objective(inst.codebook, inst.response, inst.topology,
                                     inst.kernel, inst.n, inst.batch).total();
    v = saved;
    return (hi - lo) / (2.0 * step);
}

} // namespace detail

// Compare the analytic gradients of one instance against central finite
// differences; returns the max relative error per parameter block.
inline std::vector<GradCheckEntry> check_instance(GradCheckInstance& inst, int id,
                                                  double step = 1e-5,
                                                  double tolerance = 1e-5) {
    const int m = inst.codebook.num_codes();
    const int dim = inst.codebook.dim;
    const Gradients grads = eval_gradients(inst.codebook, inst.response, inst.topology,
                                           inst.kernel, inst.n, inst.batch);
    double err_recon = 0.0, err_weights = 0.0, err_biases = 0.0;
    for (int y = 0; y < m; ++y) {
        for (int i = 0; i < dim; ++i) {
            const double fd_r = detail::fd_slot(
                inst, [y, i](GradCheckInstance& g) -> double& { return g.codebook.recon[y][i]; },
                step);
            err_recon = std::max(err_recon, detail::rel_err(grads.recon[y][i], fd_r));
            const double fd_w = detail::fd_slot(
                inst, [y, i](GradCheckInstance& g) -> double& { return g.response.weights[y][i]; },
                step);
            err_weights = std::max(err_weights, detail::rel_err(grads.weights[y][i], fd_w));
        }
        const double fd_b = detail::fd_slot(
            inst, [y](GradCheckInstance& g) -> double& { return g.response.biases[y]; }, step);
        err_biases = std::max(err_biases, detail::rel_err(grads.biases[y], fd_b));
    }
    return {{id, "recon", err_recon, err_recon <= tolerance},
            {id, "weights", err_weights, err_weights <= tolerance},
            {id, "biases", err_biases, err_biases <= tolerance}};
}

// Seeded family of random instances covering small M, dim, n, neighbourhood
// radii, and leakage on/off.
inline GradCheckReport check_gradients(int num_instances = 20, std::uint64_t seed = 1,
                                       double step = 1e-5, double tolerance = 1e-5) {
    GradCheckReport report;
    report.tolerance = tolerance;
    Rng master(seed);
    const int n_choices[3] = {1, 2, 5};
    for (int id = 0; id < num_instances; ++id) {
        Rng rng = master.derive(id);
        const int m = 1 + rng.uniform_int(8);
        const int dim = 1 + rng.uniform_int(6);
        const int n = n_choices[rng.uniform_int(3)];
        const int radius = rng.uniform_int(3);
        const bool leak = (id % 2) == 1;
        GradCheckInstance inst = random_gradcheck_instance(m, dim, n, radius, leak, rng);
        for (auto& e : check_instance(inst, id, step, tolerance))
            report.entries.push_back(e);
    }
    return report;
}

} // namespace svq

#endif
