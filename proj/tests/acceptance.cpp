// End-to-end acceptance suite. Each test case covers one criterion; bundled
// experiment specs are trained through the same pipeline the CLI uses.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "svq/experiment.hpp"
#include "svq/gradcheck.hpp"

using namespace svq;
namespace fs = std::filesystem;

namespace {

fs::path spec_path(const std::string& name) {
    return fs::path(SPEC_DIR) / (name + ".spec");
}

struct BundledRun {
    ExperimentSpec spec;
    fs::path dir;
    RunResult result;
};

// one full artifact-producing run per bundled spec, shared across criteria
const BundledRun& bundled(const std::string& name) {
    static std::map<std::string, BundledRun> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        BundledRun run;
        run.spec = ExperimentSpec::parse_file(spec_path(name).string());
        run.dir = fs::temp_directory_path() / "svq_acceptance" / name;
        fs::remove_all(run.dir);
        run.result = run_experiment(run.spec, run.dir.string());
        it = cache.emplace(name, std::move(run)).first;
    }
    return it->second;
}

// in-memory training of a bundled spec with a seed override; no artifacts
std::vector<Stage> train_spec(ExperimentSpec spec, std::uint64_t seed) {
    spec.seed = seed;
    DataContext data = build_data(spec);
    std::vector<Stage> stages = build_stages(spec);
    TrainConfig cfg = spec.train;
    cfg.seed = spec.seed;
    cfg.n = spec.stages[0].n;
    train_chain(stages, build_schedule(spec), cfg, data.source);
    return stages;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("criterion 1: analytic gradients match finite differences") {
    auto report = check_gradients(20, 1, 1e-5, 1e-5);
    REQUIRE(report.entries.size() == 60); // recon/weights/biases per instance
    for (const auto& e : report.entries) {
        INFO("instance " << e.instance_id << " block " << e.block
                         << " max_rel_err " << e.max_rel_err);
        CHECK(e.pass);
    }
    CHECK(report.all_pass());
}

TEST_CASE("criterion 2: the objective bounds the true distortion") {
    Rng master(42);
    for (int id = 0; id < 50; ++id) {
        Rng rng = master.derive(id);
        const int m = 1 + rng.uniform_int(8);
        const int dim = 1 + rng.uniform_int(6);
        const int n_choices[3] = {1, 2, 5};
        const int n = n_choices[rng.uniform_int(3)];
        const int radius = rng.uniform_int(3);
        auto inst = random_gradcheck_instance(m, dim, n, radius, id % 2 == 1, rng);

        const auto bound = eval_objective(inst.codebook, inst.response, inst.topology,
                                          inst.kernel, inst.n, inst.batch);
        Rng draw_rng = master.derive(1000 + id);
        const auto est = estimate_true_distortion(inst.codebook, inst.response,
                                                  inst.topology, inst.kernel, inst.n,
                                                  inst.batch, 100000, draw_rng);
        INFO("model " << id << ": true " << est.mean << " +- " << est.std_error
                      << " vs bound " << bound.total());
        CHECK(est.mean <= bound.total() + 3.0 * est.std_error +
              1e-9 * std::max(1.0, bound.total()));
    }
}

TEST_CASE("criterion 3: circle codes sit outside the unit circle on quarter arcs") {
    auto spec = ExperimentSpec::parse_file(spec_path("circle_m4_n10").string());
    int good_seeds = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto stages = train_spec(spec, seed);
        const Svq& model = stages[0].model;
        bool ok = true;
        for (int y = 0; y < model.num_codes(); ++y) {
            const double norm = std::sqrt(sqnorm(model.codebook.recon[y]));
            const double width = arc_profile(model, y).width;
            INFO("seed " << seed << " code " << y << ": |row| " << norm << " width "
                         << width);
            if (norm <= 1.0 || width < M_PI / 4.0 || width > 3.0 * M_PI / 4.0)
                ok = false;
        }
        if (ok) ++good_seeds;
    }
    CHECK(good_seeds >= 3);
}

TEST_CASE("criterion 4: torus encoding across sample counts") {
    auto spec = ExperimentSpec::parse_file(spec_path("torus_m8_n5").string());
    TrainConfig base = spec.train;
    base.seed = spec.seed;
    auto table = stability_sweep({8}, {5, 20}, 5, base);
    REQUIRE(table.cells.size() == 2);
    const auto& n5 = table.cells[0];
    const auto& n20 = table.cells[1];
    INFO("n=5: joint " << n5.joint << " factorial " << n5.factorial << " mixed "
                       << n5.mixed << " failed " << n5.failed);
    INFO("n=20: joint " << n20.joint << " factorial " << n20.factorial << " mixed "
                        << n20.mixed << " failed " << n20.failed);
    CHECK(n5.joint >= 3);
    CHECK(n20.factorial >= 3);
    CHECK(n20.factorial_fraction >= n5.factorial_fraction);
}

TEST_CASE("criterion 5: independent targets produce localized codes") {
    auto spec = ExperimentSpec::parse_file(spec_path("multi_targets_m10_n10").string());
    int good_seeds = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto stages = train_spec(spec, seed);
        const Svq& model = stages[0].model;
        int single = 0;
        for (const auto& loc : localization_metrics(model.codebook))
            if (loc.runs == 1) ++single;
        INFO("seed " << seed << ": " << single << "/10 single-run codes");
        if (single >= 8) ++good_seeds;
    }
    CHECK(good_seeds >= 3);
}

TEST_CASE("criterion 6: correlated pair joint, factorial, and invariant regimes") {
    auto joint_spec =
        ExperimentSpec::parse_file(spec_path("correlated_pair_joint").string());
    auto fact_spec =
        ExperimentSpec::parse_file(spec_path("correlated_pair_factorial").string());
    auto inv_spec =
        ExperimentSpec::parse_file(spec_path("correlated_pair_invariant").string());

    int joint_ok = 0, fact_ok = 0, inv_ok = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto joint_stages = train_spec(joint_spec, seed);
        const Svq& joint = joint_stages[0].model;
        int two_run = 0;
        for (const auto& loc : localization_metrics(joint.codebook))
            if (loc.runs == 2) ++two_run;
        INFO("seed " << seed << " joint: " << two_run << "/16 two-run codes");
        if (two_run >= 8) ++joint_ok;

        auto fact_stages = train_spec(fact_spec, seed);
        const Svq& fact = fact_stages[0].model;
        auto fact_loc = localization_metrics(fact.codebook);
        int single = 0;
        std::vector<double> fact_pr;
        for (const auto& loc : fact_loc) {
            if (loc.runs == 1) ++single;
            fact_pr.push_back(loc.participation);
        }
        std::nth_element(fact_pr.begin(), fact_pr.begin() + fact_pr.size() / 2,
                         fact_pr.end());
        const double fact_median = fact_pr[fact_pr.size() / 2];
        INFO("seed " << seed << " factorial: " << single
                     << "/16 single-run codes, median PR " << fact_median);
        if (single >= 8) ++fact_ok;

        auto inv_stages = train_spec(inv_spec, seed);
        const Svq& inv = inv_stages[0].model;
        auto inv_loc = localization_metrics(inv.codebook);
        int broad_single = 0;
        std::vector<double> inv_pr;
        for (const auto& loc : inv_loc) {
            if (loc.runs == 1) ++broad_single;
            inv_pr.push_back(loc.participation);
        }
        std::nth_element(inv_pr.begin(), inv_pr.begin() + inv_pr.size() / 2,
                         inv_pr.end());
        const double inv_median = inv_pr[inv_pr.size() / 2];
        INFO("seed " << seed << " invariant: " << broad_single
                     << "/16 single-run codes, median PR " << inv_median);
        if (broad_single >= 8 && inv_median > fact_median) ++inv_ok;
    }
    CHECK(joint_ok >= 3);
    CHECK(fact_ok >= 3);
    CHECK(inv_ok >= 3);
}

TEST_CASE("criterion 7: waveform separation") {
    const auto& run = bundled("waveforms_m10_n20");
    auto rows = read_csv(run.dir / "waveform_match.csv");
    REQUIRE(rows.size() >= 2);
    bool sine_covered = false, square_covered = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const bool active = rows[i][1] == "1";
        const int reference = std::stoi(rows[i][2]);
        const double corr = std::stod(rows[i][3]);
        if (!active) continue;
        if (reference == 1) sine_covered = true;
        if (reference == 2) square_covered = true;
        INFO("code " << rows[i][0] << " -> reference " << reference << " correlation "
                     << corr);
        CHECK(corr > 0.9);
    }
    CHECK(sine_covered);
    CHECK(square_covered);
}

TEST_CASE("criterion 8: ECG codes lock onto maternal and foetal periods") {
    const auto& run = bundled("ecg_m16_n20");
    auto rows = read_csv(run.dir / "ecg_periods.csv");
    REQUIRE(rows.size() >= 2);
    const double maternal = 40.0, foetal = maternal / 1.8;
    bool maternal_found = false, foetal_found = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double period = std::stod(rows[i][1]);
        if (std::fabs(period - maternal) <= 0.1 * maternal) maternal_found = true;
        if (std::fabs(period - foetal) <= 0.1 * foetal) foetal_found = true;
    }
    CHECK(maternal_found);
    CHECK(foetal_found);
}

TEST_CASE("criterion 9: stationarity residuals vanish at convergence") {
    auto spec = ExperimentSpec::parse_file(spec_path("circle_m4_n10").string());
    DataContext data = build_data(spec);
    Batch batch;
    Rng batch_rng(999);
    for (int i = 0; i < 2000; ++i) batch.samples.push_back(data.source(batch_rng));
    const int n = spec.stages[0].n;

    std::vector<Stage> stages = build_stages(spec);
    const double recon_init =
        stationarity_residual_recon(stages[0].model, n, batch).max_applicable();
    const double post_init = stationarity_residual_posterior(stages[0].model, n, batch);

    TrainConfig cfg = spec.train;
    cfg.seed = spec.seed;
    cfg.n = n;
    train_chain(stages, build_schedule(spec), cfg, data.source);
    const double recon_final =
        stationarity_residual_recon(stages[0].model, n, batch).max_applicable();
    const double post_final = stationarity_residual_posterior(stages[0].model, n, batch);

    INFO("recon residual " << recon_init << " -> " << recon_final);
    INFO("posterior residual " << post_init << " -> " << post_final);
    CHECK(recon_init >= 10.0 * recon_final);
    CHECK(post_init >= 10.0 * post_final);

    // exact-zero constructions
    {
        // single code at the batch centroid: both residuals are identically 0
        Vec mean(2, 0.0);
        for (const auto& x : batch.samples)
            for (int i = 0; i < 2; ++i) mean[i] += x[i] / batch.size();
        Codebook cb;
        cb.dim = 2;
        cb.recon = {mean};
        ResponseModel resp;
        resp.weights = {Vec(2, 0.0)};
        resp.biases = {0.0};
        Svq single{std::move(cb), std::move(resp), Topology::ring(1, 0),
                   LeakageKernel::identity(1)};
        CHECK(stationarity_residual_recon(single, n, batch).max_applicable() ==
              Catch::Approx(0.0).margin(1e-12));
        CHECK(stationarity_residual_posterior(single, n, batch) ==
              Catch::Approx(0.0).margin(1e-12));
    }
    {
        // two sharply separated clusters with rows at their centroids give
        // one-hot posteriors and zero residuals
        Batch clusters;
        Rng crng(7);
        Vec c0(2, 0.0), c1(2, 0.0);
        for (int i = 0; i < 50; ++i) {
            Vec a{5.0 + 0.1 * crng.gaussian(), 0.1 * crng.gaussian()};
            Vec b{-5.0 + 0.1 * crng.gaussian(), 0.1 * crng.gaussian()};
            for (int j = 0; j < 2; ++j) {
                c0[j] += a[j] / 50;
                c1[j] += b[j] / 50;
            }
            clusters.samples.push_back(std::move(a));
            clusters.samples.push_back(std::move(b));
        }
        Codebook cb;
        cb.dim = 2;
        cb.recon = {c0, c1};
        ResponseModel resp;
        resp.weights = {{50.0, 0.0}, {-50.0, 0.0}};
        resp.biases = {0.0, 0.0};
        Svq sharp{std::move(cb), std::move(resp), Topology::ring(2, 2),
                  LeakageKernel::identity(2)};
        CHECK(stationarity_residual_recon(sharp, n, clusters).max_applicable() ==
              Catch::Approx(0.0).margin(1e-9));
        CHECK(stationarity_residual_posterior(sharp, n, clusters) ==
              Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("criterion 10: topographic order, dominance stripes, sparse coding") {
    const auto leak_rows = read_csv(bundled("vicon_orientation").dir / "topographic.csv");
    const auto flat_rows = read_csv(bundled("vicon_no_leakage").dir / "topographic.csv");
    const double leak_score = std::stod(leak_rows[1][0]);
    const double flat_score = std::stod(flat_rows[1][0]);
    INFO("topographic score: leakage " << leak_score << " vs none " << flat_score);
    CHECK(leak_score > flat_score);

    const auto dom_rows = read_csv(bundled("dominance").dir / "dominance.csv");
    const double contiguity = std::stod(dom_rows[1][0]);
    INFO("dominance contiguity " << contiguity);
    CHECK(contiguity > 0.5);

    for (const std::string name : {"vicon_orientation", "vicon_no_leakage", "dominance"}) {
        const auto coding = read_csv(bundled(name).dir / "image_coding.csv");
        const double mse = std::stod(coding[1][1]);
        const double baseline = std::stod(coding[1][2]);
        INFO(name << ": reconstruction mse " << mse << " vs baseline " << baseline);
        CHECK(mse < baseline);
    }
}

TEST_CASE("criterion 11: bundled specs reproduce byte-identically") {
    const std::vector<std::string> names = {
        "circle_m4_n10",          "torus_m8_n5",
        "torus_m8_n20",           "multi_targets_m10_n10",
        "correlated_pair_joint",  "correlated_pair_factorial",
        "correlated_pair_invariant", "waveforms_m10_n20",
        "ecg_m16_n20",            "vicon_orientation",
        "vicon_no_leakage",       "dominance"};
    for (const auto& name : names) {
        const auto& first = bundled(name);
        const fs::path dir_b = fs::temp_directory_path() / "svq_acceptance" / (name + "_b");
        fs::remove_all(dir_b);
        auto second = run_experiment(first.spec, dir_b.string());
        REQUIRE(second.files == first.result.files);
        for (const auto& file : first.result.files) {
            INFO(name << ": " << file);
            CHECK(read_bytes(first.dir / file) == read_bytes(dir_b / file));
        }
        fs::remove_all(dir_b);
    }
}
