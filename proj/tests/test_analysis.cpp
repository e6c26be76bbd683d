#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "svq/analysis.hpp"
#include "svq/datagen.hpp"

using namespace svq;

namespace {

// single-code model: the posterior is identically 1
Svq trivial_model(const Vec& recon_row) {
    const int dim = static_cast<int>(recon_row.size());
    Codebook cb;
    cb.dim = dim;
    cb.recon = {recon_row};
    ResponseModel resp;
    resp.weights = {Vec(dim, 0.0)};
    resp.biases = {0.0};
    return Svq{std::move(cb), std::move(resp), Topology::ring(1, 0),
               LeakageKernel::identity(1)};
}

Svq torus_model(const std::vector<Vec>& weights) {
    const int m = static_cast<int>(weights.size());
    Codebook cb;
    cb.dim = 4;
    cb.recon.assign(m, Vec(4, 0.0));
    ResponseModel resp;
    resp.weights = weights;
    resp.biases.assign(m, 0.0);
    return Svq{std::move(cb), std::move(resp), Topology::ring(m, m),
               LeakageKernel::identity(m)};
}

} // namespace

TEST_CASE("stationarity_residual_recon: single code") {
    Rng rng(1);
    Batch batch;
    Vec mean(2, 0.0);
    for (int i = 0; i < 12; ++i) {
        batch.samples.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
        mean[0] += batch.samples.back()[0] / 12;
        mean[1] += batch.samples.back()[1] / 12;
    }

    SECTION("zero at the centroid") {
        Svq model = trivial_model(mean);
        auto res = stationarity_residual_recon(model, 7, batch);
        REQUIRE(res.applicable == std::vector<bool>{true});
        CHECK(res.residual[0] == Catch::Approx(0.0).margin(1e-12));
        CHECK(res.max_applicable() == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("closed form away from the centroid") {
        // lhs = n*mean, rhs = row + (n-1)*row, so residual = n*|mean - row|
        const Vec row = {mean[0] + 0.3, mean[1] - 0.1};
        Svq model = trivial_model(row);
        const int n = 5;
        auto res = stationarity_residual_recon(model, n, batch);
        const double expected = n * std::sqrt(sqdist(mean, row));
        CHECK(res.residual[0] == Catch::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("stationarity_residual_recon: massless codes are flagged") {
    // second code has weights so negative its response vanishes at the samples
    Codebook cb;
    cb.dim = 1;
    cb.recon = {{0.0}, {0.0}};
    ResponseModel resp;
    resp.weights = {{0.0}, {-2000.0}};
    resp.biases = {0.0, -1000.0};
    Svq model{std::move(cb), std::move(resp), Topology::ring(2, 2),
              LeakageKernel::identity(2)};
    Batch batch;
    batch.samples = {{1.0}, {2.0}};
    auto res = stationarity_residual_recon(model, 3, batch);
    CHECK(res.applicable[0]);
    CHECK_FALSE(res.applicable[1]);
}

TEST_CASE("stationarity_residual_posterior: single code gives zero") {
    Rng rng(2);
    Batch batch;
    for (int i = 0; i < 8; ++i)
        batch.samples.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    Svq model = trivial_model({0.4, -0.2});
    CHECK(stationarity_residual_posterior(model, 4, batch) ==
          Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("stationarity_residual_posterior: matches a direct evaluation") {
    Rng rng(3);
    auto [cb, resp] = init_model(2, 3, 0.5, rng);
    Svq model{std::move(cb), std::move(resp), Topology::ring(3, 1),
              LeakageKernel::identity(3)};
    Batch batch;
    batch.samples = {{0.7, -0.3}, {-0.5, 0.1}};
    const int n = 4;

    double expected = 0.0;
    for (const auto& x : batch.samples) {
        const Vec post = model.posterior(x);
        const Vec recon = mean_reconstruction(model.codebook, post);
        Vec inner(3);
        for (int yp = 0; yp < 3; ++yp)
            inner[yp] = dot(model.codebook.recon[yp],
                            {0.5 * model.codebook.recon[yp][0] - n * x[0] + (n - 1) * recon[0],
                             0.5 * model.codebook.recon[yp][1] - n * x[1] + (n - 1) * recon[1]});
        double weighted = 0.0;
        for (int yp = 0; yp < 3; ++yp) weighted += post[yp] * inner[yp];
        for (int y = 0; y < 3; ++y)
            if (post[y] > 1e-6)
                expected = std::max(expected, std::fabs(weighted - inner[y]));
    }
    CHECK(stationarity_residual_posterior(model, n, batch) ==
          Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("classify_encoding: factorial when codes depend on one angle each") {
    // each code reads only one circle of the torus
    Svq model = torus_model({{6.0, 0.0, 0.0, 0.0},
                             {-6.0, 0.0, 0.0, 0.0},
                             {0.0, 0.0, 6.0, 0.0},
                             {0.0, 0.0, -6.0, 0.0}});
    auto res = classify_encoding(model);
    CHECK(res.label == EncodingResult::Label::Factorial);
    CHECK(res.factorial_fraction == 1.0);
    for (int y = 0; y < 4; ++y) {
        REQUIRE(res.active[y]);
        CHECK(res.rho[y] < 0.05);
    }
}

TEST_CASE("classify_encoding: joint when codes depend on both angles") {
    // symmetric in the two circles, so the marginal variances match
    Svq model = torus_model({{6.0, 0.0, 6.0, 0.0},
                             {-6.0, 0.0, -6.0, 0.0},
                             {0.0, 6.0, 0.0, 6.0},
                             {0.0, -6.0, 0.0, -6.0}});
    auto res = classify_encoding(model);
    CHECK(res.label == EncodingResult::Label::Joint);
    CHECK(res.factorial_fraction == 0.0);
    for (int y = 0; y < 4; ++y) CHECK(res.rho[y] > 0.5);
}

TEST_CASE("classify_encoding: rejects non-torus models") {
    Svq model = trivial_model({0.0, 0.0});
    CHECK_THROWS_AS(classify_encoding(model), ConfigError);
}

TEST_CASE("arc_profile: peaked code and uniform code") {
    Codebook cb;
    cb.dim = 2;
    cb.recon = {{1.0, 0.0}, {-1.0, 0.0}};
    ResponseModel resp;
    resp.weights = {{8.0, 0.0}, {-8.0, 0.0}};
    resp.biases = {0.0, 0.0};
    Svq model{std::move(cb), std::move(resp), Topology::ring(2, 2),
              LeakageKernel::identity(2)};

    auto prof = arc_profile(model, 0, 512);
    REQUIRE(prof.prob.size() == 512);
    // peak at theta = 0, trough at theta = pi
    CHECK(prof.prob[0] == *std::max_element(prof.prob.begin(), prof.prob.end()));
    CHECK(prof.prob[256] == *std::min_element(prof.prob.begin(), prof.prob.end()));
    CHECK(prof.width > 0.0);
    CHECK(prof.width < 2.0 * M_PI);
    // symmetry about theta = 0
    CHECK(prof.prob[10] == Catch::Approx(prof.prob[502]).epsilon(1e-9));

    // zero-weight model: flat profile covers the whole circle
    Svq flat = trivial_model({0.0, 0.0});
    auto flat_prof = arc_profile(flat, 0, 256);
    CHECK(flat_prof.width == Catch::Approx(2.0 * M_PI));
}

TEST_CASE("arc_profile: rejects non-circle models") {
    Svq model = torus_model({{1.0, 0.0, 0.0, 0.0}});
    CHECK_THROWS_AS(arc_profile(model, 0), ConfigError);
}

TEST_CASE("localization_of_row: closed-form cases") {
    // one-hot: fully localized
    auto one_hot = localization_of_row({0.0, 0.0, 1.0, 0.0, 0.0, 0.0});
    CHECK(one_hot.participation == Catch::Approx(1.0));
    CHECK(one_hot.runs == 1);

    // constant: fully delocalized, a single degenerate region
    auto flat = localization_of_row(Vec(8, 0.7));
    CHECK(flat.participation == Catch::Approx(8.0));
    CHECK(flat.runs == 1);

    // two separated unit bumps
    auto two = localization_of_row({0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0});
    CHECK(two.participation == Catch::Approx(2.0));
    CHECK(two.runs == 2);

    // bump wrapping around the boundary counts once
    auto wrapped = localization_of_row({1.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.2, 1.0});
    CHECK(wrapped.runs == 1);
}

TEST_CASE("match_waveforms: recovers shifted references") {
    const int dim = 32;
    const Vec sine = waveform_sine(dim);
    const Vec square = waveform_square(dim);

    Codebook cb;
    cb.dim = dim;
    cb.recon.assign(2, Vec(dim));
    for (int t = 0; t < dim; ++t) {
        cb.recon[0][t] = sine[(t + 5) % dim];       // shifted copy of reference 0
        cb.recon[1][t] = 2.0 * square[(t + 11) % dim]; // scaled+shifted copy of 1
    }
    auto matches = match_waveforms(cb, {sine, square});
    CHECK(matches[0].reference == 0);
    CHECK(matches[0].correlation == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(matches[0].shift == 5);
    CHECK(matches[1].reference == 1);
    CHECK(matches[1].correlation == Catch::Approx(1.0).epsilon(1e-9));
    // the square wave has period 8, so shift 11 aliases to the smallest
    // equivalent shift
    CHECK(matches[1].shift == 11 % 8);
}

TEST_CASE("match_waveforms: dimension mismatch is rejected") {
    Codebook cb;
    cb.dim = 16;
    cb.recon = {Vec(16, 0.0)};
    CHECK_THROWS_AS(match_waveforms(cb, {Vec(8, 0.0)}), ConfigError);
}

TEST_CASE("topographic_order: smooth ring embedding beats a shuffled one") {
    const int m = 16;
    const Topology topo = Topology::ring(m, 1);
    Codebook smooth;
    smooth.dim = 2;
    smooth.recon.assign(m, Vec(2));
    for (int y = 0; y < m; ++y)
        smooth.recon[y] = {std::cos(2.0 * M_PI * y / m), std::sin(2.0 * M_PI * y / m)};
    const double ordered = topographic_order(smooth, topo, 1);
    CHECK(ordered > 0.5);

    Codebook shuffled = smooth;
    Rng rng(7);
    for (int y = m - 1; y > 0; --y)
        std::swap(shuffled.recon[y], shuffled.recon[rng.uniform_int(y + 1)]);
    CHECK(topographic_order(shuffled, topo, 1) < ordered - 0.3);
}

TEST_CASE("encode_image: single-code model reconstructs its row everywhere") {
    Svq model = trivial_model({0.6, 0.6, 0.6, 0.6}); // window 2x2
    ImageData img(6, 6);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) img.at(r, c) = 0.1 * r + 0.01 * c;

    auto coding = encode_image(model, img, 2, 1);
    CHECK(coding.activity.width == 1);
    CHECK(coding.activity.height == 1);
    CHECK(coding.activity.pixels[0] == Catch::Approx(1.0));
    CHECK(coding.sparsity == Catch::Approx(1.0));
    REQUIRE(coding.reconstruction.pixels.size() == img.pixels.size());
    for (double v : coding.reconstruction.pixels) CHECK(v == Catch::Approx(0.6));
}

TEST_CASE("encode_image: argument validation") {
    Svq model = trivial_model({0.0, 0.0, 0.0, 0.0});
    ImageData img(4, 4);
    CHECK_THROWS_AS(encode_image(model, img, 8, 1), ConfigError);
    CHECK_THROWS_AS(encode_image(model, img, 2, 0), ConfigError);
    CHECK_THROWS_AS(encode_image(model, img, 3, 1), ConfigError); // 9 != dim 4
}

TEST_CASE("dominance_map: codes split between a bright and a dark image") {
    // code 0 responds to bright patches, code 1 to dark ones
    Codebook cb;
    cb.dim = 4;
    cb.recon.assign(2, Vec(4, 0.0));
    ResponseModel resp;
    resp.weights = {Vec(4, 3.0), Vec(4, -3.0)};
    resp.biases = {-6.0, 6.0};
    Svq model{std::move(cb), std::move(resp), Topology::line(2, 1),
              LeakageKernel::identity(2)};

    ImageData bright(8, 8, 1.0), dark(8, 8, 0.0);
    auto res = dominance_map(model, bright, dark, 2, 200, 3);
    CHECK(res.label == std::vector<int>{1, -1});
    CHECK(res.contiguity == 0.0); // the single adjacent pair disagrees
    CHECK(res.map.pixels == std::vector<double>{1.0, 0.0});

    // a shared response gain cancels: both codes fire harder on the bright
    // image, but code 1 is relatively more dark-tolerant, so the competitive
    // posterior labels it with the dark image
    model.response.weights = {Vec(4, 3.0), Vec(4, 2.0)};
    model.response.biases = {-6.0, -4.0};
    auto rel = dominance_map(model, bright, dark, 2, 200, 3);
    CHECK(rel.label == std::vector<int>{1, -1});
    CHECK(rel.contiguity == 0.0);

    // identical codes share a label, giving full contiguity
    model.response.weights = {Vec(4, 3.0), Vec(4, 3.0)};
    model.response.biases = {-6.0, -6.0};
    auto same = dominance_map(model, bright, dark, 2, 200, 3);
    CHECK(same.label[0] == same.label[1]);
    CHECK(same.contiguity == 1.0);
}

TEST_CASE("response_stream and dominant_period") {
    ResponseModel resp;
    resp.weights = {{2.0, -1.0}};
    resp.biases = {0.5};
    std::vector<Vec> inputs = {{1.0, 1.0}, {0.0, 2.0}};
    auto stream = response_stream(resp, 0, inputs);
    REQUIRE(stream.size() == 2);
    CHECK(stream[0] == Catch::Approx(1.5));
    CHECK(stream[1] == Catch::Approx(-1.5));

    // pure sinusoid of period 17
    std::vector<double> series(600);
    for (int t = 0; t < 600; ++t) series[t] = std::sin(2.0 * M_PI * t / 17.0);
    CHECK(dominant_period(series, 5, 40) == Catch::Approx(17.0));

    // spike train of period 8
    std::vector<double> spikes(400, 0.0);
    for (int t = 0; t < 400; t += 8) spikes[t] = 1.0;
    CHECK(dominant_period(spikes, 3, 30) == Catch::Approx(8.0));

    CHECK_THROWS_AS(dominant_period(series, 0, 40), ConfigError);
    CHECK_THROWS_AS(dominant_period(series, 5, 600), ConfigError);
}

TEST_CASE("stability_sweep: structure and failure accounting") {
    TrainConfig base;
    base.steps = 25;
    base.batch_size = 8;
    base.trace_every = 1000;
    base.seed = 11;

    auto table = stability_sweep({2, 4}, {1, 3}, 2, base);
    REQUIRE(table.cells.size() == 4);
    for (const auto& c : table.cells) {
        CHECK(c.joint + c.factorial + c.mixed + c.failed == 2);
        CHECK(c.factorial_fraction >= 0.0);
        CHECK(c.factorial_fraction <= 1.0);
    }
    CHECK(table.cells[0].m == 2);
    CHECK(table.cells[0].n == 1);
    CHECK(table.cells[3].m == 4);
    CHECK(table.cells[3].n == 3);

    // an absurd learning rate makes every run fail without aborting the sweep
    TrainConfig broken = base;
    broken.rate = 1e5;
    broken.rate_end = 1e5;
    auto failed = stability_sweep({3}, {2}, 2, broken);
    REQUIRE(failed.cells.size() == 1);
    CHECK(failed.cells[0].failed == 2);
    CHECK(failed.cells[0].factorial_fraction == 0.0);

    const std::string path = "stability_test.csv";
    table.write_csv(path);
    const std::string text = read_file(path);
    CHECK(text.rfind("M,n,seeds,joint,factorial,mixed,failed,factorial_fraction", 0) == 0);
    std::remove(path.c_str());
}
