#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "opcodec/experiments.hpp"
#include "opcodec/hash.hpp"
#include "support/oracles.hpp"

using namespace opcodec;
using experiments::ExperimentConfig;

namespace {

constexpr double kPi = std::numbers::pi;

radon::RadonGeometry tiny_geom() {
    radon::RadonGeometry g;
    g.n_pix = 20;
    g.n_angles = 20;
    g.n_offsets = 20;
    g.t_samples = 40;
    return g;
}

}  // namespace

TEST_CASE("expected cluster ids follow the eigenspace dimensions") {
    const auto ids = experiments::expected_cluster_ids(12);
    REQUIRE(ids.size() == 49);
    CHECK(ids[0] == 1);
    CHECK(ids[1] == 2);
    CHECK(ids[2] == 3);
    CHECK(ids[3] == 3);
    CHECK(ids[4] == 4);
    CHECK(ids[48] == 13);
}

TEST_CASE("analytic training pairs reproduce the gamma clusters") {
    // 20 pairs for k <= 7 on the default grid; the learned eigenvalues must
    // cluster at 4 pi / (k+1) within the discretization tolerance
    ExperimentConfig cfg;
    cfg.k_max = 7;
    const auto sp = spectra::build_spectrum(cfg.k_max, cfg.geom);
    const auto training = experiments::analytic_training_set(sp);
    const auto learned = learner::encode(training);
    REQUIRE(learned.retained() == 20);

    const auto ids = experiments::expected_cluster_ids(cfg.k_max);
    for (std::size_t h = 0; h < learned.retained(); ++h) {
        const double expected = 4.0 * kPi / ids[h];
        CHECK(std::abs(learned.lambdas[h] - expected) / expected < 0.05);
    }
}

TEST_CASE("classification of analytic-input psi follows the table layout") {
    ExperimentConfig cfg;
    cfg.k_max = 7;
    const auto res = experiments::run_example1(cfg);

    CHECK(res.assignment.k_hat[0] == 1);  // psi_1 -> E^1
    CHECK(res.assignment.k_hat[1] == 2);  // psi_2 -> E^2
    CHECK(res.assignment.k_hat[2] == 3);  // psi_3 -> E^3
    CHECK(res.assignment.k_hat[3] == 3);  // psi_4 -> E^3
    // low-order reconstructions are tight
    CHECK(res.assignment.scores[0] < 0.05);
    CHECK(res.assignment.scores[1] < 0.05);
}

TEST_CASE("a synthetic psi equal to a basis function classifies exactly") {
    ExperimentConfig cfg;
    cfg.k_max = 4;
    cfg.geom = tiny_geom();
    const auto sp = spectra::build_spectrum(cfg.k_max, cfg.geom);
    const auto bases = spectra::eigenspace_bases_coords(sp);

    // v_{2,0} in quadrature coordinates lies in E^3 by definition
    Mat psis(cfg.geom.sino_size(), 1);
    psis.set_col(0, bases[2].col(0));
    const auto assignment = learner::classify(psis, bases);
    CHECK(assignment.k_hat[0] == 3);
    CHECK(assignment.scores[0] < 1e-10);
}

TEST_CASE("regression over an eigenspace basis recovers constructed coefficients") {
    ExperimentConfig cfg;
    cfg.k_max = 4;
    cfg.geom = tiny_geom();
    const auto sp = spectra::build_spectrum(cfg.k_max, cfg.geom);
    const auto bases = spectra::eigenspace_bases_coords(sp);

    SECTION("half of v_00") {
        const Vec psi = scaled(bases[0].col(0), 0.5);
        const auto reg = learner::regress(psi, bases[0]);
        CHECK(reg.nu[0] == Catch::Approx(0.5).margin(1e-12));
        CHECK(reg.residual_norm < 1e-12);
    }
    SECTION("v_20 + v_22 over E^3") {
        Vec psi = bases[2].col(0);
        axpy(1.0, bases[2].col(1), psi);
        const auto reg = learner::regress(psi, bases[2]);
        CHECK(reg.nu[0] == Catch::Approx(1.0).margin(1e-8));
        CHECK(reg.nu[1] == Catch::Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("data of any spanned image is a coefficient replay") {
    // with data columns generated by the discrete transform, the learned
    // expansion reproduces the transform of any image in the training span
    const auto g = tiny_geom();
    phantoms::PhantomSpec spec;
    spec.n_images = 6;
    spec.seed = 2025;
    const auto images = phantoms::generate(spec, g);

    learner::TrainingSet training;
    training.images = Mat(g.image_size(), images.size());
    training.data = Mat(g.sino_size(), images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        training.images.set_col(i, radon::image_to_coords(images[i], g));
        training.data.set_col(
            i, radon::sinogram_to_coords(radon::radon_forward(images[i], g), g));
    }
    const auto learned = learner::encode(training);

    Vec x(g.image_size(), 0.0);
    for (std::size_t i = 0; i < images.size(); ++i)
        axpy(0.5 - 0.2 * double(i), training.images.col(i), x);

    Vec predicted(g.sino_size(), 0.0);
    for (std::size_t i = 0; i < images.size(); ++i)
        axpy(dot(x, learned.ortho_images.basis.col(i)), learned.data_ortho.col(i),
             predicted);

    const Vec truth = radon::sinogram_to_coords(
        radon::radon_forward(radon::image_from_coords(x, g), g), g);
    Vec diff = predicted;
    axpy(-1.0, truth, diff);
    CHECK(norm2(diff) / norm2(truth) < 1e-8);
}

TEST_CASE("run_example2 on a small grid") {
    ExperimentConfig cfg;
    cfg.geom = tiny_geom();
    cfg.k_max = 7;
    cfg.n_images = 8;
    cfg.seed = 7;
    const auto out =
        std::filesystem::temp_directory_path() / "opcodec_example2_test";
    std::filesystem::remove_all(out);
    cfg.out_dir = out.string();

    const auto res = experiments::run_example2(cfg);
    REQUIRE(res.learned.retained() == 8);

    // orthonormality of the learned x-bar columns
    const Mat gram = transpose_times(res.learned.ortho_images.basis,
                                     res.learned.ortho_images.basis);
    for (std::size_t i = 0; i < gram.rows(); ++i)
        for (std::size_t j = 0; j < gram.cols(); ++j)
            CHECK(std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)) < 1e-10);

    CHECK(std::filesystem::exists(out / "classification.csv"));
    CHECK(std::filesystem::exists(out / "ek_table.csv"));
    CHECK(std::filesystem::exists(out / "learned" / "psis.csv"));
    CHECK(std::filesystem::exists(out / "phantoms" / "image_001.csv"));
    CHECK(std::filesystem::exists(out / "xbar_gallery" / "xbar_001.csv"));
    CHECK(std::filesystem::exists(out / "ybar_gallery" / "ybar_001.csv"));

    // deterministic classification: rerun and compare bytes, then pin the
    // digest with a golden file created on the first run
    const std::string table = io::read_file(out / "classification.csv");
    const auto out2 =
        std::filesystem::temp_directory_path() / "opcodec_example2_test_rerun";
    std::filesystem::remove_all(out2);
    cfg.out_dir = out2.string();
    experiments::run_example2(cfg);
    CHECK(io::read_file(out2 / "classification.csv") == table);

    const std::filesystem::path golden =
        std::filesystem::path(OPCODEC_GOLDEN_DIR) / "example2_classification.sha1";
    const std::string digest = git_blob_sha1(table);
    if (!std::filesystem::exists(golden)) {
        io::write_file(golden, digest + "\n");
        WARN("golden file created: " + golden.string());
    }
    std::string expected = io::read_file(golden);
    while (!expected.empty() && (expected.back() == '\n' || expected.back() == '\r'))
        expected.pop_back();
    CHECK(digest == expected);
}

TEST_CASE("run_example1 writes its artifact set") {
    ExperimentConfig cfg;
    cfg.geom = tiny_geom();
    cfg.k_max = 7;
    cfg.self_check = true;
    const auto out = std::filesystem::temp_directory_path() / "opcodec_example1_test";
    std::filesystem::remove_all(out);
    cfg.out_dir = out.string();

    const auto res = experiments::run_example1(cfg);
    CHECK(res.learned.retained() == 20);
    for (const char* name :
         {"classification.csv", "ek_table.csv", "regression.csv", "eigenvalues.csv",
          "geometry.cfg", "plot_gallery.gp"}) {
        CHECK(std::filesystem::exists(out / name));
    }
    CHECK(std::filesystem::exists(out / "spectrum" / "indices.csv"));
    CHECK(std::filesystem::exists(out / "spectrum" / "v_funcs.csv"));
    CHECK(std::filesystem::exists(out / "learned" / "psis.csv"));
    CHECK(std::filesystem::exists(out / "psi_gallery" / "psi_001.csv"));

    // learned export loads back unchanged
    const auto loaded = experiments::detail::load_learned(out / "learned");
    CHECK(loaded.retained() == res.learned.retained());
    CHECK(oracles::max_abs_diff(loaded.psis, res.learned.psis) == 0.0);
}

TEST_CASE("decode test runs on a coarse grid") {
    ExperimentConfig cfg;
    cfg.geom.n_pix = 24;
    cfg.geom.n_angles = 26;
    cfg.geom.n_offsets = 24;
    cfg.geom.t_samples = 48;
    cfg.k_max = 12;
    const auto res = experiments::run_decode_test(cfg, 1);
    CHECK(res.rel_l2_error < 0.9);
    CHECK(res.rel_l2_error >= 0.0);
    CHECK(res.x_true.size() == cfg.geom.image_size());
    CHECK_THROWS_AS(experiments::run_decode_test(cfg, 3), DimensionMismatch);

    ExperimentConfig low = cfg;
    low.k_max = 7;
    CHECK_THROWS_AS(experiments::run_decode_test(low, 1), DimensionMismatch);
}
