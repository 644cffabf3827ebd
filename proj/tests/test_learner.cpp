#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "opcodec/learner.hpp"
#include "support/oracles.hpp"

using namespace opcodec;
using learner::EncodeOptions;
using learner::LearnedSpectrum;
using learner::TrainingSet;

namespace {

TrainingSet make_training(const Mat& f, const Mat& images) {
    TrainingSet t;
    t.images = images;
    t.data = f * images;
    return t;
}

double ortho_defect(const Mat& q) {
    const Mat gram = transpose_times(q, q);
    double worst = 0.0;
    for (std::size_t i = 0; i < gram.rows(); ++i)
        for (std::size_t j = 0; j < gram.cols(); ++j)
            worst = std::max(worst, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
    return worst;
}

}  // namespace

TEST_CASE("encode recovers the identity operator") {
    Mat images(4, 4);
    for (std::size_t i = 0; i < 4; ++i) images(i, i) = 2.0;
    const auto learned = learner::encode(make_training(Mat::identity(4), images));
    REQUIRE(learned.retained() == 4);
    for (std::size_t l = 0; l < 4; ++l) {
        CHECK(learned.lambdas[l] == Catch::Approx(1.0));
        // psi_l is a standard basis vector up to order
        double maxentry = 0.0, total = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            maxentry = std::max(maxentry, std::abs(learned.psis(i, l)));
            total += learned.psis(i, l) * learned.psis(i, l);
        }
        CHECK(maxentry == Catch::Approx(1.0));
        CHECK(total == Catch::Approx(1.0));
    }
}

TEST_CASE("encode recovers a diagonal operator") {
    const Mat f{{3, 0}, {0, 1}};
    const auto learned = learner::encode(make_training(f, Mat::identity(2)));
    REQUIRE(learned.retained() == 2);
    CHECK(learned.gammas_learned[0] == Catch::Approx(3.0));
    CHECK(learned.gammas_learned[1] == Catch::Approx(1.0));
    CHECK(std::abs(learned.psis(0, 0)) == Catch::Approx(1.0));
    CHECK(std::abs(learned.psis(1, 1)) == Catch::Approx(1.0));
}

TEST_CASE("encode matches a direct SVD oracle on a seeded operator") {
    const Mat f = oracles::seeded_matrix(8, 8, 404);
    const Mat images = oracles::seeded_matrix(8, 8, 405);
    const auto learned = learner::encode(make_training(f, images));
    const auto svd = oracles::svd(f);
    REQUIRE(learned.retained() == 8);
    for (std::size_t l = 0; l < 8; ++l)
        CHECK(learned.gammas_learned[l] == Catch::Approx(svd.sigma[l]).margin(1e-8));
    CHECK(oracles::col_diff_up_to_sign(learned.psis, svd.u) < 1e-6);
    // the coefficient vectors reproduce psi through the orthonormalized data
    for (std::size_t l = 0; l < 8; ++l) {
        Vec lift = learned.data_ortho * learned.coeffs_c.col(l);
        axpy(-1.0, learned.psis.col(l), lift);
        CHECK(norm2(lift) < 1e-8);
    }
}

TEST_CASE("learned psi lie in the eigenspaces of a repeated-spectrum operator") {
    // operator with singular values (5, 3, 3, 2, 2, 2) built by construction
    const Mat qu = oracles::householder_qr(oracles::seeded_matrix(6, 6, 42)).q;
    const Mat qv = oracles::householder_qr(oracles::seeded_matrix(6, 6, 43)).q;
    const Vec sigma = {5, 3, 3, 2, 2, 2};
    Mat d(6, 6);
    for (std::size_t i = 0; i < 6; ++i) d(i, i) = sigma[i];
    const Mat f = qv * d * qu.transposed();

    const auto learned = learner::encode(make_training(f, oracles::seeded_matrix(6, 6, 44)));
    REQUIRE(learned.retained() == 6);

    auto eigenspace_residual = [&](std::size_t l, std::size_t lo, std::size_t hi) {
        // residual of psi_l after projecting onto span(qv columns lo..hi)
        Vec psi = learned.psis.col(l);
        Vec res = psi;
        for (std::size_t j = lo; j <= hi; ++j)
            axpy(-dot(psi, qv.col(j)), qv.col(j), res);
        return norm2(res);
    };
    CHECK(eigenspace_residual(0, 0, 0) < 1e-6);
    CHECK(eigenspace_residual(1, 1, 2) < 1e-6);
    CHECK(eigenspace_residual(2, 1, 2) < 1e-6);
    for (std::size_t l = 3; l < 6; ++l) CHECK(eigenspace_residual(l, 3, 5) < 1e-6);
}

TEST_CASE("encode is invariant under rescaling the training images") {
    const Mat f = oracles::seeded_matrix(7, 5, 500);
    const Mat images = oracles::seeded_matrix(5, 5, 501);
    const auto base = learner::encode(make_training(f, images));

    for (double alpha : {2.5, -1.0}) {
        Mat scaled_images = images;
        for (double& v : scaled_images.entries()) v *= alpha;
        const auto learned = learner::encode(make_training(f, scaled_images));
        REQUIRE(learned.retained() == base.retained());
        for (std::size_t l = 0; l < base.retained(); ++l)
            CHECK(learned.lambdas[l] == Catch::Approx(base.lambdas[l]).margin(1e-10));
        CHECK(oracles::max_abs_diff(learned.psis, base.psis) < 1e-8);
    }
}

TEST_CASE("encode rejects dependent images in exact mode") {
    Mat images(4, 2);
    images(0, 0) = 1.0;
    images(0, 1) = 2.0;
    TrainingSet t;
    t.images = images;
    t.data = Mat(4, 2);
    t.data(0, 0) = 1.0;
    t.data(0, 1) = 2.0;
    CHECK_THROWS_AS(learner::encode(t), DependentInput);
}

TEST_CASE("encode reports a degenerate data Gram matrix") {
    // operator with a nullspace hit by the training span
    const Mat f{{1, 0}, {0, 0}};
    CHECK_THROWS_AS(learner::encode(make_training(f, Mat::identity(2))), DegenerateData);
}

TEST_CASE("smoothed encode converges to the exact one") {
    const Mat f = oracles::seeded_matrix(6, 4, 600);
    const Mat images = oracles::seeded_matrix(4, 4, 601);
    const auto exact = learner::encode(make_training(f, images));

    double prev = 1e300;
    for (double eps : {1e-4, 1e-6, 1e-8}) {
        const auto smoothed = learner::encode(make_training(f, images), EncodeOptions{eps});
        REQUIRE(smoothed.retained() == exact.retained());
        double dev = oracles::max_abs_diff(smoothed.psis, exact.psis);
        for (std::size_t l = 0; l < exact.retained(); ++l)
            dev = std::max(dev, std::abs(smoothed.lambdas[l] - exact.lambdas[l]));
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("smoothed encode tolerates dependent training images") {
    Mat images(4, 3);
    images(0, 0) = 1.0;
    images(0, 1) = 2.0;  // dependent on column 0
    images(1, 2) = 1.0;
    Mat data(5, 3);
    data(0, 0) = 1.0;
    data(0, 1) = 2.0;
    data(1, 2) = 3.0;
    TrainingSet t{images, data};
    const auto learned = learner::encode(t, EncodeOptions{1e-3});
    // the dependent direction carries no new information and is dropped
    CHECK(learned.retained() >= 1);
    CHECK(learned.retained() < 3);
    CHECK(ortho_defect(learned.psis) < 1e-8);
}

TEST_CASE("encode validates training dimensions") {
    TrainingSet t;
    t.images = Mat(3, 2);
    t.data = Mat(4, 3);
    CHECK_THROWS_AS(learner::encode(t), DimensionMismatch);
    t.data = Mat(1, 2);  // more samples than data dimensions
    CHECK_THROWS_AS(learner::encode(t), DimensionMismatch);
}

TEST_CASE("regress recovers coefficients over a basis") {
    const Mat basis = oracles::householder_qr(oracles::seeded_matrix(10, 3, 700)).q;

    SECTION("scaled basis element") {
        const Vec psi = scaled(basis.col(0), 0.5);
        const auto reg = learner::regress(psi, basis);
        CHECK(reg.nu[0] == Catch::Approx(0.5).margin(1e-12));
        CHECK(std::abs(reg.nu[1]) < 1e-12);
        CHECK(reg.residual_norm < 1e-12);
    }
    SECTION("sum of two members") {
        Vec psi = basis.col(1);
        axpy(1.0, basis.col(2), psi);
        const auto reg = learner::regress(psi, basis);
        CHECK(reg.nu[0] == Catch::Approx(0.0).margin(1e-8));
        CHECK(reg.nu[1] == Catch::Approx(1.0).margin(1e-8));
        CHECK(reg.nu[2] == Catch::Approx(1.0).margin(1e-8));
    }
    SECTION("residual is orthogonal to the basis") {
        const Vec psi = oracles::seeded_vector(10, 701);
        const auto reg = learner::regress(psi, basis);
        for (std::size_t j = 0; j < basis.cols(); ++j)
            CHECK(std::abs(dot(reg.residual, basis.col(j))) < 1e-10);
        CHECK(reg.relative_residual <= 1.0);
    }
}

TEST_CASE("classify picks the best-fitting eigenspace") {
    const Mat q = oracles::householder_qr(oracles::seeded_matrix(12, 6, 800)).q;
    // three 2-dimensional spaces
    std::vector<Mat> bases;
    for (std::size_t e = 0; e < 3; ++e) {
        Mat b(12, 2);
        b.set_col(0, q.col(2 * e));
        b.set_col(1, q.col(2 * e + 1));
        bases.push_back(b);
    }
    Mat psis(12, 2);
    psis.set_col(0, q.col(2));  // exactly in space 2
    Vec mix = scaled(q.col(4), 0.8);
    axpy(0.6, q.col(5), mix);
    axpy(0.05, q.col(0), mix);  // mostly space 3 with a small contamination
    psis.set_col(1, mix);

    const auto assignment = learner::classify(psis, bases);
    CHECK(assignment.k_hat[0] == 2);
    CHECK(assignment.scores[0] < 1e-10);
    CHECK(assignment.k_hat[1] == 3);
    CHECK(assignment.scores[1] > 0.0);
    CHECK(assignment.scores[1] < 0.1);
}
