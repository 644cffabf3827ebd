#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "opcodec/errors.hpp"
#include "opcodec/linalg.hpp"
#include "opcodec/matrix.hpp"

namespace opcodec::learner {

/// Eigenpairs below this fraction of the largest eigenvalue are dropped.
inline constexpr double kLambdaCutoff = 1e-12;

/// Paired training columns (xᵢ, yᵢ) with yᵢ = F xᵢ for the unknown operator.
struct TrainingSet {
    Mat images;  // m̲ × N
    Mat data;    // m̄ × N

    std::size_t count() const { return images.cols(); }

    void validate() const {
        if (images.cols() != data.cols())
            throw DimensionMismatch("image and data column counts differ");
        if (images.cols() == 0)
            throw DimensionMismatch("empty training set");
        if (images.cols() > images.rows() || images.cols() > data.rows())
            throw DimensionMismatch(
                "sample count exceeds a space dimension; columns cannot be independent");
        if (!images.all_finite() || !data.all_finite())
            throw DimensionMismatch("training set contains non-finite entries");
    }
};

using OrthoBasis = linalg::GramSchmidtResult;

/// Output of the encoder: eigenpairs of A = Ȳ Ȳᵀ restricted to its nonzero
/// part, the learned singular values √λ, and the coefficient vectors c_l
/// with ψ_l = Ȳ c_l. The orthonormalized images and data are kept so the
/// decoder and the exports never need the raw training set again.
struct LearnedSpectrum {
    Mat psis;            // m̄ × r, orthonormal columns
    Vec lambdas;         // descending, all above the cutoff
    Vec gammas_learned;  // √λ
    Mat coeffs_c;        // N × r
    OrthoBasis ortho_images;
    Mat data_ortho;      // Ȳ, m̄ × N

    std::size_t retained() const { return lambdas.size(); }
    std::size_t data_dim() const { return psis.rows(); }
    std::size_t image_dim() const { return ortho_images.basis.rows(); }

    void validate() const {
        if (psis.cols() != lambdas.size() || coeffs_c.cols() != lambdas.size())
            throw DimensionMismatch("inconsistent learned spectrum");
        if (lambdas.empty())
            throw DegenerateSpectrum("learned spectrum has no retained eigenpairs");
        const double cutoff = kLambdaCutoff * lambdas.front();
        for (double l : lambdas)
            if (!(l > cutoff))
                throw DegenerateSpectrum("retained eigenvalue below the rank cutoff");
    }
};

struct EncodeOptions {
    /// 0 selects the exact Gram-Schmidt recursion; a positive value selects
    /// the smoothed σ_ε variant, which tolerates dependent images.
    double epsilon = 0.0;
};

/// The encoder. Orthonormalizes the image columns, replays the identical
/// coefficients on the data columns — ȳ_j = (y_j − Σ_{i<j} ⟨x_j, x̄_i⟩ ȳ_i) / d_j
/// — so no operator is ever applied, then eigendecomposes A = Ȳ Ȳᵀ through
/// the N × N Gram matrix ȲᵀȲ, whose eigenvectors lift as ψ = Ȳ c / √λ.
inline LearnedSpectrum encode(const TrainingSet& training, const EncodeOptions& opts = {}) {
    training.validate();
    const bool exact = opts.epsilon == 0.0;
    const std::size_t n = training.count();

    OrthoBasis ortho = exact ? linalg::gram_schmidt(training.images)
                             : linalg::gram_schmidt_network(training.images, opts.epsilon);

    // replay the image-side recursion on the data columns
    Mat ybar(training.data.rows(), n);
    for (std::size_t j = 0; j < n; ++j) {
        Vec y = training.data.col(j);
        for (std::size_t i = 0; i < j; ++i)
            axpy(-ortho.coeffs(i, j), ybar.col(i), y);
        const double d = ortho.coeffs(j, j);
        ybar.set_col(j, scaled(y, 1.0 / d));
    }

    Mat gram = transpose_times(ybar, ybar);
    linalg::EigResult eig = linalg::symmetric_eig(gram);

    const double lambda_max = eig.values.empty() ? 0.0 : eig.values.front();
    if (!(lambda_max > 0.0))
        throw DegenerateData("data Gram matrix has no positive eigenvalue");
    const double cutoff = kLambdaCutoff * lambda_max;

    std::size_t retained = 0;
    while (retained < n && eig.values[retained] > cutoff) ++retained;
    if (exact && retained < n)
        throw DegenerateData(
            "data Gram matrix is numerically singular: the operator annihilates "
            "part of the training span");

    LearnedSpectrum out;
    out.lambdas.assign(eig.values.begin(), eig.values.begin() + retained);
    out.gammas_learned.resize(retained);
    out.psis = Mat(training.data.rows(), retained);
    out.coeffs_c = Mat(n, retained);
    for (std::size_t l = 0; l < retained; ++l) {
        const double lambda = out.lambdas[l];
        out.gammas_learned[l] = std::sqrt(lambda);
        Vec c = scaled(eig.vectors.col(l), 1.0 / std::sqrt(lambda));
        Vec psi = ybar * c;
        // largest-magnitude entry positive, for reproducible tables
        std::size_t imax = 0;
        for (std::size_t i = 1; i < psi.size(); ++i)
            if (std::abs(psi[i]) > std::abs(psi[imax])) imax = i;
        if (psi[imax] < 0.0) {
            for (double& x : psi) x = -x;
            for (double& x : c) x = -x;
        }
        out.psis.set_col(l, psi);
        out.coeffs_c.set_col(l, c);
    }
    out.ortho_images = std::move(ortho);
    out.data_ortho = std::move(ybar);
    return out;
}

/// Least-squares fit of one vector against a (near-orthonormal) basis via
/// the basis Gram system. Inner products are plain dot products; callers
/// working in a weighted geometry pass vectors in quadrature coordinates.
struct Regression {
    Vec nu;           // coefficients over the basis columns
    Vec residual;     // psi − basis·nu, for plotting
    double residual_norm = 0.0;
    double relative_residual = 0.0;  // residual_norm / ‖psi‖, in [0, 1]
};

inline Regression regress(const Vec& psi, const Mat& basis) {
    if (basis.rows() != psi.size())
        throw DimensionMismatch("basis rows do not match vector length");
    Regression reg;
    reg.nu = solve_spd(transpose_times(basis, basis), transpose_times(basis, psi));
    reg.residual = psi;
    for (std::size_t j = 0; j < basis.cols(); ++j)
        axpy(-reg.nu[j], basis.col(j), reg.residual);
    reg.residual_norm = norm2(reg.residual);
    const double pn = norm2(psi);
    reg.relative_residual = pn > 0.0 ? reg.residual_norm / pn : 0.0;
    return reg;
}

/// Per-ψ eigenspace assignment: the space with the smallest projection
/// residual, the residual fraction as score, and the regression coefficients
/// over the winning basis.
struct EigenspaceAssignment {
    std::vector<int> k_hat;        // 1-based eigenspace id (E^1, E^2, ...)
    Vec scores;                    // relative residual in [0, 1]
    std::vector<Vec> coefficients; // ν over the assigned basis
};

inline EigenspaceAssignment classify(const Mat& psis, const std::vector<Mat>& bases) {
    if (bases.empty())
        throw DimensionMismatch("no eigenspace bases given");
    for (const Mat& b : bases)
        if (b.rows() != psis.rows())
            throw DimensionMismatch("eigenspace basis rows do not match psi length");

    EigenspaceAssignment out;
    out.k_hat.resize(psis.cols());
    out.scores.resize(psis.cols());
    out.coefficients.resize(psis.cols());
    for (std::size_t h = 0; h < psis.cols(); ++h) {
        const Vec psi = psis.col(h);
        int best = -1;
        Regression best_reg;
        for (std::size_t e = 0; e < bases.size(); ++e) {
            Regression reg = regress(psi, bases[e]);
            if (best < 0 || reg.relative_residual < best_reg.relative_residual) {
                best = static_cast<int>(e);
                best_reg = std::move(reg);
            }
        }
        out.k_hat[h] = best + 1;
        out.scores[h] = best_reg.relative_residual;
        out.coefficients[h] = std::move(best_reg.nu);
    }
    return out;
}

}  // namespace opcodec::learner
