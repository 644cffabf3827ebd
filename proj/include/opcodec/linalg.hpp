#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "opcodec/errors.hpp"
#include "opcodec/matrix.hpp"

namespace opcodec::linalg {

/// A column j with residual norm below this fraction of its own norm is
/// treated as linearly dependent on columns 1..j-1.
inline constexpr double kDependenceTol = 1e-10;

/// Orthogonality loss that triggers a single reorthogonalization pass.
/// Classical Gram-Schmidt is the theoretical form kept here; one extra pass
/// restores orthogonality when cancellation has eaten into it.
inline constexpr double kReorthTol = 1e-8;

inline constexpr double kEigOffdiagTol = 1e-12;   // times trace
inline constexpr double kEigSymTol = 1e-8;        // times max(1, max|A|)
inline constexpr int kEigMaxSweeps = 10000;

struct GramSchmidtResult {
    /// Orthonormalized columns.
    Mat basis;
    /// Upper triangular. Column j holds the projection weights ⟨x_j, x̄_i⟩
    /// above the diagonal and the normalization divisor on it, so the inputs
    /// reconstruct as x_j = Σ_{i<j} coeffs(i,j)·x̄_i + coeffs(j,j)·x̄_j. For
    /// the exact recursion the diagonal equals ‖ρ(x_j)‖; for the smoothed
    /// one it is √(‖ρ(x_j)‖² + ε²).
    Mat coeffs;
    /// ‖ρ(x_j)‖ before normalization.
    Vec residual_norms;
};

/// σ_ε: x ↦ x / √(‖x‖² + ε²). With ε = 0 this is exact normalization and a
/// zero input is rejected; with ε > 0 it is defined everywhere and maps the
/// zero vector to itself.
inline Vec smoothed_normalize(const Vec& x, double epsilon) {
    const double n = norm2(x);
    if (epsilon == 0.0 && n == 0.0)
        throw ZeroVector("cannot normalize the zero vector with epsilon = 0");
    const double divisor = std::sqrt(n * n + epsilon * epsilon);
    return scaled(x, 1.0 / divisor);
}

namespace detail {

/// Shared recursion behind gram_schmidt and gram_schmidt_network.
/// exact = true uses plain normalization and raises DependentInput on
/// (near-)dependent columns; otherwise σ_ε is used and nothing breaks down.
inline GramSchmidtResult gs_core(const Mat& vectors, double epsilon, bool exact) {
    const std::size_t m = vectors.rows();
    const std::size_t n = vectors.cols();
    if (n == 0 || m == 0)
        throw DimensionMismatch("gram_schmidt requires a nonempty matrix");
    if (exact && n > m)
        throw DependentInput("more columns than rows: columns cannot be independent");

    GramSchmidtResult out;
    out.basis = Mat(m, n);
    out.coeffs = Mat(n, n);
    out.residual_norms.assign(n, 0.0);

    std::vector<Vec> basis_cols;
    basis_cols.reserve(n);

    for (std::size_t j = 0; j < n; ++j) {
        const Vec xj = vectors.col(j);
        const double xj_norm = norm2(xj);
        Vec v = xj;
        Vec c(j, 0.0);
        // classical step: weights taken against the original column
        for (std::size_t i = 0; i < j; ++i) {
            c[i] = dot(xj, basis_cols[i]);
            axpy(-c[i], basis_cols[i], v);
        }
        // One reorthogonalization pass if cancellation left a component: either
        // a measurable loss remains, or the norm dropped enough that the
        // classical weights cannot be trusted (the usual selective criterion).
        if (j > 0) {
            double vnorm = norm2(v);
            if (vnorm > 0.0) {
                double loss = 0.0;
                for (std::size_t i = 0; i < j; ++i)
                    loss = std::max(loss, std::abs(dot(v, basis_cols[i])));
                if (loss > kReorthTol * vnorm || vnorm < 0.5 * xj_norm) {
                    for (std::size_t i = 0; i < j; ++i) {
                        const double d = dot(v, basis_cols[i]);
                        axpy(-d, basis_cols[i], v);
                        c[i] += d;
                    }
                }
            }
        }
        const double rho = norm2(v);
        out.residual_norms[j] = rho;

        double divisor;
        if (exact) {
            if (xj_norm == 0.0 || rho < kDependenceTol * xj_norm)
                throw DependentInput("column " + std::to_string(j + 1) +
                                     " is linearly dependent on its predecessors");
            divisor = rho;
        } else {
            divisor = std::sqrt(rho * rho + epsilon * epsilon);
        }

        Vec q = scaled(v, 1.0 / divisor);
        for (std::size_t i = 0; i < j; ++i) out.coeffs(i, j) = c[i];
        out.coeffs(j, j) = divisor;
        out.basis.set_col(j, q);
        basis_cols.push_back(std::move(q));
    }
    return out;
}

}  // namespace detail

/// Exact Gram-Schmidt orthonormalization of the columns.
inline GramSchmidtResult gram_schmidt(const Mat& vectors) {
    return detail::gs_core(vectors, 0.0, true);
}

/// The same recursion with σ replaced by σ_ε. Tolerates dependent columns
/// (the offending column comes out as a near-zero vector) and converges to
/// gram_schmidt as ε → 0 on independent input.
inline GramSchmidtResult gram_schmidt_network(const Mat& vectors, double epsilon) {
    if (!(epsilon > 0.0))
        throw ZeroVector("gram_schmidt_network requires epsilon > 0");
    return detail::gs_core(vectors, epsilon, false);
}

struct QrResult {
    Mat q;
    Mat r;
};

/// QR decomposition in Gram-Schmidt form: Q is exactly the gram_schmidt
/// basis of A's columns (same code path) and R its coefficient matrix, with
/// R_jj = ‖ρ(a_j)‖ > 0 and R_ij = ⟨a_j, ā_i⟩ for i < j.
inline QrResult qr_decompose(const Mat& a) {
    GramSchmidtResult gs = gram_schmidt(a);
    return QrResult{std::move(gs.basis), std::move(gs.coeffs)};
}

struct EigResult {
    /// Orthonormal eigenvector columns, ordered to match values.
    Mat vectors;
    /// Eigenvalues sorted descending.
    Vec values;
};

namespace detail {

inline double wilkinson_shift(double a, double b, double c) {
    if (b == 0.0) return c;
    const double delta = (a - c) / 2.0;
    const double sgn = (delta >= 0.0) ? 1.0 : -1.0;
    return c - sgn * b * b / (std::abs(delta) + std::hypot(delta, b));
}

inline void symmetrize_block(Mat& m, std::size_t sz) {
    for (std::size_t i = 0; i < sz; ++i)
        for (std::size_t j = i + 1; j < sz; ++j) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = avg;
            m(j, i) = avg;
        }
}

}  // namespace detail

/// Full eigendecomposition of a symmetric positive semidefinite matrix by
/// shifted QR iteration, where each QR factorization is the Gram-Schmidt
/// form above. Deflates converged rows from the bottom; stops when every
/// off-diagonal magnitude is below kEigOffdiagTol·trace.
///
/// A shift that lands exactly on an eigenvalue makes the shifted matrix
/// singular, which the Gram-Schmidt QR reports as DependentInput; the shift
/// is then nudged and the step retried.
inline EigResult symmetric_eig(const Mat& a) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n)
        throw DimensionMismatch("symmetric_eig requires a square matrix");

    const double scale = std::max(1.0, max_abs(a));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > kEigSymTol * scale)
                throw NotSymmetric("matrix is not symmetric within tolerance");

    Mat m = a;
    detail::symmetrize_block(m, n);
    Mat v = Mat::identity(n);

    const double tr = trace(m);
    const double tol = kEigOffdiagTol * std::max(tr, 0.0);

    auto row_converged = [&](std::size_t r) {
        for (std::size_t jj = 0; jj < r; ++jj)
            if (std::abs(m(r, jj)) > tol) return false;
        return true;
    };

    std::size_t active = n;
    int sweeps = 0;
    if (tr > 0.0) {
        while (active > 1) {
            while (active > 1 && row_converged(active - 1)) {
                for (std::size_t jj = 0; jj + 1 < active; ++jj) {
                    m(active - 1, jj) = 0.0;
                    m(jj, active - 1) = 0.0;
                }
                --active;
            }
            if (active <= 1) break;

            double mu = detail::wilkinson_shift(m(active - 2, active - 2),
                                                m(active - 1, active - 2),
                                                m(active - 1, active - 1));
            QrResult qr;
            bool factored = false;
            for (int attempt = 0; attempt < 6 && !factored; ++attempt) {
                Mat shifted(active, active);
                for (std::size_t i = 0; i < active; ++i)
                    for (std::size_t j = 0; j < active; ++j)
                        shifted(i, j) = m(i, j) - (i == j ? mu : 0.0);
                try {
                    qr = qr_decompose(shifted);
                    factored = true;
                } catch (const DependentInput&) {
                    // shift hit an eigenvalue; nudge it off
                    mu += (std::abs(mu) + tr / static_cast<double>(n)) * 1e-8 *
                          std::pow(10.0, attempt);
                }
            }
            if (!factored)
                throw NoConvergence("QR step kept breaking down near an exact shift");

            // M ← RQ + μI on the active block, eigenvector accumulation V ← VQ
            Mat rq = qr.r * qr.q;
            for (std::size_t i = 0; i < active; ++i)
                for (std::size_t j = 0; j < active; ++j)
                    m(i, j) = rq(i, j) + (i == j ? mu : 0.0);
            detail::symmetrize_block(m, active);

            Mat vc(n, active);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < active; ++j) vc(i, j) = v(i, j);
            Mat vq = vc * qr.q;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < active; ++j) v(i, j) = vq(i, j);

            if (++sweeps > kEigMaxSweeps)
                throw NoConvergence("eigenvalue iteration exceeded " +
                                    std::to_string(kEigMaxSweeps) + " sweeps");
        }
    }

    // sort descending, then fix signs so the largest-magnitude entry of each
    // eigenvector is positive (reproducible tables)
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return m(i, i) > m(j, j); });

    EigResult out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.values[j] = m(src, src);
        Vec col = v.col(src);
        std::size_t imax = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(col[i]) > std::abs(col[imax])) imax = i;
        if (col[imax] < 0.0)
            for (double& x : col) x = -x;
        out.vectors.set_col(j, col);
    }
    return out;
}

}  // namespace opcodec::linalg
