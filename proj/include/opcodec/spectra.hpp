#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "opcodec/matrix.hpp"
#include "opcodec/radon.hpp"

namespace opcodec::spectra {

/// Index of a singular triple; membership requires k + l even.
struct SpectralIndex {
    int k = 0;
    int l = 0;
    /// Angular order of the harmonic factor.
    int order() const { return k - 2 * l; }
};

/// Chebyshev polynomial of the second kind via the three-term recurrence
/// C₀ = 1, C₁ = 2s, C_{k+1} = 2s·C_k − C_{k−1}.
inline double chebyshev_u(int k, double s) {
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * s;
    for (int i = 1; i < k; ++i) {
        const double next = 2.0 * s * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Real orthonormal angular basis on S¹ with uniform measure:
/// n = 0 ↦ 1/√(2π), n > 0 ↦ cos(nφ)/√π, n < 0 ↦ sin(|n|φ)/√π.
inline double circular_harmonic(int n, double phi) {
    static const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    if (n == 0) return inv_sqrt_2pi;
    if (n > 0) return inv_sqrt_pi * std::cos(n * phi);
    return inv_sqrt_pi * std::sin(-n * phi);
}

/// Singular value of the unit-disk Radon transform: γ_k = √(4π/(k+1)),
/// independent of l.
inline double gamma_value(int k) {
    return std::sqrt(4.0 * std::numbers::pi / (k + 1));
}

/// Analytical singular system discretized on a geometry. Data-side functions
/// v_{k,l} = c·w·C_k·Y_{k−2l} are normalized numerically in the weighted
/// inner product; image-side u_{k,l} = R*[v_{k,l}]/γ_k use the discrete
/// adjoint, keeping both sides consistently discretized.
struct AnalyticalSpectrum {
    radon::RadonGeometry geom;
    int k_max = 0;
    std::vector<SpectralIndex> indices;  // lexicographic by (k, l)
    Vec gammas;                          // γ_k per index
    Mat v_funcs;                         // sino_size × count
    Mat u_funcs;                         // image_size × count
    /// Scale from the raw samples w(s)·C_k(s)·{1, cos(nφ), sin(|n|φ)} to the
    /// normalized column: v = norm_const · raw.
    Vec norm_consts;
    /// Positions (into indices) grouped by distinct singular value; entry
    /// e holds E^{e+1}, i.e. the eigenspace of γ_k with k = e.
    std::vector<std::vector<int>> eigenspaces;
    Vec distinct_gammas;  // Γ = {γ_0, ..., γ_kmax}

    std::size_t count() const { return indices.size(); }
};

/// Raw (unnormalized) sample of v at one grid point: the harmonic carries no
/// normalization constant here, matching how the functions are usually
/// plotted.
inline double v_raw_sample(const SpectralIndex& idx, double s, double phi) {
    const double w = std::sqrt(1.0 - s * s);
    const int n = idx.order();
    double ang;
    if (n == 0)
        ang = 1.0;
    else if (n > 0)
        ang = std::cos(n * phi);
    else
        ang = std::sin(-n * phi);
    return w * chebyshev_u(idx.k, s) * ang;
}

inline AnalyticalSpectrum build_spectrum(int k_max, const radon::RadonGeometry& geom) {
    geom.validate();
    if (k_max < 0)
        throw DimensionMismatch("k_max must be nonnegative");
    // harmonics up to order k_max must be resolvable on the angle grid;
    // at 2k = n_angles the sine branch vanishes identically
    if (2 * k_max >= geom.n_angles)
        throw GeometryMismatch("angle grid too coarse for k_max (need n_angles > 2*k_max)");

    AnalyticalSpectrum sp;
    sp.geom = geom;
    sp.k_max = k_max;
    sp.eigenspaces.resize(k_max + 1);
    sp.distinct_gammas.resize(k_max + 1);
    for (int k = 0; k <= k_max; ++k) sp.distinct_gammas[k] = gamma_value(k);

    std::vector<Vec> v_cols, u_cols;
    for (int k = 0; k <= k_max; ++k) {
        for (int l = 0; l <= k; ++l) {
            if ((k + l) % 2 != 0) continue;
            const SpectralIndex idx{k, l};
            Vec raw(geom.sino_size());
            for (int a = 0; a < geom.n_angles; ++a) {
                const double phi = geom.angle(a);
                for (int j = 0; j < geom.n_offsets; ++j)
                    raw[geom.sino_index(a, j)] = v_raw_sample(idx, geom.offset(j), phi);
            }
            const double nrm = radon::weighted_norm(raw, geom);
            const double c = 1.0 / nrm;
            Vec v = scaled(raw, c);
            const double gamma = gamma_value(k);
            Vec u = scaled(radon::radon_adjoint(v, geom), 1.0 / gamma);

            sp.eigenspaces[k].push_back(static_cast<int>(sp.indices.size()));
            sp.indices.push_back(idx);
            sp.gammas.push_back(gamma);
            sp.norm_consts.push_back(c);
            v_cols.push_back(std::move(v));
            u_cols.push_back(std::move(u));
        }
    }
    sp.v_funcs = Mat::from_cols(v_cols);
    sp.u_funcs = Mat::from_cols(u_cols);
    return sp;
}

/// Residuals ‖R u_{k,l} − γ_k v_{k,l}‖_w / γ_k per index; quantifies how well
/// the discretized transform reproduces the analytic singular relation.
inline Vec verify_singular_relation(const AnalyticalSpectrum& sp,
                                    const radon::RadonGeometry& geom) {
    if (!(sp.geom == geom))
        throw GeometryMismatch("spectrum was built on a different geometry");
    Vec residuals(sp.count());
    for (std::size_t i = 0; i < sp.count(); ++i) {
        Vec ru = radon::radon_forward(sp.u_funcs.col(i), geom);
        axpy(-sp.gammas[i], sp.v_funcs.col(i), ru);
        residuals[i] = radon::weighted_norm(ru, geom) / sp.gammas[i];
    }
    return residuals;
}

/// Eigenspace bases as matrices of quadrature-coordinate columns (see
/// radon::sinogram_to_coords); in these coordinates the weighted inner
/// product is the plain dot product, which is what the learner's
/// classification and regression consume.
inline std::vector<Mat> eigenspace_bases_coords(const AnalyticalSpectrum& sp) {
    std::vector<Mat> bases;
    bases.reserve(sp.eigenspaces.size());
    for (const auto& members : sp.eigenspaces) {
        std::vector<Vec> cols;
        cols.reserve(members.size());
        for (int pos : members)
            cols.push_back(radon::sinogram_to_coords(sp.v_funcs.col(pos), sp.geom));
        bases.push_back(Mat::from_cols(cols));
    }
    return bases;
}

}  // namespace opcodec::spectra
