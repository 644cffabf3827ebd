#pragma once

#include <algorithm>
#include <cstddef>

#include "opcodec/errors.hpp"
#include "opcodec/learner.hpp"
#include "opcodec/matrix.hpp"

namespace opcodec::decoder {

struct ProjectResult {
    Vec y_ls;          // least-squares approximation of y over span(ψ)
    Vec coefficients;  // ⟨y, ψ_l⟩ per retained eigenpair
};

/// y_ls = Σ_l ⟨y, ψ_l⟩ ψ_l over the retained eigenpairs. Idempotent.
inline ProjectResult project_data(const Vec& y, const learner::LearnedSpectrum& spectrum) {
    if (y.size() != spectrum.data_dim())
        throw DimensionMismatch("data vector length does not match the spectrum");
    ProjectResult out;
    out.coefficients = transpose_times(spectrum.psis, y);
    out.y_ls.assign(y.size(), 0.0);
    for (std::size_t l = 0; l < out.coefficients.size(); ++l)
        axpy(out.coefficients[l], spectrum.psis.col(l), out.y_ls);
    return out;
}

struct DecodeResult {
    Vec x_ls;          // minimum-norm solution of F x = y_ls
    Vec y_ls;
    Vec coefficients;  // spectral coefficients ⟨y, ψ_l⟩
};

/// Minimum-norm solve from the learned spectrum alone:
/// x_ls = Σ_l ⟨y, ψ_l⟩ · X̄ c_l. Since ψ_l = F X̄ c_l is a singular vector
/// with value γ̂, the operator adjoint satisfies F*ψ_l = γ̂²·X̄ c_l, so this
/// equals Σ ⟨y, ψ_l⟩/γ̂² · F*ψ_l without ever touching F. A positive top_k
/// truncates to the largest-λ eigenpairs (truncated-SVD style decoding).
inline DecodeResult decode(const Vec& y, const learner::LearnedSpectrum& spectrum,
                           std::size_t top_k = 0) {
    if (y.size() != spectrum.data_dim())
        throw DimensionMismatch("data vector length does not match the spectrum");
    spectrum.validate();

    const std::size_t used =
        top_k == 0 ? spectrum.retained() : std::min(top_k, spectrum.retained());

    DecodeResult out;
    out.coefficients.resize(used);
    out.y_ls.assign(y.size(), 0.0);
    Vec combo(spectrum.coeffs_c.rows(), 0.0);  // Σ β_l c_l
    for (std::size_t l = 0; l < used; ++l) {
        const double beta = dot(spectrum.psis.col(l), y);
        out.coefficients[l] = beta;
        axpy(beta, spectrum.psis.col(l), out.y_ls);
        axpy(beta, spectrum.coeffs_c.col(l), combo);
    }
    out.x_ls = spectrum.ortho_images.basis * combo;
    return out;
}

}  // namespace opcodec::decoder
