#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>

#include "opcodec/errors.hpp"
#include "opcodec/matrix.hpp"
#include "opcodec/rng.hpp"

namespace opcodec::radon {

/// Discretization of the unit disk and of Z = S¹ × (−1, 1).
///
/// Images are n_pix × n_pix pixel grids over [−1,1]², stored row-major with
/// index iy·n_pix + ix; pixels whose center lies outside the disk carry
/// zero. Sinograms are indexed angle-major: a·n_offsets + j. Offsets sit at
/// cell midpoints strictly inside (−1, 1), so the weight w(s) = √(1−s²)
/// never vanishes on the grid.
struct RadonGeometry {
    int n_pix = 50;
    int n_angles = 50;
    int n_offsets = 50;
    int t_samples = 100;  // chord quadrature points, default 2·n_pix

    void validate() const {
        if (n_pix < 2 || n_angles < 2 || n_offsets < 2 || t_samples < 2)
            throw GeometryMismatch("all geometry counts must be >= 2");
    }

    std::size_t image_size() const { return std::size_t(n_pix) * n_pix; }
    std::size_t sino_size() const { return std::size_t(n_angles) * n_offsets; }

    double pixel_step() const { return 2.0 / n_pix; }
    double pixel_coord(int i) const { return -1.0 + (i + 0.5) * pixel_step(); }
    double angle(int a) const {
        return 2.0 * std::numbers::pi * a / n_angles;
    }
    double d_angle() const { return 2.0 * std::numbers::pi / n_angles; }
    double offset(int j) const { return -1.0 + (j + 0.5) * d_offset(); }
    double d_offset() const { return 2.0 / n_offsets; }
    double weight(int j) const {
        const double s = offset(j);
        return std::sqrt(1.0 - s * s);
    }

    std::size_t pix_index(int ix, int iy) const {
        return std::size_t(iy) * n_pix + ix;
    }
    std::size_t sino_index(int a, int j) const {
        return std::size_t(a) * n_offsets + j;
    }

    bool center_in_disk(int ix, int iy) const {
        const double x = pixel_coord(ix);
        const double y = pixel_coord(iy);
        return x * x + y * y < 1.0;
    }

    bool operator==(const RadonGeometry&) const = default;
};

inline std::string geometry_to_config(const RadonGeometry& g) {
    std::string s;
    s += "n_pix=" + std::to_string(g.n_pix) + "\n";
    s += "n_angles=" + std::to_string(g.n_angles) + "\n";
    s += "n_offsets=" + std::to_string(g.n_offsets) + "\n";
    s += "t_samples=" + std::to_string(g.t_samples) + "\n";
    return s;
}

inline RadonGeometry geometry_from_config(const std::map<std::string, std::string>& kv) {
    RadonGeometry g;
    auto get = [&](const char* key, int fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : std::stoi(it->second);
    };
    g.n_pix = get("n_pix", g.n_pix);
    g.n_angles = get("n_angles", g.n_angles);
    g.n_offsets = get("n_offsets", g.n_offsets);
    g.t_samples = get("t_samples", 2 * g.n_pix);
    g.validate();
    return g;
}

inline void check_image(const Vec& f, const RadonGeometry& g) {
    if (f.size() != g.image_size())
        throw GeometryMismatch("image length does not match the pixel grid");
}

inline void check_sino(const Vec& s, const RadonGeometry& g) {
    if (s.size() != g.sino_size())
        throw GeometryMismatch("sinogram length does not match the (angle, offset) grid");
}

/// Zero out pixels whose center lies outside the unit disk.
inline Vec apply_disk_mask(Vec f, const RadonGeometry& g) {
    check_image(f, g);
    for (int iy = 0; iy < g.n_pix; ++iy)
        for (int ix = 0; ix < g.n_pix; ++ix)
            if (!g.center_in_disk(ix, iy)) f[g.pix_index(ix, iy)] = 0.0;
    return f;
}

namespace detail {

/// Bilinear interpolation at (x, y) between pixel centers, with clamped
/// (constant) extension beyond the outermost centers. For disk-supported
/// images the clamped border is zero anyway.
inline double interp_image(const Vec& f, const RadonGeometry& g, double x, double y) {
    const double h = g.pixel_step();
    auto locate = [&](double coord, int& i0, double& frac) {
        const double u = (coord + 1.0) / h - 0.5;
        if (u <= 0.0) {
            i0 = 0;
            frac = 0.0;
        } else if (u >= g.n_pix - 1) {
            i0 = g.n_pix - 2;
            frac = 1.0;
        } else {
            i0 = static_cast<int>(u);
            frac = u - i0;
        }
    };
    int ix0, iy0;
    double fx, fy;
    locate(x, ix0, fx);
    locate(y, iy0, fy);
    const double f00 = f[g.pix_index(ix0, iy0)];
    const double f10 = f[g.pix_index(ix0 + 1, iy0)];
    const double f01 = f[g.pix_index(ix0, iy0 + 1)];
    const double f11 = f[g.pix_index(ix0 + 1, iy0 + 1)];
    return (1 - fx) * (1 - fy) * f00 + fx * (1 - fy) * f10 +
           (1 - fx) * fy * f01 + fx * fy * f11;
}

/// Piecewise-linear interpolation of one sinogram row in s, with virtual
/// zero nodes at s = ±1 (functions in the range of R vanish there).
inline double interp_offset(const Vec& sino, const RadonGeometry& g, int a, double s) {
    const double ds = g.d_offset();
    const double u = (s + 1.0) / ds - 0.5;
    if (u <= 0.0) {
        const double s0 = g.offset(0);
        const double t = (s + 1.0) / (s0 + 1.0);
        return t <= 0.0 ? 0.0 : t * sino[g.sino_index(a, 0)];
    }
    if (u >= g.n_offsets - 1) {
        const double slast = g.offset(g.n_offsets - 1);
        const double t = (1.0 - s) / (1.0 - slast);
        return t <= 0.0 ? 0.0 : t * sino[g.sino_index(a, g.n_offsets - 1)];
    }
    const int j0 = static_cast<int>(u);
    const double frac = u - j0;
    return (1 - frac) * sino[g.sino_index(a, j0)] + frac * sino[g.sino_index(a, j0 + 1)];
}

}  // namespace detail

/// Discretized Radon transform: entry (φ, s) is the composite midpoint rule
/// for ∫ f(s·ω + t·ω⊥) dt along the chord |t| ≤ √(1−s²), with bilinear
/// interpolation of f. Linear in f; summation order fixed per entry.
inline Vec radon_forward(const Vec& f, const RadonGeometry& g) {
    g.validate();
    check_image(f, g);
    Vec out(g.sino_size(), 0.0);
    for (int a = 0; a < g.n_angles; ++a) {
        const double phi = g.angle(a);
        const double wx = std::cos(phi), wy = std::sin(phi);
        for (int j = 0; j < g.n_offsets; ++j) {
            const double s = g.offset(j);
            const double half = std::sqrt(1.0 - s * s);
            const double dt = 2.0 * half / g.t_samples;
            double sum = 0.0;
            for (int q = 0; q < g.t_samples; ++q) {
                const double t = -half + (q + 0.5) * dt;
                const double x = s * wx - t * wy;
                const double y = s * wy + t * wx;
                sum += detail::interp_image(f, g, x, y);
            }
            out[g.sino_index(a, j)] = sum * dt;
        }
    }
    return out;
}

/// Discretized adjoint: at each in-disk pixel center x the trapezoid rule
/// over angles for ∫ g(ω, x·ω)/w(x·ω) dω, with linear interpolation in s.
/// Zero outside the disk.
inline Vec radon_adjoint(const Vec& sino, const RadonGeometry& g) {
    g.validate();
    check_sino(sino, g);
    Vec out(g.image_size(), 0.0);
    const double dphi = g.d_angle();
    for (int iy = 0; iy < g.n_pix; ++iy) {
        const double y = g.pixel_coord(iy);
        for (int ix = 0; ix < g.n_pix; ++ix) {
            const double x = g.pixel_coord(ix);
            if (x * x + y * y >= 1.0) continue;
            double sum = 0.0;
            for (int a = 0; a < g.n_angles; ++a) {
                const double phi = g.angle(a);
                const double s = x * std::cos(phi) + y * std::sin(phi);
                const double w = std::sqrt(1.0 - s * s);
                sum += detail::interp_offset(sino, g, a, s) / w;
            }
            out[g.pix_index(ix, iy)] = sum * dphi;
        }
    }
    return out;
}

/// Discrete L²(Z, w⁻¹) pairing: Σ g₁ g₂ w(s)⁻¹ Δs Δφ.
inline double weighted_inner(const Vec& g1, const Vec& g2, const RadonGeometry& g) {
    check_sino(g1, g);
    check_sino(g2, g);
    const double cell = g.d_offset() * g.d_angle();
    double sum = 0.0;
    for (int a = 0; a < g.n_angles; ++a)
        for (int j = 0; j < g.n_offsets; ++j) {
            const std::size_t idx = g.sino_index(a, j);
            sum += g1[idx] * g2[idx] / g.weight(j);
        }
    return sum * cell;
}

inline double weighted_norm(const Vec& s, const RadonGeometry& g) {
    return std::sqrt(weighted_inner(s, s, g));
}

/// Discrete L² pairing on the pixel grid: h² fᵀg.
inline double image_inner(const Vec& f1, const Vec& f2, const RadonGeometry& g) {
    check_image(f1, g);
    check_image(f2, g);
    const double h = g.pixel_step();
    return h * h * dot(f1, f2);
}

inline double image_norm(const Vec& f, const RadonGeometry& g) {
    return std::sqrt(image_inner(f, f, g));
}

// Coordinate maps under which the quadrature inner products above become
// plain dot products. The learner works in Euclidean coordinates, so the
// experiment pipelines hand it vectors in this scaling and the learned
// spectrum comes out in the weighted operator geometry.

inline Vec image_to_coords(const Vec& f, const RadonGeometry& g) {
    check_image(f, g);
    return scaled(f, g.pixel_step());
}

inline Vec image_from_coords(const Vec& f, const RadonGeometry& g) {
    check_image(f, g);
    return scaled(f, 1.0 / g.pixel_step());
}

inline Vec sinogram_to_coords(const Vec& s, const RadonGeometry& g) {
    check_sino(s, g);
    Vec out(s);
    const double cell = g.d_offset() * g.d_angle();
    for (int a = 0; a < g.n_angles; ++a)
        for (int j = 0; j < g.n_offsets; ++j)
            out[g.sino_index(a, j)] *= std::sqrt(cell / g.weight(j));
    return out;
}

inline Vec sinogram_from_coords(const Vec& s, const RadonGeometry& g) {
    check_sino(s, g);
    Vec out(s);
    const double cell = g.d_offset() * g.d_angle();
    for (int a = 0; a < g.n_angles; ++a)
        for (int j = 0; j < g.n_offsets; ++j)
            out[g.sino_index(a, j)] /= std::sqrt(cell / g.weight(j));
    return out;
}

/// Power-iteration estimate of the operator norm of R between the quadrature
/// spaces L²(disk) → L²(Z, w⁻¹). Deterministic for a fixed seed.
inline double operator_norm_estimate(const RadonGeometry& g, int iterations = 30,
                                     std::uint64_t seed = 1) {
    g.validate();
    std::mt19937_64 gen(seed);
    Vec f(g.image_size());
    for (double& v : f) v = uniform_double(gen) - 0.5;
    f = apply_disk_mask(std::move(f), g);
    for (int it = 0; it < iterations; ++it) {
        Vec back = radon_adjoint(radon_forward(f, g), g);
        const double n = image_norm(back, g);
        if (n == 0.0) return 0.0;
        f = scaled(back, 1.0 / n);
    }
    return weighted_norm(radon_forward(f, g), g) / image_norm(f, g);
}

}  // namespace opcodec::radon
