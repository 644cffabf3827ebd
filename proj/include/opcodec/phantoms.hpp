#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "opcodec/matrix.hpp"
#include "opcodec/radon.hpp"
#include "opcodec/rng.hpp"

namespace opcodec::phantoms {

struct Ellipse {
    double intensity = 1.0;
    double semi_major = 0.5;
    double semi_minor = 0.5;
    double cx = 0.0;
    double cy = 0.0;
    double angle_deg = 0.0;
};

struct ParamRange {
    double lo;
    double hi;
};

/// Parameter ranges of the random ellipse family.
struct EllipseRanges {
    ParamRange intensity{0.01, 2.0};
    ParamRange semi_major{0.1, 0.7};
    ParamRange semi_minor{0.1, 0.7};
    ParamRange center_x{-0.6, 0.6};
    ParamRange center_y{-0.6, 0.6};
    ParamRange angle_deg{-45.0, 134.0};
};

struct PhantomSpec {
    int n_images = 20;
    int ellipses_per_image = 10;
    std::uint64_t seed = 0;
    EllipseRanges ranges;
};

/// Pixel centers inside the rotated ellipse get the intensity, all others
/// zero.
inline Vec rasterize_ellipse(const Ellipse& e, const radon::RadonGeometry& g) {
    g.validate();
    Vec img(g.image_size(), 0.0);
    const double theta = e.angle_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double inv_a2 = 1.0 / (e.semi_major * e.semi_major);
    const double inv_b2 = 1.0 / (e.semi_minor * e.semi_minor);
    for (int iy = 0; iy < g.n_pix; ++iy) {
        const double dy = g.pixel_coord(iy) - e.cy;
        for (int ix = 0; ix < g.n_pix; ++ix) {
            const double dx = g.pixel_coord(ix) - e.cx;
            const double xr = dx * ct + dy * st;
            const double yr = -dx * st + dy * ct;
            if (xr * xr * inv_a2 + yr * yr * inv_b2 <= 1.0)
                img[g.pix_index(ix, iy)] = e.intensity;
        }
    }
    return img;
}

/// Ellipse parameters drawn uniformly and independently, in the order of the
/// range table.
inline Ellipse draw_ellipse(std::mt19937_64& gen, const EllipseRanges& r) {
    Ellipse e;
    e.intensity = uniform_in(gen, r.intensity.lo, r.intensity.hi);
    e.semi_major = uniform_in(gen, r.semi_major.lo, r.semi_major.hi);
    e.semi_minor = uniform_in(gen, r.semi_minor.lo, r.semi_minor.hi);
    e.cx = uniform_in(gen, r.center_x.lo, r.center_x.hi);
    e.cy = uniform_in(gen, r.center_y.lo, r.center_y.hi);
    e.angle_deg = uniform_in(gen, r.angle_deg.lo, r.angle_deg.hi);
    return e;
}

/// Seed of the per-image generator stream; image i is independent of how
/// many images precede it.
inline std::uint64_t image_stream_seed(std::uint64_t base, int image_index) {
    return stream_seed(base, static_cast<std::uint64_t>(image_index));
}

/// Deterministic phantom dataset: each image is the sum of its rasterized
/// ellipses (overlaps add), clipped to the unit-disk support.
inline std::vector<Vec> generate(const PhantomSpec& spec, const radon::RadonGeometry& g) {
    g.validate();
    std::vector<Vec> images;
    images.reserve(spec.n_images);
    for (int i = 0; i < spec.n_images; ++i) {
        std::mt19937_64 gen(image_stream_seed(spec.seed, i));
        Vec img(g.image_size(), 0.0);
        for (int e = 0; e < spec.ellipses_per_image; ++e) {
            const Ellipse ell = draw_ellipse(gen, spec.ranges);
            Vec raster = rasterize_ellipse(ell, g);
            for (std::size_t p = 0; p < img.size(); ++p) img[p] += raster[p];
        }
        images.push_back(radon::apply_disk_mask(std::move(img), g));
    }
    return images;
}

}  // namespace opcodec::phantoms
