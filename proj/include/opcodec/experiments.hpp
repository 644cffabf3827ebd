#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "opcodec/decoder.hpp"
#include "opcodec/io.hpp"
#include "opcodec/learner.hpp"
#include "opcodec/linalg.hpp"
#include "opcodec/matrix.hpp"
#include "opcodec/phantoms.hpp"
#include "opcodec/radon.hpp"
#include "opcodec/rng.hpp"
#include "opcodec/spectra.hpp"

namespace opcodec::experiments {

struct ExperimentConfig {
    radon::RadonGeometry geom{};
    int k_max = 12;
    int n_images = 20;
    int ellipses_per_image = 10;
    double epsilon = 0.0;   // 0 → exact Gram-Schmidt
    int top_k = 0;          // 0 → decode with all retained eigenpairs
    std::uint64_t seed = 42;
    std::string out_dir;    // empty → compute only, write nothing
    bool self_check = false;

    std::string to_kv() const {
        std::string s = radon::geometry_to_config(geom);
        s += "k_max=" + std::to_string(k_max) + "\n";
        s += "n_images=" + std::to_string(n_images) + "\n";
        s += "ellipses_per_image=" + std::to_string(ellipses_per_image) + "\n";
        s += "epsilon=" + io::format_double(epsilon) + "\n";
        s += "top_k=" + std::to_string(top_k) + "\n";
        s += "seed=" + std::to_string(seed) + "\n";
        return s;
    }
};

/// Training pairs (u_{k,l}, γ_k·v_{k,l}) in quadrature coordinates, i.e. the
/// data column is the image of the image column under the transform, and the
/// Euclidean geometry the learner sees is the weighted operator geometry.
///
/// Both sides are normalized on the grid so the pair is exactly consistent
/// with the unit-norm singular relation u ↦ γ v; the discrete adjoint leaves
/// ‖u‖ off unity by a few percent, which would otherwise leak straight into
/// the learned eigenvalues.
inline learner::TrainingSet analytic_training_set(const spectra::AnalyticalSpectrum& sp) {
    learner::TrainingSet t;
    t.images = Mat(sp.geom.image_size(), sp.count());
    t.data = Mat(sp.geom.sino_size(), sp.count());
    for (std::size_t i = 0; i < sp.count(); ++i) {
        Vec u = radon::image_to_coords(sp.u_funcs.col(i), sp.geom);
        t.images.set_col(i, scaled(u, 1.0 / norm2(u)));
        Vec v = radon::sinogram_to_coords(sp.v_funcs.col(i), sp.geom);
        t.data.set_col(i, scaled(v, sp.gammas[i] / norm2(v)));
    }
    return t;
}

/// Sorted-eigenvalue cluster id (1-based, E^1, E^2, ...) by position, using
/// the eigenspace dimensions ⌊k/2⌋+1 of the analytic spectrum.
inline std::vector<int> expected_cluster_ids(int k_max) {
    std::vector<int> ids;
    for (int k = 0; k <= k_max; ++k) {
        const int dim = k / 2 + 1;
        for (int d = 0; d < dim; ++d) ids.push_back(k + 1);
    }
    return ids;
}

namespace detail {

inline Mat image_grid(const Vec& f, const radon::RadonGeometry& g) {
    return Mat(static_cast<std::size_t>(g.n_pix), static_cast<std::size_t>(g.n_pix), f);
}

inline Mat sino_grid(const Vec& s, const radon::RadonGeometry& g) {
    return Mat(static_cast<std::size_t>(g.n_angles),
               static_cast<std::size_t>(g.n_offsets), s);
}

inline std::string index_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%03zu", i + 1);
    return buf;
}

inline void write_gallery(const std::filesystem::path& dir, const std::string& stem,
                          const std::vector<Mat>& grids) {
    io::ensure_dir(dir);
    for (std::size_t i = 0; i < grids.size(); ++i)
        io::write_matrix_csv(dir / (stem + "_" + index_name(i) + ".csv"), grids[i]);
}

inline void write_gnuplot_script(const std::filesystem::path& out_dir,
                                 const std::vector<std::string>& rel_paths) {
    std::string s = "set view map\nset size ratio -1\nunset key\n"
                    "set term pngcairo size 540,480\n";
    for (const auto& rel : rel_paths) {
        std::string png = rel;
        const auto slash = png.find_last_of('/');
        if (slash != std::string::npos) png = png.substr(slash + 1);
        png = png.substr(0, png.size() - 4) + ".png";
        s += "set output '" + png + "'\n";
        s += "plot '" + rel + "' matrix with image\n";
    }
    io::write_file(out_dir / "plot_gallery.gp", s);
}

inline void export_learned(const std::filesystem::path& dir,
                           const learner::LearnedSpectrum& learned) {
    io::ensure_dir(dir);
    io::write_matrix_csv(dir / "psis.csv", learned.psis);
    io::write_vector_csv(dir / "lambdas.csv", learned.lambdas);
    io::write_vector_csv(dir / "gammas_learned.csv", learned.gammas_learned);
    io::write_matrix_csv(dir / "coeffs_c.csv", learned.coeffs_c);
    io::write_matrix_csv(dir / "xbar.csv", learned.ortho_images.basis);
    io::write_matrix_csv(dir / "ybar.csv", learned.data_ortho);
}

inline learner::LearnedSpectrum load_learned(const std::filesystem::path& dir) {
    learner::LearnedSpectrum sp;
    sp.psis = io::read_matrix_csv(dir / "psis.csv");
    sp.lambdas = io::read_vector_csv(dir / "lambdas.csv");
    sp.gammas_learned = io::read_vector_csv(dir / "gammas_learned.csv");
    sp.coeffs_c = io::read_matrix_csv(dir / "coeffs_c.csv");
    sp.ortho_images.basis = io::read_matrix_csv(dir / "xbar.csv");
    sp.data_ortho = io::read_matrix_csv(dir / "ybar.csv");
    sp.validate();
    return sp;
}

inline void export_classification(const std::filesystem::path& out_dir,
                                  const learner::EigenspaceAssignment& assignment,
                                  std::size_t n_spaces) {
    std::string csv = "h,k_hat,score\n";
    for (std::size_t h = 0; h < assignment.k_hat.size(); ++h)
        csv += std::to_string(h + 1) + "," + std::to_string(assignment.k_hat[h]) + "," +
               io::format_double(assignment.scores[h]) + "\n";
    io::write_file(out_dir / "classification.csv", csv);

    std::string table = "set,members\n";
    for (std::size_t e = 1; e <= n_spaces; ++e) {
        table += "E^" + std::to_string(e) + ",\"";
        bool first = true;
        for (std::size_t h = 0; h < assignment.k_hat.size(); ++h) {
            if (assignment.k_hat[h] != static_cast<int>(e)) continue;
            if (!first) table += ", ";
            table += "psi_" + std::to_string(h + 1);
            first = false;
        }
        table += "\"\n";
    }
    io::write_file(out_dir / "ek_table.csv", table);
}

inline void export_regression(const std::filesystem::path& out_dir,
                              const learner::EigenspaceAssignment& assignment,
                              const spectra::AnalyticalSpectrum& sp) {
    // nu is the coefficient over the weighted-normalized basis; nu_raw the
    // same expansion against the raw w·C_k·{cos,sin} samples.
    std::string csv = "h,k_hat,k,l,nu,nu_raw\n";
    for (std::size_t h = 0; h < assignment.k_hat.size(); ++h) {
        const int e = assignment.k_hat[h] - 1;
        const auto& members = sp.eigenspaces[static_cast<std::size_t>(e)];
        for (std::size_t j = 0; j < members.size(); ++j) {
            const auto& idx = sp.indices[static_cast<std::size_t>(members[j])];
            const double nu = assignment.coefficients[h][j];
            const double nu_raw = nu * sp.norm_consts[static_cast<std::size_t>(members[j])];
            csv += std::to_string(h + 1) + "," + std::to_string(e + 1) + "," +
                   std::to_string(idx.k) + "," + std::to_string(idx.l) + "," +
                   io::format_double(nu) + "," + io::format_double(nu_raw) + "\n";
        }
    }
    io::write_file(out_dir / "regression.csv", csv);
}

inline void export_eigenvalue_comparison(const std::filesystem::path& out_dir,
                                         const learner::LearnedSpectrum& learned,
                                         int k_max) {
    const std::vector<int> clusters = expected_cluster_ids(k_max);
    std::string csv = "h,lambda,gamma_learned,cluster,gamma_sq_expected,rel_err\n";
    for (std::size_t h = 0; h < learned.lambdas.size(); ++h) {
        std::string cluster = "", expected = "", rel = "";
        if (h < clusters.size()) {
            const double gsq = 4.0 * std::numbers::pi / clusters[h];
            cluster = std::to_string(clusters[h]);
            expected = io::format_double(gsq);
            rel = io::format_double(std::abs(learned.lambdas[h] - gsq) / gsq);
        }
        csv += std::to_string(h + 1) + "," + io::format_double(learned.lambdas[h]) + "," +
               io::format_double(learned.gammas_learned[h]) + "," + cluster + "," +
               expected + "," + rel + "\n";
    }
    io::write_file(out_dir / "eigenvalues.csv", csv);
}

inline void export_spectrum(const std::filesystem::path& dir,
                            const spectra::AnalyticalSpectrum& sp,
                            const Vec& residuals) {
    io::ensure_dir(dir);
    std::string idx = "k,l,gamma,norm_const\n";
    for (std::size_t i = 0; i < sp.count(); ++i)
        idx += std::to_string(sp.indices[i].k) + "," + std::to_string(sp.indices[i].l) +
               "," + io::format_double(sp.gammas[i]) + "," +
               io::format_double(sp.norm_consts[i]) + "\n";
    io::write_file(dir / "indices.csv", idx);
    io::write_matrix_csv(dir / "v_funcs.csv", sp.v_funcs);
    io::write_matrix_csv(dir / "u_funcs.csv", sp.u_funcs);
    if (!residuals.empty())
        io::write_vector_csv(dir / "singular_residuals.csv", residuals);
}

/// Encode smoke test against an operator whose singular system is fixed by
/// construction. Raises on mismatch; used by the --self-check flag.
inline void self_check_encode() {
    constexpr std::size_t n = 6;
    std::mt19937_64 gen(0x5eedULL);
    auto random_mat = [&](std::size_t rows, std::size_t cols) {
        Mat m(rows, cols);
        for (double& v : m.entries()) v = normal_double(gen);
        return m;
    };
    const Mat u = linalg::gram_schmidt(random_mat(n, n)).basis;
    const Mat v = linalg::gram_schmidt(random_mat(n, n)).basis;
    Mat d(n, n);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = static_cast<double>(n - i);
    const Mat f = v * d * u.transposed();

    learner::TrainingSet t;
    t.images = random_mat(n, n);
    t.data = f * t.images;
    const learner::LearnedSpectrum learned = learner::encode(t);

    for (std::size_t l = 0; l < n; ++l) {
        const double expected = static_cast<double>(n - l);
        if (std::abs(learned.gammas_learned[l] - expected) > 1e-8)
            throw Error(FailureKind::numerical,
                        "self-check failed: learned singular value off");
        double diff_plus = 0.0, diff_minus = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diff_plus = std::max(diff_plus, std::abs(learned.psis(i, l) - v(i, l)));
            diff_minus = std::max(diff_minus, std::abs(learned.psis(i, l) + v(i, l)));
        }
        if (std::min(diff_plus, diff_minus) > 1e-6)
            throw Error(FailureKind::numerical,
                        "self-check failed: learned singular vector off");
    }
}

}  // namespace detail

struct Example1Result {
    spectra::AnalyticalSpectrum spectrum;
    learner::LearnedSpectrum learned;
    learner::EigenspaceAssignment assignment;
};

/// Learn the transform's singular system from the analytical training pairs
/// and classify/regress each learned ψ against the analytic eigenspaces.
inline Example1Result run_example1(const ExperimentConfig& cfg) {
    if (cfg.self_check) detail::self_check_encode();
    cfg.geom.validate();

    Example1Result res;
    res.spectrum = spectra::build_spectrum(cfg.k_max, cfg.geom);
    const learner::TrainingSet training = analytic_training_set(res.spectrum);
    res.learned = learner::encode(training, {cfg.epsilon});
    res.assignment =
        learner::classify(res.learned.psis, spectra::eigenspace_bases_coords(res.spectrum));

    if (!cfg.out_dir.empty()) {
        const std::filesystem::path out(cfg.out_dir);
        io::ensure_dir(out);
        io::write_file(out / "geometry.cfg", radon::geometry_to_config(cfg.geom));
        detail::export_spectrum(out / "spectrum", res.spectrum,
                                spectra::verify_singular_relation(res.spectrum, cfg.geom));
        detail::export_learned(out / "learned", res.learned);
        detail::export_classification(out, res.assignment, res.spectrum.eigenspaces.size());
        detail::export_regression(out, res.assignment, res.spectrum);
        detail::export_eigenvalue_comparison(out, res.learned, cfg.k_max);

        const std::size_t shown = std::min<std::size_t>(20, res.learned.retained());
        std::vector<Mat> grids;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < shown; ++i) {
            grids.push_back(detail::sino_grid(
                radon::sinogram_from_coords(res.learned.psis.col(i), cfg.geom), cfg.geom));
            names.push_back("psi_gallery/psi_" + detail::index_name(i) + ".csv");
        }
        detail::write_gallery(out / "psi_gallery", "psi", grids);
        detail::write_gnuplot_script(out, names);
    }
    return res;
}

struct Example2Result {
    std::vector<Vec> images;  // raw pixel-grid phantoms
    spectra::AnalyticalSpectrum spectrum;
    learner::LearnedSpectrum learned;
    learner::EigenspaceAssignment assignment;
};

/// Learn from random ellipse phantoms: the transform is applied once to
/// produce the data columns (standing in for expert annotation), everything
/// after that is operator-free.
inline Example2Result run_example2(const ExperimentConfig& cfg) {
    cfg.geom.validate();

    Example2Result res;
    phantoms::PhantomSpec spec;
    spec.n_images = cfg.n_images;
    spec.ellipses_per_image = cfg.ellipses_per_image;
    spec.seed = cfg.seed;
    res.images = phantoms::generate(spec, cfg.geom);

    learner::TrainingSet training;
    training.images = Mat(cfg.geom.image_size(), res.images.size());
    training.data = Mat(cfg.geom.sino_size(), res.images.size());
    for (std::size_t i = 0; i < res.images.size(); ++i) {
        training.images.set_col(i, radon::image_to_coords(res.images[i], cfg.geom));
        training.data.set_col(
            i, radon::sinogram_to_coords(radon::radon_forward(res.images[i], cfg.geom),
                                         cfg.geom));
    }

    res.learned = learner::encode(training, {cfg.epsilon});
    res.spectrum = spectra::build_spectrum(cfg.k_max, cfg.geom);
    res.assignment =
        learner::classify(res.learned.psis, spectra::eigenspace_bases_coords(res.spectrum));

    if (!cfg.out_dir.empty()) {
        const std::filesystem::path out(cfg.out_dir);
        io::ensure_dir(out);
        io::write_file(out / "geometry.cfg", radon::geometry_to_config(cfg.geom));
        io::write_matrix_csv(out / "training_images.csv", training.images);
        io::write_matrix_csv(out / "training_data.csv", training.data);
        detail::export_learned(out / "learned", res.learned);
        detail::export_classification(out, res.assignment, res.spectrum.eigenspaces.size());
        detail::export_regression(out, res.assignment, res.spectrum);
        detail::export_eigenvalue_comparison(out, res.learned, cfg.k_max);

        std::vector<Mat> phantom_grids, xbar_grids, ybar_grids;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < res.images.size(); ++i) {
            phantom_grids.push_back(detail::image_grid(res.images[i], cfg.geom));
            xbar_grids.push_back(detail::image_grid(
                radon::image_from_coords(res.learned.ortho_images.basis.col(i), cfg.geom),
                cfg.geom));
            ybar_grids.push_back(detail::sino_grid(
                radon::sinogram_from_coords(res.learned.data_ortho.col(i), cfg.geom),
                cfg.geom));
            names.push_back("phantoms/image_" + detail::index_name(i) + ".csv");
        }
        detail::write_gallery(out / "phantoms", "image", phantom_grids);
        detail::write_gallery(out / "xbar_gallery", "xbar", xbar_grids);
        detail::write_gallery(out / "ybar_gallery", "ybar", ybar_grids);
        detail::write_gnuplot_script(out, names);
    }
    return res;
}

/// Ground-truth combination weights of the decoding tests.
inline const std::vector<std::pair<spectra::SpectralIndex, double>>& decode_test_terms() {
    static const std::vector<std::pair<spectra::SpectralIndex, double>> terms = {
        {{11, 5}, -0.9119}, {{3, 1}, 0.6527},   {{6, 4}, -0.7343}, {{5, 3}, 0.5406},
        {{8, 4}, 0.9758},   {{12, 10}, -0.1569}, {{7, 3}, 0.2778},  {{12, 2}, 0.6395},
    };
    return terms;
}

struct DecodeTestResult {
    Vec x_true;  // raw pixel grid
    Vec x_ls;    // raw pixel grid
    double rel_l2_error = 0.0;    // ‖x_ls − x_true‖ / ‖x_true‖
    double y_rel_residual = 0.0;  // ‖R x_ls − y_true‖_w / ‖y_true‖_w
};

/// Decoding test: build the ground truth from analytic image-side singular
/// functions (test 1 linearly, test 2 through the pointwise nonlinearity
/// 0.1 u² + exp(u / max u) applied on the disk before weighting), take its
/// transform as data, and invert with the learned decoder.
inline DecodeTestResult run_decode_test(const ExperimentConfig& cfg, int which) {
    if (which != 1 && which != 2)
        throw DimensionMismatch("decode test selector must be 1 or 2");
    if (cfg.k_max < 12)
        throw DimensionMismatch("decode tests need k_max >= 12 for their ground truth");
    cfg.geom.validate();

    const spectra::AnalyticalSpectrum sp = spectra::build_spectrum(cfg.k_max, cfg.geom);
    const learner::TrainingSet training = analytic_training_set(sp);
    const learner::LearnedSpectrum learned = learner::encode(training, {cfg.epsilon});

    auto position_of = [&](const spectra::SpectralIndex& idx) {
        for (std::size_t i = 0; i < sp.count(); ++i)
            if (sp.indices[i].k == idx.k && sp.indices[i].l == idx.l)
                return i;
        throw DimensionMismatch("spectral index missing from the spectrum");
    };

    Vec x_true(cfg.geom.image_size(), 0.0);
    for (const auto& [idx, weight] : decode_test_terms()) {
        Vec comp = sp.u_funcs.col(position_of(idx));
        if (which == 2) {
            const double umax = *std::max_element(comp.begin(), comp.end());
            if (!(umax > 0.0))
                throw Error(FailureKind::numerical, "nonlinearity needs a positive maximum");
            for (int iy = 0; iy < cfg.geom.n_pix; ++iy)
                for (int ix = 0; ix < cfg.geom.n_pix; ++ix) {
                    if (!cfg.geom.center_in_disk(ix, iy)) continue;
                    double& c = comp[cfg.geom.pix_index(ix, iy)];
                    c = 0.1 * c * c + std::exp(c / umax);
                }
        }
        axpy(weight, comp, x_true);
    }
    x_true = radon::apply_disk_mask(std::move(x_true), cfg.geom);

    const Vec y_true = radon::radon_forward(x_true, cfg.geom);
    const decoder::DecodeResult dec =
        decoder::decode(radon::sinogram_to_coords(y_true, cfg.geom), learned,
                        static_cast<std::size_t>(cfg.top_k));

    DecodeTestResult res;
    res.x_true = x_true;
    res.x_ls = radon::image_from_coords(dec.x_ls, cfg.geom);

    Vec diff = res.x_ls;
    axpy(-1.0, x_true, diff);
    res.rel_l2_error = norm2(diff) / norm2(x_true);

    Vec y_fit = radon::radon_forward(res.x_ls, cfg.geom);
    axpy(-1.0, y_true, y_fit);
    res.y_rel_residual =
        radon::weighted_norm(y_fit, cfg.geom) / radon::weighted_norm(y_true, cfg.geom);

    if (!cfg.out_dir.empty()) {
        const std::filesystem::path out(cfg.out_dir);
        io::ensure_dir(out);
        io::write_file(out / "geometry.cfg", radon::geometry_to_config(cfg.geom));
        io::write_matrix_csv(out / "x_true.csv", detail::image_grid(res.x_true, cfg.geom));
        io::write_matrix_csv(out / "x_ls.csv", detail::image_grid(res.x_ls, cfg.geom));
        io::write_matrix_csv(out / "y_true.csv", detail::sino_grid(y_true, cfg.geom));
        io::write_matrix_csv(
            out / "y_ls.csv",
            detail::sino_grid(radon::sinogram_from_coords(dec.y_ls, cfg.geom), cfg.geom));
        io::write_vector_csv(out / "coefficients.csv", dec.coefficients);
        std::string metrics = "metric,value\n";
        metrics += "rel_l2_error," + io::format_double(res.rel_l2_error) + "\n";
        metrics += "y_rel_residual," + io::format_double(res.y_rel_residual) + "\n";
        io::write_file(out / "metrics.csv", metrics);
    }
    return res;
}

}  // namespace opcodec::experiments
