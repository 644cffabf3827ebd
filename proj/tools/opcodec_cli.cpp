// Command line front end: every library stage as a subcommand, plus the
// end-to-end experiment runners. Batch only; figures are CSV + gnuplot
// scripts.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opcodec/decoder.hpp"
#include "opcodec/experiments.hpp"
#include "opcodec/hash.hpp"
#include "opcodec/io.hpp"
#include "opcodec/learner.hpp"
#include "opcodec/phantoms.hpp"
#include "opcodec/radon.hpp"
#include "opcodec/spectra.hpp"

namespace {

using opcodec::experiments::ExperimentConfig;
namespace fs = std::filesystem;

struct CliState {
    ExperimentConfig cfg;
    std::string config_file;
    std::string geom_file;
    bool t_samples_given = false;

    // file arguments of the data-driven subcommands
    std::string images_file;
    std::string data_file;
    std::string learned_dir;
    std::string y_file;
    int which = 1;
};

void add_common_options(CLI::App* cmd, CliState& st, bool needs_out) {
    auto* out = cmd->add_option("--out", st.cfg.out_dir, "output directory");
    if (needs_out) out->required();
    cmd->add_option("--config", st.config_file,
                    "key=value file; entries override command-line flags");
    cmd->add_option("--geom", st.geom_file, "geometry config file (key=value)");
    cmd->add_option("--n-pix", st.cfg.geom.n_pix, "pixels per image side");
    cmd->add_option("--n-angles", st.cfg.geom.n_angles, "angle count");
    cmd->add_option("--n-offsets", st.cfg.geom.n_offsets, "offset count");
    cmd->add_option("--t-samples", st.cfg.geom.t_samples,
                    "chord quadrature points (default 2*n_pix)")
        ->each([&](const std::string&) { st.t_samples_given = true; });
    cmd->add_option("--seed", st.cfg.seed, "RNG seed");
    cmd->add_option("--epsilon", st.cfg.epsilon,
                    "smoothed Gram-Schmidt epsilon (0 = exact)");
    cmd->add_option("--top-k", st.cfg.top_k, "decode with only the top k eigenpairs");
    cmd->add_option("--k-max", st.cfg.k_max, "largest Chebyshev degree k");
    cmd->add_option("--n-images", st.cfg.n_images, "phantom count");
    cmd->add_option("--ellipses", st.cfg.ellipses_per_image, "ellipses per phantom");
}

// The config file is authoritative: its entries replace whatever the flags
// said. Unknown keys are rejected so typos do not silently vanish.
void apply_overrides(CliState& st) {
    if (!st.geom_file.empty()) {
        auto kv = opcodec::io::read_kv_file(st.geom_file);
        st.cfg.geom = opcodec::radon::geometry_from_config(kv);
        st.t_samples_given = kv.count("t_samples") > 0;
    }
    if (!st.config_file.empty()) {
        for (const auto& [key, value] : opcodec::io::read_kv_file(st.config_file)) {
            if (key == "n_pix") st.cfg.geom.n_pix = std::stoi(value);
            else if (key == "n_angles") st.cfg.geom.n_angles = std::stoi(value);
            else if (key == "n_offsets") st.cfg.geom.n_offsets = std::stoi(value);
            else if (key == "t_samples") {
                st.cfg.geom.t_samples = std::stoi(value);
                st.t_samples_given = true;
            } else if (key == "seed") st.cfg.seed = std::stoull(value);
            else if (key == "epsilon") st.cfg.epsilon = std::stod(value);
            else if (key == "top_k") st.cfg.top_k = std::stoi(value);
            else if (key == "k_max") st.cfg.k_max = std::stoi(value);
            else if (key == "n_images") st.cfg.n_images = std::stoi(value);
            else if (key == "ellipses_per_image") st.cfg.ellipses_per_image = std::stoi(value);
            else if (key == "out") st.cfg.out_dir = value;
            else if (key == "which") st.which = std::stoi(value);
            else if (key == "images") st.images_file = value;
            else if (key == "data") st.data_file = value;
            else if (key == "learned") st.learned_dir = value;
            else if (key == "y") st.y_file = value;
            else
                throw opcodec::Error(opcodec::FailureKind::validation,
                                     "unknown config key: " + key);
        }
    }
    if (!st.t_samples_given) st.cfg.geom.t_samples = 2 * st.cfg.geom.n_pix;
    st.cfg.geom.validate();
}

std::string file_hash(const std::string& path) {
    return opcodec::git_blob_sha1(opcodec::io::read_file(path));
}

void write_manifest(const CliState& st, const std::string& command,
                    const std::map<std::string, std::string>& input_files,
                    const std::vector<std::string>& notes = {}) {
    nlohmann::json j;
    j["tool"] = "opcodec";
    j["command"] = command;
    j["config"] = opcodec::io::parse_kv(st.cfg.to_kv());
    j["config_hash"] = opcodec::git_blob_sha1(st.cfg.to_kv());
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [path, hash] : input_files) inputs[path] = hash;
    j["inputs"] = inputs;
    if (!notes.empty()) j["assumptions"] = notes;
    opcodec::io::ensure_dir(st.cfg.out_dir);
    opcodec::io::write_file(fs::path(st.cfg.out_dir) / "manifest.json", j.dump(2) + "\n");
}

int run(int argc, char** argv) {
    CLI::App app{"data-driven singular value decomposition of linear operators"};
    app.require_subcommand(1);

    CliState st;
    bool self_check = false;

    auto* sb = app.add_subcommand("spectrum-build",
                                  "discretize the analytical Radon singular system");
    add_common_options(sb, st, true);

    auto* enc = app.add_subcommand("encode",
                                   "learn a spectrum from training pair matrices");
    add_common_options(enc, st, true);
    enc->add_option("--images", st.images_file, "CSV matrix of image columns")->required();
    enc->add_option("--data", st.data_file, "CSV matrix of data columns")->required();

    auto* cls = app.add_subcommand("classify",
                                   "assign learned functions to analytic eigenspaces");
    add_common_options(cls, st, true);
    cls->add_option("--learned", st.learned_dir, "directory written by encode")->required();

    auto* dec = app.add_subcommand("decode", "minimum-norm solve from a learned spectrum");
    add_common_options(dec, st, true);
    dec->add_option("--learned", st.learned_dir, "directory written by encode")->required();
    dec->add_option("--y", st.y_file, "data vector CSV (single column)")->required();

    auto* pg = app.add_subcommand("phantom-gen", "seeded random ellipse phantoms");
    add_common_options(pg, st, true);

    auto* ex1 = app.add_subcommand("run-example1",
                                   "learn the spectrum from analytical training pairs");
    add_common_options(ex1, st, true);
    ex1->add_flag("--self-check", self_check,
                  "verify the encoder on a synthetic operator first");

    auto* ex2 = app.add_subcommand("run-example2", "learn the spectrum from phantoms");
    add_common_options(ex2, st, true);

    auto* dt = app.add_subcommand("run-decode-test", "decoding against known ground truth");
    add_common_options(dt, st, true);
    dt->add_option("--which", st.which, "1 = linear ground truth, 2 = nonlinear")
        ->check(CLI::Range(1, 2));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    apply_overrides(st);
    st.cfg.self_check = self_check;
    const fs::path out(st.cfg.out_dir);

    if (sb->parsed()) {
        auto sp = opcodec::spectra::build_spectrum(st.cfg.k_max, st.cfg.geom);
        auto residuals = opcodec::spectra::verify_singular_relation(sp, st.cfg.geom);
        opcodec::io::ensure_dir(out);
        opcodec::io::write_file(out / "geometry.cfg",
                                opcodec::radon::geometry_to_config(st.cfg.geom));
        opcodec::experiments::detail::export_spectrum(out / "spectrum", sp, residuals);
        write_manifest(st, "spectrum-build", {});
        std::cout << "spectrum with " << sp.count() << " singular functions -> "
                  << st.cfg.out_dir << "\n";
    } else if (enc->parsed()) {
        opcodec::learner::TrainingSet t;
        t.images = opcodec::io::read_matrix_csv(st.images_file);
        t.data = opcodec::io::read_matrix_csv(st.data_file);
        auto learned = opcodec::learner::encode(t, {st.cfg.epsilon});
        opcodec::io::ensure_dir(out);
        opcodec::experiments::detail::export_learned(out / "learned", learned);
        write_manifest(st, "encode",
                       {{st.images_file, file_hash(st.images_file)},
                        {st.data_file, file_hash(st.data_file)}});
        std::cout << "retained " << learned.retained() << " eigenpairs -> "
                  << st.cfg.out_dir << "\n";
    } else if (cls->parsed()) {
        auto learned = opcodec::experiments::detail::load_learned(st.learned_dir);
        auto sp = opcodec::spectra::build_spectrum(st.cfg.k_max, st.cfg.geom);
        auto assignment = opcodec::learner::classify(
            learned.psis, opcodec::spectra::eigenspace_bases_coords(sp));
        opcodec::io::ensure_dir(out);
        opcodec::experiments::detail::export_classification(out, assignment,
                                                            sp.eigenspaces.size());
        opcodec::experiments::detail::export_regression(out, assignment, sp);
        write_manifest(st, "classify",
                       {{st.learned_dir + "/psis.csv",
                         file_hash(st.learned_dir + "/psis.csv")}});
        std::cout << "classified " << assignment.k_hat.size() << " functions -> "
                  << st.cfg.out_dir << "\n";
    } else if (dec->parsed()) {
        auto learned = opcodec::experiments::detail::load_learned(st.learned_dir);
        auto y = opcodec::io::read_vector_csv(st.y_file);
        auto result = opcodec::decoder::decode(y, learned,
                                               static_cast<std::size_t>(st.cfg.top_k));
        opcodec::io::ensure_dir(out);
        opcodec::io::write_vector_csv(out / "x_ls.csv", result.x_ls);
        opcodec::io::write_vector_csv(out / "y_ls.csv", result.y_ls);
        opcodec::io::write_vector_csv(out / "coefficients.csv", result.coefficients);
        write_manifest(st, "decode", {{st.y_file, file_hash(st.y_file)}});
        std::cout << "decoded -> " << st.cfg.out_dir << "\n";
    } else if (pg->parsed()) {
        opcodec::phantoms::PhantomSpec spec;
        spec.n_images = st.cfg.n_images;
        spec.ellipses_per_image = st.cfg.ellipses_per_image;
        spec.seed = st.cfg.seed;
        auto images = opcodec::phantoms::generate(spec, st.cfg.geom);
        opcodec::io::ensure_dir(out);
        std::vector<opcodec::Mat> grids;
        for (const auto& img : images)
            grids.push_back(opcodec::experiments::detail::image_grid(img, st.cfg.geom));
        opcodec::experiments::detail::write_gallery(out / "phantoms", "image", grids);
        opcodec::Mat stacked(st.cfg.geom.image_size(), images.size());
        for (std::size_t i = 0; i < images.size(); ++i) stacked.set_col(i, images[i]);
        opcodec::io::write_matrix_csv(out / "images.csv", stacked);
        write_manifest(st, "phantom-gen", {});
        std::cout << images.size() << " phantoms -> " << st.cfg.out_dir << "\n";
    } else if (ex1->parsed()) {
        auto res = opcodec::experiments::run_example1(st.cfg);
        write_manifest(st, "run-example1", {});
        std::cout << "learned " << res.learned.retained() << " eigenpairs from "
                  << res.spectrum.count() << " analytic pairs -> " << st.cfg.out_dir
                  << "\n";
    } else if (ex2->parsed()) {
        auto res = opcodec::experiments::run_example2(st.cfg);
        write_manifest(st, "run-example2", {});
        std::cout << "learned " << res.learned.retained() << " eigenpairs from "
                  << st.cfg.n_images << " phantoms -> " << st.cfg.out_dir << "\n";
    } else if (dt->parsed()) {
        auto res = opcodec::experiments::run_decode_test(st.cfg, st.which);
        std::vector<std::string> notes;
        if (st.which == 2)
            notes.push_back(
                "nonlinear test reuses the linear ground-truth weights for the "
                "per-component scaling");
        write_manifest(st, "run-decode-test", {}, notes);
        std::cout << "decode test " << st.which
                  << ": rel_l2_error=" << opcodec::io::format_double(res.rel_l2_error)
                  << " -> " << st.cfg.out_dir << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const opcodec::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == opcodec::FailureKind::validation ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
