// facekit command-line experiment harness.
//
// Subcommands: table, entropy-sweep, ari-report, b-sweep, reconstruct,
// split, synth. Every command is deterministic for a fixed --seed; outputs
// are CSV (canonical), optional SVG charts, and PGM images.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "facekit/facekit.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    facekit::ExperimentConfig cfg;
};

// Registers the flags shared by the experiment commands. CLI11 fills the
// fields in place, so flag values override whatever --config loaded.
void add_experiment_flags(CLI::App* cmd, facekit::ExperimentConfig& cfg,
                          std::string& families, std::string& schemes,
                          std::string& metrics, std::string& votings) {
    cmd->add_option("--dataset", cfg.dataset, "dataset manifest path");
    cmd->add_option("--out", cfg.out, "output directory");
    cmd->add_option("--seed", cfg.seed, "master RNG seed");
    cmd->add_option("--threads", cfg.threads,
                    "worker threads (0 = auto; FACEKIT_THREADS caps this)");
    cmd->add_option("--families", families, "comma list: lda,pca");
    cmd->add_option("--schemes", schemes, "comma list: bilateral,left,right");
    cmd->add_option("--metrics", metrics, "comma list: frobenius|euclidean,cosine");
    cmd->add_option("--votings", votings, "comma list: weighted,unweighted,original");
    cmd->add_option("--train-per-class", cfg.train_per_class, "training images per class");
    cmd->add_option("--test-per-class", cfg.test_per_class, "test images per class");
    cmd->add_option("--classifiers", cfg.classifiers, "ensemble size T");
    cmd->add_option("--dims", cfg.dims, "eigenvectors sampled per classifier (d)");
    cmd->add_option("--k", cfg.k, "nearest neighbors");
    cmd->add_option("--b", cfg.b, "ARI weighting exponent");
    cmd->add_option("--original-dims", cfg.original_dims,
                    "top eigenvectors for the original (non-ensemble) baseline");
    cmd->add_option("--repeats", cfg.repeats, "independent repetitions");
    cmd->add_flag("--svg", cfg.svg, "also emit SVG charts");
}

void apply_list_overrides(facekit::ExperimentConfig& cfg, const std::string& families,
                          const std::string& schemes, const std::string& metrics,
                          const std::string& votings) {
    if (!families.empty()) facekit::apply_config_entry(cfg, "families", families);
    if (!schemes.empty()) facekit::apply_config_entry(cfg, "schemes", schemes);
    if (!metrics.empty()) facekit::apply_config_entry(cfg, "metrics", metrics);
    if (!votings.empty()) facekit::apply_config_entry(cfg, "votings", votings);
}

facekit::LabeledDataset load_dataset_or_fail(const facekit::ExperimentConfig& cfg) {
    facekit::require(!cfg.dataset.empty(), facekit::errc::bad_argument,
                     "no dataset manifest given (--dataset or config `dataset`)");
    return facekit::load_manifest(cfg.dataset);
}

fs::path ensure_out_dir(const facekit::ExperimentConfig& cfg) {
    const fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    facekit::require(!ec, facekit::errc::io_error,
                     "cannot create output directory " + dir.string());
    return dir;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    for (const auto& item : facekit::split_list(text))
        out.push_back(static_cast<int>(facekit::detail::parse_long(item, what)));
    facekit::require(!out.empty(), facekit::errc::bad_argument,
                     std::string("empty list for ") + what);
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    for (const auto& item : facekit::split_list(text))
        out.push_back(facekit::detail::parse_double(item, what));
    facekit::require(!out.empty(), facekit::errc::bad_argument,
                     std::string("empty list for ") + what);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"facekit: 2D subspace face recognition experiments"};
    app.require_subcommand(1);

    // --config is honored on every subcommand; it loads defaults that the
    // remaining flags then override.
    facekit::ExperimentConfig cfg;
    std::string config_path;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    try {
        if (!config_path.empty()) cfg = facekit::load_config_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::string families, schemes, metrics, votings;
    std::string config_sink;  // consumed by the prescan above

    auto* table = app.add_subcommand("table", "accuracy table over the method grid");
    table->add_option("--config", config_sink, "config file (key = value)");
    add_experiment_flags(table, cfg, families, schemes, metrics, votings);

    auto* entropy = app.add_subcommand("entropy-sweep", "ensemble entropy vs d or T");
    entropy->add_option("--config", config_sink, "config file (key = value)");
    add_experiment_flags(entropy, cfg, families, schemes, metrics, votings);
    std::string sweep_param = "d";
    std::string sweep_values;
    entropy->add_option("--sweep", sweep_param, "swept parameter: d or t");
    entropy->add_option("--values", sweep_values, "comma list of sweep values")
        ->required();

    auto* ari = app.add_subcommand("ari-report", "per-classifier ARI per metric");
    ari->add_option("--config", config_sink, "config file (key = value)");
    add_experiment_flags(ari, cfg, families, schemes, metrics, votings);

    auto* bsweep = app.add_subcommand("b-sweep", "accuracy vs ARI exponent b");
    bsweep->add_option("--config", config_sink, "config file (key = value)");
    add_experiment_flags(bsweep, cfg, families, schemes, metrics, votings);
    std::string b_values_text;
    bsweep->add_option("--b-values", b_values_text, "comma list of exponents")
        ->required();

    auto* recon = app.add_subcommand("reconstruct", "PCA reconstruction strip");
    recon->add_option("--config", config_sink, "config file (key = value)");
    add_experiment_flags(recon, cfg, families, schemes, metrics, votings);
    std::size_t image_index = 0;
    std::string recon_scheme = "right";
    std::string recon_dims;
    recon->add_option("--image", image_index, "dataset image index");
    recon->add_option("--scheme", recon_scheme, "right or left");
    recon->add_option("--d-values", recon_dims, "comma list of retained dims")
        ->required();

    auto* split_cmd = app.add_subcommand("split", "emit a stratified split plan");
    split_cmd->add_option("--config", config_sink, "config file (key = value)");
    add_experiment_flags(split_cmd, cfg, families, schemes, metrics, votings);

    auto* synth = app.add_subcommand("synth", "emit a synthetic PGM dataset");
    synth->add_option("--config", config_sink, "config file (key = value)");
    add_experiment_flags(synth, cfg, families, schemes, metrics, votings);
    int synth_classes = 10, synth_per_class = 10, synth_rows = 16, synth_cols = 14;
    double synth_sep = 40.0, synth_noise = 10.0;
    synth->add_option("--classes", synth_classes, "class count");
    synth->add_option("--per-class", synth_per_class, "images per class");
    synth->add_option("--rows", synth_rows, "image height");
    synth->add_option("--cols", synth_cols, "image width");
    synth->add_option("--sep", synth_sep, "class separation scale");
    synth->add_option("--noise", synth_noise, "per-pixel gaussian noise scale");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_list_overrides(cfg, families, schemes, metrics, votings);

        if (table->parsed()) {
            const auto ds = load_dataset_or_fail(cfg);
            const auto result = facekit::run_table(ds, cfg);
            const fs::path dir = ensure_out_dir(cfg);
            facekit::write_file_atomic(dir / "table.csv", facekit::table_csv(result));
            facekit::write_file_atomic(dir / "table_runs.csv",
                                       facekit::table_runs_csv(result));
            std::cout << facekit::table_csv(result);
        } else if (entropy->parsed()) {
            const auto ds = load_dataset_or_fail(cfg);
            facekit::require(sweep_param == "d" || sweep_param == "t",
                             facekit::errc::bad_argument, "--sweep must be d or t");
            const auto parameter = sweep_param == "d"
                                       ? facekit::SweepParameter::dims
                                       : facekit::SweepParameter::classifiers;
            const auto values = parse_int_list(sweep_values, "--values");
            const auto result = facekit::run_entropy_sweep(ds, cfg, parameter, values);
            const fs::path dir = ensure_out_dir(cfg);
            facekit::write_file_atomic(dir / "entropy_sweep.csv",
                                       facekit::entropy_sweep_csv(result));
            if (cfg.svg)
                facekit::write_file_atomic(dir / "entropy_sweep.svg",
                                           facekit::entropy_sweep_svg(result));
            std::cout << facekit::entropy_sweep_csv(result);
        } else if (ari->parsed()) {
            const auto ds = load_dataset_or_fail(cfg);
            const auto result = facekit::run_ari_report(ds, cfg);
            const fs::path dir = ensure_out_dir(cfg);
            facekit::write_file_atomic(dir / "ari_report.csv",
                                       facekit::ari_report_csv(result));
            if (cfg.svg)
                facekit::write_file_atomic(dir / "ari_report.svg",
                                           facekit::ari_report_svg(result));
            std::cout << facekit::ari_report_csv(result);
        } else if (bsweep->parsed()) {
            const auto ds = load_dataset_or_fail(cfg);
            const auto values = parse_double_list(b_values_text, "--b-values");
            const auto result = facekit::run_b_sweep(ds, cfg, values);
            const fs::path dir = ensure_out_dir(cfg);
            facekit::write_file_atomic(dir / "b_sweep.csv", facekit::b_sweep_csv(result));
            if (cfg.svg)
                facekit::write_file_atomic(dir / "b_sweep.svg",
                                           facekit::b_sweep_svg(result));
            std::cout << facekit::b_sweep_csv(result);
        } else if (recon->parsed()) {
            const auto ds = load_dataset_or_fail(cfg);
            const auto scheme = facekit::parse_scheme(recon_scheme);
            const auto dims = parse_int_list(recon_dims, "--d-values");
            const auto result =
                facekit::run_reconstruction(ds, image_index, scheme, dims);
            const fs::path dir = ensure_out_dir(cfg);
            facekit::write_file_atomic(dir / "reconstruction.csv",
                                       facekit::reconstruction_csv(result));
            facekit::save_pgm(dir / "reconstruction.pgm", result.mosaic);
            std::cout << facekit::reconstruction_csv(result);
        } else if (split_cmd->parsed()) {
            const auto ds = load_dataset_or_fail(cfg);
            const auto plan = facekit::stratified_split(ds, cfg.train_per_class,
                                                        cfg.test_per_class, cfg.seed);
            const fs::path dir = ensure_out_dir(cfg);
            facekit::save_split(dir / "split_plan.txt", plan);
            std::cout << "split plan: " << plan.train.size() << " train / "
                      << plan.test.size() << " test -> "
                      << (dir / "split_plan.txt").string() << "\n";
        } else if (synth->parsed()) {
            const auto ds = facekit::synth_dataset(
                synth_classes, synth_per_class, static_cast<std::size_t>(synth_rows),
                static_cast<std::size_t>(synth_cols), synth_sep, synth_noise, cfg.seed);
            const fs::path dir = ensure_out_dir(cfg);
            std::vector<std::string> paths, labels;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                const std::string name = "img_" + std::to_string(i) + ".pgm";
                facekit::save_pgm(dir / name, ds.images[i]);
                paths.push_back(name);
                labels.push_back(ds.class_names[static_cast<std::size_t>(ds.labels[i])]);
            }
            facekit::save_manifest(dir / "manifest.txt", paths, labels);
            std::cout << "wrote " << ds.size() << " images and manifest to "
                      << dir.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
