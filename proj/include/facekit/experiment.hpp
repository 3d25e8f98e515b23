#pragma once

// The experiment harness behind the CLI: configuration, the repeated-split
// table protocol, the entropy/ARI/b parameter studies and the reconstruction
// strip. Every function here is deterministic given (config, seed) and
// returns CSV text; callers decide where files go.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "facekit/dataset.hpp"
#include "facekit/ensemble.hpp"
#include "facekit/error.hpp"
#include "facekit/parallel.hpp"
#include "facekit/svg.hpp"

namespace facekit {

enum class Voting { weighted, unweighted, original };

inline const char* voting_name(Voting v) {
    switch (v) {
        case Voting::weighted: return "weighted";
        case Voting::unweighted: return "unweighted";
        default: return "original";
    }
}

struct ExperimentConfig {
    std::string dataset;
    std::string out = ".";
    std::vector<Family> families{Family::lda, Family::pca};
    std::vector<Scheme> schemes{Scheme::bilateral, Scheme::left, Scheme::right};
    std::vector<Metric> metrics{Metric::frobenius, Metric::cosine};
    std::vector<Voting> votings{Voting::weighted, Voting::unweighted, Voting::original};
    int train_per_class = 5;
    int test_per_class = 5;
    int classifiers = 50;   // T
    int dims = 5;           // d, eigenvectors sampled per classifier
    int k = 1;
    double b = 2.0;
    int original_dims = 10;  // d' for the non-ensemble baseline
    int repeats = 30;
    std::uint64_t seed = 0;
    int threads = 0;
    bool svg = false;
};

// ---------------------------------------------------------------------------
// parsing and formatting

inline Family parse_family(const std::string& s) {
    if (s == "pca") return Family::pca;
    if (s == "lda") return Family::lda;
    fail(errc::parse_error, "unknown family: " + s);
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "right") return Scheme::right;
    if (s == "left") return Scheme::left;
    if (s == "bilateral") return Scheme::bilateral;
    fail(errc::parse_error, "unknown scheme: " + s);
}

inline Metric parse_metric(const std::string& s) {
    if (s == "frobenius" || s == "euclidean") return Metric::frobenius;
    if (s == "cosine") return Metric::cosine;
    fail(errc::parse_error, "unknown metric: " + s);
}

inline Voting parse_voting(const std::string& s) {
    if (s == "weighted") return Voting::weighted;
    if (s == "unweighted") return Voting::unweighted;
    if (s == "original") return Voting::original;
    fail(errc::parse_error, "unknown voting: " + s);
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const std::size_t first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const std::size_t last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline long parse_long(const std::string& text, const std::string& key) {
    long value = 0;
    const auto* begin = text.data();
    const auto* end = begin + text.size();
    const auto result = std::from_chars(begin, end, value);
    require(result.ec == std::errc() && result.ptr == end, errc::parse_error,
            "bad integer for " + key + ": " + text);
    return value;
}

inline double parse_double(const std::string& text, const std::string& key) {
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = begin + text.size();
    const auto result = std::from_chars(begin, end, value);
    require(result.ec == std::errc() && result.ptr == end, errc::parse_error,
            "bad number for " + key + ": " + text);
    return value;
}

}  // namespace detail

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
    if (key == "dataset") {
        cfg.dataset = value;
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "families") {
        cfg.families.clear();
        for (const auto& item : split_list(value)) cfg.families.push_back(parse_family(item));
    } else if (key == "schemes") {
        cfg.schemes.clear();
        for (const auto& item : split_list(value)) cfg.schemes.push_back(parse_scheme(item));
    } else if (key == "metrics") {
        cfg.metrics.clear();
        for (const auto& item : split_list(value)) cfg.metrics.push_back(parse_metric(item));
    } else if (key == "votings") {
        cfg.votings.clear();
        for (const auto& item : split_list(value)) cfg.votings.push_back(parse_voting(item));
    } else if (key == "train_per_class") {
        cfg.train_per_class = static_cast<int>(detail::parse_long(value, key));
    } else if (key == "test_per_class") {
        cfg.test_per_class = static_cast<int>(detail::parse_long(value, key));
    } else if (key == "classifiers") {
        cfg.classifiers = static_cast<int>(detail::parse_long(value, key));
    } else if (key == "dims") {
        cfg.dims = static_cast<int>(detail::parse_long(value, key));
    } else if (key == "k") {
        cfg.k = static_cast<int>(detail::parse_long(value, key));
    } else if (key == "b") {
        cfg.b = detail::parse_double(value, key);
    } else if (key == "original_dims") {
        cfg.original_dims = static_cast<int>(detail::parse_long(value, key));
    } else if (key == "repeats") {
        cfg.repeats = static_cast<int>(detail::parse_long(value, key));
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(detail::parse_long(value, key));
    } else if (key == "threads") {
        cfg.threads = static_cast<int>(detail::parse_long(value, key));
    } else if (key == "svg") {
        if (value == "true" || value == "1") cfg.svg = true;
        else if (value == "false" || value == "0") cfg.svg = false;
        else fail(errc::parse_error, "bad boolean for svg: " + value);
    } else {
        fail(errc::parse_error, "unknown config key: " + key);
    }
}

// Flat `key = value` config file; '#' starts a comment line.
inline ExperimentConfig load_config_file(const std::filesystem::path& path,
                                         ExperimentConfig cfg = {}) {
    std::ifstream in(path);
    require(in.good(), errc::io_error, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = detail::trim(line);
        if (text.empty() || text[0] == '#') continue;
        const std::size_t eq = text.find('=');
        require(eq != std::string::npos, errc::parse_error,
                path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        apply_config_entry(cfg, detail::trim(text.substr(0, eq)),
                           detail::trim(text.substr(eq + 1)));
    }
    return cfg;
}

// Locale-independent fixed-point rendering; all CSV reals use 6 decimals.
inline std::string format_real(double v, int precision = 6) {
    char buf[64];
    const auto result =
        std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    return std::string(buf, result.ptr);
}

// Computed strings land on disk via temp-file + rename, so a failed command
// never leaves a partial artifact behind.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), errc::io_error, "cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        require(out.good(), errc::io_error, "write failure on " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    require(!ec, errc::io_error, "cannot rename " + tmp.string() + " to " + path.string());
}

// ---------------------------------------------------------------------------
// shared statistics

struct SummaryStats {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation
    double se = 0.0;  // sd / sqrt(n)
};

inline SummaryStats summarize(std::span<const double> values) {
    SummaryStats s;
    const std::size_t n = values.size();
    if (n == 0) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(n);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(n - 1));
        s.se = s.sd / std::sqrt(static_cast<double>(n));
    }
    return s;
}

namespace detail {

inline std::uint64_t run_split_seed(std::uint64_t master, int run) {
    return mix_seed(mix_seed(master, 0x5117DULL), static_cast<std::uint64_t>(run));
}

inline std::uint64_t run_ensemble_seed(std::uint64_t master, int run) {
    return mix_seed(mix_seed(master, 0xE57EEDULL), static_cast<std::uint64_t>(run));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// table protocol

struct TableCell {
    Family family;
    Scheme scheme;
    Metric metric;
    Voting voting;
    SummaryStats stats;
    std::vector<double> run_accuracies;
};

struct TableResult {
    std::vector<TableCell> cells;
    int repeats = 0;
    std::uint64_t seed = 0;
};

// Runs `repeats` independent split + fit + predict cycles for every grid
// cell. All cells of one run share the same split (seeds derive from the run
// index alone), so families, metrics and voting modes are compared at
// matched settings. The `original` voting cell is the non-ensemble baseline:
// one classifier on the top original_dims eigenvectors.
inline TableResult run_table(const LabeledDataset& ds, const ExperimentConfig& cfg) {
    require(cfg.repeats >= 1, errc::bad_argument, "repeats must be at least 1");
    require(!cfg.families.empty() && !cfg.schemes.empty() && !cfg.metrics.empty() &&
                !cfg.votings.empty(),
            errc::bad_argument, "empty experiment grid");

    const bool need_ensemble =
        std::find(cfg.votings.begin(), cfg.votings.end(), Voting::weighted) !=
            cfg.votings.end() ||
        std::find(cfg.votings.begin(), cfg.votings.end(), Voting::unweighted) !=
            cfg.votings.end();
    const bool need_original =
        std::find(cfg.votings.begin(), cfg.votings.end(), Voting::original) !=
        cfg.votings.end();

    struct ComboRuns {
        std::vector<double> weighted, unweighted, original;
    };
    std::map<std::tuple<int, int, int>, ComboRuns> combos;

    for (Family family : cfg.families)
        for (Scheme scheme : cfg.schemes)
            for (Metric metric : cfg.metrics) {
                ComboRuns runs;
                runs.weighted.resize(static_cast<std::size_t>(cfg.repeats));
                runs.unweighted.resize(static_cast<std::size_t>(cfg.repeats));
                runs.original.resize(static_cast<std::size_t>(cfg.repeats));
                parallel_for(
                    static_cast<std::size_t>(cfg.repeats), cfg.threads,
                    [&](std::size_t r) {
                        const int run = static_cast<int>(r);
                        const SplitPlan split =
                            stratified_split(ds, cfg.train_per_class, cfg.test_per_class,
                                             detail::run_split_seed(cfg.seed, run));
                        if (need_ensemble) {
                            EnsembleConfig ens;
                            ens.family = family;
                            ens.scheme = scheme;
                            ens.t = cfg.classifiers;
                            ens.d = cfg.dims;
                            ens.knn = KnnConfig{cfg.k, metric};
                            ens.b = cfg.b;
                            ens.seed = detail::run_ensemble_seed(cfg.seed, run);
                            const EnsembleOutcome outcome =
                                fit_predict(ds, split, ens, /*threads=*/1);
                            runs.weighted[r] = outcome.accuracy;
                            runs.unweighted[r] = majority_decision(outcome).second;
                        }
                        if (need_original)
                            runs.original[r] =
                                classic_accuracy(ds, split, family, scheme,
                                                 cfg.original_dims,
                                                 KnnConfig{cfg.k, metric});
                    });
                combos.emplace(std::make_tuple(static_cast<int>(family),
                                               static_cast<int>(scheme),
                                               static_cast<int>(metric)),
                               std::move(runs));
            }

    TableResult result;
    result.repeats = cfg.repeats;
    result.seed = cfg.seed;
    for (Family family : cfg.families)
        for (Scheme scheme : cfg.schemes)
            for (Metric metric : cfg.metrics)
                for (Voting voting : cfg.votings) {
                    const auto& runs = combos.at(std::make_tuple(
                        static_cast<int>(family), static_cast<int>(scheme),
                        static_cast<int>(metric)));
                    TableCell cell;
                    cell.family = family;
                    cell.scheme = scheme;
                    cell.metric = metric;
                    cell.voting = voting;
                    cell.run_accuracies = voting == Voting::weighted ? runs.weighted
                                          : voting == Voting::unweighted
                                              ? runs.unweighted
                                              : runs.original;
                    cell.stats = summarize(cell.run_accuracies);
                    result.cells.push_back(std::move(cell));
                }
    return result;
}

inline std::string table_csv(const TableResult& result) {
    std::ostringstream out;
    out << "family,scheme,method,metric,voting,repeats,mean_accuracy,sd,se\n";
    for (const auto& cell : result.cells)
        out << family_name(cell.family) << "," << scheme_name(cell.scheme) << ","
            << method_name(cell.family, cell.scheme) << "," << metric_name(cell.metric)
            << "," << voting_name(cell.voting) << "," << result.repeats << ","
            << format_real(cell.stats.mean) << "," << format_real(cell.stats.sd) << ","
            << format_real(cell.stats.se) << "\n";
    return std::move(out).str();
}

inline std::string table_runs_csv(const TableResult& result) {
    std::ostringstream out;
    out << "family,scheme,method,metric,voting,run,accuracy\n";
    for (const auto& cell : result.cells)
        for (std::size_t r = 0; r < cell.run_accuracies.size(); ++r)
            out << family_name(cell.family) << "," << scheme_name(cell.scheme) << ","
                << method_name(cell.family, cell.scheme) << ","
                << metric_name(cell.metric) << "," << voting_name(cell.voting) << ","
                << r << "," << format_real(cell.run_accuracies[r]) << "\n";
    return std::move(out).str();
}

// ---------------------------------------------------------------------------
// entropy sweep (diversity vs d or vs T)

enum class SweepParameter { dims, classifiers };

inline const char* sweep_parameter_name(SweepParameter p) {
    return p == SweepParameter::dims ? "d" : "t";
}

struct SweepRow {
    int value = 0;
    Metric metric = Metric::frobenius;
    SummaryStats entropy;
};

struct EntropySweepResult {
    SweepParameter parameter = SweepParameter::dims;
    std::vector<SweepRow> rows;
    int repeats = 0;
};

// Entropy of the ensemble as one parameter (d or T) sweeps, per metric,
// averaged over `repeats` splits. Uses the first family/scheme of the grid.
inline void require_single_method_grid(const ExperimentConfig& cfg) {
    require(!cfg.families.empty() && !cfg.schemes.empty() && !cfg.metrics.empty(),
            errc::bad_argument, "empty experiment grid");
}

inline EntropySweepResult run_entropy_sweep(const LabeledDataset& ds,
                                            const ExperimentConfig& cfg,
                                            SweepParameter parameter,
                                            std::span<const int> values) {
    require(!values.empty(), errc::bad_argument, "empty sweep value list");
    require_single_method_grid(cfg);
    EntropySweepResult result;
    result.parameter = parameter;
    result.repeats = cfg.repeats;

    for (int value : values) {
        require(value >= 1, errc::bad_argument, "sweep values must be positive");
        for (Metric metric : cfg.metrics) {
            std::vector<double> entropies(static_cast<std::size_t>(cfg.repeats));
            parallel_for(
                static_cast<std::size_t>(cfg.repeats), cfg.threads, [&](std::size_t r) {
                    const int run = static_cast<int>(r);
                    const SplitPlan split =
                        stratified_split(ds, cfg.train_per_class, cfg.test_per_class,
                                         detail::run_split_seed(cfg.seed, run));
                    EnsembleConfig ens;
                    ens.family = cfg.families.front();
                    ens.scheme = cfg.schemes.front();
                    ens.t = parameter == SweepParameter::classifiers ? value
                                                                     : cfg.classifiers;
                    ens.d = parameter == SweepParameter::dims ? value : cfg.dims;
                    ens.knn = KnnConfig{cfg.k, metric};
                    ens.b = cfg.b;
                    ens.seed = detail::run_ensemble_seed(cfg.seed, run);
                    entropies[r] =
                        fit_predict(ds, split, ens, /*threads=*/1).diversity.entropy;
                });
            SweepRow row;
            row.value = value;
            row.metric = metric;
            row.entropy = summarize(entropies);
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

inline std::string entropy_sweep_csv(const EntropySweepResult& result) {
    std::ostringstream out;
    out << "sweep,value,metric,entropy_mean,entropy_sd,repeats\n";
    for (const auto& row : result.rows)
        out << sweep_parameter_name(result.parameter) << "," << row.value << ","
            << metric_name(row.metric) << "," << format_real(row.entropy.mean) << ","
            << format_real(row.entropy.sd) << "," << result.repeats << "\n";
    return std::move(out).str();
}

inline std::string entropy_sweep_svg(const EntropySweepResult& result) {
    std::vector<SvgSeries> series;
    for (Metric metric : {Metric::frobenius, Metric::cosine}) {
        SvgSeries s;
        s.name = metric_name(metric);
        for (const auto& row : result.rows)
            if (row.metric == metric)
                s.points.emplace_back(static_cast<double>(row.value), row.entropy.mean);
        if (!s.points.empty()) series.push_back(std::move(s));
    }
    return svg_line_chart("ensemble entropy",
                          std::string("sweep over ") +
                              sweep_parameter_name(result.parameter),
                          "entropy", series);
}

// ---------------------------------------------------------------------------
// per-classifier ARI report

struct AriRow {
    int classifier = 0;
    Metric metric = Metric::frobenius;
    double ari = 0.0;
    double weight = 0.0;
};

struct AriReportResult {
    std::vector<AriRow> rows;
};

// One ensemble per metric on a fixed split; reports every classifier's ARI
// and its resulting weight. Row count = T x |metrics|.
inline AriReportResult run_ari_report(const LabeledDataset& ds,
                                      const ExperimentConfig& cfg) {
    require_single_method_grid(cfg);
    AriReportResult result;
    const SplitPlan split = stratified_split(ds, cfg.train_per_class, cfg.test_per_class,
                                             detail::run_split_seed(cfg.seed, 0));
    for (Metric metric : cfg.metrics) {
        EnsembleConfig ens;
        ens.family = cfg.families.front();
        ens.scheme = cfg.schemes.front();
        ens.t = cfg.classifiers;
        ens.d = cfg.dims;
        ens.knn = KnnConfig{cfg.k, metric};
        ens.b = cfg.b;
        ens.seed = detail::run_ensemble_seed(cfg.seed, 0);
        const EnsembleOutcome outcome = fit_predict(ds, split, ens, cfg.threads);
        for (int t = 0; t < cfg.classifiers; ++t)
            result.rows.push_back(
                {t, metric, outcome.classifiers[static_cast<std::size_t>(t)].ari,
                 outcome.classifiers[static_cast<std::size_t>(t)].weight});
    }
    return result;
}

inline std::string ari_report_csv(const AriReportResult& result) {
    std::ostringstream out;
    out << "classifier,metric,ari,weight\n";
    for (const auto& row : result.rows)
        out << row.classifier << "," << metric_name(row.metric) << ","
            << format_real(row.ari) << "," << format_real(row.weight) << "\n";
    return std::move(out).str();
}

inline std::string ari_report_svg(const AriReportResult& result) {
    std::vector<SvgSeries> series;
    for (Metric metric : {Metric::frobenius, Metric::cosine}) {
        SvgSeries s;
        s.name = metric_name(metric);
        for (const auto& row : result.rows)
            if (row.metric == metric)
                s.points.emplace_back(static_cast<double>(row.classifier), row.ari);
        if (!s.points.empty()) series.push_back(std::move(s));
    }
    return svg_scatter_chart("per-classifier adjusted Rand index", "classifier", "ARI",
                             series);
}

// ---------------------------------------------------------------------------
// b sweep (re-weighting a fixed classifier set)

struct BSweepRow {
    double b = 0.0;
    Metric metric = Metric::frobenius;
    double accuracy = 0.0;
};

struct BSweepResult {
    std::vector<BSweepRow> rows;
};

// Samples the classifiers once per metric, then re-weights the stored votes
// for each exponent. Classifier predictions are fixed across the sweep, so
// accuracy differences come from re-weighting alone; b = 0 reproduces
// unweighted majority voting.
inline BSweepResult run_b_sweep(const LabeledDataset& ds, const ExperimentConfig& cfg,
                                std::span<const double> b_values) {
    require(!b_values.empty(), errc::bad_argument, "empty b value list");
    for (double b : b_values)
        require(b >= 0.0, errc::bad_argument, "b values must be non-negative");

    require_single_method_grid(cfg);
    BSweepResult result;
    const SplitPlan split = stratified_split(ds, cfg.train_per_class, cfg.test_per_class,
                                             detail::run_split_seed(cfg.seed, 0));
    for (Metric metric : cfg.metrics) {
        EnsembleConfig ens;
        ens.family = cfg.families.front();
        ens.scheme = cfg.schemes.front();
        ens.t = cfg.classifiers;
        ens.d = cfg.dims;
        ens.knn = KnnConfig{cfg.k, metric};
        ens.b = cfg.b;
        ens.seed = detail::run_ensemble_seed(cfg.seed, 0);
        EnsembleOutcome outcome = fit_predict(ds, split, ens, cfg.threads);
        for (double b : b_values) {
            reweigh(outcome, b);
            result.rows.push_back({b, metric, outcome.accuracy});
        }
    }
    return result;
}

inline std::string b_sweep_csv(const BSweepResult& result) {
    std::ostringstream out;
    out << "b,metric,accuracy\n";
    for (const auto& row : result.rows)
        out << format_real(row.b) << "," << metric_name(row.metric) << ","
            << format_real(row.accuracy) << "\n";
    return std::move(out).str();
}

inline std::string b_sweep_svg(const BSweepResult& result) {
    std::vector<SvgSeries> series;
    for (Metric metric : {Metric::frobenius, Metric::cosine}) {
        SvgSeries s;
        s.name = metric_name(metric);
        for (const auto& row : result.rows)
            if (row.metric == metric) s.points.emplace_back(row.b, row.accuracy);
        if (!s.points.empty()) series.push_back(std::move(s));
    }
    return svg_line_chart("ensemble accuracy vs ARI exponent", "b", "accuracy", series);
}

// ---------------------------------------------------------------------------
// reconstruction strip

struct ReconstructionResult {
    ImageMatrix mosaic{1, 1};
    std::vector<std::pair<int, double>> errors;  // (d, frobenius error), d ascending
};

// PCA reconstruction panels for one image: original first, then one panel
// per retained-eigenvector count, all quantized to [0, 255]. The companion
// rows carry the Frobenius reconstruction error per d.
inline ReconstructionResult run_reconstruction(const LabeledDataset& ds,
                                               std::size_t image_index, Scheme scheme,
                                               std::span<const int> d_values) {
    require(scheme != Scheme::bilateral, errc::unsupported_scheme,
            "reconstruction needs the right or left scheme");
    require(image_index < ds.size(), errc::index_out_of_range,
            "image index out of range");
    require(!d_values.empty(), errc::bad_argument, "empty d list");

    const std::size_t full = scheme == Scheme::right ? ds.image_cols() : ds.image_rows();
    std::vector<int> dims(d_values.begin(), d_values.end());
    std::sort(dims.begin(), dims.end());
    for (int d : dims)
        require(d >= 1 && static_cast<std::size_t>(d) <= full, errc::index_out_of_range,
                "d outside the basis spectrum");

    std::vector<int> all(static_cast<std::size_t>(ds.size()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    MethodSpec spec;
    spec.family = Family::pca;
    spec.scheme = scheme;
    const ProjectionBasis basis = fit_basis(ds, all, spec);
    const ImageMatrix& original = ds.images[image_index];

    std::vector<ImageMatrix> panels;
    panels.push_back(original);
    ReconstructionResult result;
    for (int d : dims) {
        MethodSpec panel_spec = spec;
        panel_spec.d = d;
        ProjectionBasis panel_basis = basis;
        panel_basis.spec = panel_spec;
        const FeatureMatrix feat = project_top(original, panel_basis);
        const ImageMatrix recon = reconstruct(feat, panel_basis);
        result.errors.emplace_back(d, frobenius_distance(original, recon));
        panels.push_back(recon);
    }

    const std::size_t rows = original.rows();
    const std::size_t cols = original.cols();
    const std::size_t gap = 2;
    ImageMatrix mosaic(rows, panels.size() * cols + (panels.size() - 1) * gap, 255.0);
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const std::size_t offset = p * (cols + gap);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                mosaic(i, offset + j) = static_cast<double>(
                    std::clamp(std::lround(panels[p](i, j)), 0L, 255L));
    }
    result.mosaic = std::move(mosaic);
    return result;
}

inline std::string reconstruction_csv(const ReconstructionResult& result) {
    std::ostringstream out;
    out << "d,frobenius_error\n";
    for (const auto& [d, err] : result.errors)
        out << d << "," << format_real(err) << "\n";
    return std::move(out).str();
}

}  // namespace facekit
