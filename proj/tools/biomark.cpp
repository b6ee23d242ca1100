// biomark: batch pipeline for expression-matrix biomarker discovery.
// Subcommands: preprocess | rank | select | evaluate | simulate | pipeline.
// Exit codes: 0 success, 1 usage, 2 data error, 3 algorithm failure.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biomark/diffexpr.hpp"
#include "biomark/error.hpp"
#include "biomark/evaluate.hpp"
#include "biomark/featsel.hpp"
#include "biomark/io.hpp"
#include "biomark/learners.hpp"
#include "biomark/parallel.hpp"
#include "biomark/preprocess.hpp"
#include "biomark/rng.hpp"
#include "biomark/synthgen.hpp"
#include "biomark/types.hpp"

namespace fs = std::filesystem;
using namespace biomark;

namespace {

// ---- option registration with config-echo bookkeeping ----

struct Echo {
    std::vector<std::pair<std::string, std::function<std::string()>>> entries;

    void add(const std::string& key, std::function<std::string()> render) {
        entries.emplace_back(key, std::move(render));
    }

    std::string render(const std::string& subcommand) const {
        std::string out = "# biomark " + subcommand + " effective configuration\n";
        for (const auto& [key, fn] : entries) out += key + "=" + fn() + "\n";
        return out;
    }
};

std::string render_value(const std::string& v) { return v; }
std::string render_value(double v) { return format_value(v); }
std::string render_value(bool v) { return v ? "1" : "0"; }
template <typename T>
std::string render_value(T v) requires std::is_integral_v<T> { return std::to_string(v); }

template <typename T>
CLI::Option* opt(CLI::App* sub, Echo& echo, const std::string& name, T& target,
                 const std::string& desc) {
    auto* o = sub->add_option("--" + name, target, desc);
    o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    echo.add(name, [&target]() { return render_value(target); });
    return o;
}

CLI::Option* flag(CLI::App* sub, Echo& echo, const std::string& name, bool& target,
                  const std::string& desc) {
    auto* o = sub->add_flag("--" + name, target, desc);
    echo.add(name, [&target]() { return render_value(target); });
    return o;
}

// ---- config file: key=value lines, merged as defaults under the CLI ----

std::vector<std::string> load_config_tokens(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("bad_config_line", "config line " + std::to_string(line_no) +
                                                     " is not key=value: '" + line + "'");
        tokens.push_back("--" + line.substr(first, eq - first) + "=" + line.substr(eq + 1));
    }
    return tokens;
}

std::vector<std::string> merge_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;
    const auto file_tokens = load_config_tokens(config_path);
    // file tokens go right after the subcommand so explicit CLI flags win
    std::vector<std::string> merged;
    std::size_t insert_at = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].empty() && args[i][0] != '-') {
            insert_at = i + 1;
            break;
        }
    }
    merged.insert(merged.end(), args.begin(), args.begin() + static_cast<std::ptrdiff_t>(insert_at));
    merged.insert(merged.end(), file_tokens.begin(), file_tokens.end());
    merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_at), args.end());
    return merged;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        const std::string item = s.substr(pos, comma - pos);
        if (!item.empty()) out.push_back(item);
        pos = comma + 1;
    }
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& what) {
    std::vector<std::size_t> out;
    for (const auto& item : split_csv(s)) {
        try {
            out.push_back(static_cast<std::size_t>(std::stoull(item)));
        } catch (const std::exception&) {
            throw ConfigError("bad_list", "cannot parse '" + item + "' in " + what);
        }
    }
    return out;
}

std::pair<double, double> parse_range(const std::string& s, const std::string& what) {
    const auto items = split_csv(s);
    if (items.size() != 2) throw ConfigError("bad_range", what + " must be 'lo,hi'");
    try {
        return {std::stod(items[0]), std::stod(items[1])};
    } catch (const std::exception&) {
        throw ConfigError("bad_range", "cannot parse range '" + s + "' for " + what);
    }
}

// "12:0,0,2;47:2,0,0" -> informative gene list
std::vector<InformativeGene> parse_informative(const std::string& s) {
    std::vector<InformativeGene> out;
    if (s.empty()) return out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t semi = s.find(';', pos);
        if (semi == std::string::npos) semi = s.size();
        const std::string entry = s.substr(pos, semi - pos);
        pos = semi + 1;
        if (entry.empty()) continue;
        const std::size_t colon = entry.find(':');
        if (colon == std::string::npos)
            throw ConfigError("bad_informative",
                              "informative entry '" + entry + "' is not index:shift,shift,...");
        InformativeGene g;
        try {
            g.gene_index = static_cast<std::size_t>(std::stoull(entry.substr(0, colon)));
            for (const auto& shift : split_csv(entry.substr(colon + 1)))
                g.class_shifts.push_back(std::stod(shift));
        } catch (const std::exception&) {
            throw ConfigError("bad_informative", "cannot parse informative entry '" + entry + "'");
        }
        out.push_back(std::move(g));
    }
    return out;
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("out_dir_failed", "cannot create output directory '" + out_dir + "'");
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

// ---- shared option blocks ----

struct CommonOpts {
    std::string input;
    std::string calls;
    std::string out_dir = ".";
    std::string config;
    std::string class_prefixes = "HC,ND,PD";
    int workers = 0;
    std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Echo& echo, CommonOpts& c, bool input_required) {
    auto* in = opt(sub, echo, "input", c.input, "expression matrix (tab-separated)");
    if (input_required) in->required();
    opt(sub, echo, "calls", c.calls, "MAS5 detection-call matrix (P/M/A cells)");
    opt(sub, echo, "out-dir", c.out_dir, "artifact directory");
    opt(sub, echo, "class-prefixes", c.class_prefixes, "comma-separated sample-ID class prefixes");
    opt(sub, echo, "seed", c.seed, "base seed for every random operation");
    opt(sub, echo, "workers", c.workers, "worker threads (0 = all cores)");
    sub->add_option("--config", c.config, "key=value config file; command line overrides")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

struct PreprocessOpts {
    double present_fraction = 0.25;
    double noise_floor = 100.0;
    double z_threshold = 5.0;
    double log_base = 2.0;
    double log_clamp = 1.0;
    double surrogate_floor = 100.0;
};

void add_preprocess(CLI::App* sub, Echo& echo, PreprocessOpts& p) {
    opt(sub, echo, "present-fraction", p.present_fraction, "Present-call keep fraction");
    opt(sub, echo, "noise-floor", p.noise_floor, "row-maximum noise floor");
    opt(sub, echo, "z-threshold", p.z_threshold, "within-class |z| outlier threshold");
    opt(sub, echo, "log-base", p.log_base, "log transform base");
    opt(sub, echo, "log-clamp", p.log_clamp, "raw-value clamp applied before the log");
    opt(sub, echo, "surrogate-floor", p.surrogate_floor,
        "Present threshold for surrogate calls when no call file is given");
}

struct RankOpts {
    std::string stat = "f";
    int permutations = 1000;
    double fdr_cutoff = 0.01;
    int heatmap_top = 40;
};

void add_rank(CLI::App* sub, Echo& echo, RankOpts& r) {
    opt(sub, echo, "stat", r.stat, "test statistic: t, snr, f");
    opt(sub, echo, "permutations", r.permutations, "permutation rounds");
    opt(sub, echo, "fdr-cutoff", r.fdr_cutoff, "FDR threshold for the significant-gene count");
    opt(sub, echo, "heatmap-top", r.heatmap_top, "genes in the heatmap export");
}

struct SelectOpts {
    std::string selector = "rsvm";
    std::string search = "auto";
    std::size_t top_k = 20;
    int eliminate_per_iteration = 1;
    double svm_c = 1.0;
    int internal_folds = 5;
    int stale_limit = 5;
    std::string wrapper_learner = "dtable";
};

void add_select(CLI::App* sub, Echo& echo, SelectOpts& s) {
    opt(sub, echo, "selector", s.selector, "selector: wse, cfs, rsvm");
    opt(sub, echo, "search", s.search, "search: greedy, bestfirst, ranker, auto");
    opt(sub, echo, "top-k", s.top_k, "features kept from the RSVM ranking");
    opt(sub, echo, "eliminate-per-iteration", s.eliminate_per_iteration,
        "features dropped per RFE round");
    opt(sub, echo, "svm-c", s.svm_c, "soft-margin C for the RFE machines");
    opt(sub, echo, "internal-folds", s.internal_folds, "wrapper-CV fold count");
    opt(sub, echo, "stale-limit", s.stale_limit, "best-first non-improving expansion budget");
    opt(sub, echo, "wrapper-learner", s.wrapper_learner, "wrapper base learner");
}

SelectorConfig to_selector_config(const SelectOpts& s, std::uint64_t seed) {
    SelectorConfig cfg;
    cfg.kind = selector_from_name(s.selector);
    if (s.search == "auto")
        cfg.search = cfg.kind == SelectorKind::rsvm ? SearchKind::ranker : SearchKind::greedy;
    else
        cfg.search = search_from_name(s.search);
    cfg.top_k = s.top_k;
    cfg.eliminate_per_iteration = s.eliminate_per_iteration;
    cfg.svm_c = s.svm_c;
    cfg.internal_folds = s.internal_folds;
    cfg.stale_limit = s.stale_limit;
    cfg.wrapper_learner.kind = classifier_from_name(s.wrapper_learner);
    cfg.seed = seed;
    return cfg;
}

struct EvaluateOpts {
    std::string classifier = "svm";
    int folds = 10;
    double clf_svm_c = 1.0;
    int lvq_prototypes = 4;
    double lvq_rate = 0.3;
    int lvq_epochs = 1000;
    int dtable_bins = 10;
    double nb_variance_floor = 1e-6;
    bool continue_on_fold_failure = false;
};

void add_evaluate(CLI::App* sub, Echo& echo, EvaluateOpts& e) {
    opt(sub, echo, "classifier", e.classifier, "classifier: nb, svm, lvq, dtable");
    opt(sub, echo, "folds", e.folds, "cross-validation fold count");
    opt(sub, echo, "clf-svm-c", e.clf_svm_c, "soft-margin C for the evaluated SVM");
    opt(sub, echo, "lvq-prototypes", e.lvq_prototypes, "LVQ prototypes per class");
    opt(sub, echo, "lvq-rate", e.lvq_rate, "LVQ initial learning rate");
    opt(sub, echo, "lvq-epochs", e.lvq_epochs, "LVQ training epochs");
    opt(sub, echo, "dtable-bins", e.dtable_bins, "decision-table bins per feature");
    opt(sub, echo, "nb-variance-floor", e.nb_variance_floor, "naive-Bayes variance floor");
    flag(sub, echo, "continue-on-fold-failure", e.continue_on_fold_failure,
         "keep going when a fold's selector fails");
}

ClassifierConfig to_classifier_config(const EvaluateOpts& e, std::uint64_t seed) {
    ClassifierConfig cfg;
    cfg.kind = classifier_from_name(e.classifier);
    cfg.svm_c = e.clf_svm_c;
    cfg.lvq_prototypes_per_class = e.lvq_prototypes;
    cfg.lvq_initial_rate = e.lvq_rate;
    cfg.lvq_epochs = e.lvq_epochs;
    cfg.dtable_bins = e.dtable_bins;
    cfg.nb_variance_floor = e.nb_variance_floor;
    cfg.seed = seed;
    return cfg;
}

struct SimulateOpts {
    std::size_t genes = 2000;
    std::string class_sizes = "22,33,50";
    std::string class_names;
    std::string informative;
    int planted = 0;
    double shift = 2.0;
    std::string log_mean_range = "5,10";
    std::string log_std_range = "0.5,1.5";
    double present_rate = 1.0;
    double outlier_rate = 0.0;
    double outlier_magnitude = 6.0;
};

void add_simulate(CLI::App* sub, Echo& echo, SimulateOpts& s) {
    opt(sub, echo, "genes", s.genes, "gene count");
    opt(sub, echo, "class-sizes", s.class_sizes, "comma-separated class sizes");
    opt(sub, echo, "class-names", s.class_names, "comma-separated class names");
    opt(sub, echo, "informative", s.informative,
        "planted genes, 'index:shift,shift,...;index:...' (shifts in log-std units)");
    opt(sub, echo, "planted", s.planted,
        "shortcut: plant N markers with rotating one-class shifts");
    opt(sub, echo, "shift", s.shift, "shift size (log-std units) for --planted");
    opt(sub, echo, "log-mean-range", s.log_mean_range, "per-gene base-2 log-mean range 'lo,hi'");
    opt(sub, echo, "log-std-range", s.log_std_range, "per-gene base-2 log-std range 'lo,hi'");
    opt(sub, echo, "present-rate", s.present_rate, "per-cell Present probability");
    opt(sub, echo, "outlier-rate", s.outlier_rate, "per-cell outlier injection probability");
    opt(sub, echo, "outlier-magnitude", s.outlier_magnitude,
        "injected outlier distance in within-class stds");
}

SynthSpec to_synth_spec(const SimulateOpts& s, std::uint64_t seed) {
    SynthSpec spec;
    spec.genes = s.genes;
    spec.class_sizes = parse_size_list(s.class_sizes, "--class-sizes");
    if (!s.class_names.empty()) spec.class_names = split_csv(s.class_names);
    spec.informative = parse_informative(s.informative);
    if (s.planted > 0) {
        if (!spec.informative.empty())
            throw ConfigError("bad_informative", "--planted and --informative are exclusive");
        const std::size_t k = spec.class_sizes.size();
        const std::size_t stride = std::max<std::size_t>(spec.genes / static_cast<std::size_t>(s.planted), 1);
        for (int i = 0; i < s.planted; ++i) {
            InformativeGene g;
            g.gene_index = (static_cast<std::size_t>(i) * stride) % spec.genes;
            g.class_shifts.assign(k, 0.0);
            g.class_shifts[static_cast<std::size_t>(i) % k] = s.shift;
            spec.informative.push_back(std::move(g));
        }
    }
    std::tie(spec.log_mean_lo, spec.log_mean_hi) = parse_range(s.log_mean_range, "--log-mean-range");
    std::tie(spec.log_std_lo, spec.log_std_hi) = parse_range(s.log_std_range, "--log-std-range");
    spec.present_rate = s.present_rate;
    spec.outlier_rate = s.outlier_rate;
    spec.outlier_magnitude = s.outlier_magnitude;
    spec.seed = seed;
    return spec;
}

// ---- subcommand bodies ----

LabeledDataset load_dataset(const CommonOpts& c) {
    ExpressionMatrix m = parse_expression_table(read_file(c.input));
    return label_by_prefix(std::move(m), split_csv(c.class_prefixes));
}

std::optional<CallMatrix> load_calls(const CommonOpts& c, const ExpressionMatrix& m) {
    if (c.calls.empty()) return std::nullopt;
    CallMatrix calls = parse_call_table(read_file(c.calls));
    calls.validate_against(m);
    return calls;
}

PreprocessResult do_preprocess(const CommonOpts& c, const PreprocessOpts& p,
                               const LabeledDataset& ds) {
    const auto calls = load_calls(c, ds.matrix);
    PreprocessOptions options;
    options.present_fraction = p.present_fraction;
    options.noise_floor = p.noise_floor;
    options.z_threshold = p.z_threshold;
    options.log_base = p.log_base;
    options.log_clamp = p.log_clamp;
    options.surrogate_floor = p.surrogate_floor;
    PreprocessResult result = run_preprocess(ds, calls ? &*calls : nullptr, options);
    return result;
}

void emit_preprocess_artifacts(const std::string& out_dir, const PreprocessResult& res) {
    write_file(join_path(out_dir, "preprocessed.tsv"), format_matrix(res.dataset.matrix));
    write_file(join_path(out_dir, "filter_report.tsv"), format_filter_report(res.report));
    write_file(join_path(out_dir, "outliers.tsv"), format_outliers(res.outliers));
    std::cerr << "preprocess: " << res.report.input_count << " -> " << res.report.output_count
              << " probesets (" << res.report.removed_by_calls << " by calls, "
              << res.report.removed_by_noise << " by noise); " << res.outliers.size()
              << " outliers imputed\n";
}

struct RankArtifacts {
    std::vector<GeneScore> scores;
    std::size_t significant = 0;
};

RankArtifacts do_rank(const CommonOpts& c, const RankOpts& r, const LabeledDataset& ds,
                      const std::string& out_dir) {
    PermutationPlan plan;
    plan.permutation_count = r.permutations;
    plan.seed = derive_seed(c.seed, 11);
    RankArtifacts out;
    out.scores = rank_genes(ds, stat_from_name(r.stat), plan);
    write_file(join_path(out_dir, "scores.tsv"), format_scores(out.scores));
    const auto top_n = static_cast<std::size_t>(std::max(r.heatmap_top, 0));
    if (top_n > out.scores.size())
        std::cerr << "rank: heatmap-top " << top_n << " clipped to " << out.scores.size()
                  << " genes\n";
    const ExpressionMatrix heatmap = heatmap_export(ds, out.scores, top_n);
    write_file(join_path(out_dir, "heatmap.tsv"), format_matrix(heatmap));
    for (const auto& s : out.scores)
        if (s.fdr_bh < r.fdr_cutoff) ++out.significant;
    std::cout << "significant_genes\t" << out.significant << "\n";
    return out;
}

std::vector<std::size_t> do_select(const CommonOpts& c, const SelectOpts& s,
                                   const LabeledDataset& ds, const std::string& out_dir) {
    const SelectorConfig cfg = to_selector_config(s, derive_seed(c.seed, 12));
    if (cfg.kind == SelectorKind::rsvm) {
        const FeatureRanking ranking = svm_rfe(ds, cfg.eliminate_per_iteration, cfg.svm_c);
        write_file(join_path(out_dir, "ranking.tsv"), format_ranking(ranking));
        const std::size_t k = std::min(cfg.top_k, ranking.feature_indices.size());
        const FeatureSubset subset = select_top_k(ranking, k);
        write_file(join_path(out_dir, "subset.tsv"), format_subset(subset));
        return subset.feature_indices;
    }
    SubsetSearchConfig sc;
    sc.evaluator = cfg.kind == SelectorKind::wse ? EvaluatorKind::wrapper : EvaluatorKind::cfs;
    sc.internal_folds = cfg.internal_folds;
    sc.stale_limit = cfg.stale_limit;
    sc.base_learner = cfg.wrapper_learner;
    sc.seed = cfg.seed;
    const FeatureSubset subset =
        cfg.search == SearchKind::bestfirst ? best_first(ds, sc) : greedy_stepwise(ds, sc);
    write_file(join_path(out_dir, "subset.tsv"), format_subset(subset));
    return subset.feature_indices;
}

EvalReport do_evaluate(const CommonOpts& c, const SelectOpts& s, const EvaluateOpts& e,
                       const LabeledDataset& ds, const std::string& out_dir) {
    const SelectorConfig sel = to_selector_config(s, derive_seed(c.seed, 13));
    const ClassifierConfig clf = to_classifier_config(e, derive_seed(c.seed, 14));
    const FoldPlan folds = stratified_folds(ds.labels, e.folds, derive_seed(c.seed, 15));
    const EvalReport report = nested_cv(ds, sel, clf, folds, e.continue_on_fold_failure);
    write_file(join_path(out_dir, "report.txt"), format_report(report));
    write_file(join_path(out_dir, "report.json"), report_to_json_string(report));
    std::cout << "accuracy\t" << format_value(report.accuracy) << "\n";
    std::cout << "kappa\t" << format_value(report.kappa_stat) << "\n";
    return report;
}

void do_simulate(const CommonOpts& c, const SimulateOpts& s, const std::string& out_dir) {
    const SynthSpec spec = to_synth_spec(s, c.seed);
    const SynthResult result = generate(spec);
    write_file(join_path(out_dir, "expression.tsv"), format_matrix(result.dataset.matrix));
    write_file(join_path(out_dir, "calls.tsv"), format_calls(result.calls));
    write_file(join_path(out_dir, "truth.json"), truth_to_json_string(result.truth));
    std::cerr << "simulate: " << spec.genes << " genes, "
              << result.dataset.matrix.n_samples() << " samples, "
              << result.truth.informative.size() << " informative, "
              << result.truth.outliers.size() << " injected outliers\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biomarker-discovery pipeline for expression matrices"};
    app.require_subcommand(1);

    CommonOpts common[6];
    Echo echoes[6];
    PreprocessOpts pre_opts, pipe_pre;
    RankOpts rank_opts, pipe_rank;
    SelectOpts select_opts, eval_select, pipe_select;
    EvaluateOpts eval_opts, pipe_eval;
    SimulateOpts sim_opts;

    auto* cmd_pre = app.add_subcommand("preprocess", "filter, impute, transform, standardize");
    add_common(cmd_pre, echoes[0], common[0], true);
    add_preprocess(cmd_pre, echoes[0], pre_opts);

    auto* cmd_rank = app.add_subcommand("rank", "permutation-tested differential expression");
    add_common(cmd_rank, echoes[1], common[1], true);
    add_rank(cmd_rank, echoes[1], rank_opts);

    auto* cmd_select = app.add_subcommand("select", "multivariate feature selection");
    add_common(cmd_select, echoes[2], common[2], true);
    add_select(cmd_select, echoes[2], select_opts);

    auto* cmd_eval = app.add_subcommand("evaluate", "nested cross-validated evaluation");
    add_common(cmd_eval, echoes[3], common[3], true);
    add_select(cmd_eval, echoes[3], eval_select);
    add_evaluate(cmd_eval, echoes[3], eval_opts);

    auto* cmd_sim = app.add_subcommand("simulate", "synthetic dataset with known ground truth");
    add_common(cmd_sim, echoes[4], common[4], false);
    add_simulate(cmd_sim, echoes[4], sim_opts);

    auto* cmd_pipe = app.add_subcommand("pipeline", "preprocess + rank + select + evaluate");
    add_common(cmd_pipe, echoes[5], common[5], true);
    add_preprocess(cmd_pipe, echoes[5], pipe_pre);
    add_rank(cmd_pipe, echoes[5], pipe_rank);
    add_select(cmd_pipe, echoes[5], pipe_select);
    add_evaluate(cmd_pipe, echoes[5], pipe_eval);

    try {
        const auto args = merge_config_args(argc, argv);
        std::vector<const char*> cargs;
        cargs.push_back(argv[0]);
        for (const auto& a : args) cargs.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(cargs.size()), cargs.data());
        } catch (const CLI::ParseError& e) {
            std::cout << "error=usage\n";
            return app.exit(e, std::cerr, std::cerr) == 0 ? 0 : 1;
        }

        int which = -1;
        if (cmd_pre->parsed()) which = 0;
        else if (cmd_rank->parsed()) which = 1;
        else if (cmd_select->parsed()) which = 2;
        else if (cmd_eval->parsed()) which = 3;
        else if (cmd_sim->parsed()) which = 4;
        else if (cmd_pipe->parsed()) which = 5;

        const CommonOpts& c = common[which];
        set_worker_count(c.workers);
        ensure_out_dir(c.out_dir);
        static const char* names[] = {"preprocess", "rank", "select",
                                      "evaluate",   "simulate", "pipeline"};
        write_file(join_path(c.out_dir, "config_echo.txt"), echoes[which].render(names[which]));

        switch (which) {
            case 0: {
                const LabeledDataset ds = load_dataset(c);
                emit_preprocess_artifacts(c.out_dir, do_preprocess(c, pre_opts, ds));
                break;
            }
            case 1: {
                stat_from_name(rank_opts.stat);  // flag validation precedes data loading
                const LabeledDataset ds = load_dataset(c);
                do_rank(c, rank_opts, ds, c.out_dir);
                break;
            }
            case 2: {
                to_selector_config(select_opts, 0);
                const LabeledDataset ds = load_dataset(c);
                do_select(c, select_opts, ds, c.out_dir);
                break;
            }
            case 3: {
                to_selector_config(eval_select, 0);
                to_classifier_config(eval_opts, 0);
                const LabeledDataset ds = load_dataset(c);
                do_evaluate(c, eval_select, eval_opts, ds, c.out_dir);
                break;
            }
            case 4: {
                do_simulate(c, sim_opts, c.out_dir);
                break;
            }
            case 5: {
                const LabeledDataset raw = load_dataset(c);
                const PreprocessResult pre = do_preprocess(c, pipe_pre, raw);
                emit_preprocess_artifacts(c.out_dir, pre);
                do_rank(c, pipe_rank, pre.dataset, c.out_dir);
                do_select(c, pipe_select, pre.dataset, c.out_dir);
                do_evaluate(c, pipe_select, pipe_eval, pre.dataset, c.out_dir);
                break;
            }
            default: break;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cout << "error=" << e.code() << "\n";
        std::cerr << "biomark: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cout << "error=" << e.code() << "\n";
        std::cerr << "biomark: " << e.what() << "\n";
        return 2;
    } catch (const AlgorithmError& e) {
        std::cout << "error=" << e.code() << "\n";
        std::cerr << "biomark: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cout << "error=internal\n";
        std::cerr << "biomark: " << e.what() << "\n";
        return 3;
    }
}
