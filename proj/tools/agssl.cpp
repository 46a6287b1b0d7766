// agssl command-line front end: ingest, featurize, run, report.
//
// Exit codes: 0 ok, 1 configuration error, 2 input/output or data error,
// 3 some experiment cells failed.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "agssl/config.hpp"
#include "agssl/corpus.hpp"
#include "agssl/eval/experiment.hpp"
#include "agssl/eval/report.hpp"
#include "agssl/features.hpp"
#include "agssl/synthetic.hpp"

namespace fs = std::filesystem;
using namespace agssl;

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kIo = 2, kPartial = 3 };

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::vector<double> ratios;
    bool dry_run = false;
    bool print_config = false;
};

std::ifstream open_in(const std::string& path, const char* what) {
    if (path.empty()) throw IoError(std::string("no ") + what + " path given");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
    return in;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// Defaults, then the config file, then command-line overrides.
RunConfig effective_config(const Globals& g) {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
    if (g.seed) cfg.experiment.seed = *g.seed;
    if (g.out) cfg.output_dir = *g.out;
    if (g.threads) cfg.experiment.threads = *g.threads;
    if (!g.ratios.empty()) cfg.experiment.ratios = g.ratios;
    validate_run_config(cfg);
    return cfg;
}

Corpus ingest_corpus(const RunConfig& cfg, IngestLog* log) {
    auto fa = open_in(cfg.data.sequences, "sequences file");
    auto strains = read_fasta(fa, cfg.data.sequences);
    auto ti = open_in(cfg.data.titres, "titre file");
    auto titres = read_titres(ti, log, cfg.data.titres);
    return build_corpus(strains, titres, cfg.thresholds, log);
}

Corpus load_corpus(const RunConfig& cfg) {
    if (!cfg.data.corpus.empty()) {
        auto in = open_in(cfg.data.corpus, "corpus file");
        return read_corpus_csv(in, cfg.data.corpus);
    }
    return ingest_corpus(cfg, nullptr);
}

int cmd_ingest(const RunConfig& cfg) {
    IngestLog log;
    const Corpus corpus = ingest_corpus(cfg, &log);
    const fs::path dir(cfg.output_dir);
    std::ostringstream csv, counts, notes;
    write_corpus_csv(csv, corpus);
    write_counts_table(counts, corpus);
    for (const auto& l : log.lines) notes << l << '\n';
    notes << '\n' << counts.str();
    write_file(dir / "corpus.csv", csv.str());
    write_file(dir / "counts.csv", counts.str());
    write_file(dir / "ingest_log.txt", notes.str());
    std::cout << counts.str();
    std::cerr << "wrote " << (dir / "corpus.csv").string() << " (" << corpus.pairs.size() << " pairs)\n";
    return kOk;
}

int cmd_featurize(const RunConfig& cfg) {
    if (cfg.data.embeddings.empty()) throw ConfigError("featurize: no embedding files configured");
    const Corpus corpus = load_corpus(cfg);
    const fs::path dir(cfg.output_dir);
    for (const auto& path : cfg.data.embeddings) {
        const auto store = load_embeddings(path);
        const auto fsx = featurize_corpus(store, corpus.pairs, cfg.data.pair_feature);
        std::ostringstream o;
        o << "pair_id,subtype,label";
        for (std::size_t k = 0; k < fsx.x.cols(); ++k) o << ",f" << k;
        o << '\n';
        for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
            const auto& p = corpus.pairs[i];
            o << pair_id(p) << ',' << to_string(p.subtype) << ',' << to_string(p.label);
            for (double v : fsx.x.row(i)) o << ',' << text::format_double(v);
            o << '\n';
        }
        const auto out = dir / ("features_" + store.model_name() + ".csv");
        write_file(out, o.str());
        std::cerr << "wrote " << out.string() << " (" << corpus.pairs.size() << " rows, " << fsx.x.cols()
                  << " features)\n";
    }
    return kOk;
}

std::vector<Dataset> load_datasets(const RunConfig& cfg) {
    std::vector<Dataset> out;
    if (cfg.data.source == "synthetic") {
        out.push_back(two_manifold_dataset(cfg.synthetic));
        return out;
    }
    if (cfg.data.embeddings.empty()) throw ConfigError("run: no embedding files configured");
    const Corpus corpus = load_corpus(cfg);
    for (const auto& path : cfg.data.embeddings) out.push_back(make_dataset(load_embeddings(path), corpus, cfg.data.pair_feature));
    return out;
}

int cmd_run(const RunConfig& cfg, bool dry_run) {
    if (dry_run) {
        std::vector<std::string> names;
        if (cfg.data.source == "synthetic") names.push_back("synthetic");
        else
            for (const auto& p : cfg.data.embeddings) names.push_back(fs::path(p).stem().string());
        const auto cells = plan_cells(cfg.experiment, names);
        std::cout << "embedding,paradigm,learner,ratio\n";
        for (const auto& c : cells)
            std::cout << c.embedding << ',' << to_string(c.paradigm) << ',' << c.learner << ','
                      << text::format_double(c.ratio) << '\n';
        std::cerr << cells.size() << " cells x " << cfg.experiment.outer_k << " outer folds (dry run)\n";
        return kOk;
    }
    const auto datasets = load_datasets(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = run_experiment(datasets, cfg.experiment);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::ordered_json extra;
    extra["data"] = {{"source", cfg.data.source},
                     {"sequences", cfg.data.sequences},
                     {"titres", cfg.data.titres},
                     {"corpus", cfg.data.corpus},
                     {"embeddings", cfg.data.embeddings},
                     {"pair_feature", std::string(to_string(cfg.data.pair_feature))}};
    std::vector<double> thr(cfg.thresholds.per_subtype.begin(), cfg.thresholds.per_subtype.end());
    extra["thresholds"] = thr;
    const std::string json = report_json_text(report, cfg.experiment, extra);
    const fs::path dir(cfg.output_dir);
    write_file(dir / "report.json", json);
    std::istringstream jin(json);
    std::ostringstream csv;
    write_flat_csv(csv, read_report_json(jin));
    write_file(dir / "report.csv", csv.str());
    write_file(dir / "report.digest", hex_digest(fnv1a(json)) + "\n");
    write_file(dir / "effective_config.toml", serialize_run_config(cfg));

    std::size_t failed = 0;
    for (const auto& c : report.cells)
        if (!c.ok) {
            ++failed;
            std::cerr << "cell failed: " << c.key.str() << ": " << c.error << '\n';
        }
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::cerr << report.cells.size() << " cells, " << failed << " failed, " << report.leakage_checks
              << " leakage checks passed, " << text::format_double(std::round(secs * 10) / 10) << " s\n";
    std::cerr << "wrote " << (dir / "report.json").string() << '\n';
    return failed ? kPartial : kOk;
}

int cmd_report(const std::string& report_path, const std::string& out_dir, const FigureOptions& opt) {
    auto in = open_in(report_path, "report");
    const auto table = read_report_json(in);
    for (const auto& f : figure_files(table, opt)) write_file(fs::path(out_dir) / f.name, f.content);
    std::ostringstream csv;
    write_flat_csv(csv, table);
    write_file(fs::path(out_dir) / "report_flat.csv", csv.str());
    std::cerr << "wrote figures for " << table.cells << " cells to " << out_dir << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-supervised antigenicity experiments"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Master seed (overrides the config)");
    app.add_option("--out", g.out, "Output directory (overrides the config)");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--ratios", g.ratios, "Supervision ratios to run")->delimiter(',');
    app.add_flag("--dry-run", g.dry_run, "Print the planned cells without computing");
    app.add_flag("--print-effective-config", g.print_config, "Print the merged configuration and exit");

    auto* ingest = app.add_subcommand("ingest", "Build the pair corpus from sequences and titres");
    std::string sequences, titres;
    ingest->add_option("--sequences", sequences, "FASTA with >id|subtype headers");
    ingest->add_option("--titres", titres, "CSV virus_id,antiserum_id,titre");
    ingest->fallthrough();

    auto* featurize = app.add_subcommand("featurize", "Write pair-feature matrices per embedding file");
    std::string corpus_path;
    std::vector<std::string> embeddings;
    featurize->add_option("--corpus", corpus_path, "Corpus CSV from ingest");
    featurize->add_option("--embeddings", embeddings, "Embedding files (text or binary)");
    featurize->fallthrough();

    auto* run = app.add_subcommand("run", "Run the nested cross-validation sweep");
    run->add_option("--corpus", corpus_path, "Corpus CSV from ingest");
    run->add_option("--embeddings", embeddings, "Embedding files (text or binary)");
    bool synthetic = false;
    run->add_flag("--synthetic", synthetic, "Use the built-in two-manifold corpus");
    run->fallthrough();

    auto* report = app.add_subcommand("report", "Write figure CSVs (and SVGs) from a report JSON");
    std::string report_path;
    FigureOptions fig;
    report->add_option("--report", report_path, "report.json from run")->required();
    report->add_flag("--per-subtype", fig.per_subtype, "Also write one panel per subtype");
    report->add_flag("--svg", fig.svg, "Also write SVG bar charts");
    report->add_option("--scope", fig.scope, "Aggregate feeding the overview bars");
    report->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        RunConfig cfg = effective_config(g);
        if (!sequences.empty()) cfg.data.sequences = sequences;
        if (!titres.empty()) cfg.data.titres = titres;
        if (!corpus_path.empty()) cfg.data.corpus = corpus_path;
        if (!embeddings.empty()) cfg.data.embeddings = embeddings;
        if (synthetic) cfg.data.source = "synthetic";
        if (g.print_config) {
            std::cout << serialize_run_config(cfg);
            return kOk;
        }
        if (*ingest) return cmd_ingest(cfg);
        if (*featurize) return cmd_featurize(cfg);
        if (*run) return cmd_run(cfg, g.dry_run);
        if (*report) return cmd_report(report_path, g.out ? *g.out : cfg.output_dir, fig);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIo;
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kIo;
    } catch (const LeakageError& e) {
        std::cerr << "leakage detected: " << e.what() << '\n';
        return kPartial;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
    return kOk;
}
