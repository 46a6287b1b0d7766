#include <gtest/gtest.h>

#include <sstream>

#include "agssl/config.hpp"
#include "agssl/eval/report.hpp"

using namespace agssl;

namespace {

std::string message_of(const std::string& text) {
    try {
        parse_run_config(text, "cfg.toml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const FigureFile* file_named(const std::vector<FigureFile>& files, const std::string& name) {
    for (const auto& f : files)
        if (f.name == name) return &f;
    return nullptr;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Config, DefaultsRoundTrip) {
    const RunConfig cfg;
    const auto text = serialize_run_config(cfg);
    EXPECT_EQ(parse_run_config(text), cfg);
    EXPECT_EQ(serialize_run_config(parse_run_config(text)), text);
}

TEST(Config, EditedValuesRoundTrip) {
    RunConfig cfg;
    cfg.data.source = "synthetic";
    cfg.data.embeddings = {"a.emb", "b with space.emb"};
    cfg.data.pair_feature = PairFeatureKind::Diff;
    cfg.synthetic.noise = 0.3;
    cfg.thresholds.set(Subtype::H5N1, 6.5);
    cfg.experiment.ratios = {0.25, 1.0};
    cfg.experiment.seed = 1234567890123ULL;
    cfg.experiment.rf_grid.max_depth = {3, std::nullopt};
    cfg.experiment.svm_grid.c = {0.001, 10};
    cfg.experiment.st_grid.criterion = {SelectionCriterion::KBest};
    cfg.experiment.ls_grid.tol = 1e-6;
    cfg.experiment.graph_metric = GraphMetric::Cosine;
    cfg.experiment.use_unlabelled = false;
    cfg.output_dir = "results";
    const auto back = parse_run_config(serialize_run_config(cfg));
    EXPECT_EQ(back, cfg);
}

TEST(Config, ParsesCommentsMultilineArraysAndNone) {
    const auto cfg = parse_run_config(
        "# header comment\n"
        "[experiment]\n"
        "ratios = [\n  0.5,  # half\n  1.0,\n]\n"
        "seed = 9\n"
        "[grid.rf]\n"
        "max_depth = [4, \"None\"]\n"
        "[thresholds]\n"
        "H3N2 = 5\n");
    EXPECT_EQ(cfg.experiment.ratios, (std::vector<double>{0.5, 1.0}));
    EXPECT_EQ(cfg.experiment.seed, 9u);
    EXPECT_EQ(cfg.experiment.rf_grid.max_depth, (std::vector<std::optional<int>>{4, std::nullopt}));
    EXPECT_EQ(cfg.thresholds[Subtype::H3N2], 5.0);
    EXPECT_EQ(cfg.thresholds[Subtype::H1N1], 4.0);
}

TEST(Config, UnknownNamesRejectedWithLine) {
    const auto key = message_of("[experiment]\nseed = 1\nseeed = 3\n");
    EXPECT_NE(key.find("seeed"), std::string::npos) << key;
    EXPECT_NE(key.find("cfg.toml:3"), std::string::npos) << key;
    const auto section = message_of("[experimnet]\nseed = 1\n");
    EXPECT_NE(section.find("experimnet"), std::string::npos) << section;
}

TEST(Config, TypeAndValueErrors) {
    EXPECT_FALSE(message_of("[experiment]\nseed = \"x\"\n").empty());
    EXPECT_FALSE(message_of("[experiment]\nratios = 0.5\n").empty());
    EXPECT_FALSE(message_of("[experiment]\nparadigms = [\"magic\"]\n").empty());
    EXPECT_FALSE(message_of("[experiment]\nseed = 1\nseed = 2\n").empty());
    EXPECT_FALSE(message_of("[experiment]\nseed 1\n").empty());
    EXPECT_FALSE(message_of("[data]\nsequences = \"unterminated\n").empty());
    RunConfig bad;
    bad.experiment.ratios = {0.3};
    EXPECT_THROW(validate_run_config(bad), ConfigError);
    bad = RunConfig{};
    bad.experiment.svm_grid.c = {0};
    EXPECT_THROW(validate_run_config(bad), ConfigError);
}

TEST(Config, LoadMissingFileIsIoError) {
    EXPECT_THROW(load_run_config("/nonexistent/agssl.toml"), IoError);
}

namespace {

// A hand-built two-cell report: one ok cell with two folds, one failed cell.
ExperimentReport tiny_report() {
    ExperimentReport r;
    CellResult ok;
    ok.key = {"emb", Paradigm::Supervised, "RF", 0.5};
    ok.folds = {{{0, 1}, {Label::Variant, Label::Similar}, "n_estimators=10", true, 0},
                {{2, 3}, {Label::Variant, Label::Variant}, "n_estimators=50", true, 0}};
    for (const char* scope : {"H1N1", "pooled", "macro_subtype"}) {
        SummaryRow row;
        row.scope = scope;
        row.fold_f1 = {1.0, 0.5};
        row.mean_f1 = 0.75;
        row.ci = {0.5, 1.0};
        ok.rows.push_back(row);
    }
    CellResult bad;
    bad.key = {"emb", Paradigm::LabelSpreading, "kNN", 0.5};
    bad.ok = false;
    bad.error = "fold 2: graph too small";
    r.cells = {ok, bad};
    return r;
}

}  // namespace

TEST(Report, JsonCarriesSchemaConfigAndCells) {
    const auto cfg = ExperimentConfig{};
    const auto j = report_to_json(tiny_report(), cfg);
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["cells"].size(), 2u);
    EXPECT_EQ(j["cells"][1]["status"], "failed");
    const auto text = report_json_text(tiny_report(), cfg);
    EXPECT_EQ(report_digest(tiny_report(), cfg), fnv1a(text));
    EXPECT_EQ(hex_digest(0xabcULL), "0000000000000abc");
}

TEST(Report, ReadBackAndFlatCsv) {
    std::istringstream in(report_json_text(tiny_report(), ExperimentConfig{}));
    const auto t = read_report_json(in);
    EXPECT_EQ(t.cells, 2u);
    ASSERT_EQ(t.rows.size(), 4u);  // three scopes for the ok cell, one status row for the failed one
    EXPECT_EQ(t.rows[1].scope, "pooled");
    EXPECT_EQ(t.rows[1].fold_f1, (std::vector<double>{1.0, 0.5}));
    EXPECT_EQ(t.rows[1].hyperparameters, "n_estimators=10|n_estimators=50");
    EXPECT_EQ(t.rows[3].status, "failed");

    std::ostringstream csv;
    write_flat_csv(csv, t);
    EXPECT_EQ(lines(csv.str()), 5u);
    EXPECT_NE(csv.str().find("emb,supervised,RF,0.5,pooled,ok,0.75,0.5,1,1;0.5,"), std::string::npos) << csv.str();
}

TEST(Report, SchemaMismatchAndMalformedInput) {
    std::istringstream future("{\"schema_version\": 2, \"cells\": []}");
    try {
        read_report_json(future);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("schema version 2"), std::string::npos);
    }
    std::istringstream junk("not json");
    EXPECT_THROW(read_report_json(junk), FormatError);
    std::istringstream missing("{\"schema_version\": 1}");
    EXPECT_THROW(read_report_json(missing), FormatError);
}

TEST(Report, FigureFiles) {
    std::istringstream in(report_json_text(tiny_report(), ExperimentConfig{}));
    const auto t = read_report_json(in);
    const auto files = figure_files(t, {"macro_subtype", true, true});
    const auto* overview = file_named(files, "fig_overview.csv");
    ASSERT_NE(overview, nullptr);
    EXPECT_EQ(lines(overview->content), 2u);
    EXPECT_NE(overview->content.find("supervised-emb-RF,supervised,emb,RF,0.5,0.7500,0.5000,1.0000"), std::string::npos)
        << overview->content;
    EXPECT_EQ(lines(file_named(files, "fig_subtype_H1N1.csv")->content), 2u);
    EXPECT_EQ(lines(file_named(files, "fig_subtype_H9N2.csv")->content), 1u);
    EXPECT_NE(file_named(files, "fig_overview.svg"), nullptr);
    EXPECT_NE(file_named(files, "fig_embeddings.csv")->content.find("emb,0.7500,0.0000,1"), std::string::npos);

    const auto plain = figure_files(ReportTable{}, {});
    EXPECT_EQ(plain.size(), 3u);
    for (const auto& f : plain) EXPECT_EQ(lines(f.content), 1u) << f.name;
}
