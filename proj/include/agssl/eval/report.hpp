#pragma once
// Report serialization: JSON (schema-versioned, with config echo), a flat CSV,
// per-figure CSVs and optional SVG bar charts.

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agssl/eval/experiment.hpp"
#include "agssl/text.hpp"

namespace agssl {

inline constexpr int kReportSchemaVersion = 1;

inline nlohmann::ordered_json experiment_config_json(const ExperimentConfig& c) {
    using nlohmann::ordered_json;
    ordered_json j;
    ordered_json paradigms = ordered_json::array(), learners = ordered_json::array();
    for (auto p : c.paradigms) paradigms.push_back(std::string(to_string(p)));
    for (auto l : c.learners) learners.push_back(std::string(to_string(l)));
    j["paradigms"] = paradigms;
    j["learners"] = learners;
    j["ratios"] = c.ratios;
    j["seed"] = c.seed;
    j["outer_k"] = c.outer_k;
    j["inner_k"] = c.inner_k;
    j["bootstrap_resamples"] = c.bootstrap_resamples;
    j["ci_level"] = c.ci_level;
    ordered_json depth = ordered_json::array();
    for (const auto& d : c.rf_grid.max_depth) d ? depth.push_back(*d) : depth.push_back("None");
    j["grid"]["rf"] = {{"n_estimators", c.rf_grid.n_estimators}, {"max_depth", depth}};
    j["grid"]["svm"] = {{"c", c.svm_grid.c}, {"gamma", c.svm_grid.gamma}};
    ordered_json crit = ordered_json::array();
    for (auto k : c.st_grid.criterion) crit.push_back(std::string(to_string(k)));
    j["grid"]["self_training"] = {{"criterion", crit},
                                  {"threshold", c.st_grid.threshold},
                                  {"k_best", c.st_grid.k_best},
                                  {"max_iter", c.st_grid.max_iter}};
    j["grid"]["label_spreading"] = {{"alpha", c.ls_grid.alpha},
                                    {"n_neighbors", c.ls_grid.n_neighbors},
                                    {"max_iter", c.ls_grid.max_iter},
                                    {"tol", c.ls_grid.tol}};
    j["graph_metric"] = c.graph_metric == GraphMetric::Euclidean ? "euclidean" : "cosine";
    j["unlabelled_cap"] = c.unlabelled_cap;
    j["use_unlabelled"] = c.use_unlabelled;
    return j;
}

// `extra` is merged into the config echo (input paths and the like).
inline nlohmann::ordered_json report_to_json(const ExperimentReport& report, const ExperimentConfig& cfg,
                                             const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    ordered_json config = experiment_config_json(cfg);
    for (auto it = extra.begin(); it != extra.end(); ++it) config[it.key()] = it.value();
    j["config"] = config;
    j["leakage_checks"] = report.leakage_checks;
    j["warnings"] = report.warnings;
    ordered_json cells = ordered_json::array();
    for (const auto& c : report.cells) {
        ordered_json cell;
        cell["embedding"] = c.key.embedding;
        cell["paradigm"] = std::string(to_string(c.key.paradigm));
        cell["learner"] = c.key.learner;
        cell["ratio"] = c.key.ratio;
        cell["status"] = c.ok ? "ok" : "failed";
        if (!c.ok) cell["error"] = c.error;
        ordered_json folds = ordered_json::array();
        for (const auto& f : c.folds) {
            ordered_json fj;
            fj["n_test"] = f.test.size();
            fj["hyperparameters"] = f.hyperparameters;
            if (c.key.paradigm == Paradigm::LabelSpreading) fj["converged"] = f.converged;
            if (c.key.paradigm == Paradigm::SelfTraining) fj["pseudo_labels"] = f.pseudo_labels;
            folds.push_back(fj);
        }
        cell["folds"] = folds;
        ordered_json rows = ordered_json::array();
        for (const auto& r : c.rows)
            rows.push_back({{"scope", r.scope},
                            {"mean_f1", r.mean_f1},
                            {"ci_low", r.ci.low},
                            {"ci_high", r.ci.high},
                            {"fold_f1", r.fold_f1}});
        cell["results"] = rows;
        cells.push_back(cell);
    }
    j["cells"] = cells;
    return j;
}

inline std::string report_json_text(const ExperimentReport& report, const ExperimentConfig& cfg,
                                     const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) {
    return report_to_json(report, cfg, extra).dump(2) + "\n";
}

inline std::uint64_t report_digest(const ExperimentReport& report, const ExperimentConfig& cfg) {
    return fnv1a(report_json_text(report, cfg));
}

inline std::string hex_digest(std::uint64_t d) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, d >>= 4) s[static_cast<std::size_t>(i)] = hex[d & 0xf];
    return s;
}

// ---------------------------------------------------------------------------
// Flat view of a report, as read back from JSON.

struct ReportRow {
    std::string embedding, paradigm, learner;
    double ratio = 0.0;
    std::string scope;
    std::string status;
    double mean_f1 = 0.0, ci_low = 0.0, ci_high = 0.0;
    std::vector<double> fold_f1;
    std::string hyperparameters;  // '|'-joined per fold
};

struct ReportTable {
    std::vector<ReportRow> rows;
    std::size_t cells = 0;
};

inline ReportTable read_report_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("report is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schema_version")) throw FormatError("report has no schema_version");
    if (j["schema_version"] != kReportSchemaVersion)
        throw FormatError("report schema version " + j["schema_version"].dump() + " does not match supported version " +
                          std::to_string(kReportSchemaVersion));
    ReportTable t;
    try {
        for (const auto& c : j.at("cells")) {
            ++t.cells;
            std::string hp;
            for (const auto& f : c.at("folds")) {
                if (!hp.empty()) hp += "|";
                hp += f.at("hyperparameters").get<std::string>();
            }
            const std::string status = c.at("status").get<std::string>();
            ReportRow base;
            base.embedding = c.at("embedding").get<std::string>();
            base.paradigm = c.at("paradigm").get<std::string>();
            base.learner = c.at("learner").get<std::string>();
            base.ratio = c.at("ratio").get<double>();
            base.status = status;
            base.hyperparameters = hp;
            if (status != "ok") {
                t.rows.push_back(base);
                continue;
            }
            for (const auto& r : c.at("results")) {
                ReportRow row = base;
                row.scope = r.at("scope").get<std::string>();
                row.mean_f1 = r.at("mean_f1").get<double>();
                row.ci_low = r.at("ci_low").get<double>();
                row.ci_high = r.at("ci_high").get<double>();
                row.fold_f1 = r.at("fold_f1").get<std::vector<double>>();
                t.rows.push_back(std::move(row));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed report: ") + e.what());
    }
    return t;
}

inline ReportTable report_table(const ExperimentReport& report, const ExperimentConfig& cfg) {
    std::istringstream in(report_json_text(report, cfg));
    return read_report_json(in);
}

inline void write_flat_csv(std::ostream& out, const ReportTable& t) {
    out << "embedding,paradigm,learner,ratio,scope,status,mean_f1,ci_low,ci_high,fold_f1,hyperparameters\n";
    for (const auto& r : t.rows) {
        std::string folds;
        for (double f : r.fold_f1) folds += (folds.empty() ? "" : ";") + text::format_double(f);
        out << r.embedding << ',' << r.paradigm << ',' << r.learner << ',' << text::format_double(r.ratio) << ','
            << r.scope << ',' << r.status << ',';
        if (r.status == "ok")
            out << text::format_double(r.mean_f1) << ',' << text::format_double(r.ci_low) << ','
                << text::format_double(r.ci_high);
        else
            out << ",,";
        out << ',' << folds << ",\"" << r.hyperparameters << "\"\n";
    }
}

// ---------------------------------------------------------------------------
// Figure CSVs

struct FigureOptions {
    std::string scope = "macro_subtype";  // which aggregate feeds the overview bars
    bool per_subtype = false;
    bool svg = false;
};

struct FigureFile {
    std::string name;
    std::string content;
};

namespace detail {

inline std::string fmt4(double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(4);
    s << v;
    return s.str();
}

struct Bar {
    std::string group;
    std::string series;
    double value = 0.0;
    double low = 0.0, high = 0.0;
};

// Grouped vertical bars with error whiskers; F1 axis fixed to [0, 1].
inline std::string bar_chart_svg(const std::string& title, const std::vector<Bar>& bars) {
    std::vector<std::string> groups, series;
    for (const auto& b : bars) {
        if (std::find(groups.begin(), groups.end(), b.group) == groups.end()) groups.push_back(b.group);
        if (std::find(series.begin(), series.end(), b.series) == series.end()) series.push_back(b.series);
    }
    static const char* palette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948"};
    const double bar_w = 14, gap = 18, left = 50, top = 30, plot_h = 220;
    const double group_w = bar_w * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + gap;
    const double width = left + group_w * static_cast<double>(groups.size()) + 150;
    const double height = top + plot_h + 140;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    s << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\" font-family=\"sans-serif\">" << title << "</text>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double y = top + plot_h - plot_h * t / 4.0;
        s << "<text x=\"" << left - 30 << "\" y=\"" << y + 4 << "\" font-size=\"10\" font-family=\"sans-serif\">"
          << fmt4(t / 4.0).substr(0, 4) << "</text>\n";
    }
    for (const auto& b : bars) {
        const auto g = static_cast<double>(std::find(groups.begin(), groups.end(), b.group) - groups.begin());
        const auto k = static_cast<double>(std::find(series.begin(), series.end(), b.series) - series.begin());
        const double x = left + 5 + g * group_w + k * bar_w;
        const double h = plot_h * std::clamp(b.value, 0.0, 1.0);
        s << "<rect x=\"" << x << "\" y=\"" << top + plot_h - h << "\" width=\"" << bar_w - 2 << "\" height=\"" << h
          << "\" fill=\"" << palette[static_cast<std::size_t>(k) % 6] << "\"/>\n";
        const double cx = x + (bar_w - 2) / 2;
        s << "<line x1=\"" << cx << "\" y1=\"" << top + plot_h * (1 - std::clamp(b.low, 0.0, 1.0)) << "\" x2=\"" << cx
          << "\" y2=\"" << top + plot_h * (1 - std::clamp(b.high, 0.0, 1.0)) << "\" stroke=\"black\"/>\n";
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double x = left + 5 + static_cast<double>(g) * group_w;
        s << "<text transform=\"translate(" << x << "," << top + plot_h + 12
          << ") rotate(45)\" font-size=\"9\" font-family=\"sans-serif\">" << groups[g] << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double y = top + 12 * static_cast<double>(k);
        const double x = width - 140;
        s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"10\" height=\"10\" fill=\"" << palette[k % 6] << "\"/>\n";
        s << "<text x=\"" << x + 14 << "\" y=\"" << y + 9 << "\" font-size=\"10\" font-family=\"sans-serif\">"
          << series[k] << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace detail

// Overview bars (one row per ok cell), per-embedding means with spread,
// embedding x paradigm x ratio means, and optionally one panel per subtype.
inline std::vector<FigureFile> figure_files(const ReportTable& t, const FigureOptions& opt) {
    std::vector<FigureFile> files;
    std::vector<const ReportRow*> scoped;
    for (const auto& r : t.rows)
        if (r.status == "ok" && r.scope == opt.scope) scoped.push_back(&r);

    {
        std::ostringstream s;
        s << "model,paradigm,embedding,learner,ratio,mean_f1,ci_low,ci_high\n";
        std::vector<detail::Bar> bars;
        for (const auto* r : scoped) {
            const std::string model = r->paradigm + "-" + r->embedding + "-" + r->learner;
            s << model << ',' << r->paradigm << ',' << r->embedding << ',' << r->learner << ','
              << text::format_double(r->ratio) << ',' << detail::fmt4(r->mean_f1) << ',' << detail::fmt4(r->ci_low)
              << ',' << detail::fmt4(r->ci_high) << '\n';
            bars.push_back({model, text::format_double(r->ratio * 100) + "%", r->mean_f1, r->ci_low, r->ci_high});
        }
        files.push_back({"fig_overview.csv", s.str()});
        if (opt.svg) files.push_back({"fig_overview.svg", detail::bar_chart_svg("F1 by model and supervision ratio", bars)});
    }
    {
        std::map<std::string, std::vector<double>> by_emb;
        for (const auto* r : scoped) by_emb[r->embedding].push_back(r->mean_f1);
        std::ostringstream s;
        s << "embedding,mean_f1,sd_f1,n_cells\n";
        for (const auto& [e, v] : by_emb) {
            double m = 0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double var = 0;
            for (double x : v) var += (x - m) * (x - m);
            const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
            s << e << ',' << detail::fmt4(m) << ',' << detail::fmt4(sd) << ',' << v.size() << '\n';
        }
        files.push_back({"fig_embeddings.csv", s.str()});
    }
    {
        std::map<std::tuple<std::string, std::string, double>, std::vector<double>> groups;
        for (const auto* r : scoped) groups[{r->embedding, r->paradigm, r->ratio}].push_back(r->mean_f1);
        std::ostringstream s;
        s << "embedding,paradigm,ratio,mean_f1,n_learners\n";
        std::vector<detail::Bar> bars;
        for (const auto& [k, v] : groups) {
            double m = 0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            s << std::get<0>(k) << ',' << std::get<1>(k) << ',' << text::format_double(std::get<2>(k)) << ','
              << detail::fmt4(m) << ',' << v.size() << '\n';
            bars.push_back({std::get<0>(k) + "-" + std::get<1>(k), text::format_double(std::get<2>(k) * 100) + "%", m, m, m});
        }
        files.push_back({"fig_embedding_paradigm.csv", s.str()});
        if (opt.svg)
            files.push_back({"fig_embedding_paradigm.svg", detail::bar_chart_svg("F1 by embedding and paradigm", bars)});
    }
    if (opt.per_subtype) {
        for (auto st : kAllSubtypes) {
            const std::string name(to_string(st));
            std::ostringstream s;
            s << "embedding,paradigm,learner,ratio,mean_f1,ci_low,ci_high\n";
            std::vector<detail::Bar> bars;
            for (const auto& r : t.rows) {
                if (r.status != "ok" || r.scope != name) continue;
                s << r.embedding << ',' << r.paradigm << ',' << r.learner << ',' << text::format_double(r.ratio) << ','
                  << detail::fmt4(r.mean_f1) << ',' << detail::fmt4(r.ci_low) << ',' << detail::fmt4(r.ci_high) << '\n';
                bars.push_back({r.paradigm + "-" + r.embedding + "-" + r.learner, text::format_double(r.ratio * 100) + "%",
                                r.mean_f1, r.ci_low, r.ci_high});
            }
            files.push_back({"fig_subtype_" + name + ".csv", s.str()});
            if (opt.svg) files.push_back({"fig_subtype_" + name + ".svg", detail::bar_chart_svg(name, bars)});
        }
    }
    return files;
}

}  // namespace agssl
