#pragma once
// Run configuration: a sectioned `key = value` text format (a TOML subset:
// strings, numbers, booleans and flat arrays), strict key checking, and a
// serializer whose output parses back to an equal config.

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "agssl/corpus.hpp"
#include "agssl/eval/experiment.hpp"
#include "agssl/features.hpp"
#include "agssl/synthetic.hpp"
#include "agssl/text.hpp"

namespace agssl {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct ConfigValue {
    enum class Kind { String, Number, Bool, Array } kind = Kind::String;
    std::string text;  // string contents, or the number's source text
    bool flag = false;
    std::vector<ConfigValue> items;
    std::size_t line = 0;
};

// Ordered sections of ordered key/value entries.
struct ConfigDocument {
    struct Entry {
        std::string key;
        ConfigValue value;
    };
    std::vector<std::pair<std::string, std::vector<Entry>>> sections;
};

namespace detail {

class ConfigLexer {
public:
    ConfigLexer(std::string_view s, std::size_t line, std::string source) : s_(s), line_(line), source_(std::move(source)) {}

    ConfigValue value() {
        skip();
        if (at_end()) fail("missing value");
        ConfigValue v;
        v.line = line_;
        const char c = s_[pos_];
        if (c == '"') {
            v.kind = ConfigValue::Kind::String;
            v.text = quoted();
        } else if (c == '[') {
            ++pos_;
            v.kind = ConfigValue::Kind::Array;
            skip();
            if (!at_end() && s_[pos_] == ']') {
                ++pos_;
                return v;
            }
            for (;;) {
                auto item = value();
                if (item.kind == ConfigValue::Kind::Array) fail("nested arrays are not supported");
                v.items.push_back(std::move(item));
                skip();
                if (at_end()) fail("unterminated array");
                if (s_[pos_] == ',') {
                    ++pos_;
                    skip();
                    if (!at_end() && s_[pos_] == ']') {
                        ++pos_;
                        break;
                    }
                    continue;
                }
                if (s_[pos_] == ']') {
                    ++pos_;
                    break;
                }
                fail("expected ',' or ']' in array");
            }
        } else {
            const auto start = pos_;
            while (!at_end() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != '\n' &&
                   s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '\r')
                ++pos_;
            const std::string tok(s_.substr(start, pos_ - start));
            if (tok == "true" || tok == "false") {
                v.kind = ConfigValue::Kind::Bool;
                v.flag = tok == "true";
            } else if (text::parse_double(tok)) {
                v.kind = ConfigValue::Kind::Number;
                v.text = tok;
            } else {
                fail("cannot parse value '" + tok + "'");
            }
        }
        return v;
    }

    void expect_end() {
        skip();
        if (!at_end()) fail("unexpected trailing text");
    }

private:
    bool at_end() const { return pos_ >= s_.size(); }

    // Whitespace, newlines (counted) and comments.
    void skip() {
        while (!at_end()) {
            const char c = s_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
            } else if (c == '#') {
                while (!at_end() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string quoted() {
        ++pos_;
        std::string out;
        while (!at_end() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\n') fail("unterminated string");
            if (c == '\\') {
                if (at_end()) fail("unterminated escape");
                const char e = s_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail(std::string("unknown escape \\") + e);
                }
            }
            out += c;
        }
        if (at_end()) fail("unterminated string");
        ++pos_;
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + msg);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_;
    std::string source_;
};

inline int bracket_depth(std::string_view s) {
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            while (i + 1 < s.size() && s[i + 1] != '\n') ++i;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            --depth;
        }
    }
    return depth;
}

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        if (c == '\t') {
            out += "\\t";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

inline ConfigDocument parse_config_document(std::string_view text, const std::string& source = "<config>") {
    ConfigDocument doc;
    doc.sections.push_back({"", {}});
    std::map<std::string, std::size_t> section_index{{"", 0}};
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](std::size_t at, const std::string& msg) {
        throw ConfigError(source + ":" + std::to_string(at) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (t.front() == '[') {
            const auto close = t.find(']');
            if (close == std::string_view::npos) fail(lineno, "unterminated section header");
            const auto rest = text::trim(t.substr(close + 1));
            if (!rest.empty() && rest.front() != '#') fail(lineno, "unexpected text after section header");
            const std::string name(text::trim(t.substr(1, close - 1)));
            if (name.empty()) fail(lineno, "empty section name");
            if (section_index.count(name)) fail(lineno, "duplicate section [" + name + "]");
            section_index[name] = doc.sections.size();
            doc.sections.push_back({name, {}});
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) fail(lineno, "expected 'key = value'");
        const std::string key(text::trim(t.substr(0, eq)));
        if (key.empty()) fail(lineno, "empty key");
        std::string rhs(t.substr(eq + 1));
        const std::size_t start = lineno;
        while (detail::bracket_depth(rhs) > 0) {
            if (!std::getline(in, line)) fail(start, "unterminated array for key '" + key + "'");
            ++lineno;
            rhs += "\n" + line;
        }
        detail::ConfigLexer lex(rhs, start, source);
        auto value = lex.value();
        lex.expect_end();
        auto& entries = doc.sections.back().second;
        for (const auto& e : entries)
            if (e.key == key) fail(start, "duplicate key '" + key + "'");
        entries.push_back({key, std::move(value)});
    }
    return doc;
}

// ---------------------------------------------------------------------------

struct DataConfig {
    std::string source = "files";  // "files" or "synthetic"
    std::string sequences;
    std::string titres;
    std::string corpus;
    std::vector<std::string> embeddings;
    PairFeatureKind pair_feature = PairFeatureKind::DiffMean;
    bool operator==(const DataConfig&) const = default;
};

struct RunConfig {
    DataConfig data;
    ManifoldSpec synthetic;
    ThresholdConfig thresholds;
    ExperimentConfig experiment;
    std::string output_dir = "out";
    bool operator==(const RunConfig& o) const {
        return data == o.data && synthetic.n_labelled == o.synthetic.n_labelled &&
               synthetic.n_unlabelled == o.synthetic.n_unlabelled && synthetic.dim == o.synthetic.dim &&
               synthetic.noise == o.synthetic.noise && synthetic.gap == o.synthetic.gap &&
               synthetic.variant_share == o.synthetic.variant_share && synthetic.n_subtypes == o.synthetic.n_subtypes &&
               synthetic.seed == o.synthetic.seed && thresholds.per_subtype == o.thresholds.per_subtype &&
               experiment == o.experiment && output_dir == o.output_dir;
    }
};

inline std::string_view to_string(PairFeatureKind k) { return k == PairFeatureKind::DiffMean ? "diff_mean" : "diff"; }

namespace detail {

class Binder {
public:
    explicit Binder(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const ConfigValue& v, const std::string& key, const std::string& msg) const {
        throw ConfigError(source_ + ":" + std::to_string(v.line) + ": " + key + ": " + msg);
    }

    std::string str(const ConfigValue& v, const std::string& key) const {
        if (v.kind != ConfigValue::Kind::String) fail(v, key, "expected a string");
        return v.text;
    }
    double num(const ConfigValue& v, const std::string& key) const {
        if (v.kind != ConfigValue::Kind::Number) fail(v, key, "expected a number");
        return *text::parse_double(v.text);
    }
    long long integer(const ConfigValue& v, const std::string& key, long long lo = 0) const {
        if (v.kind != ConfigValue::Kind::Number) fail(v, key, "expected an integer");
        auto i = text::parse_int(v.text);
        if (!i) fail(v, key, "expected an integer, got " + v.text);
        if (*i < lo) fail(v, key, "must be >= " + std::to_string(lo));
        return *i;
    }
    bool boolean(const ConfigValue& v, const std::string& key) const {
        if (v.kind != ConfigValue::Kind::Bool) fail(v, key, "expected true or false");
        return v.flag;
    }
    const std::vector<ConfigValue>& array(const ConfigValue& v, const std::string& key) const {
        if (v.kind != ConfigValue::Kind::Array) fail(v, key, "expected an array");
        return v.items;
    }
    std::vector<double> nums(const ConfigValue& v, const std::string& key) const {
        std::vector<double> out;
        for (const auto& i : array(v, key)) out.push_back(num(i, key));
        return out;
    }
    std::vector<int> ints(const ConfigValue& v, const std::string& key, long long lo = 1) const {
        std::vector<int> out;
        for (const auto& i : array(v, key)) out.push_back(static_cast<int>(integer(i, key, lo)));
        return out;
    }
    std::vector<std::string> strs(const ConfigValue& v, const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& i : array(v, key)) out.push_back(str(i, key));
        return out;
    }

private:
    std::string source_;
};

}  // namespace detail

// Applies a parsed document on top of `cfg` (defaults, usually).
inline void apply_config_document(const ConfigDocument& doc, RunConfig& cfg, const std::string& source = "<config>") {
    detail::Binder b(source);
    using Setter = std::function<void(const ConfigValue&, const std::string&)>;
    std::map<std::string, std::map<std::string, Setter>> table;
    auto& data = table["data"];
    data["source"] = [&](const ConfigValue& v, const std::string& k) {
        const auto s = b.str(v, k);
        if (s != "files" && s != "synthetic") b.fail(v, k, "must be \"files\" or \"synthetic\"");
        cfg.data.source = s;
    };
    data["sequences"] = [&](const ConfigValue& v, const std::string& k) { cfg.data.sequences = b.str(v, k); };
    data["titres"] = [&](const ConfigValue& v, const std::string& k) { cfg.data.titres = b.str(v, k); };
    data["corpus"] = [&](const ConfigValue& v, const std::string& k) { cfg.data.corpus = b.str(v, k); };
    data["embeddings"] = [&](const ConfigValue& v, const std::string& k) { cfg.data.embeddings = b.strs(v, k); };
    data["pair_feature"] = [&](const ConfigValue& v, const std::string& k) {
        const auto s = b.str(v, k);
        if (s == "diff_mean") cfg.data.pair_feature = PairFeatureKind::DiffMean;
        else if (s == "diff") cfg.data.pair_feature = PairFeatureKind::Diff;
        else b.fail(v, k, "must be \"diff_mean\" or \"diff\"");
    };

    auto& syn = table["synthetic"];
    syn["n_labelled"] = [&](const ConfigValue& v, const std::string& k) { cfg.synthetic.n_labelled = b.integer(v, k, 1); };
    syn["n_unlabelled"] = [&](const ConfigValue& v, const std::string& k) { cfg.synthetic.n_unlabelled = b.integer(v, k); };
    syn["dim"] = [&](const ConfigValue& v, const std::string& k) { cfg.synthetic.dim = b.integer(v, k, 2); };
    syn["noise"] = [&](const ConfigValue& v, const std::string& k) { cfg.synthetic.noise = b.num(v, k); };
    syn["gap"] = [&](const ConfigValue& v, const std::string& k) { cfg.synthetic.gap = b.num(v, k); };
    syn["variant_share"] = [&](const ConfigValue& v, const std::string& k) {
        const double s = b.num(v, k);
        if (!(s > 0 && s < 1)) b.fail(v, k, "must lie in (0, 1)");
        cfg.synthetic.variant_share = s;
    };
    syn["n_subtypes"] = [&](const ConfigValue& v, const std::string& k) {
        const auto n = b.integer(v, k, 1);
        if (n > 4) b.fail(v, k, "at most 4 subtypes");
        cfg.synthetic.n_subtypes = static_cast<std::size_t>(n);
    };
    syn["seed"] = [&](const ConfigValue& v, const std::string& k) {
        cfg.synthetic.seed = static_cast<std::uint64_t>(b.integer(v, k));
    };

    auto& thr = table["thresholds"];
    thr["default"] = [&](const ConfigValue& v, const std::string& k) {
        const double t = b.num(v, k);
        try {
            for (auto st : kAllSubtypes) cfg.thresholds.set(st, t);
        } catch (const DomainError& e) {
            b.fail(v, k, e.what());
        }
    };
    for (auto st : kAllSubtypes)
        thr[std::string(to_string(st))] = [&, st](const ConfigValue& v, const std::string& k) {
            try {
                cfg.thresholds.set(st, b.num(v, k));
            } catch (const DomainError& e) {
                b.fail(v, k, e.what());
            }
        };

    auto& ex = table["experiment"];
    auto& e = cfg.experiment;
    ex["paradigms"] = [&](const ConfigValue& v, const std::string& k) {
        e.paradigms.clear();
        for (const auto& s : b.strs(v, k)) {
            auto p = parse_paradigm(s);
            if (!p) b.fail(v, k, "unknown paradigm '" + s + "'");
            e.paradigms.push_back(*p);
        }
    };
    ex["learners"] = [&](const ConfigValue& v, const std::string& k) {
        e.learners.clear();
        for (const auto& s : b.strs(v, k)) {
            auto l = parse_learner(s);
            if (!l) b.fail(v, k, "unknown learner '" + s + "'");
            e.learners.push_back(*l);
        }
    };
    ex["ratios"] = [&](const ConfigValue& v, const std::string& k) { e.ratios = b.nums(v, k); };
    ex["seed"] = [&](const ConfigValue& v, const std::string& k) { e.seed = static_cast<std::uint64_t>(b.integer(v, k)); };
    ex["outer_folds"] = [&](const ConfigValue& v, const std::string& k) { e.outer_k = b.integer(v, k, 2); };
    ex["inner_folds"] = [&](const ConfigValue& v, const std::string& k) { e.inner_k = b.integer(v, k, 2); };
    ex["bootstrap_resamples"] = [&](const ConfigValue& v, const std::string& k) {
        e.bootstrap_resamples = b.integer(v, k, 1);
    };
    ex["ci_level"] = [&](const ConfigValue& v, const std::string& k) { e.ci_level = b.num(v, k); };
    ex["graph_metric"] = [&](const ConfigValue& v, const std::string& k) {
        const auto s = b.str(v, k);
        if (s == "euclidean") e.graph_metric = GraphMetric::Euclidean;
        else if (s == "cosine") e.graph_metric = GraphMetric::Cosine;
        else b.fail(v, k, "must be \"euclidean\" or \"cosine\"");
    };
    ex["unlabelled_cap"] = [&](const ConfigValue& v, const std::string& k) { e.unlabelled_cap = b.integer(v, k); };
    ex["use_unlabelled"] = [&](const ConfigValue& v, const std::string& k) { e.use_unlabelled = b.boolean(v, k); };
    ex["threads"] = [&](const ConfigValue& v, const std::string& k) {
        e.threads = static_cast<unsigned>(b.integer(v, k, 1));
    };

    auto& rf = table["grid.rf"];
    rf["n_estimators"] = [&](const ConfigValue& v, const std::string& k) { e.rf_grid.n_estimators = b.ints(v, k); };
    rf["max_depth"] = [&](const ConfigValue& v, const std::string& k) {
        e.rf_grid.max_depth.clear();
        for (const auto& item : b.array(v, k)) {
            if (item.kind == ConfigValue::Kind::String) {
                if (item.text != "None") b.fail(item, k, "depth must be a positive integer or \"None\"");
                e.rf_grid.max_depth.push_back(std::nullopt);
            } else {
                e.rf_grid.max_depth.push_back(static_cast<int>(b.integer(item, k, 1)));
            }
        }
    };
    auto& svm = table["grid.svm"];
    svm["c"] = [&](const ConfigValue& v, const std::string& k) { e.svm_grid.c = b.nums(v, k); };
    svm["gamma"] = [&](const ConfigValue& v, const std::string& k) { e.svm_grid.gamma = b.nums(v, k); };
    auto& st = table["grid.self_training"];
    st["criterion"] = [&](const ConfigValue& v, const std::string& k) {
        e.st_grid.criterion.clear();
        for (const auto& s : b.strs(v, k)) {
            auto c = parse_criterion(s);
            if (!c) b.fail(v, k, "unknown criterion '" + s + "'");
            e.st_grid.criterion.push_back(*c);
        }
    };
    st["threshold"] = [&](const ConfigValue& v, const std::string& k) { e.st_grid.threshold = b.nums(v, k); };
    st["k_best"] = [&](const ConfigValue& v, const std::string& k) { e.st_grid.k_best = b.ints(v, k); };
    st["max_iter"] = [&](const ConfigValue& v, const std::string& k) { e.st_grid.max_iter = b.ints(v, k); };
    auto& ls = table["grid.label_spreading"];
    ls["alpha"] = [&](const ConfigValue& v, const std::string& k) { e.ls_grid.alpha = b.nums(v, k); };
    ls["n_neighbors"] = [&](const ConfigValue& v, const std::string& k) { e.ls_grid.n_neighbors = b.ints(v, k); };
    ls["max_iter"] = [&](const ConfigValue& v, const std::string& k) { e.ls_grid.max_iter = b.ints(v, k); };
    ls["tol"] = [&](const ConfigValue& v, const std::string& k) { e.ls_grid.tol = b.num(v, k); };

    table["output"]["dir"] = [&](const ConfigValue& v, const std::string& k) { cfg.output_dir = b.str(v, k); };

    for (const auto& [section, entries] : doc.sections) {
        if (section.empty()) {
            if (!entries.empty())
                throw ConfigError(source + ":" + std::to_string(entries.front().value.line) + ": key '" +
                                  entries.front().key + "' outside any section");
            continue;
        }
        const auto s = table.find(section);
        if (s == table.end()) {
            throw ConfigError(source + ": unknown section [" + section + "]");
        }
        for (const auto& en : entries) {
            const auto setter = s->second.find(en.key);
            if (setter == s->second.end())
                throw ConfigError(source + ":" + std::to_string(en.value.line) + ": unknown key '" + en.key +
                                  "' in [" + section + "]");
            setter->second(en.value, section + "." + en.key);
        }
    }
}

// Cross-field checks that need the whole config.
inline void validate_run_config(const RunConfig& cfg) {
    try {
        validate_config(cfg.experiment);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    for (auto st : kAllSubtypes)
        if (!(cfg.thresholds[st] > 1.0)) throw ConfigError("thresholds: every threshold must be > 1");
    for (double c : cfg.experiment.svm_grid.c)
        if (!(c > 0)) throw ConfigError("grid.svm.c: values must be positive");
    for (double g : cfg.experiment.svm_grid.gamma)
        if (!(g > 0)) throw ConfigError("grid.svm.gamma: values must be positive");
    if (!(cfg.experiment.ls_grid.tol > 0)) throw ConfigError("grid.label_spreading.tol must be positive");
    if (cfg.output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

inline RunConfig parse_run_config(std::string_view text, const std::string& source = "<config>") {
    RunConfig cfg;
    apply_config_document(parse_config_document(text, source), cfg, source);
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path);
}

namespace detail {

inline std::string list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + text::format_double(v[i]);
    return s + "]";
}
inline std::string list(const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s + "]";
}
inline std::string list(const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + quote(v[i]);
    return s + "]";
}

}  // namespace detail

inline std::string serialize_run_config(const RunConfig& cfg) {
    using detail::list;
    using detail::quote;
    const auto& e = cfg.experiment;
    std::ostringstream o;
    o << "[data]\n";
    o << "source = " << quote(cfg.data.source) << "\n";
    o << "sequences = " << quote(cfg.data.sequences) << "\n";
    o << "titres = " << quote(cfg.data.titres) << "\n";
    o << "corpus = " << quote(cfg.data.corpus) << "\n";
    o << "embeddings = " << list(cfg.data.embeddings) << "\n";
    o << "pair_feature = " << quote(std::string(to_string(cfg.data.pair_feature))) << "\n\n";

    o << "[synthetic]\n";
    o << "n_labelled = " << cfg.synthetic.n_labelled << "\n";
    o << "n_unlabelled = " << cfg.synthetic.n_unlabelled << "\n";
    o << "dim = " << cfg.synthetic.dim << "\n";
    o << "noise = " << text::format_double(cfg.synthetic.noise) << "\n";
    o << "gap = " << text::format_double(cfg.synthetic.gap) << "\n";
    o << "variant_share = " << text::format_double(cfg.synthetic.variant_share) << "\n";
    o << "n_subtypes = " << cfg.synthetic.n_subtypes << "\n";
    o << "seed = " << cfg.synthetic.seed << "\n\n";

    o << "[thresholds]\n";
    for (auto st : kAllSubtypes) o << to_string(st) << " = " << text::format_double(cfg.thresholds[st]) << "\n";
    o << "\n[experiment]\n";
    std::vector<std::string> names;
    for (auto p : e.paradigms) names.emplace_back(to_string(p));
    o << "paradigms = " << list(names) << "\n";
    names.clear();
    for (auto l : e.learners) names.emplace_back(to_string(l));
    o << "learners = " << list(names) << "\n";
    o << "ratios = " << list(e.ratios) << "\n";
    o << "seed = " << e.seed << "\n";
    o << "outer_folds = " << e.outer_k << "\n";
    o << "inner_folds = " << e.inner_k << "\n";
    o << "bootstrap_resamples = " << e.bootstrap_resamples << "\n";
    o << "ci_level = " << text::format_double(e.ci_level) << "\n";
    o << "graph_metric = " << quote(e.graph_metric == GraphMetric::Euclidean ? "euclidean" : "cosine") << "\n";
    o << "unlabelled_cap = " << e.unlabelled_cap << "\n";
    o << "use_unlabelled = " << (e.use_unlabelled ? "true" : "false") << "\n";
    o << "threads = " << e.threads << "\n\n";

    o << "[grid.rf]\n";
    o << "n_estimators = " << list(e.rf_grid.n_estimators) << "\n";
    o << "max_depth = [";
    for (std::size_t i = 0; i < e.rf_grid.max_depth.size(); ++i)
        o << (i ? ", " : "") << (e.rf_grid.max_depth[i] ? std::to_string(*e.rf_grid.max_depth[i]) : "\"None\"");
    o << "]\n\n[grid.svm]\n";
    o << "c = " << list(e.svm_grid.c) << "\n";
    o << "gamma = " << list(e.svm_grid.gamma) << "\n\n";
    o << "[grid.self_training]\n";
    names.clear();
    for (auto c : e.st_grid.criterion) names.emplace_back(to_string(c));
    o << "criterion = " << list(names) << "\n";
    o << "threshold = " << list(e.st_grid.threshold) << "\n";
    o << "k_best = " << list(e.st_grid.k_best) << "\n";
    o << "max_iter = " << list(e.st_grid.max_iter) << "\n\n";
    o << "[grid.label_spreading]\n";
    o << "alpha = " << list(e.ls_grid.alpha) << "\n";
    o << "n_neighbors = " << list(e.ls_grid.n_neighbors) << "\n";
    o << "max_iter = " << list(e.ls_grid.max_iter) << "\n";
    o << "tol = " << text::format_double(e.ls_grid.tol) << "\n\n";
    o << "[output]\n";
    o << "dir = " << quote(cfg.output_dir) << "\n";
    return o.str();
}

}  // namespace agssl
