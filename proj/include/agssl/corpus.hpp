#pragma once
// Strain records, HI titre tables, antigenic distances and the per-subtype
// pair corpora (labelled + unlabelled) built from them.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "agssl/common.hpp"
#include "agssl/text.hpp"

namespace agssl {

struct StrainRecord {
    std::string strain_id;
    Subtype subtype = Subtype::H1N1;
    std::string sequence;
};

inline bool is_allowed_residue(char c) {
    static constexpr std::string_view alphabet = "ACDEFGHIKLMNPQRSTVWYX";
    return alphabet.find(c) != std::string_view::npos;
}

inline void validate_strain(const StrainRecord& s) {
    if (s.strain_id.empty()) throw DomainError("strain with empty id");
    if (s.strain_id.find_first_of(",|\n\r") != std::string::npos)
        throw DomainError("strain id '" + s.strain_id + "' contains a reserved character");
    if (s.sequence.empty()) throw DomainError("strain '" + s.strain_id + "' has an empty sequence");
    for (std::size_t i = 0; i < s.sequence.size(); ++i)
        if (!is_allowed_residue(s.sequence[i]))
            throw DomainError("strain '" + s.strain_id + "': invalid residue '" +
                              std::string(1, s.sequence[i]) + "' at position " +
                              std::to_string(i + 1));
}

// Raw measurements per (virus, antiserum) cell. Repeated measurements are kept
// and merged by geometric mean when the cell is read.
class HITitreTable {
public:
    using Cell = std::pair<std::string, std::string>;

    void add(const std::string& virus, const std::string& antiserum, double titre) {
        if (!(titre > 0.0) || !std::isfinite(titre))
            throw DomainError("titre for (" + virus + ", " + antiserum +
                              ") must be positive, got " + text::format_double(titre));
        cells_[{virus, antiserum}].push_back(titre);
    }

    std::optional<double> titre(const std::string& virus, const std::string& antiserum) const {
        auto it = cells_.find({virus, antiserum});
        if (it == cells_.end()) return std::nullopt;
        return geometric_mean(it->second);
    }

    const std::map<Cell, std::vector<double>>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }

    static double geometric_mean(const std::vector<double>& xs) {
        if (xs.size() == 1) return xs.front();
        // The direct product keeps dilution-series means exact (sqrt(40*160) == 80);
        // logs are the fallback when it would overflow.
        double prod = 1.0;
        for (double x : xs) prod *= x;
        if (xs.size() == 2 && std::isfinite(prod)) return std::sqrt(prod);
        if (std::isfinite(prod) && prod > 0.0) return std::pow(prod, 1.0 / static_cast<double>(xs.size()));
        double acc = 0.0;
        for (double x : xs) acc += std::log(x);
        return std::exp(acc / static_cast<double>(xs.size()));
    }

private:
    std::map<Cell, std::vector<double>> cells_;
};

struct PairExample {
    std::string a;
    std::string b;
    Subtype subtype = Subtype::H1N1;
    std::optional<double> d_dv;
    Label label = Label::Unlabelled;

    bool operator==(const PairExample&) const = default;
};

struct ThresholdConfig {
    std::array<double, 4> per_subtype = {4.0, 4.0, 4.0, 4.0};

    double operator[](Subtype s) const { return per_subtype[static_cast<std::size_t>(s)]; }
    void set(Subtype s, double t) {
        if (!(t > 1.0)) throw DomainError("threshold for " + std::string(to_string(s)) + " must be > 1");
        per_subtype[static_cast<std::size_t>(s)] = t;
    }
};

// d_DV = sqrt((H_DD * H_VV) / (H_DV * H_VD)); H_XY is the titre of virus X
// against antiserum raised to Y.
inline double archetti_horsfall(double h_dd, double h_vv, double h_dv, double h_vd) {
    const std::array<std::pair<const char*, double>, 4> cells = {
        {{"H_DD", h_dd}, {"H_VV", h_vv}, {"H_DV", h_dv}, {"H_VD", h_vd}}};
    for (const auto& [name, v] : cells)
        if (!(v > 0.0))
            throw DomainError(std::string("archetti_horsfall: titre ") + name +
                              " must be positive, got " + text::format_double(v));
    // Each ratio is formed before the product to stay clear of overflow.
    return std::sqrt((h_dd / h_dv) * (h_vv / h_vd));
}

// Distances at the threshold are Variant.
inline Label label_pair(double d_dv, double threshold) {
    if (!(threshold > 1.0)) throw DomainError("label_pair: threshold must be > 1");
    return d_dv < threshold ? Label::Similar : Label::Variant;
}

struct SubtypeCounts {
    std::size_t sequences = 0;
    std::size_t pairs = 0;
    std::size_t similar = 0;
    std::size_t variant = 0;
    std::size_t unlabelled = 0;

    bool balanced() const { return similar + variant + unlabelled == pairs; }
};

struct Corpus {
    // Sorted by (subtype, a, b).
    std::vector<PairExample> pairs;
    std::array<SubtypeCounts, 4> counts{};

    const SubtypeCounts& count(Subtype s) const { return counts[static_cast<std::size_t>(s)]; }

    std::vector<PairExample> labelled() const {
        std::vector<PairExample> out;
        for (const auto& p : pairs)
            if (p.label != Label::Unlabelled) out.push_back(p);
        return out;
    }
    std::vector<PairExample> unlabelled() const {
        std::vector<PairExample> out;
        for (const auto& p : pairs)
            if (p.label == Label::Unlabelled) out.push_back(p);
        return out;
    }

    void recount() {
        counts = {};
        std::array<std::set<std::string>, 4> seen;
        for (const auto& p : pairs) {
            auto& c = counts[static_cast<std::size_t>(p.subtype)];
            ++c.pairs;
            switch (p.label) {
                case Label::Similar: ++c.similar; break;
                case Label::Variant: ++c.variant; break;
                case Label::Unlabelled: ++c.unlabelled; break;
            }
            seen[static_cast<std::size_t>(p.subtype)].insert(p.a);
            seen[static_cast<std::size_t>(p.subtype)].insert(p.b);
        }
        for (std::size_t i = 0; i < 4; ++i) counts[i].sequences = seen[i].size();
    }
};

// Notes accumulated while reading inputs and building the corpus.
struct IngestLog {
    std::vector<std::string> lines;
    void note(std::string s) { lines.push_back(std::move(s)); }
};

inline Corpus build_corpus(const std::vector<StrainRecord>& strains, const HITitreTable& titres,
                           const ThresholdConfig& cfg, IngestLog* log = nullptr) {
    std::unordered_map<std::string, const StrainRecord*> by_id;
    for (const auto& s : strains) {
        validate_strain(s);
        if (!by_id.emplace(s.strain_id, &s).second)
            throw DomainError("duplicate strain id '" + s.strain_id + "'");
    }
    for (const auto& [cell, values] : titres.cells()) {
        const auto v = by_id.find(cell.first);
        const auto a = by_id.find(cell.second);
        if (v == by_id.end()) throw DomainError("titre references unknown virus '" + cell.first + "'");
        if (a == by_id.end())
            throw DomainError("titre references unknown antiserum '" + cell.second + "'");
        if (v->second->subtype != a->second->subtype)
            throw DomainError("cross-subtype titre entry (" + cell.first + " " +
                              std::string(to_string(v->second->subtype)) + ", " + cell.second + " " +
                              std::string(to_string(a->second->subtype)) + ")");
        if (log && values.size() > 1) {
            std::string note = "merged " + std::to_string(values.size()) + " measurements for (" +
                               cell.first + ", " + cell.second + "):";
            for (double x : values) note += " " + text::format_double(x);
            note += " -> geometric mean " + text::format_double(HITitreTable::geometric_mean(values));
            log->note(std::move(note));
        }
    }

    Corpus corpus;
    for (auto st : kAllSubtypes) {
        std::vector<std::string> ids;
        for (const auto& s : strains)
            if (s.subtype == st) ids.push_back(s.strain_id);
        std::sort(ids.begin(), ids.end());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                PairExample p{ids[i], ids[j], st, std::nullopt, Label::Unlabelled};
                const auto h_dd = titres.titre(p.a, p.a);
                const auto h_vv = titres.titre(p.b, p.b);
                const auto h_dv = titres.titre(p.a, p.b);
                const auto h_vd = titres.titre(p.b, p.a);
                if (h_dd && h_vv && h_dv && h_vd) {
                    p.d_dv = archetti_horsfall(*h_dd, *h_vv, *h_dv, *h_vd);
                    p.label = label_pair(*p.d_dv, cfg[st]);
                }
                corpus.pairs.push_back(std::move(p));
            }
        }
    }
    corpus.recount();
    return corpus;
}

// ---------------------------------------------------------------------------
// File formats

// FASTA with headers `>strain_id|subtype`; sequences may span lines.
inline std::vector<StrainRecord> read_fasta(std::istream& in, const std::string& source = "<fasta>") {
    std::vector<StrainRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty()) continue;
        if (t.front() == '>') {
            auto header = t.substr(1);
            auto bar = header.rfind('|');
            if (bar == std::string_view::npos)
                throw FormatError(source + ":" + std::to_string(lineno) +
                                  ": header must be '>strain_id|subtype'");
            auto id = text::trim(header.substr(0, bar));
            auto st = parse_subtype(text::trim(header.substr(bar + 1)));
            if (id.empty()) throw FormatError(source + ":" + std::to_string(lineno) + ": empty strain id");
            if (!st)
                throw FormatError(source + ":" + std::to_string(lineno) + ": unknown subtype '" +
                                  std::string(header.substr(bar + 1)) + "'");
            out.push_back({std::string(id), *st, {}});
        } else {
            if (out.empty())
                throw FormatError(source + ":" + std::to_string(lineno) + ": sequence before header");
            for (char c : t) {
                const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                if (!is_allowed_residue(u))
                    throw FormatError(source + ":" + std::to_string(lineno) + ": invalid residue '" +
                                      std::string(1, c) + "'");
                out.back().sequence.push_back(u);
            }
        }
    }
    std::set<std::string> ids;
    for (const auto& s : out) {
        if (s.sequence.empty()) throw FormatError(source + ": strain '" + s.strain_id + "' has no sequence");
        if (!ids.insert(s.strain_id).second)
            throw FormatError(source + ": duplicate strain id '" + s.strain_id + "'");
    }
    return out;
}

// CSV `virus_id,antiserum_id,titre`. A censored reading `<N` is replaced by
// N/2 (half the detection limit).
inline HITitreTable read_titres(std::istream& in, IngestLog* log = nullptr,
                                const std::string& source = "<titres>") {
    HITitreTable table;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty()) continue;
        auto fields = text::split(t, ',');
        auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
        if (!header_seen) {
            if (fields.size() != 3 || text::trim(fields[0]) != "virus_id" ||
                text::trim(fields[1]) != "antiserum_id" || text::trim(fields[2]) != "titre")
                throw FormatError(where() + "expected header 'virus_id,antiserum_id,titre'");
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) throw FormatError(where() + "expected 3 fields");
        std::string virus(text::trim(fields[0]));
        std::string serum(text::trim(fields[1]));
        auto raw = text::trim(fields[2]);
        if (virus.empty() || serum.empty()) throw FormatError(where() + "empty id");
        double value = 0.0;
        if (!raw.empty() && raw.front() == '<') {
            auto limit = text::parse_double(raw.substr(1));
            if (!limit || !(*limit > 0.0)) throw FormatError(where() + "bad censored titre '" + std::string(raw) + "'");
            value = *limit / 2.0;
            if (log)
                log->note("censored titre " + std::string(raw) + " for (" + virus + ", " + serum +
                          ") replaced by " + text::format_double(value));
        } else {
            auto v = text::parse_double(raw);
            if (!v || !(*v > 0.0) || !std::isfinite(*v))
                throw FormatError(where() + "titre must be a positive number, got '" + std::string(raw) + "'");
            value = *v;
        }
        table.add(virus, serum, value);
    }
    if (!header_seen) throw FormatError(source + ": missing header");
    return table;
}

inline void write_corpus_csv(std::ostream& out, const Corpus& corpus) {
    out << "a,b,subtype,d_dv,label\n";
    for (const auto& p : corpus.pairs) {
        out << p.a << ',' << p.b << ',' << to_string(p.subtype) << ',';
        if (p.d_dv) out << text::format_double(*p.d_dv);
        out << ',' << to_string(p.label) << '\n';
    }
}

inline Corpus read_corpus_csv(std::istream& in, const std::string& source = "<corpus>") {
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty()) continue;
        auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
        if (!header_seen) {
            if (t != "a,b,subtype,d_dv,label") throw FormatError(where() + "expected header 'a,b,subtype,d_dv,label'");
            header_seen = true;
            continue;
        }
        auto f = text::split(t, ',');
        if (f.size() != 5) throw FormatError(where() + "expected 5 fields");
        PairExample p;
        p.a = std::string(f[0]);
        p.b = std::string(f[1]);
        auto st = parse_subtype(f[2]);
        auto lb = parse_label(f[4]);
        if (!st) throw FormatError(where() + "unknown subtype");
        if (!lb) throw FormatError(where() + "unknown label");
        if (!(p.a < p.b)) throw FormatError(where() + "pair not in canonical order");
        p.subtype = *st;
        p.label = *lb;
        if (!text::trim(f[3]).empty()) {
            auto d = text::parse_double(f[3]);
            if (!d || !(*d > 0.0)) throw FormatError(where() + "bad d_dv");
            p.d_dv = *d;
        }
        if (p.label != Label::Unlabelled && !p.d_dv) throw FormatError(where() + "labelled pair without d_dv");
        corpus.pairs.push_back(std::move(p));
    }
    if (!header_seen) throw FormatError(source + ": missing header");
    corpus.recount();
    return corpus;
}

inline void write_counts_table(std::ostream& out, const Corpus& corpus) {
    out << "subtype,sequences,pairs,similar,variant,unlabelled\n";
    SubtypeCounts total;
    for (auto st : kAllSubtypes) {
        const auto& c = corpus.count(st);
        out << to_string(st) << ',' << c.sequences << ',' << c.pairs << ',' << c.similar << ','
            << c.variant << ',' << c.unlabelled << '\n';
        total.sequences += c.sequences;
        total.pairs += c.pairs;
        total.similar += c.similar;
        total.variant += c.variant;
        total.unlabelled += c.unlabelled;
    }
    out << "Total," << total.sequences << ',' << total.pairs << ',' << total.similar << ','
        << total.variant << ',' << total.unlabelled << '\n';
}

}  // namespace agssl
