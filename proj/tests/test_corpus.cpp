#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "agssl/corpus.hpp"

using namespace agssl;

namespace {

std::vector<StrainRecord> strains(Subtype st, int n, const std::string& prefix = "s") {
    std::vector<StrainRecord> out;
    for (int i = 0; i < n; ++i) out.push_back({prefix + std::to_string(i), st, "MKTIIALSYIFCLALG"});
    return out;
}

// Full titre block among the given ids: homologous 640, heterologous 160.
void full_block(HITitreTable& t, const std::vector<std::string>& ids) {
    for (const auto& v : ids)
        for (const auto& a : ids) t.add(v, a, v == a ? 640.0 : 160.0);
}

}  // namespace

TEST(ArchettiHorsfall, Examples) {
    EXPECT_EQ(archetti_horsfall(10, 10, 10, 10), 1.0);
    // sqrt(1280*640 / (160*320)) = sqrt(16)
    EXPECT_EQ(archetti_horsfall(1280, 640, 160, 320), 4.0);
    EXPECT_EQ(archetti_horsfall(160, 320, 1280, 640), 0.25);
}

TEST(ArchettiHorsfall, NonPositiveTitreNamesCell) {
    try {
        archetti_horsfall(10, 10, 0, 10);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("H_DV"), std::string::npos);
    }
    EXPECT_THROW(archetti_horsfall(-1, 10, 10, 10), DomainError);
    EXPECT_THROW(archetti_horsfall(10, 10, 10, std::nan("")), DomainError);
}

TEST(ArchettiHorsfall, SymmetryAndPowerOfTwoScaling) {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double a = 5 + 2000 * uniform01(rng), b = 5 + 2000 * uniform01(rng);
        const double c = 5 + 2000 * uniform01(rng), d = 5 + 2000 * uniform01(rng);
        EXPECT_EQ(archetti_horsfall(a, b, c, d), archetti_horsfall(b, a, d, c));
        // Power-of-two factors change only exponents, so equality is exact.
        for (double lambda : {0.5, 2.0, 1024.0})
            EXPECT_EQ(archetti_horsfall(a * lambda, b * lambda, c * lambda, d * lambda), archetti_horsfall(a, b, c, d));
        const double lambda = 0.1 + 10 * uniform01(rng);
        EXPECT_NEAR(archetti_horsfall(a * lambda, b * lambda, c * lambda, d * lambda), archetti_horsfall(a, b, c, d),
                    1e-12 * archetti_horsfall(a, b, c, d));
    }
}

TEST(LabelPair, Examples) {
    EXPECT_EQ(label_pair(1.0, 4.0), Label::Similar);
    EXPECT_EQ(label_pair(4.0, 4.0), Label::Variant);
    EXPECT_EQ(label_pair(16.0, 4.0), Label::Variant);
    EXPECT_EQ(label_pair(3.999, 4.0), Label::Similar);
    EXPECT_THROW(label_pair(2.0, 1.0), DomainError);
}

TEST(ThresholdConfig, DefaultsAndValidation) {
    ThresholdConfig cfg;
    for (auto st : kAllSubtypes) EXPECT_EQ(cfg[st], 4.0);
    cfg.set(Subtype::H3N2, 8.0);
    EXPECT_EQ(cfg[Subtype::H3N2], 8.0);
    EXPECT_THROW(cfg.set(Subtype::H1N1, 1.0), DomainError);
}

TEST(Strain, AlphabetValidation) {
    EXPECT_NO_THROW(validate_strain({"a", Subtype::H1N1, "ACDEFGHIKLMNPQRSTVWYX"}));
    EXPECT_THROW(validate_strain({"a", Subtype::H1N1, ""}), DomainError);
    EXPECT_THROW(validate_strain({"a", Subtype::H1N1, "ACDZ"}), DomainError);
}

TEST(Titres, GeometricMeanOfRepeats) {
    HITitreTable t;
    t.add("v", "a", 40);
    t.add("v", "a", 160);
    EXPECT_EQ(*t.titre("v", "a"), 80.0);  // sqrt(40 * 160)
    EXPECT_FALSE(t.titre("a", "v").has_value());
}

TEST(BuildCorpus, CompleteTableGivesOnlyLabelledPairs) {
    const auto s = strains(Subtype::H3N2, 3);
    HITitreTable t;
    full_block(t, {"s0", "s1", "s2"});
    const auto c = build_corpus(s, t, ThresholdConfig{});
    EXPECT_EQ(c.pairs.size(), 3u);
    EXPECT_EQ(c.count(Subtype::H3N2).unlabelled, 0u);
    // d = sqrt(640*640 / (160*160)) = 4, which sits on the threshold.
    for (const auto& p : c.pairs) {
        EXPECT_EQ(*p.d_dv, 4.0);
        EXPECT_EQ(p.label, Label::Variant);
    }
}

TEST(BuildCorpus, PartialTableSplitsLabelledAndUnlabelled) {
    const auto s = strains(Subtype::H1N1, 4);
    HITitreTable t;
    full_block(t, {"s0", "s1", "s2"});
    const auto c = build_corpus(s, t, ThresholdConfig{});
    const auto& n = c.count(Subtype::H1N1);
    EXPECT_EQ(n.pairs, 6u);
    EXPECT_EQ(n.similar + n.variant, 3u);
    EXPECT_EQ(n.unlabelled, 3u);
    for (const auto& p : c.pairs) {
        EXPECT_LT(p.a, p.b);
        EXPECT_EQ(p.label == Label::Unlabelled, !p.d_dv.has_value());
        EXPECT_EQ(p.label == Label::Unlabelled, p.b == "s3");
    }
}

TEST(BuildCorpus, PairCountIsChooseTwoPerSubtype) {
    for (int n : {0, 1, 2, 5, 13}) {
        auto s = strains(Subtype::H5N1, n, "x");
        auto more = strains(Subtype::H9N2, n + 1, "y");
        s.insert(s.end(), more.begin(), more.end());
        HITitreTable t;
        const auto c = build_corpus(s, t, ThresholdConfig{});
        std::size_t expect5 = 0, expect9 = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) ++expect5;
        for (int i = 0; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) ++expect9;
        EXPECT_EQ(c.count(Subtype::H5N1).pairs, expect5);
        EXPECT_EQ(c.count(Subtype::H9N2).pairs, expect9);
        for (auto st : kAllSubtypes) EXPECT_TRUE(c.count(st).balanced());
    }
}

TEST(BuildCorpus, RejectsCrossSubtypeAndUnknownStrains) {
    auto s = strains(Subtype::H1N1, 2);
    s.push_back({"h3", Subtype::H3N2, "MKT"});
    HITitreTable cross;
    cross.add("s0", "h3", 40);
    EXPECT_THROW(build_corpus(s, cross, ThresholdConfig{}), DomainError);
    HITitreTable unknown;
    unknown.add("s0", "ghost", 40);
    try {
        build_corpus(s, unknown, ThresholdConfig{});
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    }
    auto dup = strains(Subtype::H1N1, 2);
    dup.push_back(dup.front());
    EXPECT_THROW(build_corpus(dup, HITitreTable{}, ThresholdConfig{}), DomainError);
}

TEST(BuildCorpus, PerSubtypeThreshold) {
    const auto s = strains(Subtype::H3N2, 2);
    HITitreTable t;
    full_block(t, {"s0", "s1"});
    ThresholdConfig cfg;
    cfg.set(Subtype::H3N2, 5.0);
    EXPECT_EQ(build_corpus(s, t, cfg).pairs.front().label, Label::Similar);
}

TEST(Io, FastaRoundTripAndDiagnostics) {
    std::istringstream in(">A/1|H1N1\nMKTI\nIALS\n\n>B/2|H3N2\nacde\n");
    const auto s = read_fasta(in);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].strain_id, "A/1");
    EXPECT_EQ(s[0].sequence, "MKTIIALS");
    EXPECT_EQ(s[1].subtype, Subtype::H3N2);
    EXPECT_EQ(s[1].sequence, "ACDE");

    std::istringstream bad(">A|H1N1\nMKT\n>B|H7N9\nMKT\n");
    try {
        read_fasta(bad, "x.fasta");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("x.fasta:3"), std::string::npos) << e.what();
    }
}

TEST(Io, CensoredTitresBecomeHalfTheLimit) {
    IngestLog log;
    std::istringstream in("virus_id,antiserum_id,titre\nv,a,<10\nv,v,1280\n");
    const auto t = read_titres(in, &log);
    EXPECT_EQ(*t.titre("v", "a"), 5.0);
    ASSERT_EQ(log.lines.size(), 1u);
    EXPECT_NE(log.lines[0].find("<10"), std::string::npos);

    std::istringstream neg("virus_id,antiserum_id,titre\nv,a,-4\n");
    try {
        read_titres(neg, nullptr, "t.csv");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("t.csv:2"), std::string::npos);
    }
}

TEST(Io, CorpusCsvRoundTripIsByteIdentical) {
    const auto s = strains(Subtype::H1N1, 5);
    HITitreTable t;
    full_block(t, {"s0", "s1", "s2"});
    t.add("s0", "s1", 20);
    const auto c = build_corpus(s, t, ThresholdConfig{});
    std::ostringstream a, b;
    write_corpus_csv(a, c);
    std::istringstream in(a.str());
    const auto back = read_corpus_csv(in);
    EXPECT_EQ(back.pairs, c.pairs);
    write_corpus_csv(b, back);
    EXPECT_EQ(a.str(), b.str());

    std::ostringstream again;
    write_corpus_csv(again, build_corpus(s, t, ThresholdConfig{}));
    EXPECT_EQ(again.str(), a.str());
}

TEST(Io, CountsTableMirrorsRowIdentity) {
    // A published H1N1 row: 483 + 851 + 10,114 = 11,448.
    EXPECT_EQ(483 + 851 + 10114, 11448);
    const auto s = strains(Subtype::H1N1, 6);
    HITitreTable t;
    full_block(t, {"s0", "s1", "s2", "s3"});
    std::ostringstream out;
    write_counts_table(out, build_corpus(s, t, ThresholdConfig{}));
    EXPECT_NE(out.str().find("H1N1,6,15,0,6,9"), std::string::npos) << out.str();
    EXPECT_NE(out.str().find("Total,6,15,0,6,9"), std::string::npos);
}
