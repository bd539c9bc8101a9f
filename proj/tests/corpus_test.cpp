// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "seqvote/corpus.hpp"
#include "seqvote/error.hpp"
#include "test_support.hpp"

namespace seqvote {
namespace {

using testing::M;
using testing::MakeRecord;
using testing::MakeSample;
using testing::Seq;
using testing::TempDir;

struct TokenCase {
    const char* raw;
    std::vector<std::string> expected;
};

// Expected values written by hand, one decision per row.
const std::vector<TokenCase> kTokenCases = {
    {"File.<init> BufferedReader.readLine", {"File.<init>", "BufferedReader.readLine"}},
    {"", {}},
    {"java.util.List.add , foo", {"List.add"}},
    {" List.add; ", {"List.add"}},
    {"List.add", {"List.add"}},
    {"noDotToken", {}},
    {"List.add()", {"List.add"}},
    {"List.add();", {"List.add"}},
    {"List.add ( )", {"List.add"}},
    {"a.b c.d e.f", {"a.b", "c.d", "e.f"}},
    {"a.b,c.d", {"a.b", "c.d"}},
    {"a.b,,,c.d", {"a.b", "c.d"}},
    {"\ta.b\nc.d\r\n", {"a.b", "c.d"}},
    {"   ", {}},
    {",,,", {}},
    {".", {}},
    {"..", {}},
    {"a.", {}},
    {".b", {}},
    {"a..b", {}},
    {"x.y.z", {"y.z"}},
    {"org.apache.commons.io.FileUtils.readLines", {"FileUtils.readLines"}},
    {"String.valueOf String.valueOf", {"String.valueOf", "String.valueOf"}},
    {"Map.put;;", {"Map.put"}},
    {"Map.put();;", {"Map.put"}},
    {"Map.put))", {"Map.put"}},
    {"Map.put((", {"Map.put"}},
    {"();", {}},
    {"Map.();", {}},
    {"StringBuilder.append StringBuilder.toString", {"StringBuilder.append", "StringBuilder.toString"}},
    {"Scanner.<init> Scanner.nextInt Scanner.close",
     {"Scanner.<init>", "Scanner.nextInt", "Scanner.close"}},
    {"List.add foo bar Map.get", {"List.add", "Map.get"}},
    {"</s> List.add <pad>", {"List.add"}},
    {"1.5", {"1.5"}},
    {"v1.Api.call2", {"Api.call2"}},
    {"A.b\fC.d\vE.f", {"A.b", "C.d", "E.f"}},
    {"List.add;Map.get", {"add;Map.get"}},
    {"java.lang.Math.max, java.lang.Math.min", {"Math.max", "Math.min"}},
    {"   List.size   ", {"List.size"}},
    {"HashMap.<init>()", {"HashMap.<init>"}},
    {"a.b;", {"a.b"}},
    {"a.b; c", {"a.b"}},
    {"Iterator.hasNext Iterator.next Iterator.hasNext",
     {"Iterator.hasNext", "Iterator.next", "Iterator.hasNext"}},
    {"Thread.sleep(1000)", {"Thread.sleep(1000"}},
    {"Foo_Bar.baz_qux", {"Foo_Bar.baz_qux"}},
    {"Foo$Inner.run", {"Foo$Inner.run"}},
    {"a.b.", {}},
    {"a.b..c", {}},
    {"Files.readAllBytes , Paths.get ,", {"Files.readAllBytes", "Paths.get"}},
    {"x.y\n\n\nz.w", {"x.y", "z.w"}},
};

TEST(TokenizerTest, CraftedStringsMatchHandWrittenExpectations) {
    ASSERT_EQ(kTokenCases.size(), 50u);
    for (const auto& c : kTokenCases) {
        EXPECT_EQ(to_strings(parse_api_sequence(c.raw)), c.expected) << "input: '" << c.raw << "'";
    }
}

TEST(TokenizerTest, NormalizeIsIdempotent) {
    for (const auto& c : kTokenCases) {
        for (const auto& m : parse_api_sequence(c.raw)) {
            auto again = normalize_method(m.canonical());
            ASSERT_TRUE(again.has_value()) << m.canonical();
            EXPECT_EQ(*again, m);
        }
    }
}

TEST(TokenizerTest, RejectsTokensWithoutSeparator) {
    EXPECT_FALSE(normalize_method("noDotToken").has_value());
    EXPECT_FALSE(normalize_method("").has_value());
    EXPECT_FALSE(normalize_method("   ;").has_value());
}

TEST(TokenizerTest, CustomDelimiters) {
    Tokenizer pipe{"|"};
    EXPECT_EQ(to_strings(parse_api_sequence("a.b|c.d", pipe)), (std::vector<std::string>{"a.b", "c.d"}));
    EXPECT_TRUE(parse_api_sequence("a.b c.d", pipe).empty());
}

TEST(TokenizerTest, JoinThenParseRoundTrips) {
    std::mt19937_64 rng(7);
    const std::vector<ApiMethod> pool = {M("List.add"), M("Map.get"), M("File.<init>"),
                                         M("A.b"), M("StringBuilder.append")};
    for (int trial = 0; trial < 200; ++trial) {
        ApiSequence seq;
        const auto len = rng() % 6;
        for (std::size_t i = 0; i < len; ++i) seq.push_back(pool[rng() % pool.size()]);
        EXPECT_EQ(parse_api_sequence(join_sequence(seq)), seq);
        EXPECT_EQ(parse_api_sequence(join_sequence(seq, ", ")), seq);
    }
}

TEST(ApiMethodTest, RejectsMalformedParts) {
    EXPECT_THROW(ApiMethod("", "x"), ConfigError);
    EXPECT_THROW(ApiMethod("A", ""), ConfigError);
    EXPECT_THROW(ApiMethod("A.B", "x"), ConfigError);
    EXPECT_THROW(ApiMethod("A", "x y"), ConfigError);
    EXPECT_THROW(ApiMethod("A", "x,y"), ConfigError);
}

TEST(ApiMethodTest, OrdersByCanonicalForm) {
    EXPECT_LT(M("A.x"), M("A.y"));
    EXPECT_LT(M("A.z"), M("B.a"));
    EXPECT_EQ(M("A.x").canonical(), "A.x");
    EXPECT_EQ(M("File.<init>").class_name(), "File");
    EXPECT_EQ(M("File.<init>").method_name(), "<init>");
}

TEST(SampleLoaderTest, ReadsRecordsInOrder) {
    TempDir dir("corpus");
    const auto p = dir.write("d.jsonl",
                             R"({"id":"s1","query":"q1","context":"c1","ground_truth":["A.x","B.y"]})"
                             "\n"
                             R"({"id":"s2","ground_truth":["java.util.List.add"],"tail_label":1})"
                             "\n\n"
                             R"({"id":"s3","query":"","context":"","ground_truth":["C.z"],"tail_label":null})"
                             "\n");
    const auto samples = load_samples(p);
    ASSERT_EQ(samples.size(), 3u);
    EXPECT_EQ(samples[0].sample_id, "s1");
    EXPECT_EQ(samples[0].query, "q1");
    EXPECT_EQ(samples[0].ground_truth, Seq({"A.x", "B.y"}));
    EXPECT_FALSE(samples[0].tail_label.has_value());
    EXPECT_EQ(samples[1].ground_truth, Seq({"List.add"}));
    EXPECT_EQ(samples[1].tail_label, 1);
    EXPECT_EQ(samples[2].sample_id, "s3");
}

TEST(SampleLoaderTest, DuplicateIdNamesTheId) {
    TempDir dir("corpus");
    const auto p = dir.write("d.jsonl",
                             R"({"id":"s1","ground_truth":["A.x"]})"
                             "\n"
                             R"({"id":"s1","ground_truth":["B.y"]})"
                             "\n");
    try {
        load_samples(p);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("s1"), std::string::npos) << e.what();
    }
}

TEST(SampleLoaderTest, MissingGroundTruthReportsLine) {
    TempDir dir("corpus");
    const auto p = dir.write("d.jsonl",
                             R"({"id":"s1","ground_truth":["A.x"]})"
                             "\n"
                             R"({"id":"s2","query":"q"})"
                             "\n");
    try {
        load_samples(p);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(SampleLoaderTest, RejectsBrokenInput) {
    TempDir dir("corpus");
    EXPECT_THROW(load_samples(dir.write("a.jsonl", "{not json}\n")), ParseError);
    EXPECT_THROW(load_samples(dir.write("b.jsonl", R"({"id":"s","ground_truth":["A.x"],"tail_label":2})" "\n")),
                 ParseError);
    EXPECT_THROW(load_samples(dir.write("c.jsonl", R"({"id":"s","ground_truth":[]})" "\n")), Error);
    EXPECT_NO_THROW(load_samples(dir.write("d.jsonl", R"({"id":"s","ground_truth":[]})" "\n"), true));
    EXPECT_THROW(load_samples(dir / "absent.jsonl"), DataError);
}

TEST(SampleLoaderTest, WriteThenLoadRoundTrips) {
    TempDir dir("corpus");
    std::vector<Sample> samples = {MakeSample("a", Seq({"A.x", "B.y"}), "how to read", "void f() {}"),
                                   MakeSample("b", Seq({"File.<init>"}), "q \"quoted\"", "line\nbreak")};
    samples[1].tail_label = 0;
    write_samples(dir / "s.jsonl", samples);
    const auto back = load_samples(dir / "s.jsonl");
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back[i].sample_id, samples[i].sample_id);
        EXPECT_EQ(back[i].query, samples[i].query);
        EXPECT_EQ(back[i].context, samples[i].context);
        EXPECT_EQ(back[i].ground_truth, samples[i].ground_truth);
        EXPECT_EQ(back[i].tail_label, samples[i].tail_label);
    }
}

TEST(PredictionLoaderTest, ReadsRecordsForExpectedModel) {
    TempDir dir("corpus");
    const auto p = dir.write("m1.jsonl",
                             R"({"id":"s1","model":"m1","output":"A.x B.y"})"
                             "\n"
                             R"({"id":"s2","model":"m1","output":"x y"})"
                             "\n");
    const auto records = load_predictions(p, "m1");
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].parsed, Seq({"A.x", "B.y"}));
    EXPECT_EQ(records[0].raw_output, "A.x B.y");
    EXPECT_TRUE(records[1].parsed.empty());
    EXPECT_EQ(records[1].raw_output, "x y");
}

TEST(PredictionLoaderTest, ModelMismatchAndDuplicatesAreErrors) {
    TempDir dir("corpus");
    const auto bad = dir.write("m.jsonl", R"({"id":"s1","model":"m2","output":"A.x"})" "\n");
    EXPECT_THROW(load_predictions(bad, "m1"), DataError);
    const auto dup = dir.write("d.jsonl",
                               R"({"id":"s1","model":"m1","output":"A.x"})"
                               "\n"
                               R"({"id":"s1","model":"m1","output":"B.y"})"
                               "\n");
    EXPECT_THROW(load_predictions(dup, "m1"), DataError);
    EXPECT_THROW(load_predictions(dir.write("e.jsonl", R"({"id":"s1","model":"m1"})" "\n"), "m1"),
                 ParseError);
}

TEST(PredictionLoaderTest, WriteThenLoadKeepsRawText) {
    TempDir dir("corpus");
    std::vector<PredictionRecord> recs = {MakeRecord("s1", "m", Seq({"A.x"}))};
    recs[0].raw_output = "  A.x ;  junk ";
    write_predictions(dir / "p.jsonl", recs);
    const auto back = load_predictions(dir / "p.jsonl", "m");
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].raw_output, recs[0].raw_output);
    EXPECT_EQ(back[0].parsed, Seq({"A.x"}));
}

TEST(SampleIndexTest, LookupAndMissingId) {
    std::vector<Sample> samples = {MakeSample("a", Seq({"A.x"})), MakeSample("b", Seq({"B.y"}))};
    SampleIndex index(samples);
    EXPECT_EQ(index.size(), 2u);
    EXPECT_EQ(index.at("b").ground_truth, Seq({"B.y"}));
    EXPECT_EQ(index.find("zz"), nullptr);
    try {
        index.at("zz");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
    }
}

}  // namespace
}  // namespace seqvote
