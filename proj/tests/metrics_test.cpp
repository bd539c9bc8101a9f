// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "seqvote/error.hpp"
#include "seqvote/metrics.hpp"
#include "test_support.hpp"

namespace seqvote {
namespace {

using testing::M;
using testing::MakeRecord;
using testing::MakeSample;
using testing::Seq;

PipelineOutcome accept(std::string id, ApiSequence out) {
    PipelineOutcome o;
    o.sample_id = std::move(id);
    o.status = OutcomeStatus::Accepted;
    o.output = std::move(out);
    o.decided_by = DecidedBy::Majority;
    return o;
}

PipelineOutcome reject(std::string id, RejectionStage stage) {
    PipelineOutcome o;
    o.sample_id = std::move(id);
    o.rejection_stage = stage;
    return o;
}

Candidate cand(std::string model, ApiSequence seq) {
    Candidate c;
    c.model_id = std::move(model);
    c.sequence = std::move(seq);
    return c;
}

TEST(ScoreOutcomeTest, OrderedExactMatch) {
    const auto s = MakeSample("s", Seq({"A.x", "B.y"}));
    EXPECT_TRUE(score_outcome(accept("s", Seq({"A.x", "B.y"})), s));
    EXPECT_FALSE(score_outcome(accept("s", Seq({"B.y", "A.x"})), s));
    EXPECT_FALSE(score_outcome(accept("s", Seq({"A.x"})), s));
    EXPECT_FALSE(score_outcome(reject("s", RejectionStage::Decision), s));
}

TEST(CounterfactualTest, PolicyDifferences) {
    const auto G = Seq({"A.x"});
    const auto s = MakeSample("s", G);
    std::vector<Candidate> ggx = {cand("m1", G), cand("m2", G), cand("m3", Seq({"X.x"}))};
    EXPECT_TRUE(counterfactual_correct(s, ggx, CounterfactualPolicy::UnfilteredMajority, 3));
    std::vector<Candidate> gxy = {cand("m1", G), cand("m2", Seq({"X.x"})), cand("m3", Seq({"Y.y"}))};
    EXPECT_FALSE(counterfactual_correct(s, gxy, CounterfactualPolicy::UnfilteredMajority, 3));
    EXPECT_TRUE(counterfactual_correct(s, gxy, CounterfactualPolicy::AnyModelCorrect, 3));
    std::vector<Candidate> sole = {cand("m1", G)};
    EXPECT_TRUE(counterfactual_correct(s, sole, CounterfactualPolicy::UnfilteredMajority, 1));
}

TEST(CounterfactualTest, PolicyNames) {
    EXPECT_EQ(parse_counterfactual_policy("any-model-correct"), CounterfactualPolicy::AnyModelCorrect);
    EXPECT_EQ(parse_counterfactual_policy("UnfilteredMajority"), CounterfactualPolicy::UnfilteredMajority);
    EXPECT_THROW(parse_counterfactual_policy("oracle"), ConfigError);
}

TEST(RatesTest, ForcedArithmetic) {
    EvaluationReport r;
    r.total_inputs = 10;
    r.total_outputs = 4;
    r.correct_outputs = 3;
    r.rejected = 6;
    r.rejected_correct = 2;
    finalize_rates(r);
    EXPECT_DOUBLE_EQ(r.rr, 0.6);
    EXPECT_DOUBLE_EQ(*r.tar, 0.75);
    EXPECT_NEAR(*r.frr, 1.0 / 3.0, 1e-12);
}

TEST(RatesTest, NullRatesOnEmptyDenominators) {
    EvaluationReport r;
    r.total_inputs = 5;
    r.total_outputs = 5;
    r.correct_outputs = 2;
    finalize_rates(r);
    EXPECT_EQ(r.rr, 0.0);
    EXPECT_FALSE(r.frr.has_value());
    EvaluationReport none;
    none.total_inputs = 3;
    none.rejected = 3;
    finalize_rates(none);
    EXPECT_FALSE(none.tar.has_value());
    EXPECT_EQ(none.rr, 1.0);
    const auto j = report_to_json(none);
    EXPECT_TRUE(j["tar"].is_null());
}

struct Fixture {
    std::vector<Sample> samples;
    PredictionTable table;
    std::vector<PipelineOutcome> outcomes;
    std::vector<std::string> models = {"m1", "m2", "m3"};
};

// Ten inputs: four accepted (three correct), six rejected of which two
// had a correct unfiltered majority.
Fixture ten_inputs() {
    Fixture f;
    const auto G = Seq({"A.x"});
    const auto X = Seq({"X.x"});
    for (int i = 0; i < 10; ++i) {
        const auto id = "s" + std::to_string(i);
        f.samples.push_back(MakeSample(id, G));
        const bool good_majority = i == 4 || i == 5;
        f.table.add(MakeRecord(id, "m1", good_majority ? G : X));
        f.table.add(MakeRecord(id, "m2", good_majority ? G : Seq({"Y.y"})));
        f.table.add(MakeRecord(id, "m3", X));
    }
    f.outcomes.push_back(accept("s0", G));
    f.outcomes.push_back(accept("s1", G));
    f.outcomes.push_back(accept("s2", G));
    f.outcomes.push_back(accept("s3", X));
    f.outcomes.push_back(reject("s4", RejectionStage::Filtering));
    f.outcomes.push_back(reject("s5", RejectionStage::Decision));
    f.outcomes.push_back(reject("s6", RejectionStage::TailAnalyzer));
    f.outcomes.push_back(reject("s7", RejectionStage::TailAnalyzer));
    f.outcomes.push_back(reject("s8", RejectionStage::Decision));
    f.outcomes.push_back(reject("s9", RejectionStage::Filtering));
    return f;
}

TEST(ComputeReportTest, TenInputExample) {
    const auto f = ten_inputs();
    const auto r = compute_report(f.outcomes, f.samples, f.table, f.models);
    EXPECT_EQ(r.total_inputs, 10u);
    EXPECT_EQ(r.total_outputs, 4u);
    EXPECT_EQ(r.correct_outputs, 3u);
    EXPECT_EQ(r.rejected, 6u);
    EXPECT_EQ(r.rejected_correct, 2u);
    EXPECT_DOUBLE_EQ(r.rr, 0.6);
    EXPECT_DOUBLE_EQ(*r.tar, 0.75);
    EXPECT_NEAR(*r.frr, 1.0 / 3.0, 1e-12);
    EXPECT_EQ(r.per_stage_rejections.at(RejectionStage::TailAnalyzer), 2u);
    EXPECT_EQ(r.per_stage_rejections.at(RejectionStage::Filtering), 2u);
    EXPECT_EQ(r.per_stage_rejections.at(RejectionStage::Decision), 2u);
}

TEST(ComputeReportTest, AnyModelPolicyCountsMore) {
    auto f = ten_inputs();
    // s8 gets one correct model without a majority.
    PredictionTable t;
    for (const auto& s : f.samples) {
        for (const auto& m : f.models) {
            const auto& seq = f.table.for_sample(s.sample_id).at(m);
            t.add(MakeRecord(s.sample_id, m, s.sample_id == "s8" && m == "m3" ? Seq({"A.x"}) : seq));
        }
    }
    const auto r = compute_report(f.outcomes, f.samples, t, f.models, CounterfactualPolicy::AnyModelCorrect);
    EXPECT_EQ(r.rejected_correct, 3u);
}

TEST(ComputeReportTest, MismatchedInputsAreErrors) {
    auto f = ten_inputs();
    auto fewer = f.outcomes;
    fewer.pop_back();
    EXPECT_THROW(compute_report(fewer, f.samples, f.table, f.models), DataError);
    std::swap(f.outcomes[0], f.outcomes[1]);
    EXPECT_THROW(compute_report(f.outcomes, f.samples, f.table, f.models), DataError);
}

TEST(ComputeReportTest, MergeEqualsWholeRun) {
    const auto f = ten_inputs();
    const std::span<const PipelineOutcome> o(f.outcomes);
    const std::span<const Sample> s(f.samples);
    const auto a = compute_report(o.first(3), s.first(3), f.table, f.models);
    const auto b = compute_report(o.subspan(3), s.subspan(3), f.table, f.models);
    EXPECT_EQ(merge_reports(a, b), compute_report(f.outcomes, f.samples, f.table, f.models));
}

TEST(TableTest, PercentColumnsAndNulls) {
    const auto f = ten_inputs();
    ReportRow row;
    row.filter = FilterKind::RH;
    row.decision = DecisionRule::ScoreBased;
    row.report = compute_report(f.outcomes, f.samples, f.table, f.models);
    ReportRow empty;
    empty.report.total_inputs = 2;
    empty.report.rejected = 2;
    finalize_rates(empty.report);
    std::vector<ReportRow> rows = {row, empty};
    const auto text = format_report_table(rows);
    EXPECT_EQ(text.rfind("Filter", 0), 0u) << text;
    EXPECT_NE(text.find("Decision Rule"), std::string::npos);
    EXPECT_NE(text.find("75.0"), std::string::npos);
    EXPECT_NE(text.find("60.0"), std::string::npos);
    EXPECT_NE(text.find("33.3"), std::string::npos);
    EXPECT_NE(text.find(" - "), std::string::npos);
}

}  // namespace
}  // namespace seqvote
