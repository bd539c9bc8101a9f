// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqvote/corpus.hpp"
#include "seqvote/ensemble.hpp"

namespace seqvote {

// How a rejected input is judged "could have been correct".
enum class CounterfactualPolicy { UnfilteredMajority, AnyModelCorrect };

std::string_view to_string(CounterfactualPolicy policy);
CounterfactualPolicy parse_counterfactual_policy(std::string_view text);

struct EvaluationReport {
    std::uint64_t total_inputs = 0;
    std::uint64_t total_outputs = 0;
    std::uint64_t correct_outputs = 0;
    std::uint64_t rejected = 0;
    std::uint64_t rejected_correct = 0;
    std::optional<double> tar;  // null when nothing was accepted
    double rr = 0.0;
    std::optional<double> frr;  // null when nothing was rejected
    std::map<RejectionStage, std::uint64_t> per_stage_rejections;

    friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

// Accepted and ordered-equal to the ground truth.
bool score_outcome(const PipelineOutcome& outcome, const Sample& sample);

// raw_candidates are the unfiltered candidates in configured model order.
bool counterfactual_correct(const Sample& sample, std::span<const Candidate> raw_candidates,
                            CounterfactualPolicy policy, std::size_t configured_n);

// outcomes[i] must belong to samples[i]. Throws DataError otherwise.
EvaluationReport compute_report(std::span<const PipelineOutcome> outcomes,
                                std::span<const Sample> samples, const PredictionTable& predictions,
                                std::span<const std::string> model_ids,
                                CounterfactualPolicy policy = CounterfactualPolicy::UnfilteredMajority);

// Additive merge of two partial reports; rates are recomputed.
EvaluationReport merge_reports(const EvaluationReport& a, const EvaluationReport& b);
void finalize_rates(EvaluationReport& report);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);

// One row of the comparison table.
struct ReportRow {
    FilterKind filter = FilterKind::None;
    DecisionRule decision = DecisionRule::SimpleRejection;
    bool tail_analyzer = false;
    double p = 50.0;
    double theta = 0.9;
    EvaluationReport report;
};

// Aligned text table: Filter, Decision Rule, TAR, RR, FRR (percent), then
// gate, p, theta and per-stage rejection counts.
std::string format_report_table(std::span<const ReportRow> rows);

}  // namespace seqvote
