// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqvote/corpus.hpp"
#include "seqvote/profile.hpp"
#include "seqvote/tail_analyzer.hpp"

namespace seqvote {

enum class FilterKind { None, R, H, RH };
enum class DecisionRule { SimpleRejection, ScoreBased, BestModel };
enum class RejectionStage { TailAnalyzer, Filtering, Decision };
enum class DecidedBy { Majority, Score, BestModel, SoleCandidate };
enum class OutcomeStatus { Accepted, Rejected };

std::string_view to_string(FilterKind kind);
std::string_view to_string(DecisionRule rule);
std::string_view to_string(RejectionStage stage);
std::string_view to_string(DecidedBy by);

// Case-insensitive; '-' and '_' are ignored ("simple-rejection" works).
// Throws ConfigError on unknown names.
FilterKind parse_filter_kind(std::string_view text);
DecisionRule parse_decision_rule(std::string_view text);

struct PipelineConfig {
    std::vector<std::string> model_ids;
    FilterKind filter = FilterKind::None;
    DecisionRule decision = DecisionRule::SimpleRejection;
    double theta = 0.9;
    std::optional<std::string> best_model_id;
    bool use_tail_analyzer = false;
    double p = 50.0;

    // Throws ConfigError on any violated invariant.
    void validate() const;
};

struct Candidate {
    std::string model_id;
    ApiSequence sequence;
    bool survived_filter = true;
    std::optional<double> score;
};

struct PipelineOutcome {
    std::string sample_id;
    OutcomeStatus status = OutcomeStatus::Rejected;
    std::optional<ApiSequence> output;
    std::optional<RejectionStage> rejection_stage;
    std::optional<DecidedBy> decided_by;
    std::optional<double> score;
};

struct VoteResult {
    std::optional<ApiSequence> winner;
    DecidedBy decided_by = DecidedBy::Majority;

    bool consensus() const noexcept { return winner.has_value(); }
};

// True iff a candidate of model_id passes `kind` against the profile.
// R requires every method to be in that model's recommendation record
// (at least one recommendation while profiling); H requires every method
// to be flagged head. Empty sequences fail every filter except None.
// Throws ConfigError for R/RH when the profile lacks model_id.
bool passes_filter(const ApiSequence& sequence, std::string_view model_id,
                   const ModelProfile& profile, FilterKind kind);
std::vector<Candidate> apply_filter(std::vector<Candidate> candidates, const ModelProfile& profile,
                                    FilterKind kind);

// A group of identical sequences wins iff it has at least two members and
// more than half of the survivors. With configured_n == 1 a single
// survivor is accepted as the sole candidate.
VoteResult majority_vote(std::span<const Candidate> survivors, std::size_t configured_n);

// Geometric mean of method_accuracy over the sequence, 0 for an empty
// sequence or any zero factor.
double reliability_score(const ApiSequence& sequence, std::string_view model_id,
                         const ModelProfile& profile);

PipelineOutcome decide(std::span<const Candidate> survivors, const VoteResult& vote,
                       const PipelineConfig& config, const ModelProfile& profile);

// model_id -> parsed sequence for one sample. Missing models become empty
// candidates.
using SamplePredictions = std::unordered_map<std::string, ApiSequence>;

// Candidates in config.model_ids order.
std::vector<Candidate> gather_candidates(const SamplePredictions& predictions,
                                         std::span<const std::string> model_ids);

// verdict may be null only when config.use_tail_analyzer is false.
PipelineOutcome run_pipeline(const Sample& sample, const SamplePredictions& predictions,
                             const PipelineConfig& config, const ModelProfile& profile,
                             const TailVerdict* verdict);

// sample_id -> model_id -> sequence.
class PredictionTable {
public:
    PredictionTable() = default;
    void add(std::span<const PredictionRecord> records);
    void add(const PredictionRecord& record);

    // Empty map for unknown samples.
    const SamplePredictions& for_sample(std::string_view sample_id) const;
    std::vector<PredictionRecord> records_for_model(std::string_view model_id) const;

private:
    std::unordered_map<std::string, SamplePredictions> table_;
    std::map<std::pair<std::string, std::string>, PredictionRecord> records_;
};

using VerdictTable = std::unordered_map<std::string, TailVerdict>;
VerdictTable index_verdicts(std::span<const TailVerdict> verdicts);

// Runs every sample; the result is in sample order regardless of workers.
std::vector<PipelineOutcome> run_all(std::span<const Sample> samples,
                                     const PredictionTable& predictions,
                                     const PipelineConfig& config, const ModelProfile& profile,
                                     const VerdictTable* verdicts, unsigned workers = 1);

// Model with the highest exact-match rate on samples; ties go to the
// earlier model in model_ids.
std::string select_best_model(std::span<const Sample> samples, const PredictionTable& predictions,
                              std::span<const std::string> model_ids);

std::string outcome_to_json_line(const PipelineOutcome& outcome);
std::string serialize_outcomes(std::span<const PipelineOutcome> outcomes);
std::vector<PipelineOutcome> load_outcomes(const std::filesystem::path& path);

}  // namespace seqvote
