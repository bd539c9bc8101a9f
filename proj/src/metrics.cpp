// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include "seqvote/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "seqvote/error.hpp"

namespace seqvote {

std::string_view to_string(CounterfactualPolicy policy) {
    return policy == CounterfactualPolicy::UnfilteredMajority ? "UnfilteredMajority"
                                                              : "AnyModelCorrect";
}

CounterfactualPolicy parse_counterfactual_policy(std::string_view text) {
    std::string f;
    for (char c : text) {
        if (c != '-' && c != '_') {
            f.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (f == "unfilteredmajority" || f == "majority") return CounterfactualPolicy::UnfilteredMajority;
    if (f == "anymodelcorrect" || f == "any") return CounterfactualPolicy::AnyModelCorrect;
    throw ConfigError("unknown counterfactual policy '" + std::string(text) + "'");
}

bool score_outcome(const PipelineOutcome& outcome, const Sample& sample) {
    return outcome.status == OutcomeStatus::Accepted && outcome.output &&
           *outcome.output == sample.ground_truth;
}

bool counterfactual_correct(const Sample& sample, std::span<const Candidate> raw_candidates,
                            CounterfactualPolicy policy, std::size_t configured_n) {
    if (policy == CounterfactualPolicy::AnyModelCorrect) {
        return std::any_of(raw_candidates.begin(), raw_candidates.end(),
                           [&](const Candidate& c) { return c.sequence == sample.ground_truth; });
    }
    const VoteResult vote = majority_vote(raw_candidates, configured_n);
    return vote.winner && *vote.winner == sample.ground_truth;
}

void finalize_rates(EvaluationReport& r) {
    r.tar = r.total_outputs == 0 ? std::nullopt
                                 : std::optional<double>(static_cast<double>(r.correct_outputs) /
                                                         static_cast<double>(r.total_outputs));
    r.rr = r.total_inputs == 0 ? 0.0
                               : 1.0 - static_cast<double>(r.total_outputs) /
                                           static_cast<double>(r.total_inputs);
    r.frr = r.rejected == 0 ? std::nullopt
                            : std::optional<double>(static_cast<double>(r.rejected_correct) /
                                                    static_cast<double>(r.rejected));
}

EvaluationReport compute_report(std::span<const PipelineOutcome> outcomes,
                                std::span<const Sample> samples, const PredictionTable& predictions,
                                std::span<const std::string> model_ids,
                                CounterfactualPolicy policy) {
    if (outcomes.size() != samples.size()) {
        throw DataError("outcome count " + std::to_string(outcomes.size()) +
                        " does not match sample count " + std::to_string(samples.size()));
    }
    EvaluationReport r;
    for (auto stage : {RejectionStage::TailAnalyzer, RejectionStage::Filtering,
                       RejectionStage::Decision}) {
        r.per_stage_rejections[stage] = 0;
    }
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        const auto& s = samples[i];
        if (o.sample_id != s.sample_id) {
            throw DataError("outcome '" + o.sample_id + "' is not for sample '" + s.sample_id + "'");
        }
        ++r.total_inputs;
        if (o.status == OutcomeStatus::Accepted) {
            ++r.total_outputs;
            if (score_outcome(o, s)) {
                ++r.correct_outputs;
            }
            continue;
        }
        if (!o.rejection_stage) {
            throw DataError("rejected outcome '" + o.sample_id + "' has no stage");
        }
        ++r.rejected;
        ++r.per_stage_rejections[*o.rejection_stage];
        const auto raw = gather_candidates(predictions.for_sample(s.sample_id), model_ids);
        if (counterfactual_correct(s, raw, policy, model_ids.size())) {
            ++r.rejected_correct;
        }
    }
    finalize_rates(r);
    return r;
}

EvaluationReport merge_reports(const EvaluationReport& a, const EvaluationReport& b) {
    EvaluationReport r = a;
    r.total_inputs += b.total_inputs;
    r.total_outputs += b.total_outputs;
    r.correct_outputs += b.correct_outputs;
    r.rejected += b.rejected;
    r.rejected_correct += b.rejected_correct;
    for (const auto& [stage, n] : b.per_stage_rejections) {
        r.per_stage_rejections[stage] += n;
    }
    finalize_rates(r);
    return r;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
    nlohmann::ordered_json j;
    j["total_inputs"] = r.total_inputs;
    j["total_outputs"] = r.total_outputs;
    j["correct_outputs"] = r.correct_outputs;
    j["rejected"] = r.rejected;
    j["rejected_correct"] = r.rejected_correct;
    j["tar"] = r.tar ? nlohmann::ordered_json(*r.tar) : nlohmann::ordered_json(nullptr);
    j["rr"] = r.rr;
    j["frr"] = r.frr ? nlohmann::ordered_json(*r.frr) : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json stages = nlohmann::ordered_json::object();
    for (const auto& [stage, n] : r.per_stage_rejections) {
        stages[std::string(to_string(stage))] = n;
    }
    j["per_stage_rejections"] = std::move(stages);
    return j;
}

namespace {

std::string percent(const std::optional<double>& v) {
    if (!v) {
        return "-";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *v * 100.0);
    return buf;
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::uint64_t stage_count(const EvaluationReport& r, RejectionStage stage) {
    auto it = r.per_stage_rejections.find(stage);
    return it == r.per_stage_rejections.end() ? 0 : it->second;
}

}  // namespace

std::string format_report_table(std::span<const ReportRow> rows) {
    const std::vector<std::string> header{"Filter", "Decision Rule", "TAR", "RR", "FRR",
                                          "Gate", "p", "theta", "Rej(tail)", "Rej(filter)",
                                          "Rej(decision)"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : rows) {
        const auto& r = row.report;
        cells.push_back({std::string(to_string(row.filter)), std::string(to_string(row.decision)),
                         percent(r.tar), percent(r.rr), percent(r.frr),
                         row.tail_analyzer ? "on" : "off", number(row.p), number(row.theta),
                         std::to_string(stage_count(r, RejectionStage::TailAnalyzer)),
                         std::to_string(stage_count(r, RejectionStage::Filtering)),
                         std::to_string(stage_count(r, RejectionStage::Decision))});
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : cells) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            // Text columns left-aligned, numbers right-aligned.
            const bool left = c < 2 || c == 5;
            const std::string pad(width[c] - row[c].size(), ' ');
            if (c != 0) {
                out << "  ";
            }
            out << (left ? row[c] + pad : pad + row[c]);
        }
        out << '\n';
    };
    emit(header);
    std::size_t total = 0;
    for (auto w : width) {
        total += w;
    }
    out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    for (const auto& row : cells) {
        emit(row);
    }
    return out.str();
}

}  // namespace seqvote
