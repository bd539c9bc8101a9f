// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include "seqvote/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "seqvote/error.hpp"
#include "seqvote/io.hpp"
#include "seqvote/parallel.hpp"

namespace seqvote {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(FilterKind kind) {
    switch (kind) {
        case FilterKind::None: return "None";
        case FilterKind::R: return "R";
        case FilterKind::H: return "H";
        case FilterKind::RH: return "RH";
    }
    return "?";
}

std::string_view to_string(DecisionRule rule) {
    switch (rule) {
        case DecisionRule::SimpleRejection: return "SimpleRejection";
        case DecisionRule::ScoreBased: return "ScoreBased";
        case DecisionRule::BestModel: return "BestModel";
    }
    return "?";
}

std::string_view to_string(RejectionStage stage) {
    switch (stage) {
        case RejectionStage::TailAnalyzer: return "tail_analyzer";
        case RejectionStage::Filtering: return "filtering";
        case RejectionStage::Decision: return "decision";
    }
    return "?";
}

std::string_view to_string(DecidedBy by) {
    switch (by) {
        case DecidedBy::Majority: return "majority";
        case DecidedBy::Score: return "score";
        case DecidedBy::BestModel: return "best_model";
        case DecidedBy::SoleCandidate: return "sole_candidate";
    }
    return "?";
}

namespace {

std::string fold(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '-' || c == '_' || c == ' ') {
            continue;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

FilterKind parse_filter_kind(std::string_view text) {
    const auto f = fold(text);
    if (f == "none" || f.empty()) return FilterKind::None;
    if (f == "r" || f == "rfilter") return FilterKind::R;
    if (f == "h" || f == "hfilter") return FilterKind::H;
    if (f == "rh" || f == "rhfilter") return FilterKind::RH;
    throw ConfigError("unknown filter '" + std::string(text) + "' (expected None, R, H, RH)");
}

DecisionRule parse_decision_rule(std::string_view text) {
    const auto f = fold(text);
    if (f == "simplerejection" || f == "simple") return DecisionRule::SimpleRejection;
    if (f == "scorebased" || f == "score") return DecisionRule::ScoreBased;
    if (f == "bestmodel" || f == "best") return DecisionRule::BestModel;
    throw ConfigError("unknown decision rule '" + std::string(text) +
                      "' (expected SimpleRejection, ScoreBased, BestModel)");
}

void PipelineConfig::validate() const {
    if (model_ids.empty()) {
        throw ConfigError("pipeline needs at least one model");
    }
    std::set<std::string> unique(model_ids.begin(), model_ids.end());
    if (unique.size() != model_ids.size()) {
        throw ConfigError("model ids must be unique");
    }
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw ConfigError("theta must lie in [0, 1]");
    }
    if (!(p > 0.0 && p <= 100.0)) {
        throw ConfigError("p must lie in (0, 100]");
    }
    if (decision == DecisionRule::BestModel && !best_model_id) {
        throw ConfigError("BestModel decision requires best_model_id");
    }
    if (best_model_id && !unique.contains(*best_model_id)) {
        throw ConfigError("best model '" + *best_model_id + "' is not among the configured models");
    }
}

// --- filtering -----------------------------------------------------------

bool passes_filter(const ApiSequence& sequence, std::string_view model_id,
                   const ModelProfile& profile, FilterKind kind) {
    if (kind == FilterKind::None) {
        return true;
    }
    const bool need_record = kind == FilterKind::R || kind == FilterKind::RH;
    const bool need_head = kind == FilterKind::H || kind == FilterKind::RH;
    if (need_record && !profile.has_model(model_id)) {
        throw ConfigError("model '" + std::string(model_id) + "' is not in the profile");
    }
    if (sequence.empty()) {
        return false;
    }
    for (const auto& m : sequence) {
        const ProfileEntry* e = profile.find(m);
        if (e == nullptr) {
            return false;
        }
        if (need_head && e->tail_flag != TailFlag::Head) {
            return false;
        }
        if (need_record) {
            auto it = e->per_model.find(std::string(model_id));
            if (it == e->per_model.end() || it->second.recommendations == 0) {
                return false;
            }
        }
    }
    return true;
}

std::vector<Candidate> apply_filter(std::vector<Candidate> candidates, const ModelProfile& profile,
                                    FilterKind kind) {
    for (auto& c : candidates) {
        c.survived_filter = passes_filter(c.sequence, c.model_id, profile, kind);
    }
    return candidates;
}

// --- voting and scoring --------------------------------------------------

VoteResult majority_vote(std::span<const Candidate> survivors, std::size_t configured_n) {
    const std::size_t k = survivors.size();
    if (configured_n == 1 && k == 1) {
        return {survivors.front().sequence, DecidedBy::SoleCandidate};
    }
    std::map<std::string, std::pair<std::size_t, const ApiSequence*>> groups;
    for (const auto& c : survivors) {
        auto& g = groups[join_sequence(c.sequence)];
        ++g.first;
        g.second = &c.sequence;
    }
    for (const auto& [key, g] : groups) {
        if (g.first >= 2 && 2 * g.first > k) {
            return {*g.second, DecidedBy::Majority};
        }
    }
    return {};
}

double reliability_score(const ApiSequence& sequence, std::string_view model_id,
                         const ModelProfile& profile) {
    if (!profile.has_model(model_id)) {
        throw ConfigError("model '" + std::string(model_id) + "' is not in the profile");
    }
    if (sequence.empty()) {
        return 0.0;
    }
    double log_sum = 0.0;
    double first = -1.0;
    bool uniform = true;
    for (const auto& m : sequence) {
        const double a = method_accuracy(profile, model_id, m);
        if (a == 0.0) {
            return 0.0;
        }
        if (first < 0.0) {
            first = a;
        }
        uniform = uniform && a == first;
        log_sum += std::log(a);
    }
    // The mean of equal factors is the factor itself; returning it avoids
    // an exp/log round trip that can land just below a threshold.
    if (uniform) {
        return first;
    }
    return std::exp(log_sum / static_cast<double>(sequence.size()));
}

namespace {

PipelineOutcome rejected(RejectionStage stage, std::optional<double> score = std::nullopt) {
    PipelineOutcome o;
    o.status = OutcomeStatus::Rejected;
    o.rejection_stage = stage;
    o.score = score;
    return o;
}

PipelineOutcome accepted(ApiSequence output, DecidedBy by, std::optional<double> score = std::nullopt) {
    PipelineOutcome o;
    o.status = OutcomeStatus::Accepted;
    o.output = std::move(output);
    o.decided_by = by;
    o.score = score;
    return o;
}

std::size_t model_rank(const PipelineConfig& config, const std::string& model_id) {
    auto it = std::find(config.model_ids.begin(), config.model_ids.end(), model_id);
    return static_cast<std::size_t>(it - config.model_ids.begin());
}

}  // namespace

PipelineOutcome decide(std::span<const Candidate> survivors, const VoteResult& vote,
                       const PipelineConfig& config, const ModelProfile& profile) {
    if (vote.consensus()) {
        return accepted(*vote.winner, vote.decided_by);
    }
    switch (config.decision) {
        case DecisionRule::SimpleRejection:
            return rejected(RejectionStage::Decision);

        case DecisionRule::ScoreBased: {
            const Candidate* best = nullptr;
            double best_score = -1.0;
            for (const auto& c : survivors) {
                const double s = reliability_score(c.sequence, c.model_id, profile);
                const bool better =
                    best == nullptr || s > best_score ||
                    (s == best_score &&
                     model_rank(config, c.model_id) < model_rank(config, best->model_id));
                if (better) {
                    best = &c;
                    best_score = s;
                }
            }
            if (best == nullptr) {
                return rejected(RejectionStage::Decision);
            }
            if (best_score >= config.theta) {
                return accepted(best->sequence, DecidedBy::Score, best_score);
            }
            return rejected(RejectionStage::Decision, best_score);
        }

        case DecisionRule::BestModel: {
            if (!config.best_model_id) {
                throw ConfigError("BestModel decision requires best_model_id");
            }
            auto it = std::find_if(survivors.begin(), survivors.end(), [&](const Candidate& c) {
                return c.model_id == *config.best_model_id;
            });
            if (it == survivors.end()) {
                return rejected(RejectionStage::Decision);
            }
            const double s = reliability_score(it->sequence, it->model_id, profile);
            if (s >= config.theta) {
                return accepted(it->sequence, DecidedBy::BestModel, s);
            }
            return rejected(RejectionStage::Decision, s);
        }
    }
    return rejected(RejectionStage::Decision);
}

std::vector<Candidate> gather_candidates(const SamplePredictions& predictions,
                                         std::span<const std::string> model_ids) {
    std::vector<Candidate> out;
    out.reserve(model_ids.size());
    for (const auto& id : model_ids) {
        Candidate c;
        c.model_id = id;
        if (auto it = predictions.find(id); it != predictions.end()) {
            c.sequence = it->second;
        }
        out.push_back(std::move(c));
    }
    return out;
}

PipelineOutcome run_pipeline(const Sample& sample, const SamplePredictions& predictions,
                             const PipelineConfig& config, const ModelProfile& profile,
                             const TailVerdict* verdict) {
    PipelineOutcome outcome = [&] {
        if (config.use_tail_analyzer) {
            if (verdict == nullptr) {
                throw DataError("no tail verdict for sample '" + sample.sample_id + "'");
            }
            if (verdict->is_tail) {
                return rejected(RejectionStage::TailAnalyzer);
            }
        }
        auto candidates =
            apply_filter(gather_candidates(predictions, config.model_ids), profile, config.filter);
        std::vector<Candidate> survivors;
        for (auto& c : candidates) {
            if (c.survived_filter) {
                survivors.push_back(std::move(c));
            }
        }
        if (survivors.empty()) {
            return rejected(RejectionStage::Filtering);
        }
        const VoteResult vote = majority_vote(survivors, config.model_ids.size());
        return decide(survivors, vote, config, profile);
    }();
    outcome.sample_id = sample.sample_id;
    return outcome;
}

// --- batch ---------------------------------------------------------------

void PredictionTable::add(const PredictionRecord& record) {
    auto key = std::make_pair(record.sample_id, record.model_id);
    if (!records_.emplace(key, record).second) {
        throw DataError("duplicate prediction for (" + record.sample_id + ", " + record.model_id +
                        ")");
    }
    table_[record.sample_id][record.model_id] = record.parsed;
}

void PredictionTable::add(std::span<const PredictionRecord> records) {
    for (const auto& r : records) {
        add(r);
    }
}

const SamplePredictions& PredictionTable::for_sample(std::string_view sample_id) const {
    static const SamplePredictions empty;
    auto it = table_.find(std::string(sample_id));
    return it == table_.end() ? empty : it->second;
}

std::vector<PredictionRecord> PredictionTable::records_for_model(std::string_view model_id) const {
    std::vector<PredictionRecord> out;
    for (const auto& [key, rec] : records_) {
        if (key.second == model_id) {
            out.push_back(rec);
        }
    }
    return out;
}

VerdictTable index_verdicts(std::span<const TailVerdict> verdicts) {
    VerdictTable out;
    for (const auto& v : verdicts) {
        if (!out.emplace(v.sample_id, v).second) {
            throw DataError("duplicate verdict for '" + v.sample_id + "'");
        }
    }
    return out;
}

std::vector<PipelineOutcome> run_all(std::span<const Sample> samples,
                                     const PredictionTable& predictions,
                                     const PipelineConfig& config, const ModelProfile& profile,
                                     const VerdictTable* verdicts, unsigned workers) {
    config.validate();
    const bool needs_counters = config.decision != DecisionRule::SimpleRejection ||
                                config.filter == FilterKind::R || config.filter == FilterKind::RH;
    if (needs_counters) {
        for (const auto& id : config.model_ids) {
            if (!profile.has_model(id)) {
                throw ConfigError("model '" + id + "' is not in the profile; score-based rules "
                                  "and the R filter need its counters");
            }
        }
    }
    if (config.use_tail_analyzer) {
        if (verdicts == nullptr) {
            throw ConfigError("tail analyzer enabled but no verdicts supplied");
        }
        for (const auto& s : samples) {
            if (!verdicts->contains(s.sample_id)) {
                throw DataError("no tail verdict for sample '" + s.sample_id + "'");
            }
        }
    }
    std::vector<PipelineOutcome> out(samples.size());
    for_each_chunk(samples.size(), workers, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const TailVerdict* v = nullptr;
            if (verdicts != nullptr) {
                if (auto it = verdicts->find(samples[i].sample_id); it != verdicts->end()) {
                    v = &it->second;
                }
            }
            out[i] = run_pipeline(samples[i], predictions.for_sample(samples[i].sample_id), config,
                                  profile, v);
        }
    });
    return out;
}

std::string select_best_model(std::span<const Sample> samples, const PredictionTable& predictions,
                              std::span<const std::string> model_ids) {
    if (model_ids.empty()) {
        throw ConfigError("no models to choose from");
    }
    std::string best = model_ids.front();
    std::size_t best_hits = 0;
    bool first = true;
    for (const auto& id : model_ids) {
        std::size_t hits = 0;
        for (const auto& s : samples) {
            const auto& preds = predictions.for_sample(s.sample_id);
            if (auto it = preds.find(id); it != preds.end() && it->second == s.ground_truth) {
                ++hits;
            }
        }
        if (first || hits > best_hits) {
            best = id;
            best_hits = hits;
            first = false;
        }
    }
    return best;
}

// --- outcome wire format -------------------------------------------------

std::string outcome_to_json_line(const PipelineOutcome& o) {
    ordered_json j;
    j["id"] = o.sample_id;
    j["status"] = o.status == OutcomeStatus::Accepted ? "accepted" : "rejected";
    j["output"] = o.output ? ordered_json(to_strings(*o.output)) : ordered_json(nullptr);
    j["stage"] = o.rejection_stage ? ordered_json(std::string(to_string(*o.rejection_stage)))
                                   : ordered_json(nullptr);
    j["decided_by"] =
        o.decided_by ? ordered_json(std::string(to_string(*o.decided_by))) : ordered_json(nullptr);
    j["score"] = o.score ? ordered_json(*o.score) : ordered_json(nullptr);
    return j.dump();
}

std::string serialize_outcomes(std::span<const PipelineOutcome> outcomes) {
    std::string out;
    for (const auto& o : outcomes) {
        out += outcome_to_json_line(o);
        out += '\n';
    }
    return out;
}

namespace {

RejectionStage parse_stage(const std::string& s) {
    if (s == "tail_analyzer") return RejectionStage::TailAnalyzer;
    if (s == "filtering") return RejectionStage::Filtering;
    if (s == "decision") return RejectionStage::Decision;
    throw ConfigError("unknown rejection stage '" + s + "'");
}

DecidedBy parse_decided_by(const std::string& s) {
    if (s == "majority") return DecidedBy::Majority;
    if (s == "score") return DecidedBy::Score;
    if (s == "best_model") return DecidedBy::BestModel;
    if (s == "sole_candidate") return DecidedBy::SoleCandidate;
    throw ConfigError("unknown decided_by '" + s + "'");
}

}  // namespace

std::vector<PipelineOutcome> load_outcomes(const std::filesystem::path& path) {
    const std::string file = path.string();
    std::vector<PipelineOutcome> out;
    io::for_each_line(path, [&](std::size_t line, std::string_view text) {
        try {
            const auto j = nlohmann::json::parse(text);
            PipelineOutcome o;
            o.sample_id = j.at("id").get<std::string>();
            const auto status = j.at("status").get<std::string>();
            if (status == "accepted") {
                o.status = OutcomeStatus::Accepted;
                ApiSequence seq;
                for (const auto& m : j.at("output")) {
                    auto method = normalize_method(m.get<std::string>());
                    if (!method) {
                        throw ParseError(file, line, "bad method in output");
                    }
                    seq.push_back(std::move(*method));
                }
                o.output = std::move(seq);
                o.decided_by = parse_decided_by(j.at("decided_by").get<std::string>());
            } else if (status == "rejected") {
                o.status = OutcomeStatus::Rejected;
                o.rejection_stage = parse_stage(j.at("stage").get<std::string>());
            } else {
                throw ParseError(file, line, "status must be accepted or rejected");
            }
            if (auto s = j.find("score"); s != j.end() && !s->is_null()) {
                o.score = s->get<double>();
            }
            out.push_back(std::move(o));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(file, line, std::string("bad outcome record: ") + e.what());
        } catch (const ConfigError& e) {
            throw ParseError(file, line, e.what());
        }
    });
    return out;
}

}  // namespace seqvote
