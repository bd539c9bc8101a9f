// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include "seqvote/tail_analyzer.hpp"

#include <cctype>
#include <cmath>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "seqvote/error.hpp"
#include "seqvote/io.hpp"
#include "seqvote/parallel.hpp"

namespace seqvote {

using ordered_json = nlohmann::ordered_json;

int derive_tail_label(const Sample& sample, const FlagMap& flags) {
    for (const auto& m : sample.ground_truth) {
        auto it = flags.find(m);
        if (it == flags.end() || it->second == TailFlag::Tail) {
            return 1;
        }
    }
    return 0;
}

int derive_tail_label(const Sample& sample, const ModelProfile& profile) {
    for (const auto& m : sample.ground_truth) {
        const auto* e = profile.find(m);
        if (e == nullptr || e->tail_flag == TailFlag::Tail) {
            return 1;
        }
    }
    return 0;
}

std::vector<Sample> label_samples(std::span<const Sample> samples, const FlagMap& flags) {
    std::vector<Sample> out(samples.begin(), samples.end());
    for (auto& s : out) {
        s.tail_label = derive_tail_label(s, flags);
    }
    return out;
}

std::vector<std::string> tokenize_text(std::string_view text) {
    auto is_alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    auto is_upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
    auto is_lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };

    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (!is_alnum(c)) {
            flush();
            continue;
        }
        if (!current.empty() && is_upper(c)) {
            const char prev = text[i - 1];
            const bool next_lower = i + 1 < text.size() && is_lower(text[i + 1]);
            if (is_lower(prev) || (is_upper(prev) && next_lower)) {
                flush();
            }
        }
        current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    flush();
    return tokens;
}

// --- classifier ----------------------------------------------------------

BaselineClassifier::BaselineClassifier(std::map<std::string, TokenCounts> vocabulary,
                                       std::array<std::uint64_t, 2> class_sizes,
                                       double smoothing_alpha)
    : vocabulary_(std::move(vocabulary)), class_sizes_(class_sizes), alpha_(smoothing_alpha) {
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
        throw ConfigError("smoothing alpha must be positive");
    }
    if (class_sizes_[0] == 0 || class_sizes_[1] == 0) {
        throw DataError("classifier needs at least one sample of each class");
    }
    for (const auto& [tok, c] : vocabulary_) {
        token_totals_[0] += c.head;
        token_totals_[1] += c.tail;
    }
    const double total = static_cast<double>(class_sizes_[0] + class_sizes_[1]);
    priors_[0] = static_cast<double>(class_sizes_[0]) / total;
    priors_[1] = 1.0 - priors_[0];
}

std::array<double, 2> BaselineClassifier::log_scores(std::string_view text) const {
    std::array<double, 2> score{std::log(priors_[0]), std::log(priors_[1])};
    const double v = static_cast<double>(vocabulary_.size());
    const std::array<double, 2> denom{
        std::log(static_cast<double>(token_totals_[0]) + alpha_ * v),
        std::log(static_cast<double>(token_totals_[1]) + alpha_ * v)};
    for (const auto& tok : tokenize_text(text)) {
        auto it = vocabulary_.find(tok);
        if (it == vocabulary_.end()) {
            continue;
        }
        score[0] += std::log(static_cast<double>(it->second.head) + alpha_) - denom[0];
        score[1] += std::log(static_cast<double>(it->second.tail) + alpha_) - denom[1];
    }
    return score;
}

namespace {

std::string input_text(const Sample& s) { return s.query + "\n" + s.context; }

}  // namespace

BaselineClassifier train_baseline(std::span<const Sample> samples, double smoothing_alpha) {
    std::map<std::string, BaselineClassifier::TokenCounts> vocab;
    std::array<std::uint64_t, 2> sizes{};
    for (const auto& s : samples) {
        if (!s.tail_label) {
            throw DataError("training sample '" + s.sample_id + "' has no tail label");
        }
        const bool tail = *s.tail_label == 1;
        ++sizes[tail ? 1 : 0];
        for (const auto& tok : tokenize_text(input_text(s))) {
            auto& c = vocab[tok];
            ++(tail ? c.tail : c.head);
        }
    }
    if (sizes[0] == 0 || sizes[1] == 0) {
        throw DataError("training set must contain both head and tail samples");
    }
    return BaselineClassifier(std::move(vocab), sizes, smoothing_alpha);
}

TailVerdict classify(const BaselineClassifier& classifier, const Sample& sample) {
    const auto score = classifier.log_scores(input_text(sample));
    return {sample.sample_id, score[1] >= score[0], VerdictSource::Baseline};
}

std::vector<TailVerdict> classify_all(const BaselineClassifier& classifier,
                                      std::span<const Sample> samples, unsigned workers) {
    std::vector<TailVerdict> out(samples.size());
    for_each_chunk(samples.size(), workers, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            out[i] = classify(classifier, samples[i]);
        }
    });
    return out;
}

std::vector<TailVerdict> load_external_verdicts(const std::filesystem::path& path) {
    const std::string file = path.string();
    std::vector<TailVerdict> out;
    std::unordered_set<std::string> seen;
    io::for_each_line(path, [&](std::size_t line, std::string_view text) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(file, line, std::string("invalid JSON: ") + e.what());
        }
        auto id = j.find("id");
        auto tail = j.find("tail");
        if (id == j.end() || !id->is_string()) {
            throw ParseError(file, line, "verdict needs a string 'id'");
        }
        if (tail == j.end() || !tail->is_number_integer() ||
            (tail->get<int>() != 0 && tail->get<int>() != 1)) {
            throw ParseError(file, line, "verdict 'tail' must be 0 or 1");
        }
        TailVerdict v{id->get<std::string>(), tail->get<int>() == 1, VerdictSource::External};
        if (!seen.insert(v.sample_id).second) {
            throw DataError(file + ":" + std::to_string(line) + ": duplicate verdict for '" +
                            v.sample_id + "'");
        }
        out.push_back(std::move(v));
    });
    return out;
}

void write_verdicts(const std::filesystem::path& path, std::span<const TailVerdict> verdicts) {
    std::string out;
    for (const auto& v : verdicts) {
        ordered_json j;
        j["id"] = v.sample_id;
        j["tail"] = v.is_tail ? 1 : 0;
        out += j.dump();
        out += '\n';
    }
    io::write_file_atomic(path, out);
}

double evaluate_classifier(std::span<const TailVerdict> verdicts, std::span<const Sample> samples) {
    if (verdicts.empty()) {
        throw DataError("no verdicts to evaluate");
    }
    const SampleIndex index(samples);
    std::size_t hits = 0;
    for (const auto& v : verdicts) {
        const Sample* s = index.find(v.sample_id);
        if (s == nullptr) {
            throw DataError("verdict for unknown sample '" + v.sample_id + "'");
        }
        if (!s->tail_label) {
            throw DataError("sample '" + v.sample_id + "' has no tail label");
        }
        if ((*s->tail_label == 1) == v.is_tail) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(verdicts.size());
}

std::string serialize_classifier(const BaselineClassifier& classifier) {
    ordered_json j;
    j["alpha"] = classifier.smoothing_alpha();
    j["priors"] = {classifier.class_priors()[0], classifier.class_priors()[1]};
    j["class_sizes"] = {classifier.class_sizes()[0], classifier.class_sizes()[1]};
    ordered_json vocab = ordered_json::object();
    for (const auto& [tok, c] : classifier.vocabulary()) {
        vocab[tok] = {c.head, c.tail};
    }
    j["vocabulary"] = std::move(vocab);
    return j.dump() + "\n";
}

BaselineClassifier parse_classifier(std::string_view json_text) {
    try {
        const auto j = nlohmann::json::parse(json_text);
        std::map<std::string, BaselineClassifier::TokenCounts> vocab;
        for (const auto& [tok, c] : j.at("vocabulary").items()) {
            vocab[tok] = {c.at(0).get<std::uint64_t>(), c.at(1).get<std::uint64_t>()};
        }
        const auto sizes = j.at("class_sizes");
        return BaselineClassifier(std::move(vocab),
                                  {sizes.at(0).get<std::uint64_t>(), sizes.at(1).get<std::uint64_t>()},
                                  j.at("alpha").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("<classifier>", 1, std::string("bad classifier document: ") + e.what());
    }
}

void save_classifier(const std::filesystem::path& path, const BaselineClassifier& classifier) {
    io::write_file_atomic(path, serialize_classifier(classifier));
}

BaselineClassifier load_classifier(const std::filesystem::path& path) {
    return parse_classifier(io::read_file(path));
}

}  // namespace seqvote
