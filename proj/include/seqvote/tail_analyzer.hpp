// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqvote/corpus.hpp"
#include "seqvote/profile.hpp"

namespace seqvote {

enum class VerdictSource { Baseline, External };

struct TailVerdict {
    std::string sample_id;
    bool is_tail = false;
    VerdictSource source = VerdictSource::External;
};

// 1 iff some ground-truth method is flagged T or is missing from flags.
int derive_tail_label(const Sample& sample, const FlagMap& flags);
int derive_tail_label(const Sample& sample, const ModelProfile& profile);

// Returns a copy of samples with tail_label set from flags.
std::vector<Sample> label_samples(std::span<const Sample> samples, const FlagMap& flags);

// Lowercased word pieces of text. Splits on non-alphanumerics and on
// camelCase boundaries ("getHTTPResponse" -> get, http, response).
std::vector<std::string> tokenize_text(std::string_view text);

// Two-class multinomial token model with additive smoothing. Index 0 is
// head, index 1 is tail.
class BaselineClassifier {
public:
    struct TokenCounts {
        std::uint64_t head = 0;
        std::uint64_t tail = 0;
        friend bool operator==(const TokenCounts&, const TokenCounts&) = default;
    };

    BaselineClassifier(std::map<std::string, TokenCounts> vocabulary,
                       std::array<std::uint64_t, 2> class_sizes, double smoothing_alpha);

    const std::map<std::string, TokenCounts>& vocabulary() const noexcept { return vocabulary_; }
    const std::array<std::uint64_t, 2>& class_sizes() const noexcept { return class_sizes_; }
    std::array<double, 2> class_priors() const noexcept { return priors_; }
    double smoothing_alpha() const noexcept { return alpha_; }

    // log P(class) + sum over in-vocabulary tokens of log P(token | class).
    // Tokens never seen in training contribute nothing to either class.
    std::array<double, 2> log_scores(std::string_view text) const;

    friend bool operator==(const BaselineClassifier&, const BaselineClassifier&) = default;

private:
    std::map<std::string, TokenCounts> vocabulary_;
    std::array<std::uint64_t, 2> class_sizes_{};
    std::array<std::uint64_t, 2> token_totals_{};
    std::array<double, 2> priors_{};
    double alpha_ = 1.0;
};

// Uses each sample's tail_label. Throws DataError when a sample is
// unlabeled or only one class is present, ConfigError when alpha <= 0.
BaselineClassifier train_baseline(std::span<const Sample> samples, double smoothing_alpha = 1.0);

// Exact score ties resolve to tail.
TailVerdict classify(const BaselineClassifier& classifier, const Sample& sample);
std::vector<TailVerdict> classify_all(const BaselineClassifier& classifier,
                                      std::span<const Sample> samples, unsigned workers = 1);

std::vector<TailVerdict> load_external_verdicts(const std::filesystem::path& path);
void write_verdicts(const std::filesystem::path& path, std::span<const TailVerdict> verdicts);

// Fraction of verdicts that agree with their sample's tail_label.
double evaluate_classifier(std::span<const TailVerdict> verdicts, std::span<const Sample> samples);

std::string serialize_classifier(const BaselineClassifier& classifier);
BaselineClassifier parse_classifier(std::string_view json_text);
void save_classifier(const std::filesystem::path& path, const BaselineClassifier& classifier);
BaselineClassifier load_classifier(const std::filesystem::path& path);

}  // namespace seqvote
