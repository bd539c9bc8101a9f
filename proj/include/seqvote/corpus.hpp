// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seqvote {

// A library method identified as "Class.method". Constructors use the
// JVM spelling "Class.<init>".
class ApiMethod {
public:
    // Throws ConfigError if either part is empty or contains a dot or
    // whitespace.
    ApiMethod(std::string class_name, std::string method_name);

    const std::string& class_name() const noexcept { return class_name_; }
    const std::string& method_name() const noexcept { return method_name_; }
    const std::string& canonical() const noexcept { return canonical_; }

    friend bool operator==(const ApiMethod& a, const ApiMethod& b) noexcept {
        return a.canonical_ == b.canonical_;
    }
    friend std::strong_ordering operator<=>(const ApiMethod& a, const ApiMethod& b) noexcept {
        return a.canonical_ <=> b.canonical_;
    }

private:
    std::string class_name_;
    std::string method_name_;
    std::string canonical_;
};

// Ordered list of invocations. Equality is positional on canonical forms.
using ApiSequence = std::vector<ApiMethod>;

std::string join_sequence(const ApiSequence& seq, std::string_view sep = " ");
std::vector<std::string> to_strings(const ApiSequence& seq);

struct Sample {
    std::string sample_id;
    std::string query;
    std::string context;
    ApiSequence ground_truth;
    std::optional<int> tail_label;  // 0 = head, 1 = tail
};

struct PredictionRecord {
    std::string sample_id;
    std::string model_id;
    std::string raw_output;
    ApiSequence parsed;
};

// Delimiter set used to split raw model output into candidate tokens.
// The default is ASCII whitespace plus comma.
struct Tokenizer {
    std::string delimiters = " \t\n\r\f\v,";
};

// Trims whitespace and trailing "()" / ";" characters, then splits at the
// last dot. Package qualifiers are dropped, so "java.util.List.add"
// becomes List.add. Returns nullopt for anything that is not a method
// token.
std::optional<ApiMethod> normalize_method(std::string_view token);

// Never throws. Tokens that fail normalize_method are skipped.
ApiSequence parse_api_sequence(std::string_view raw_output, const Tokenizer& tokenizer = {});

// Reads the dataset wire format (JSON lines). Empty ground truths are
// rejected unless allow_empty_ground_truth is set.
std::vector<Sample> load_samples(const std::filesystem::path& path,
                                 bool allow_empty_ground_truth = false);
void write_samples(const std::filesystem::path& path, std::span<const Sample> samples);

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               std::string_view expected_model,
                                               const Tokenizer& tokenizer = {});
void write_predictions(const std::filesystem::path& path,
                       std::span<const PredictionRecord> records);

// Line-level codecs, shared by the loaders and by tests.
std::string sample_to_json_line(const Sample& sample);
std::string prediction_to_json_line(const PredictionRecord& record);

// Lookup by sample_id over a sample list that outlives the index.
class SampleIndex {
public:
    explicit SampleIndex(std::span<const Sample> samples);

    const Sample* find(std::string_view id) const;
    // Throws DataError naming the id when absent.
    const Sample& at(std::string_view id) const;
    std::size_t size() const noexcept { return by_id_.size(); }

private:
    std::unordered_map<std::string, const Sample*> by_id_;
};

}  // namespace seqvote

template <>
struct std::hash<seqvote::ApiMethod> {
    std::size_t operator()(const seqvote::ApiMethod& m) const noexcept {
        return std::hash<std::string>{}(m.canonical());
    }
};
