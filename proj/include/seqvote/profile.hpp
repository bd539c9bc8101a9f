// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqvote/corpus.hpp"

namespace seqvote {

enum class TailFlag { Head, Tail };

char to_char(TailFlag flag);

struct ModelStats {
    std::uint64_t recommendations = 0;
    std::uint64_t correct = 0;

    ModelStats& operator+=(const ModelStats& other) {
        recommendations += other.recommendations;
        correct += other.correct;
        return *this;
    }
    friend bool operator==(const ModelStats&, const ModelStats&) = default;
};

using FrequencyMap = std::map<ApiMethod, std::uint64_t>;
using FlagMap = std::map<ApiMethod, TailFlag>;
// model_id -> method -> counters.
using ModelStatsMap = std::map<std::string, std::map<ApiMethod, ModelStats>>;

struct ProfileEntry {
    ApiMethod method;
    std::uint64_t frequency = 0;
    TailFlag tail_flag = TailFlag::Tail;
    std::map<std::string, ModelStats> per_model;

    friend bool operator==(const ProfileEntry&, const ProfileEntry&) = default;
};

// Per-method ledger built from a profiling dataset: ground-truth usage
// frequency, head/tail flag, and each model's recommendation counters.
class ModelProfile {
public:
    ModelProfile() = default;
    ModelProfile(std::map<ApiMethod, ProfileEntry> entries, double tail_threshold_p,
                 std::vector<std::string> model_ids);

    const std::map<ApiMethod, ProfileEntry>& entries() const noexcept { return entries_; }
    std::uint64_t total_frequency() const noexcept { return total_frequency_; }
    double tail_threshold_p() const noexcept { return tail_threshold_p_; }
    const std::vector<std::string>& model_ids() const noexcept { return model_ids_; }

    const ProfileEntry* find(const ApiMethod& method) const;
    bool has_model(std::string_view model_id) const;
    FlagMap flags() const;

    friend bool operator==(const ModelProfile&, const ModelProfile&) = default;

private:
    std::map<ApiMethod, ProfileEntry> entries_;
    std::uint64_t total_frequency_ = 0;
    double tail_threshold_p_ = 50.0;
    std::vector<std::string> model_ids_;
};

struct ModelPredictions {
    std::string model_id;
    std::vector<PredictionRecord> records;
};

// Counts every occurrence of every method across all ground truths.
// Throws DataError on an empty sample list or an empty ground truth.
FrequencyMap count_frequencies(std::span<const Sample> samples);

// Methods sorted by (frequency desc, canonical asc); a method is head while
// the running sum stays within p percent of the total mass. Throws
// ConfigError unless 0 < p <= 100.
FlagMap assign_tail_flags(const FrequencyMap& counts, double p);

// A recommendation of m counts as correct when m occurs anywhere in the
// sample's ground truth. Work is split over `workers` threads and merged
// by addition.
ModelStatsMap accumulate_model_stats(std::span<const PredictionRecord> predictions,
                                     const SampleIndex& samples, unsigned workers = 1);

ModelProfile build_profile(std::span<const Sample> samples,
                           std::span<const ModelPredictions> predictions, double p,
                           unsigned workers = 1);

// correct / recommendations, 0 when unrecorded. Throws ConfigError for a
// model the profile was not built with.
double method_accuracy(const ModelProfile& profile, std::string_view model_id,
                       const ApiMethod& method);

// Header line followed by one line per method, in (frequency desc,
// canonical asc) order.
std::string serialize_profile(const ModelProfile& profile);
ModelProfile parse_profile(std::string_view text, const std::string& source = "<profile>");
void save_profile(const std::filesystem::path& path, const ModelProfile& profile);
ModelProfile load_profile(const std::filesystem::path& path);

}  // namespace seqvote
