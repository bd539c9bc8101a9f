// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqvote/corpus.hpp"
#include "seqvote/profile.hpp"

namespace seqvote::synth {

struct SynthConfig {
    std::size_t num_methods = 1000;
    std::size_t num_samples = 2000;
    double zipf_exponent = 1.1;
    std::size_t min_length = 1;
    std::size_t max_length = 5;
    double p = 50.0;
    std::uint64_t seed = 42;
    // When set, exactly round(tail_share * num_samples) samples take all
    // their methods from the expected tail region and the rest from the
    // head region, apportioned by Zipf weight. Regions come from the Zipf
    // mass at threshold p. The empirical flags reproduce the regions as
    // long as head occurrences stay within p percent of the total, which
    // holds exactly for fixed-length sequences with tail_share = 1 - p/100.
    std::optional<double> tail_share;

    void validate() const;
};

enum class ErrorMode { SubstituteRandom, DropMethod, Hallucinate };

std::string_view to_string(ErrorMode mode);
ErrorMode parse_error_mode(std::string_view text);

struct SyntheticModelSpec {
    std::string model_id;
    double head_accuracy = 0.5;
    double tail_accuracy = 0.5;
    ErrorMode error_mode = ErrorMode::SubstituteRandom;
    // Models in the same group share their correct/incorrect coin.
    std::optional<std::string> correlation_group;

    void validate() const;
};

// Normalized Zipf probabilities for ranks 1..num_methods.
std::vector<double> zipf_probabilities(std::size_t num_methods, double exponent);

// Method name for a 1-based frequency rank.
ApiMethod method_for_rank(std::size_t rank, std::size_t num_methods);

std::vector<Sample> generate_corpus(const SynthConfig& config);

// For every sample, emits the ground truth with probability head_accuracy
// (all-head sample) or tail_accuracy (any tail method), otherwise a
// corrupted copy that never equals the ground truth.
std::vector<PredictionRecord> simulate_model(const SyntheticModelSpec& spec,
                                             std::span<const Sample> samples, const FlagMap& flags,
                                             std::uint64_t seed, unsigned workers = 1);

// Seed derivation shared by the generators. Stable across platforms.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);
double uniform01(std::mt19937_64& rng);
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

}  // namespace seqvote::synth
