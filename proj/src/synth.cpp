// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include "seqvote/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "seqvote/error.hpp"
#include "seqvote/io.hpp"
#include "seqvote/parallel.hpp"
#include "seqvote/tail_analyzer.hpp"

namespace seqvote::synth {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    return splitmix64(seed ^ io::fnv1a64(tag));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) + index);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

void SynthConfig::validate() const {
    if (num_methods < 2) throw ConfigError("num_methods must be at least 2");
    if (num_samples < 1) throw ConfigError("num_samples must be at least 1");
    if (!(zipf_exponent > 0.0) || !std::isfinite(zipf_exponent)) {
        throw ConfigError("zipf_exponent must be positive");
    }
    if (min_length < 1 || max_length < min_length) {
        throw ConfigError("sequence length range must satisfy 1 <= min <= max");
    }
    if (!(p > 0.0 && p <= 100.0)) throw ConfigError("p must lie in (0, 100]");
    if (tail_share && !(*tail_share >= 0.0 && *tail_share <= 1.0)) {
        throw ConfigError("tail_share must lie in [0, 1]");
    }
}

std::string_view to_string(ErrorMode mode) {
    switch (mode) {
        case ErrorMode::SubstituteRandom: return "SubstituteRandom";
        case ErrorMode::DropMethod: return "DropMethod";
        case ErrorMode::Hallucinate: return "Hallucinate";
    }
    return "?";
}

ErrorMode parse_error_mode(std::string_view text) {
    std::string f;
    for (char c : text) {
        if (c != '-' && c != '_') {
            f.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (f == "substituterandom" || f == "substitute") return ErrorMode::SubstituteRandom;
    if (f == "dropmethod" || f == "drop") return ErrorMode::DropMethod;
    if (f == "hallucinate") return ErrorMode::Hallucinate;
    throw ConfigError("unknown error mode '" + std::string(text) + "'");
}

void SyntheticModelSpec::validate() const {
    if (model_id.empty()) throw ConfigError("synthetic model needs an id");
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!rate_ok(head_accuracy) || !rate_ok(tail_accuracy)) {
        throw ConfigError("accuracies of '" + model_id + "' must lie in [0, 1]");
    }
}

std::vector<double> zipf_probabilities(std::size_t num_methods, double exponent) {
    std::vector<double> w(num_methods);
    for (std::size_t r = 1; r <= num_methods; ++r) {
        w[r - 1] = std::pow(static_cast<double>(r), -exponent);
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) {
        x /= total;
    }
    return w;
}

ApiMethod method_for_rank(std::size_t rank, std::size_t num_methods) {
    const int width = static_cast<int>(std::to_string(num_methods).size());
    char cls[48];
    char fn[48];
    std::snprintf(cls, sizeof cls, "Type%0*zu", width, rank);
    std::snprintf(fn, sizeof fn, "op%0*zu", width, rank);
    return ApiMethod(cls, fn);
}

namespace {

// Inverse-CDF sampler over a subrange of ranks [first, last).
class RankSampler {
public:
    RankSampler(const std::vector<double>& probs, std::size_t first, std::size_t last)
        : first_(first) {
        cdf_.reserve(last - first);
        double acc = 0.0;
        for (std::size_t i = first; i < last; ++i) {
            acc += probs[i];
            cdf_.push_back(acc);
        }
    }

    bool empty() const noexcept { return cdf_.empty(); }

    // Returns a 0-based rank.
    std::size_t draw(std::mt19937_64& rng) const {
        const double u = uniform01(rng) * cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) {
            --it;
        }
        return first_ + static_cast<std::size_t>(it - cdf_.begin());
    }

private:
    std::size_t first_;
    std::vector<double> cdf_;
};

constexpr const char* kFiller[] = {"read", "the", "file", "parse", "value", "list",
                                   "convert", "string", "buffer", "create", "loop", "check"};

std::string make_query(const ApiSequence& gt, std::mt19937_64& rng) {
    std::string q = "how to";
    const std::size_t words = 2 + uniform_index(rng, 3);
    for (std::size_t w = 0; w < words; ++w) {
        q += ' ';
        q += kFiller[uniform_index(rng, std::size(kFiller))];
    }
    q += " with ";
    q += gt.front().class_name();
    return q;
}

std::string make_context(const ApiSequence& gt, std::mt19937_64& rng) {
    std::string c = "public void run() {";
    for (const auto& m : gt) {
        // Mentions are dropped now and then so the text is not a perfect
        // copy of the answer.
        if (uniform01(rng) < 0.8) {
            c += " " + m.class_name() + " x = new " + m.class_name() + "();";
        } else {
            c += std::string(" ") + kFiller[uniform_index(rng, std::size(kFiller))] + "();";
        }
    }
    c += " }";
    return c;
}

// Largest-remainder split of slots over ranks [begin, end) by weight,
// returned as a shuffled list of ranks.
std::vector<std::size_t> apportion(const std::vector<double>& probs, std::size_t begin,
                                   std::size_t end, std::size_t slots, std::mt19937_64& rng) {
    std::vector<std::size_t> pool;
    if (slots == 0 || begin == end) return pool;
    const double mass = std::accumulate(probs.begin() + begin, probs.begin() + end, 0.0);
    std::vector<std::size_t> counts(end - begin);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t r = begin; r < end; ++r) {
        const double exact = probs[r] / mass * static_cast<double>(slots);
        counts[r - begin] = static_cast<std::size_t>(exact);
        assigned += counts[r - begin];
        remainders.emplace_back(exact - static_cast<double>(counts[r - begin]), r);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < slots; ++k, ++assigned) {
        ++counts[remainders[k % remainders.size()].second - begin];
    }
    pool.reserve(slots);
    for (std::size_t r = begin; r < end; ++r) pool.insert(pool.end(), counts[r - begin], r);
    for (std::size_t i = pool.size(); i > 1; --i) {
        std::swap(pool[i - 1], pool[uniform_index(rng, i)]);
    }
    return pool;
}

}  // namespace

std::vector<Sample> generate_corpus(const SynthConfig& config) {
    config.validate();
    const auto probs = zipf_probabilities(config.num_methods, config.zipf_exponent);
    std::vector<ApiMethod> methods;
    methods.reserve(config.num_methods);
    for (std::size_t r = 1; r <= config.num_methods; ++r) {
        methods.push_back(method_for_rank(r, config.num_methods));
    }

    // Expected head region: ranks whose cumulative Zipf mass stays within p.
    std::size_t head_end = 0;
    {
        double acc = 0.0;
        while (head_end < probs.size() && (acc + probs[head_end]) * 100.0 <= config.p) {
            acc += probs[head_end];
            ++head_end;
        }
    }
    const RankSampler full(probs, 0, probs.size());
    const RankSampler head(probs, 0, head_end);
    const RankSampler tail(probs, head_end, probs.size());

    std::mt19937_64 rng(derive_seed(config.seed, "corpus"));
    std::vector<char> is_tail_sample(config.num_samples, 0);
    if (config.tail_share) {
        const auto n_tail =
            static_cast<std::size_t>(std::llround(*config.tail_share * config.num_samples));
        if ((n_tail > 0 && tail.empty()) || (n_tail < config.num_samples && head.empty())) {
            throw ConfigError("tail_share needs non-empty head and tail regions at this p");
        }
        std::vector<std::size_t> order(config.num_samples);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[uniform_index(rng, i)]);
        }
        for (std::size_t i = 0; i < n_tail; ++i) {
            is_tail_sample[order[i]] = 1;
        }
    }

    std::vector<std::size_t> lengths(config.num_samples);
    std::size_t head_slots = 0;
    std::size_t tail_slots = 0;
    for (std::size_t i = 0; i < config.num_samples; ++i) {
        lengths[i] = config.min_length + uniform_index(rng, config.max_length - config.min_length + 1);
        (is_tail_sample[i] ? tail_slots : head_slots) += lengths[i];
    }
    // With a target tail share the per-region occurrences are apportioned
    // to the Zipf weights and shuffled, so the empirical rank order inside
    // each region matches the expected one and boundary methods keep
    // their expected flag.
    std::vector<std::size_t> head_pool;
    std::vector<std::size_t> tail_pool;
    if (config.tail_share) {
        head_pool = apportion(probs, 0, head_end, head_slots, rng);
        tail_pool = apportion(probs, head_end, probs.size(), tail_slots, rng);
    }
    std::size_t head_next = 0;
    std::size_t tail_next = 0;

    const int width = static_cast<int>(std::to_string(config.num_samples).size());
    std::vector<Sample> samples;
    samples.reserve(config.num_samples);
    for (std::size_t i = 0; i < config.num_samples; ++i) {
        const std::size_t len = lengths[i];
        Sample s;
        char id[32];
        std::snprintf(id, sizeof id, "s%0*zu", width, i);
        s.sample_id = id;
        for (std::size_t k = 0; k < len; ++k) {
            std::size_t rank;
            if (!config.tail_share) {
                rank = full.draw(rng);
            } else if (is_tail_sample[i]) {
                rank = tail_pool[tail_next++];
            } else {
                rank = head_pool[head_next++];
            }
            s.ground_truth.push_back(methods[rank]);
        }
        s.query = make_query(s.ground_truth, rng);
        s.context = make_context(s.ground_truth, rng);
        samples.push_back(std::move(s));
    }
    return samples;
}

namespace {

ApiSequence corrupt(const ApiSequence& truth, ErrorMode mode, const std::vector<ApiMethod>& vocab,
                    std::mt19937_64& rng) {
    ApiSequence out = truth;
    if (out.empty()) {
        // Anything non-empty differs from an empty truth.
        out.push_back(ApiMethod("Phantom", "invoke"));
        return out;
    }
    const std::size_t pos = uniform_index(rng, out.size());
    switch (mode) {
        case ErrorMode::SubstituteRandom: {
            auto self = std::lower_bound(vocab.begin(), vocab.end(), out[pos]);
            const bool in_vocab = self != vocab.end() && *self == out[pos];
            const std::size_t choices = vocab.size() - (in_vocab ? 1 : 0);
            if (choices == 0) {
                out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos));
                return out;
            }
            std::size_t pick = uniform_index(rng, choices);
            if (in_vocab && pick >= static_cast<std::size_t>(self - vocab.begin())) {
                ++pick;
            }
            out[pos] = vocab[pick];
            return out;
        }
        case ErrorMode::DropMethod:
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos));
            return out;
        case ErrorMode::Hallucinate:
            out[pos] = ApiMethod("Phantom" + std::to_string(uniform_index(rng, 1000000)),
                                 "invoke" + std::to_string(uniform_index(rng, 100)));
            return out;
    }
    return out;
}

}  // namespace

std::vector<PredictionRecord> simulate_model(const SyntheticModelSpec& spec,
                                             std::span<const Sample> samples, const FlagMap& flags,
                                             std::uint64_t seed, unsigned workers) {
    spec.validate();
    std::vector<ApiMethod> vocab;
    vocab.reserve(flags.size());
    for (const auto& [m, f] : flags) {
        vocab.push_back(m);
    }
    const std::uint64_t model_seed = derive_seed(seed, "model:" + spec.model_id);
    const std::uint64_t coin_seed =
        derive_seed(seed, "coin:" + spec.correlation_group.value_or("model:" + spec.model_id));

    std::vector<PredictionRecord> out(samples.size());
    for_each_chunk(samples.size(), workers, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Sample& s = samples[i];
            std::mt19937_64 coin(derive_seed(coin_seed, static_cast<std::uint64_t>(i)));
            const double rate =
                derive_tail_label(s, flags) == 0 ? spec.head_accuracy : spec.tail_accuracy;
            ApiSequence predicted;
            if (uniform01(coin) < rate) {
                predicted = s.ground_truth;
            } else {
                std::mt19937_64 rng(derive_seed(model_seed, static_cast<std::uint64_t>(i)));
                predicted = corrupt(s.ground_truth, spec.error_mode, vocab, rng);
            }
            PredictionRecord& r = out[i];
            r.sample_id = s.sample_id;
            r.model_id = spec.model_id;
            r.raw_output = join_sequence(predicted);
            r.parsed = parse_api_sequence(r.raw_output);
        }
    });
    return out;
}

}  // namespace seqvote::synth
