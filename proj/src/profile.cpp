// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include "seqvote/profile.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "seqvote/error.hpp"
#include "seqvote/io.hpp"
#include "seqvote/parallel.hpp"

namespace seqvote {

using ordered_json = nlohmann::ordered_json;

char to_char(TailFlag flag) { return flag == TailFlag::Head ? 'H' : 'T'; }

ModelProfile::ModelProfile(std::map<ApiMethod, ProfileEntry> entries, double tail_threshold_p,
                           std::vector<std::string> model_ids)
    : entries_(std::move(entries)),
      tail_threshold_p_(tail_threshold_p),
      model_ids_(std::move(model_ids)) {
    for (const auto& [method, entry] : entries_) {
        total_frequency_ += entry.frequency;
        for (const auto& [model, stats] : entry.per_model) {
            if (stats.correct > stats.recommendations) {
                throw DataError("profile entry " + method.canonical() + " has correct > rec for " +
                                model);
            }
        }
    }
}

const ProfileEntry* ModelProfile::find(const ApiMethod& method) const {
    auto it = entries_.find(method);
    return it == entries_.end() ? nullptr : &it->second;
}

bool ModelProfile::has_model(std::string_view model_id) const {
    return std::find(model_ids_.begin(), model_ids_.end(), model_id) != model_ids_.end();
}

FlagMap ModelProfile::flags() const {
    FlagMap out;
    for (const auto& [method, entry] : entries_) {
        out.emplace(method, entry.tail_flag);
    }
    return out;
}

FrequencyMap count_frequencies(std::span<const Sample> samples) {
    if (samples.empty()) {
        throw DataError("cannot build frequencies from an empty sample list");
    }
    FrequencyMap counts;
    for (const auto& s : samples) {
        if (s.ground_truth.empty()) {
            throw DataError("sample '" + s.sample_id + "' has an empty ground truth");
        }
        for (const auto& m : s.ground_truth) {
            ++counts[m];
        }
    }
    return counts;
}

FlagMap assign_tail_flags(const FrequencyMap& counts, double p) {
    if (!(p > 0.0 && p <= 100.0)) {
        throw ConfigError("tail threshold p must lie in (0, 100], got " + std::to_string(p));
    }
    std::vector<std::pair<const ApiMethod*, std::uint64_t>> order;
    order.reserve(counts.size());
    std::uint64_t total = 0;
    for (const auto& [m, n] : counts) {
        order.emplace_back(&m, n);
        total += n;
    }
    // counts is already sorted by name, so a stable sort on frequency alone
    // yields the (frequency desc, name asc) order.
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    FlagMap flags;
    std::uint64_t cumulative = 0;
    const double budget = p * static_cast<double>(total);
    for (const auto& [m, n] : order) {
        cumulative += n;
        const bool head = n > 0 && static_cast<double>(cumulative) * 100.0 <= budget;
        flags.emplace(*m, head ? TailFlag::Head : TailFlag::Tail);
    }
    return flags;
}

namespace {

ModelStatsMap accumulate_range(std::span<const PredictionRecord> predictions,
                               const SampleIndex& samples) {
    ModelStatsMap out;
    for (const auto& rec : predictions) {
        const Sample& sample = samples.at(rec.sample_id);
        if (rec.parsed.empty()) {
            continue;
        }
        std::unordered_set<ApiMethod> truth(sample.ground_truth.begin(), sample.ground_truth.end());
        auto& per_method = out[rec.model_id];
        for (const auto& m : rec.parsed) {
            auto& stats = per_method[m];
            ++stats.recommendations;
            if (truth.contains(m)) {
                ++stats.correct;
            }
        }
    }
    return out;
}

void merge_into(ModelStatsMap& into, const ModelStatsMap& from) {
    for (const auto& [model, methods] : from) {
        auto& dst = into[model];
        for (const auto& [m, stats] : methods) {
            dst[m] += stats;
        }
    }
}

}  // namespace

ModelStatsMap accumulate_model_stats(std::span<const PredictionRecord> predictions,
                                     const SampleIndex& samples, unsigned workers) {
    std::vector<ModelStatsMap> partial(std::max(1u, workers));
    const std::size_t used =
        for_each_chunk(predictions.size(), workers, [&](std::size_t c, std::size_t b, std::size_t e) {
            partial[c] = accumulate_range(predictions.subspan(b, e - b), samples);
        });
    ModelStatsMap merged;
    for (std::size_t c = 0; c < used; ++c) {
        merge_into(merged, partial[c]);
    }
    return merged;
}

ModelProfile build_profile(std::span<const Sample> samples,
                           std::span<const ModelPredictions> predictions, double p,
                           unsigned workers) {
    if (predictions.empty()) {
        throw ConfigError("profile requires predictions from at least one model");
    }
    const FrequencyMap counts = count_frequencies(samples);
    const FlagMap flags = assign_tail_flags(counts, p);
    const SampleIndex index(samples);

    std::vector<std::string> model_ids;
    std::set<std::string> seen_models;
    ModelStatsMap stats;
    for (const auto& mp : predictions) {
        if (!seen_models.insert(mp.model_id).second) {
            throw ConfigError("model '" + mp.model_id + "' listed twice");
        }
        for (const auto& rec : mp.records) {
            if (rec.model_id != mp.model_id) {
                throw DataError("record for model '" + rec.model_id + "' found in predictions of '" +
                                mp.model_id + "'");
            }
        }
        model_ids.push_back(mp.model_id);
        merge_into(stats, accumulate_model_stats(mp.records, index, workers));
    }

    std::map<ApiMethod, ProfileEntry> entries;
    auto entry_for = [&](const ApiMethod& m) -> ProfileEntry& {
        auto it = entries.find(m);
        if (it == entries.end()) {
            ProfileEntry e{m, 0, TailFlag::Tail, {}};
            for (const auto& id : model_ids) {
                e.per_model.emplace(id, ModelStats{});
            }
            it = entries.emplace(m, std::move(e)).first;
        }
        return it->second;
    };
    for (const auto& [m, n] : counts) {
        auto& e = entry_for(m);
        e.frequency = n;
        e.tail_flag = flags.at(m);
    }
    for (const auto& [model, methods] : stats) {
        for (const auto& [m, s] : methods) {
            entry_for(m).per_model[model] = s;
        }
    }
    return ModelProfile(std::move(entries), p, std::move(model_ids));
}

double method_accuracy(const ModelProfile& profile, std::string_view model_id,
                       const ApiMethod& method) {
    if (!profile.has_model(model_id)) {
        throw ConfigError("model '" + std::string(model_id) + "' is not in the profile");
    }
    const ProfileEntry* e = profile.find(method);
    if (e == nullptr) {
        return 0.0;
    }
    auto it = e->per_model.find(std::string(model_id));
    if (it == e->per_model.end() || it->second.recommendations == 0) {
        return 0.0;
    }
    return static_cast<double>(it->second.correct) /
           static_cast<double>(it->second.recommendations);
}

// --- persistence ---------------------------------------------------------

std::string serialize_profile(const ModelProfile& profile) {
    std::string out;
    ordered_json header;
    header["n"] = profile.total_frequency();
    header["p"] = profile.tail_threshold_p();
    header["models"] = profile.model_ids();
    out += header.dump();
    out += '\n';

    std::vector<const ProfileEntry*> order;
    for (const auto& [m, e] : profile.entries()) {
        order.push_back(&e);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto* a, const auto* b) { return a->frequency > b->frequency; });
    for (const auto* e : order) {
        ordered_json line;
        line["method"] = e->method.canonical();
        line["frequency"] = e->frequency;
        line["tail"] = std::string(1, to_char(e->tail_flag));
        ordered_json stats = ordered_json::object();
        for (const auto& id : profile.model_ids()) {
            ModelStats s;
            if (auto it = e->per_model.find(id); it != e->per_model.end()) {
                s = it->second;
            }
            stats[id] = {{"rec", s.recommendations}, {"correct", s.correct}};
        }
        line["stats"] = std::move(stats);
        out += line.dump();
        out += '\n';
    }
    return out;
}

ModelProfile parse_profile(std::string_view text, const std::string& source) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    std::uint64_t n = 0;
    double p = 0.0;
    std::vector<std::string> models;
    std::map<ApiMethod, ProfileEntry> entries;

    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, number, std::string("invalid JSON: ") + e.what());
        }
        try {
            if (!have_header) {
                n = j.at("n").get<std::uint64_t>();
                p = j.at("p").get<double>();
                models = j.at("models").get<std::vector<std::string>>();
                have_header = true;
                continue;
            }
            auto method = normalize_method(j.at("method").get<std::string>());
            if (!method) {
                throw ParseError(source, number, "invalid method name");
            }
            const auto tail = j.at("tail").get<std::string>();
            if (tail != "H" && tail != "T") {
                throw ParseError(source, number, "tail must be \"H\" or \"T\"");
            }
            ProfileEntry e{*method, j.at("frequency").get<std::uint64_t>(),
                           tail == "H" ? TailFlag::Head : TailFlag::Tail, {}};
            for (const auto& id : models) {
                e.per_model.emplace(id, ModelStats{});
            }
            for (const auto& [model, s] : j.at("stats").items()) {
                if (std::find(models.begin(), models.end(), model) == models.end()) {
                    throw ParseError(source, number, "stats for undeclared model '" + model + "'");
                }
                e.per_model[model] = {s.at("rec").get<std::uint64_t>(),
                                      s.at("correct").get<std::uint64_t>()};
            }
            if (!entries.emplace(*method, std::move(e)).second) {
                throw ParseError(source, number, "duplicate method " + method->canonical());
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source, number, std::string("bad profile record: ") + e.what());
        }
    }
    if (!have_header) {
        throw ParseError(source, number, "missing profile header");
    }
    ModelProfile profile(std::move(entries), p, std::move(models));
    if (profile.total_frequency() != n) {
        throw ParseError(source, number, "header n does not equal the sum of frequencies");
    }
    return profile;
}

void save_profile(const std::filesystem::path& path, const ModelProfile& profile) {
    io::write_file_atomic(path, serialize_profile(profile));
}

ModelProfile load_profile(const std::filesystem::path& path) {
    return parse_profile(io::read_file(path), path.string());
}

}  // namespace seqvote
