// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include "seqvote/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>
#include <utility>

#include <nlohmann/json.hpp>

#include "seqvote/error.hpp"
#include "seqvote/io.hpp"

namespace seqvote {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool valid_part(std::string_view part) {
    if (part.empty()) {
        return false;
    }
    return std::none_of(part.begin(), part.end(),
                        [](char c) { return is_space(c) || c == '.' || c == ','; });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

ApiMethod::ApiMethod(std::string class_name, std::string method_name)
    : class_name_(std::move(class_name)), method_name_(std::move(method_name)) {
    if (!valid_part(class_name_) || !valid_part(method_name_)) {
        throw ConfigError("invalid API method parts: '" + class_name_ + "' / '" + method_name_ +
                          "'");
    }
    canonical_ = class_name_ + "." + method_name_;
}

std::string join_sequence(const ApiSequence& seq, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i != 0) {
            out += sep;
        }
        out += seq[i].canonical();
    }
    return out;
}

std::vector<std::string> to_strings(const ApiSequence& seq) {
    std::vector<std::string> out;
    out.reserve(seq.size());
    for (const auto& m : seq) {
        out.push_back(m.canonical());
    }
    return out;
}

std::optional<ApiMethod> normalize_method(std::string_view token) {
    std::string_view s = trim(token);
    while (!s.empty() && (s.back() == '(' || s.back() == ')' || s.back() == ';')) {
        s.remove_suffix(1);
        s = trim(s);
    }
    const auto last = s.rfind('.');
    if (last == std::string_view::npos) {
        return std::nullopt;
    }
    std::string_view method = s.substr(last + 1);
    std::string_view prefix = s.substr(0, last);
    const auto prev = prefix.rfind('.');
    std::string_view cls = prev == std::string_view::npos ? prefix : prefix.substr(prev + 1);
    if (!valid_part(cls) || !valid_part(method)) {
        return std::nullopt;
    }
    return ApiMethod(std::string(cls), std::string(method));
}

ApiSequence parse_api_sequence(std::string_view raw_output, const Tokenizer& tokenizer) {
    ApiSequence out;
    std::size_t pos = 0;
    const std::string_view delims = tokenizer.delimiters;
    while (pos < raw_output.size()) {
        const auto start = raw_output.find_first_not_of(delims, pos);
        if (start == std::string_view::npos) {
            break;
        }
        auto end = raw_output.find_first_of(delims, start);
        if (end == std::string_view::npos) {
            end = raw_output.size();
        }
        if (auto m = normalize_method(raw_output.substr(start, end - start))) {
            out.push_back(std::move(*m));
        }
        pos = end;
    }
    return out;
}

// --- wire format ---------------------------------------------------------

std::string sample_to_json_line(const Sample& sample) {
    ordered_json j;
    j["id"] = sample.sample_id;
    j["query"] = sample.query;
    j["context"] = sample.context;
    j["ground_truth"] = to_strings(sample.ground_truth);
    if (sample.tail_label) {
        j["tail_label"] = *sample.tail_label;
    } else {
        j["tail_label"] = nullptr;
    }
    return j.dump();
}

std::string prediction_to_json_line(const PredictionRecord& record) {
    ordered_json j;
    j["id"] = record.sample_id;
    j["model"] = record.model_id;
    j["output"] = record.raw_output;
    return j.dump();
}

namespace {

nlohmann::json parse_line(const std::string& file, std::size_t line, std::string_view text) {
    try {
        auto j = nlohmann::json::parse(text);
        if (!j.is_object()) {
            throw ParseError(file, line, "record is not a JSON object");
        }
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(file, line, std::string("invalid JSON: ") + e.what());
    }
}

std::string require_string(const nlohmann::json& j, const char* key, const std::string& file,
                           std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ParseError(file, line, std::string("missing field '") + key + "'");
    }
    if (!it->is_string()) {
        throw ParseError(file, line, std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

std::string optional_string(const nlohmann::json& j, const char* key, const std::string& file,
                            std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return {};
    }
    if (!it->is_string()) {
        throw ParseError(file, line, std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

}  // namespace

std::vector<Sample> load_samples(const std::filesystem::path& path,
                                 bool allow_empty_ground_truth) {
    const std::string file = path.string();
    std::vector<Sample> samples;
    std::unordered_set<std::string> seen;
    io::for_each_line(path, [&](std::size_t line, std::string_view text) {
        const auto j = parse_line(file, line, text);
        Sample s;
        s.sample_id = require_string(j, "id", file, line);
        s.query = optional_string(j, "query", file, line);
        s.context = optional_string(j, "context", file, line);

        auto gt = j.find("ground_truth");
        if (gt == j.end() || gt->is_null()) {
            throw ParseError(file, line, "missing field 'ground_truth'");
        }
        if (!gt->is_array()) {
            throw ParseError(file, line, "field 'ground_truth' must be an array of strings");
        }
        for (const auto& item : *gt) {
            if (!item.is_string()) {
                throw ParseError(file, line, "ground_truth entries must be strings");
            }
            auto m = normalize_method(item.get<std::string>());
            if (!m) {
                throw ParseError(file, line,
                                 "ground_truth entry '" + item.get<std::string>() +
                                     "' is not a Class.method token");
            }
            s.ground_truth.push_back(std::move(*m));
        }
        if (s.ground_truth.empty() && !allow_empty_ground_truth) {
            throw ParseError(file, line, "empty ground_truth");
        }

        if (auto tl = j.find("tail_label"); tl != j.end() && !tl->is_null()) {
            if (!tl->is_number_integer() || (tl->get<int>() != 0 && tl->get<int>() != 1)) {
                throw ParseError(file, line, "tail_label must be 0, 1 or null");
            }
            s.tail_label = tl->get<int>();
        }

        if (!seen.insert(s.sample_id).second) {
            throw DataError(file + ":" + std::to_string(line) + ": duplicate sample id '" +
                            s.sample_id + "'");
        }
        samples.push_back(std::move(s));
    });
    return samples;
}

void write_samples(const std::filesystem::path& path, std::span<const Sample> samples) {
    std::string out;
    for (const auto& s : samples) {
        out += sample_to_json_line(s);
        out += '\n';
    }
    io::write_file_atomic(path, out);
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               std::string_view expected_model,
                                               const Tokenizer& tokenizer) {
    const std::string file = path.string();
    std::vector<PredictionRecord> records;
    std::set<std::pair<std::string, std::string>> seen;
    io::for_each_line(path, [&](std::size_t line, std::string_view text) {
        const auto j = parse_line(file, line, text);
        PredictionRecord r;
        r.sample_id = require_string(j, "id", file, line);
        r.model_id = require_string(j, "model", file, line);
        r.raw_output = require_string(j, "output", file, line);
        if (r.model_id != expected_model) {
            throw DataError(file + ":" + std::to_string(line) + ": model '" + r.model_id +
                            "' does not match expected model '" + std::string(expected_model) +
                            "'");
        }
        if (!seen.emplace(r.sample_id, r.model_id).second) {
            throw DataError(file + ":" + std::to_string(line) + ": duplicate prediction for (" +
                            r.sample_id + ", " + r.model_id + ")");
        }
        r.parsed = parse_api_sequence(r.raw_output, tokenizer);
        records.push_back(std::move(r));
    });
    return records;
}

void write_predictions(const std::filesystem::path& path,
                       std::span<const PredictionRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += prediction_to_json_line(r);
        out += '\n';
    }
    io::write_file_atomic(path, out);
}

SampleIndex::SampleIndex(std::span<const Sample> samples) {
    by_id_.reserve(samples.size());
    for (const auto& s : samples) {
        if (!by_id_.emplace(s.sample_id, &s).second) {
            throw DataError("duplicate sample id '" + s.sample_id + "'");
        }
    }
}

const Sample* SampleIndex::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : it->second;
}

const Sample& SampleIndex::at(std::string_view id) const {
    if (const auto* s = find(id)) {
        return *s;
    }
    throw DataError("prediction references unknown sample id '" + std::string(id) + "'");
}

}  // namespace seqvote
