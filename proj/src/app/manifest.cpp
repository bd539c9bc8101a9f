// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include <set>

#include "seqvote/app.hpp"
#include "seqvote/error.hpp"
#include "seqvote/io.hpp"

namespace seqvote::app {

using ordered_json = nlohmann::ordered_json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_absolute() || base.empty()) {
        return path.lexically_normal();
    }
    return (base / path).lexically_normal();
}

void reject_unknown_keys(const ordered_json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
std::vector<T> non_empty_list(const ordered_json& j, const char* name) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(std::string("sweep axis '") + name + "' must be a non-empty list");
    }
    return j.get<std::vector<T>>();
}

VerdictKind parse_verdict_kind(const std::string& s) {
    if (s == "none") return VerdictKind::None;
    if (s == "external") return VerdictKind::External;
    if (s == "baseline") return VerdictKind::Baseline;
    if (s == "labels") return VerdictKind::Labels;
    throw ConfigError("verdict_source must be none, external, baseline or labels");
}

std::string verdict_kind_name(VerdictKind k) {
    switch (k) {
        case VerdictKind::None: return "none";
        case VerdictKind::External: return "external";
        case VerdictKind::Baseline: return "baseline";
        case VerdictKind::Labels: return "labels";
    }
    return "none";
}

void parse_config(const ordered_json& c, PipelineConfig& cfg) {
    reject_unknown_keys(c, {"models", "filter", "decision", "theta", "best_model", "tail_analyzer", "p"},
                        "config");
    if (c.contains("models")) cfg.model_ids = c.at("models").get<std::vector<std::string>>();
    if (c.contains("filter")) cfg.filter = parse_filter_kind(c.at("filter").get<std::string>());
    if (c.contains("decision")) cfg.decision = parse_decision_rule(c.at("decision").get<std::string>());
    if (c.contains("theta")) cfg.theta = c.at("theta").get<double>();
    if (c.contains("best_model")) {
        if (c.at("best_model").is_null()) {
            cfg.best_model_id.reset();
        } else {
            cfg.best_model_id = c.at("best_model").get<std::string>();
        }
    }
    if (c.contains("tail_analyzer")) cfg.use_tail_analyzer = c.at("tail_analyzer").get<bool>();
    if (c.contains("p")) cfg.p = c.at("p").get<double>();
}

SweepAxes parse_sweep(const ordered_json& s) {
    reject_unknown_keys(s, {"filter", "decision", "p", "theta", "tail_analyzer"}, "sweep");
    SweepAxes axes;
    if (s.contains("filter")) {
        for (const auto& f : non_empty_list<std::string>(s.at("filter"), "filter")) {
            axes.filters.push_back(parse_filter_kind(f));
        }
    }
    if (s.contains("decision")) {
        for (const auto& d : non_empty_list<std::string>(s.at("decision"), "decision")) {
            axes.decisions.push_back(parse_decision_rule(d));
        }
    }
    if (s.contains("p")) axes.ps = non_empty_list<double>(s.at("p"), "p");
    if (s.contains("theta")) axes.thetas = non_empty_list<double>(s.at("theta"), "theta");
    if (s.contains("tail_analyzer")) {
        axes.gates = non_empty_list<bool>(s.at("tail_analyzer"), "tail_analyzer");
    }
    return axes;
}

void parse_synth(const ordered_json& s, SynthSection& out) {
    reject_unknown_keys(s,
                        {"num_methods", "num_samples", "zipf_exponent", "min_length", "max_length",
                         "p", "seed", "tail_share", "models", "scenario"},
                        "synth");
    auto& c = out.config;
    if (s.contains("num_methods")) c.num_methods = s.at("num_methods").get<std::size_t>();
    if (s.contains("num_samples")) c.num_samples = s.at("num_samples").get<std::size_t>();
    if (s.contains("zipf_exponent")) c.zipf_exponent = s.at("zipf_exponent").get<double>();
    if (s.contains("min_length")) c.min_length = s.at("min_length").get<std::size_t>();
    if (s.contains("max_length")) c.max_length = s.at("max_length").get<std::size_t>();
    if (s.contains("p")) c.p = s.at("p").get<double>();
    if (s.contains("seed")) c.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("tail_share")) {
        if (s.at("tail_share").is_null()) {
            c.tail_share.reset();
        } else {
            c.tail_share = s.at("tail_share").get<double>();
        }
    }
    if (s.contains("models")) {
        out.models.clear();
        for (const auto& m : s.at("models")) {
            reject_unknown_keys(m,
                                {"id", "head_accuracy", "tail_accuracy", "error_mode",
                                 "correlation_group"},
                                "synth model");
            synth::SyntheticModelSpec spec;
            spec.model_id = m.at("id").get<std::string>();
            spec.head_accuracy = m.value("head_accuracy", spec.head_accuracy);
            spec.tail_accuracy = m.value("tail_accuracy", spec.tail_accuracy);
            if (m.contains("error_mode")) {
                spec.error_mode = synth::parse_error_mode(m.at("error_mode").get<std::string>());
            }
            if (m.contains("correlation_group") && !m.at("correlation_group").is_null()) {
                spec.correlation_group = m.at("correlation_group").get<std::string>();
            }
            out.models.push_back(std::move(spec));
        }
    }
}

}  // namespace

void apply_scenario(RunManifest& m, const std::string& scenario) {
    SynthSection s;
    s.scenario = scenario;
    using synth::ErrorMode;
    m.sweep.reset();
    m.config = PipelineConfig{};
    if (scenario == "demo") {
        s.config = synth::SynthConfig{};
        s.config.max_length = 3;
        s.config.tail_share = 0.5;
        s.models = {{"m1", 0.75, 0.25, ErrorMode::SubstituteRandom, std::nullopt},
                    {"m2", 0.70, 0.30, ErrorMode::Hallucinate, std::nullopt},
                    {"m3", 0.65, 0.20, ErrorMode::DropMethod, std::nullopt}};
        m.config.use_tail_analyzer = true;
        SweepAxes axes;
        axes.filters = {FilterKind::None, FilterKind::R, FilterKind::H, FilterKind::RH};
        axes.decisions = {DecisionRule::SimpleRejection, DecisionRule::ScoreBased,
                          DecisionRule::BestModel};
        m.sweep = axes;
        m.evaluate_all = false;
    } else if (scenario == "tail-gate") {
        s.config.num_methods = 1000;
        s.config.num_samples = 20000;
        s.config.min_length = 1;
        s.config.max_length = 1;
        s.config.tail_share = 0.5;
        s.models = {{"m1", 0.60, 0.10, ErrorMode::SubstituteRandom, std::nullopt}};
        SweepAxes axes;
        axes.gates = {false, true};
        m.sweep = axes;
        m.evaluate_all = true;
    } else if (scenario == "amplification") {
        s.config.num_methods = 4;
        s.config.num_samples = 20000;
        s.config.min_length = 1;
        s.config.max_length = 1;
        s.models = {{"a", 0.7, 0.7, ErrorMode::SubstituteRandom, std::nullopt},
                    {"b", 0.7, 0.7, ErrorMode::SubstituteRandom, std::nullopt},
                    {"c", 0.7, 0.7, ErrorMode::SubstituteRandom, std::nullopt}};
        m.evaluate_all = true;
    } else {
        throw ConfigError("unknown scenario '" + scenario + "' (expected demo, tail-gate, amplification)");
    }
    for (const auto& spec : s.models) {
        m.config.model_ids.push_back(spec.model_id);
    }
    m.verdict_kind = VerdictKind::Labels;
    m.synth = std::move(s);
}

RunManifest parse_manifest(const ordered_json& j, const fs::path& base,
                           const std::optional<std::string>& scenario) {
    if (!j.is_object()) {
        throw ConfigError("manifest must be a JSON object");
    }
    reject_unknown_keys(j,
                        {"dataset", "profiling_dataset", "profile_fraction", "evaluate_all",
                         "predictions", "profile", "verdict_source", "verdicts", "classifier",
                         "outcomes", "report", "out_dir", "config", "sweep", "counterfactual",
                         "alpha", "workers", "synth"},
                        "manifest");
    RunManifest m;
    try {
        std::optional<std::string> scen = scenario;
        if (!scen && j.contains("synth")) {
            scen = j.at("synth").value("scenario", std::string("demo"));
        }
        if (scen) {
            apply_scenario(m, *scen);
        }

        auto path_field = [&](const char* key) -> std::optional<fs::path> {
            if (!j.contains(key) || j.at(key).is_null()) {
                return std::nullopt;
            }
            return resolve(base, j.at(key).get<std::string>());
        };
        m.dataset = path_field("dataset");
        m.profiling_dataset = path_field("profiling_dataset");
        m.profile = path_field("profile");
        m.verdicts = path_field("verdicts");
        m.classifier = path_field("classifier");
        m.outcomes = path_field("outcomes");
        m.report = path_field("report");
        if (auto od = path_field("out_dir")) m.out_dir = od;

        if (j.contains("profile_fraction")) m.profile_fraction = j.at("profile_fraction").get<double>();
        if (j.contains("evaluate_all")) m.evaluate_all = j.at("evaluate_all").get<bool>();

        if (j.contains("predictions")) {
            const auto& p = j.at("predictions");
            if (p.is_object()) {
                for (const auto& [model, path] : p.items()) {
                    m.predictions.emplace_back(model, resolve(base, path.get<std::string>()));
                }
            } else if (p.is_array()) {
                for (const auto& item : p) {
                    m.predictions.emplace_back(item.at("model").get<std::string>(),
                                               resolve(base, item.at("path").get<std::string>()));
                }
            } else {
                throw ConfigError("predictions must map model ids to files");
            }
        }

        if (j.contains("verdict_source")) {
            m.verdict_kind = parse_verdict_kind(j.at("verdict_source").get<std::string>());
        } else if (m.verdicts) {
            m.verdict_kind = VerdictKind::External;
        } else if (m.classifier && m.verdict_kind == VerdictKind::None) {
            m.verdict_kind = VerdictKind::Baseline;
        }

        if (j.contains("config")) parse_config(j.at("config"), m.config);
        if (j.contains("sweep")) {
            m.sweep = j.at("sweep").is_null() ? std::nullopt
                                              : std::optional<SweepAxes>(parse_sweep(j.at("sweep")));
        }
        if (j.contains("counterfactual")) {
            m.counterfactual = parse_counterfactual_policy(j.at("counterfactual").get<std::string>());
        }
        if (j.contains("alpha")) m.smoothing_alpha = j.at("alpha").get<double>();
        if (j.contains("workers")) m.workers = std::max(1u, j.at("workers").get<unsigned>());
        if (j.contains("synth")) {
            parse_synth(j.at("synth"), *m.synth);
            if (j.at("synth").contains("models") &&
                !(j.contains("config") && j.at("config").contains("models"))) {
                m.config.model_ids.clear();
                for (const auto& spec : m.synth->models) {
                    m.config.model_ids.push_back(spec.model_id);
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad manifest: ") + e.what());
    }
    if (m.config.model_ids.empty() && !m.predictions.empty()) {
        for (const auto& [model, path] : m.predictions) {
            m.config.model_ids.push_back(model);
        }
    }
    return m;
}

RunManifest load_manifest(const fs::path& path, const std::optional<std::string>& scenario) {
    ordered_json j;
    try {
        j = ordered_json::parse(io::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    // A run echo carries the resolved manifest under "manifest".
    if (j.is_object() && j.contains("manifest") && j.contains("command")) {
        return parse_manifest(j.at("manifest"), path.parent_path(), scenario);
    }
    return parse_manifest(j, path.parent_path(), scenario);
}

ordered_json manifest_to_json(const RunManifest& m) {
    ordered_json j;
    auto opt_path = [](const std::optional<fs::path>& p) {
        return p ? ordered_json(p->string()) : ordered_json(nullptr);
    };
    j["dataset"] = opt_path(m.dataset);
    j["profiling_dataset"] = opt_path(m.profiling_dataset);
    j["profile_fraction"] = m.profile_fraction;
    j["evaluate_all"] = m.evaluate_all;
    ordered_json preds = ordered_json::object();
    for (const auto& [model, path] : m.predictions) {
        preds[model] = path.string();
    }
    j["predictions"] = std::move(preds);
    j["profile"] = opt_path(m.profile);
    j["verdict_source"] = verdict_kind_name(m.verdict_kind);
    j["verdicts"] = opt_path(m.verdicts);
    j["classifier"] = opt_path(m.classifier);
    j["outcomes"] = opt_path(m.outcomes);
    j["report"] = opt_path(m.report);
    j["out_dir"] = opt_path(m.out_dir);

    ordered_json c;
    c["models"] = m.config.model_ids;
    c["filter"] = std::string(to_string(m.config.filter));
    c["decision"] = std::string(to_string(m.config.decision));
    c["theta"] = m.config.theta;
    c["best_model"] = m.config.best_model_id ? ordered_json(*m.config.best_model_id)
                                             : ordered_json(nullptr);
    c["tail_analyzer"] = m.config.use_tail_analyzer;
    c["p"] = m.config.p;
    j["config"] = std::move(c);

    if (m.sweep) {
        ordered_json s = ordered_json::object();
        if (!m.sweep->filters.empty()) {
            ordered_json a = ordered_json::array();
            for (auto f : m.sweep->filters) a.push_back(std::string(to_string(f)));
            s["filter"] = std::move(a);
        }
        if (!m.sweep->decisions.empty()) {
            ordered_json a = ordered_json::array();
            for (auto d : m.sweep->decisions) a.push_back(std::string(to_string(d)));
            s["decision"] = std::move(a);
        }
        if (!m.sweep->ps.empty()) s["p"] = m.sweep->ps;
        if (!m.sweep->thetas.empty()) s["theta"] = m.sweep->thetas;
        if (!m.sweep->gates.empty()) s["tail_analyzer"] = m.sweep->gates;
        j["sweep"] = std::move(s);
    } else {
        j["sweep"] = nullptr;
    }
    j["counterfactual"] = std::string(to_string(m.counterfactual));
    j["alpha"] = m.smoothing_alpha;

    if (m.synth) {
        const auto& sc = m.synth->config;
        ordered_json s;
        s["scenario"] = m.synth->scenario;
        s["num_methods"] = sc.num_methods;
        s["num_samples"] = sc.num_samples;
        s["zipf_exponent"] = sc.zipf_exponent;
        s["min_length"] = sc.min_length;
        s["max_length"] = sc.max_length;
        s["p"] = sc.p;
        s["seed"] = sc.seed;
        s["tail_share"] = sc.tail_share ? ordered_json(*sc.tail_share) : ordered_json(nullptr);
        ordered_json models = ordered_json::array();
        for (const auto& spec : m.synth->models) {
            ordered_json mj;
            mj["id"] = spec.model_id;
            mj["head_accuracy"] = spec.head_accuracy;
            mj["tail_accuracy"] = spec.tail_accuracy;
            mj["error_mode"] = std::string(synth::to_string(spec.error_mode));
            mj["correlation_group"] =
                spec.correlation_group ? ordered_json(*spec.correlation_group) : ordered_json(nullptr);
            models.push_back(std::move(mj));
        }
        s["models"] = std::move(models);
        j["synth"] = std::move(s);
    }
    return j;
}

}  // namespace seqvote::app
