// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>
#include <unordered_set>

#include "seqvote/app.hpp"
#include "seqvote/error.hpp"
#include "seqvote/io.hpp"
#include "seqvote/tail_analyzer.hpp"

namespace seqvote::app {

using ordered_json = nlohmann::ordered_json;

namespace {

const fs::path& require_path(const std::optional<fs::path>& p, const char* what) {
    if (!p) {
        throw ConfigError(std::string(what) + " path is required");
    }
    return *p;
}

void require_exists(const fs::path& p, const char* what) {
    if (!fs::exists(p)) {
        throw ConfigError(std::string("missing ") + what + ": " + p.string());
    }
}

// Launch checks: every input the command will read must exist up front.
void check_inputs(const RunManifest& m, bool need_predictions) {
    if (m.dataset) require_exists(*m.dataset, "dataset");
    if (m.profiling_dataset) require_exists(*m.profiling_dataset, "profiling dataset");
    if (need_predictions) {
        for (const auto& [model, path] : m.predictions) {
            require_exists(path, ("prediction file for model '" + model + "'").c_str());
        }
    }
}

struct Split {
    std::vector<Sample> profiling;
    std::vector<Sample> evaluation;
};

Split split_dataset(std::vector<Sample> samples, const RunManifest& m) {
    Split s;
    if (m.profiling_dataset) {
        s.profiling = load_samples(*m.profiling_dataset);
        s.evaluation = std::move(samples);
        return s;
    }
    if (!(m.profile_fraction > 0.0 && m.profile_fraction <= 1.0)) {
        throw ConfigError("profile_fraction must lie in (0, 1]");
    }
    const auto cut = std::max<std::size_t>(
        1, static_cast<std::size_t>(m.profile_fraction * static_cast<double>(samples.size())));
    s.profiling.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(
                                                              std::min(cut, samples.size())));
    if (m.evaluate_all) {
        s.evaluation = std::move(samples);
    } else {
        s.evaluation.assign(samples.begin() + static_cast<std::ptrdiff_t>(std::min(cut, samples.size())),
                            samples.end());
    }
    if (s.evaluation.empty()) {
        throw ConfigError("evaluation set is empty; lower profile_fraction or set evaluate_all");
    }
    return s;
}

std::vector<ModelPredictions> load_all_predictions(const RunManifest& m) {
    std::vector<ModelPredictions> out;
    for (const auto& id : m.config.model_ids) {
        auto it = std::find_if(m.predictions.begin(), m.predictions.end(),
                               [&](const auto& p) { return p.first == id; });
        if (it == m.predictions.end()) {
            throw ConfigError("no prediction file for model '" + id + "'");
        }
        out.push_back({id, load_predictions(it->second, id)});
    }
    return out;
}

void check_prediction_ids(const std::vector<ModelPredictions>& preds,
                          const std::vector<Sample>& a, const std::vector<Sample>& b) {
    std::unordered_set<std::string> ids;
    for (const auto& s : a) ids.insert(s.sample_id);
    for (const auto& s : b) ids.insert(s.sample_id);
    for (const auto& mp : preds) {
        for (const auto& r : mp.records) {
            if (!ids.contains(r.sample_id)) {
                throw DataError("prediction of '" + mp.model_id + "' references unknown sample '" +
                                r.sample_id + "'");
            }
        }
    }
}

std::vector<ModelPredictions> restrict_to(const std::vector<ModelPredictions>& preds,
                                          const std::vector<Sample>& samples) {
    std::unordered_set<std::string> ids;
    for (const auto& s : samples) ids.insert(s.sample_id);
    std::vector<ModelPredictions> out;
    for (const auto& mp : preds) {
        ModelPredictions r{mp.model_id, {}};
        for (const auto& rec : mp.records) {
            if (ids.contains(rec.sample_id)) {
                r.records.push_back(rec);
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string cell_tag(const ReportRow& row) {
    return std::string(to_string(row.filter)) + "_" + std::string(to_string(row.decision)) + "_p" +
           format_double(row.p) + "_t" + format_double(row.theta) + "_gate-" +
           (row.tail_analyzer ? "on" : "off");
}

fs::path cell_outcome_path(const fs::path& base, const ReportRow& row) {
    fs::path p = base;
    p.replace_filename(base.stem().string() + "." + cell_tag(row) + base.extension().string());
    return p;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
    fs::path out = p;
    out += suffix;
    return out;
}

fs::path text_table_path(const fs::path& report) {
    fs::path p = report;
    p.replace_extension(".txt");
    return p;
}

void write_echo(const fs::path& path, const std::string& command, const RunManifest& m,
                const std::vector<fs::path>& inputs, const ordered_json& seeds = nullptr) {
    ordered_json echo;
    echo["command"] = command;
    echo["manifest"] = manifest_to_json(m);
    ordered_json digests = ordered_json::object();
    for (const auto& p : inputs) {
        if (fs::exists(p)) {
            digests[p.string()] = "fnv1a64:" + io::file_digest(p);
        }
    }
    echo["inputs"] = std::move(digests);
    if (!seeds.is_null()) {
        echo["seeds"] = seeds;
    }
    io::write_file_atomic(path, echo.dump(2) + "\n");
}

std::vector<fs::path> input_paths(const RunManifest& m) {
    std::vector<fs::path> out;
    if (m.dataset) out.push_back(*m.dataset);
    if (m.profiling_dataset) out.push_back(*m.profiling_dataset);
    for (const auto& [model, path] : m.predictions) out.push_back(path);
    if (m.verdicts && m.verdict_kind == VerdictKind::External) out.push_back(*m.verdicts);
    if (m.classifier && m.verdict_kind == VerdictKind::Baseline) out.push_back(*m.classifier);
    return out;
}

bool any_gate(const RunManifest& m) {
    if (m.sweep && !m.sweep->gates.empty()) {
        return std::find(m.sweep->gates.begin(), m.sweep->gates.end(), true) != m.sweep->gates.end();
    }
    return m.config.use_tail_analyzer;
}

std::vector<Sample> ensure_labels(std::vector<Sample> samples, const FlagMap& flags) {
    for (auto& s : samples) {
        if (!s.tail_label) {
            s.tail_label = derive_tail_label(s, flags);
        }
    }
    return samples;
}

std::vector<TailVerdict> verdicts_from_labels(const std::vector<Sample>& samples) {
    std::vector<TailVerdict> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back({s.sample_id, s.tail_label.value_or(1) == 1, VerdictSource::External});
    }
    return out;
}

std::vector<TailVerdict> resolve_verdicts(const RunManifest& m, const Split& split) {
    switch (m.verdict_kind) {
        case VerdictKind::None:
            if (any_gate(m)) {
                throw ConfigError("tail analyzer enabled but no verdict source configured");
            }
            return {};
        case VerdictKind::External:
            return load_external_verdicts(require_path(m.verdicts, "verdicts"));
        case VerdictKind::Baseline: {
            const auto clf = load_classifier(require_path(m.classifier, "classifier"));
            return classify_all(clf, split.evaluation, m.workers);
        }
        case VerdictKind::Labels: {
            const FlagMap flags = assign_tail_flags(count_frequencies(split.profiling), m.config.p);
            return verdicts_from_labels(ensure_labels(split.evaluation, flags));
        }
    }
    return {};
}

void emit_report(const std::vector<CellResult>& cells, const RunManifest& m, std::ostream& out,
                 const std::optional<fs::path>& report_path,
                 const std::optional<fs::path>& outcome_path, const ordered_json& extra) {
    if (outcome_path) {
        if (cells.size() == 1) {
            io::write_file_atomic(*outcome_path, serialize_outcomes(cells.front().outcomes));
        } else {
            for (const auto& c : cells) {
                io::write_file_atomic(cell_outcome_path(*outcome_path, c.row),
                                      serialize_outcomes(c.outcomes));
            }
        }
    }
    std::vector<ReportRow> rows;
    for (const auto& c : cells) rows.push_back(c.row);
    const std::string table = format_report_table(rows);
    if (report_path) {
        io::write_file_atomic(*report_path, report_document(cells, m, extra));
        io::write_file_atomic(text_table_path(*report_path), table);
    }
    out << table;
}

}  // namespace

// --- evaluation matrix ---------------------------------------------------

std::vector<CellResult> evaluate_matrix(const EvaluationInputs& in, const RunManifest& m,
                                        const std::optional<ModelProfile>& fixed_profile) {
    const PipelineConfig& base = m.config;
    const SweepAxes axes = m.sweep.value_or(SweepAxes{});
    const auto filters = axes.filters.empty() ? std::vector<FilterKind>{base.filter} : axes.filters;
    const auto decisions =
        axes.decisions.empty() ? std::vector<DecisionRule>{base.decision} : axes.decisions;
    const auto ps = axes.ps.empty() ? std::vector<double>{base.p} : axes.ps;
    const auto thetas = axes.thetas.empty() ? std::vector<double>{base.theta} : axes.thetas;
    const auto gates = axes.gates.empty() ? std::vector<bool>{base.use_tail_analyzer} : axes.gates;

    PredictionTable table;
    for (const auto& mp : in.predictions) {
        table.add(mp.records);
    }

    std::optional<std::string> best = base.best_model_id;
    const bool needs_best =
        std::find(decisions.begin(), decisions.end(), DecisionRule::BestModel) != decisions.end();
    if (needs_best && !best) {
        best = select_best_model(in.profiling, table, base.model_ids);
    }

    // Validate every cell before touching any sample.
    std::vector<PipelineConfig> cells;
    for (bool gate : gates) {
        for (double p : ps) {
            for (double theta : thetas) {
                for (auto f : filters) {
                    for (auto d : decisions) {
                        PipelineConfig c = base;
                        c.use_tail_analyzer = gate;
                        c.p = p;
                        c.theta = theta;
                        c.filter = f;
                        c.decision = d;
                        c.best_model_id = best;
                        c.validate();
                        cells.push_back(std::move(c));
                    }
                }
            }
        }
    }
    if (std::find(gates.begin(), gates.end(), true) != gates.end() && in.verdicts.empty()) {
        throw ConfigError("tail analyzer enabled but no verdicts available");
    }
    const VerdictTable verdicts = index_verdicts(in.verdicts);

    const bool use_fixed = fixed_profile.has_value() && axes.ps.empty();
    std::map<double, ModelProfile> profiles;
    if (use_fixed) {
        for (const auto& id : base.model_ids) {
            if (!fixed_profile->has_model(id)) {
                throw ConfigError("profile has no counters for model '" + id + "'");
            }
        }
    } else {
        const auto profiling_preds = restrict_to(in.predictions, in.profiling);
        for (double p : ps) {
            profiles.emplace(p, build_profile(in.profiling, profiling_preds, p, m.workers));
        }
    }

    std::vector<CellResult> results;
    for (const auto& c : cells) {
        const ModelProfile& profile = use_fixed ? *fixed_profile : profiles.at(c.p);
        CellResult r;
        r.outcomes = run_all(in.evaluation, table, c, profile, &verdicts, m.workers);
        r.row.filter = c.filter;
        r.row.decision = c.decision;
        r.row.tail_analyzer = c.use_tail_analyzer;
        r.row.p = use_fixed ? profile.tail_threshold_p() : c.p;
        r.row.theta = c.theta;
        r.row.report = compute_report(r.outcomes, in.evaluation, table, c.model_ids, m.counterfactual);
        if (c.decision == DecisionRule::BestModel) {
            r.best_model = c.best_model_id;
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::string report_document(const std::vector<CellResult>& cells, const RunManifest& m,
                            const ordered_json& extra) {
    ordered_json doc;
    doc["models"] = m.config.model_ids;
    doc["counterfactual"] = std::string(to_string(m.counterfactual));
    doc["evaluated_samples"] = cells.empty() ? 0 : cells.front().row.report.total_inputs;
    ordered_json rows = ordered_json::array();
    for (const auto& c : cells) {
        ordered_json row;
        row["filter"] = std::string(to_string(c.row.filter));
        row["decision"] = std::string(to_string(c.row.decision));
        row["tail_analyzer"] = c.row.tail_analyzer;
        row["p"] = c.row.p;
        row["theta"] = c.row.theta;
        row["best_model"] = c.best_model ? ordered_json(*c.best_model) : ordered_json(nullptr);
        row["metrics"] = report_to_json(c.row.report);
        rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    if (!extra.is_null()) {
        for (const auto& [k, v] : extra.items()) {
            doc[k] = v;
        }
    }
    return doc.dump(2) + "\n";
}

// --- subcommands ---------------------------------------------------------

int cmd_profile(const RunManifest& m, std::ostream& out) {
    const auto& dataset = require_path(m.dataset, "dataset");
    const auto& profile_path = require_path(m.profile, "profile output");
    if (m.predictions.empty()) {
        throw ConfigError("profile needs at least one prediction file");
    }
    check_inputs(m, true);

    auto split = split_dataset(load_samples(dataset), m);
    const auto preds = load_all_predictions(m);
    check_prediction_ids(preds, split.profiling, split.evaluation);
    const auto profile =
        build_profile(split.profiling, restrict_to(preds, split.profiling), m.config.p, m.workers);
    save_profile(profile_path, profile);
    write_echo(with_suffix(profile_path, ".manifest.json"), "profile", m, input_paths(m));

    std::size_t head = 0;
    for (const auto& [method, e] : profile.entries()) {
        head += e.tail_flag == TailFlag::Head ? 1 : 0;
    }
    out << "profile: " << profile.entries().size() << " methods (" << head << " head), n="
        << profile.total_frequency() << ", p=" << profile.tail_threshold_p() << ", "
        << profile.model_ids().size() << " models -> " << profile_path.string() << "\n";
    return 0;
}

int cmd_train_tail(const RunManifest& m, std::ostream& out) {
    const auto& dataset = require_path(m.dataset, "dataset");
    const auto& clf_path = require_path(m.classifier, "classifier output");
    check_inputs(m, false);
    if (m.profile) require_exists(*m.profile, "profile");

    auto split = split_dataset(load_samples(dataset), m);
    const FlagMap flags = m.profile ? load_profile(*m.profile).flags()
                                    : assign_tail_flags(count_frequencies(split.profiling), m.config.p);
    const auto train = ensure_labels(split.profiling, flags);
    const auto clf = train_baseline(train, m.smoothing_alpha);
    save_classifier(clf_path, clf);
    write_echo(with_suffix(clf_path, ".manifest.json"), "train-tail", m, input_paths(m));

    const auto train_acc = evaluate_classifier(classify_all(clf, train, m.workers), train);
    out << "train-tail: " << train.size() << " samples, vocabulary " << clf.vocabulary().size()
        << ", train accuracy " << format_double(train_acc);
    if (!m.evaluate_all && m.profile_fraction < 1.0) {
        const auto held = ensure_labels(split.evaluation, flags);
        out << ", held-out accuracy "
            << format_double(evaluate_classifier(classify_all(clf, held, m.workers), held));
    }
    out << " -> " << clf_path.string() << "\n";
    return 0;
}

int cmd_classify_tail(const RunManifest& m, std::ostream& out) {
    const auto& dataset = require_path(m.dataset, "dataset");
    const auto& clf_path = require_path(m.classifier, "classifier");
    const auto& verdict_path = require_path(m.verdicts, "verdict output");
    check_inputs(m, false);
    require_exists(clf_path, "classifier");

    const auto samples = load_samples(dataset);
    const auto clf = load_classifier(clf_path);
    const auto verdicts = classify_all(clf, samples, m.workers);
    write_verdicts(verdict_path, verdicts);
    write_echo(with_suffix(verdict_path, ".manifest.json"), "classify-tail", m,
               {dataset, clf_path});

    std::size_t tail = 0;
    for (const auto& v : verdicts) tail += v.is_tail ? 1 : 0;
    out << "classify-tail: " << verdicts.size() << " verdicts, " << tail << " tail";
    const bool labeled = std::all_of(samples.begin(), samples.end(),
                                     [](const Sample& s) { return s.tail_label.has_value(); });
    if (labeled && !samples.empty()) {
        out << ", accuracy " << format_double(evaluate_classifier(verdicts, samples));
    }
    out << " -> " << verdict_path.string() << "\n";
    return 0;
}

int cmd_evaluate(const RunManifest& m, std::ostream& out) {
    const auto& dataset = require_path(m.dataset, "dataset");
    if (m.config.model_ids.empty()) {
        throw ConfigError("no models configured");
    }
    check_inputs(m, true);
    if (m.profile) require_exists(*m.profile, "profile");
    if (m.verdict_kind == VerdictKind::External) require_exists(require_path(m.verdicts, "verdicts"), "verdicts");
    if (m.verdict_kind == VerdictKind::Baseline) require_exists(require_path(m.classifier, "classifier"), "classifier");
    m.config.validate();

    auto split = split_dataset(load_samples(dataset), m);
    EvaluationInputs in;
    in.predictions = load_all_predictions(m);
    check_prediction_ids(in.predictions, split.profiling, split.evaluation);
    if (any_gate(m)) {
        in.verdicts = resolve_verdicts(m, split);
    }
    std::optional<ModelProfile> fixed;
    if (m.profile) {
        fixed = load_profile(*m.profile);
    }
    in.profiling = std::move(split.profiling);
    in.evaluation = std::move(split.evaluation);

    const auto cells = evaluate_matrix(in, m, fixed);
    emit_report(cells, m, out, m.report, m.outcomes, nullptr);
    if (m.report) {
        auto inputs = input_paths(m);
        if (m.profile) inputs.push_back(*m.profile);
        write_echo(with_suffix(*m.report, ".manifest.json"), "evaluate", m, inputs);
    }
    return 0;
}

int cmd_synth(const RunManifest& m, std::ostream& out) {
    if (!m.synth) {
        throw ConfigError("synth section missing");
    }
    const auto& sec = *m.synth;
    sec.config.validate();
    if (sec.models.empty()) {
        throw ConfigError("synth needs at least one model spec");
    }
    for (const auto& spec : sec.models) spec.validate();
    const fs::path dir = m.out_dir.value_or("synth_out");

    RunManifest run = m;
    run.config.model_ids.clear();
    for (const auto& spec : sec.models) run.config.model_ids.push_back(spec.model_id);
    if (run.verdict_kind != VerdictKind::Labels && run.verdict_kind != VerdictKind::None) {
        throw ConfigError("synth runs gate with corpus labels; verdict_source must be labels");
    }
    run.verdict_kind = VerdictKind::Labels;
    run.dataset = dir / "corpus.jsonl";
    run.predictions.clear();
    for (const auto& spec : sec.models) {
        run.predictions.emplace_back(spec.model_id, dir / "predictions" / (spec.model_id + ".jsonl"));
    }
    run.verdicts = dir / "verdicts.jsonl";
    run.profile = dir / "profile.jsonl";
    run.outcomes = dir / "outcomes.jsonl";
    run.report = dir / "report.json";
    run.profiling_dataset.reset();

    auto corpus = synth::generate_corpus(sec.config);
    const FlagMap flags = assign_tail_flags(count_frequencies(corpus), sec.config.p);
    corpus = label_samples(corpus, flags);
    write_samples(*run.dataset, corpus);

    EvaluationInputs in;
    for (std::size_t i = 0; i < sec.models.size(); ++i) {
        auto records = synth::simulate_model(sec.models[i], corpus, flags, sec.config.seed, m.workers);
        write_predictions(run.predictions[i].second, records);
        in.predictions.push_back({sec.models[i].model_id, std::move(records)});
    }
    const auto label_verdicts = verdicts_from_labels(corpus);
    write_verdicts(*run.verdicts, label_verdicts);

    auto split = split_dataset(corpus, run);
    in.verdicts = label_verdicts;
    in.profiling = std::move(split.profiling);
    in.evaluation = std::move(split.evaluation);

    save_profile(*run.profile,
                 build_profile(in.profiling, restrict_to(in.predictions, in.profiling), run.config.p,
                               m.workers));

    ordered_json seeds;
    seeds["seed"] = sec.config.seed;
    seeds["corpus"] = synth::derive_seed(sec.config.seed, "corpus");
    for (const auto& spec : sec.models) {
        seeds["model:" + spec.model_id] = synth::derive_seed(sec.config.seed, "model:" + spec.model_id);
    }
    ordered_json extra;
    extra["scenario"] = sec.scenario;
    extra["seeds"] = seeds;
    std::size_t tail = 0;
    for (const auto& s : corpus) tail += s.tail_label.value_or(0);
    extra["corpus_tail_share"] = static_cast<double>(tail) / static_cast<double>(corpus.size());

    const auto cells = evaluate_matrix(in, run, std::nullopt);
    out << "synth: " << corpus.size() << " samples, " << sec.models.size() << " models, seed "
        << sec.config.seed << " -> " << dir.string() << "\n";
    emit_report(cells, run, out, run.report, run.outcomes, extra);
    write_echo(dir / "manifest.json", "synth", m, {}, seeds);
    return 0;
}

int cmd_report(const RunManifest& m, std::ostream& out) {
    const auto& dataset = require_path(m.dataset, "dataset");
    const auto& outcome_path = require_path(m.outcomes, "outcomes");
    check_inputs(m, true);
    require_exists(outcome_path, "outcomes");

    const auto samples = load_samples(dataset);
    const auto outcomes = load_outcomes(outcome_path);
    const SampleIndex index(samples);
    std::vector<Sample> matched;
    matched.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        const Sample* s = index.find(o.sample_id);
        if (s == nullptr) {
            throw DataError("outcome for unknown sample '" + o.sample_id + "'");
        }
        matched.push_back(*s);
    }
    PredictionTable table;
    for (const auto& mp : load_all_predictions(m)) {
        table.add(mp.records);
    }
    CellResult cell;
    cell.row.filter = m.config.filter;
    cell.row.decision = m.config.decision;
    cell.row.tail_analyzer = m.config.use_tail_analyzer;
    cell.row.p = m.config.p;
    cell.row.theta = m.config.theta;
    cell.row.report = compute_report(outcomes, matched, table, m.config.model_ids, m.counterfactual);
    emit_report({cell}, m, out, m.report, std::nullopt, nullptr);
    return 0;
}

}  // namespace seqvote::app
