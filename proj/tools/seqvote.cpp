// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

// seqvote: profile-guided N-version voting for API sequence recommenders.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqvote/app.hpp"
#include "seqvote/error.hpp"

namespace {

using namespace seqvote;
namespace fs = std::filesystem;

// Flag values collected before the manifest is known; applied on top.
struct Overrides {
    std::string manifest;
    std::string scenario;
    std::string dataset;
    std::string profiling_dataset;
    std::optional<double> profile_fraction;
    bool evaluate_all = false;
    std::vector<std::string> predictions;  // model=path
    std::string profile;
    std::string verdicts;
    std::string classifier;
    std::string verdict_source;
    std::string outcomes;
    std::string report;
    std::string out_dir;
    std::vector<std::string> models;
    std::string filter;
    std::string decision;
    std::optional<double> theta;
    std::string best_model;
    std::optional<bool> tail_analyzer;
    std::optional<double> p;
    std::vector<std::string> sweep_filter;
    std::vector<std::string> sweep_decision;
    std::vector<double> sweep_p;
    std::vector<double> sweep_theta;
    std::string counterfactual;
    std::optional<double> alpha;
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> num_samples;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--manifest,-m", o.manifest, "JSON run manifest; flags override its fields");
    cmd->add_option("--dataset", o.dataset, "dataset JSONL");
    cmd->add_option("--profiling-dataset", o.profiling_dataset,
                    "separate profiling dataset (default: leading part of --dataset)");
    cmd->add_option("--profile-fraction", o.profile_fraction,
                    "share of --dataset used for profiling (default 0.5)");
    cmd->add_flag("--evaluate-all", o.evaluate_all, "evaluate the profiling part as well");
    cmd->add_option("--predictions", o.predictions, "model=path, repeatable");
    cmd->add_option("--models", o.models, "model order (default: order of --predictions)");
    cmd->add_option("-p,--tail-threshold", o.p, "tail threshold percentage (default 50)");
    cmd->add_option("--workers,-j", o.workers, "worker threads (results do not depend on it)");
    cmd->add_option("--profile", o.profile, "profile file");
}

void add_pipeline(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--verdicts", o.verdicts, "tail verdict JSONL");
    cmd->add_option("--classifier", o.classifier, "baseline classifier JSON");
    cmd->add_option("--verdict-source", o.verdict_source, "none | external | baseline | labels");
    cmd->add_option("--outcomes", o.outcomes, "outcome JSONL output");
    cmd->add_option("--report", o.report, "report JSON output (a .txt table is written alongside)");
    cmd->add_option("--filter", o.filter, "None | R | H | RH");
    cmd->add_option("--decision", o.decision, "SimpleRejection | ScoreBased | BestModel");
    cmd->add_option("--theta", o.theta, "score threshold (default 0.9)");
    cmd->add_option("--best-model", o.best_model, "model for the BestModel rule");
    cmd->add_option("--tail-analyzer", o.tail_analyzer, "gate inputs by tail verdicts (true/false)");
    cmd->add_option("--sweep-filter", o.sweep_filter, "filters to sweep");
    cmd->add_option("--sweep-decision", o.sweep_decision, "decision rules to sweep");
    cmd->add_option("--sweep-p", o.sweep_p, "tail thresholds to sweep");
    cmd->add_option("--sweep-theta", o.sweep_theta, "score thresholds to sweep");
    cmd->add_option("--counterfactual", o.counterfactual,
                    "UnfilteredMajority (default) | AnyModelCorrect");
}

std::optional<fs::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
}

app::RunManifest resolve(const Overrides& o, bool synth_command) {
    app::RunManifest m;
    std::optional<std::string> scenario;
    if (!o.scenario.empty()) scenario = o.scenario;
    if (!o.manifest.empty()) {
        m = app::load_manifest(o.manifest, scenario);
    } else if (synth_command) {
        app::apply_scenario(m, scenario.value_or("demo"));
    }
    if (auto p = opt_path(o.dataset)) m.dataset = p;
    if (auto p = opt_path(o.profiling_dataset)) m.profiling_dataset = p;
    if (o.profile_fraction) m.profile_fraction = *o.profile_fraction;
    if (o.evaluate_all) m.evaluate_all = true;
    if (!o.predictions.empty()) {
        m.predictions.clear();
        for (const auto& item : o.predictions) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
                throw ConfigError("--predictions expects model=path, got '" + item + "'");
            }
            m.predictions.emplace_back(item.substr(0, eq), fs::path(item.substr(eq + 1)));
        }
        if (o.models.empty() && o.manifest.empty()) {
            m.config.model_ids.clear();
            for (const auto& [model, path] : m.predictions) m.config.model_ids.push_back(model);
        }
    }
    if (!o.models.empty()) m.config.model_ids = o.models;
    if (auto p = opt_path(o.profile)) m.profile = p;
    if (auto p = opt_path(o.verdicts)) {
        m.verdicts = p;
        if (o.verdict_source.empty()) m.verdict_kind = app::VerdictKind::External;
    }
    if (auto p = opt_path(o.classifier)) {
        m.classifier = p;
        if (o.verdict_source.empty() && o.verdicts.empty() &&
            m.verdict_kind == app::VerdictKind::None) {
            m.verdict_kind = app::VerdictKind::Baseline;
        }
    }
    if (!o.verdict_source.empty()) {
        static const std::map<std::string, app::VerdictKind> kinds{
            {"none", app::VerdictKind::None},
            {"external", app::VerdictKind::External},
            {"baseline", app::VerdictKind::Baseline},
            {"labels", app::VerdictKind::Labels}};
        auto it = kinds.find(o.verdict_source);
        if (it == kinds.end()) throw ConfigError("unknown verdict source '" + o.verdict_source + "'");
        m.verdict_kind = it->second;
    }
    if (auto p = opt_path(o.outcomes)) m.outcomes = p;
    if (auto p = opt_path(o.report)) m.report = p;
    if (auto p = opt_path(o.out_dir)) m.out_dir = p;
    if (!o.filter.empty()) m.config.filter = parse_filter_kind(o.filter);
    if (!o.decision.empty()) m.config.decision = parse_decision_rule(o.decision);
    if (o.theta) m.config.theta = *o.theta;
    if (!o.best_model.empty()) m.config.best_model_id = o.best_model;
    if (o.tail_analyzer) m.config.use_tail_analyzer = *o.tail_analyzer;
    if (o.p) m.config.p = *o.p;
    auto& sweep_needed = m.sweep;
    auto ensure_sweep = [&]() -> app::SweepAxes& {
        if (!sweep_needed) sweep_needed = app::SweepAxes{};
        return *sweep_needed;
    };
    if (!o.sweep_filter.empty()) {
        auto& axes = ensure_sweep();
        axes.filters.clear();
        for (const auto& f : o.sweep_filter) axes.filters.push_back(parse_filter_kind(f));
    }
    if (!o.sweep_decision.empty()) {
        auto& axes = ensure_sweep();
        axes.decisions.clear();
        for (const auto& d : o.sweep_decision) axes.decisions.push_back(parse_decision_rule(d));
    }
    if (!o.sweep_p.empty()) ensure_sweep().ps = o.sweep_p;
    if (!o.sweep_theta.empty()) ensure_sweep().thetas = o.sweep_theta;
    if (!o.counterfactual.empty()) m.counterfactual = parse_counterfactual_policy(o.counterfactual);
    if (o.alpha) m.smoothing_alpha = *o.alpha;
    if (o.workers) m.workers = std::max(1u, *o.workers);
    if (m.synth) {
        if (o.seed) m.synth->config.seed = *o.seed;
        if (o.num_samples) m.synth->config.num_samples = *o.num_samples;
    }
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"seqvote: reliable API method sequence recommendation by N-version voting"};
    cli.require_subcommand(1);
    Overrides o;

    auto* profile = cli.add_subcommand("profile", "build a model profile from a profiling set");
    add_common(profile, o);

    auto* train = cli.add_subcommand("train-tail", "train the baseline tail classifier");
    add_common(train, o);
    train->add_option("--classifier", o.classifier, "classifier JSON output")->required();
    train->add_option("--alpha", o.alpha, "additive smoothing (default 1)");

    auto* classify = cli.add_subcommand("classify-tail", "write tail verdicts for a dataset");
    classify->add_option("--manifest,-m", o.manifest, "JSON run manifest");
    classify->add_option("--dataset", o.dataset, "dataset JSONL");
    classify->add_option("--classifier", o.classifier, "classifier JSON");
    classify->add_option("--verdicts,--out", o.verdicts, "verdict JSONL output");
    classify->add_option("--workers,-j", o.workers, "worker threads");

    auto* evaluate = cli.add_subcommand("evaluate", "run the pipeline and report TAR/RR/FRR");
    add_common(evaluate, o);
    add_pipeline(evaluate, o);

    auto* synth = cli.add_subcommand("synth", "generate a synthetic corpus and run it end to end");
    add_common(synth, o);
    add_pipeline(synth, o);
    synth->add_option("--scenario", o.scenario, "demo | tail-gate | amplification");
    synth->add_option("--out-dir", o.out_dir, "output directory (default synth_out)");
    synth->add_option("--seed", o.seed, "64-bit seed");
    synth->add_option("--num-samples", o.num_samples, "corpus size");

    auto* report = cli.add_subcommand("report", "recompute a report from an outcome file");
    add_common(report, o);
    add_pipeline(report, o);

    CLI11_PARSE(cli, argc, argv);

    try {
        if (profile->parsed()) return app::cmd_profile(resolve(o, false), std::cout);
        if (train->parsed()) return app::cmd_train_tail(resolve(o, false), std::cout);
        if (classify->parsed()) return app::cmd_classify_tail(resolve(o, false), std::cout);
        if (evaluate->parsed()) return app::cmd_evaluate(resolve(o, false), std::cout);
        if (synth->parsed()) return app::cmd_synth(resolve(o, true), std::cout);
        if (report->parsed()) return app::cmd_report(resolve(o, false), std::cout);
    } catch (const seqvote::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
