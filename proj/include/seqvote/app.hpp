// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

// Command layer behind the seqvote executable. Each cmd_* function runs one
// subcommand from a resolved RunManifest and returns the process exit code.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqvote/ensemble.hpp"
#include "seqvote/metrics.hpp"
#include "seqvote/profile.hpp"
#include "seqvote/synth.hpp"

namespace seqvote::app {

namespace fs = std::filesystem;

enum class VerdictKind {
    None,      // gate has no verdicts; enabling it is a config error
    External,  // verdict file
    Baseline,  // classify with a trained baseline classifier
    Labels,    // dataset tail labels (perfect gate)
};

struct SweepAxes {
    std::vector<FilterKind> filters;
    std::vector<DecisionRule> decisions;
    std::vector<double> ps;
    std::vector<double> thetas;
    std::vector<bool> gates;
};

struct SynthSection {
    synth::SynthConfig config;
    std::vector<synth::SyntheticModelSpec> models;
    std::string scenario = "demo";
};

struct RunManifest {
    PipelineConfig config;
    std::optional<fs::path> dataset;
    std::optional<fs::path> profiling_dataset;
    double profile_fraction = 0.5;
    bool evaluate_all = false;  // evaluate the profiling part too
    std::vector<std::pair<std::string, fs::path>> predictions;
    std::optional<fs::path> profile;
    VerdictKind verdict_kind = VerdictKind::None;
    std::optional<fs::path> verdicts;
    std::optional<fs::path> classifier;
    std::optional<fs::path> outcomes;
    std::optional<fs::path> report;
    std::optional<fs::path> out_dir;
    std::optional<SweepAxes> sweep;
    CounterfactualPolicy counterfactual = CounterfactualPolicy::UnfilteredMajority;
    double smoothing_alpha = 1.0;
    unsigned workers = 1;
    std::optional<SynthSection> synth;
};

// Relative paths are resolved against base_dir. A scenario (override, or
// synth.scenario in the document) supplies defaults that explicit fields
// then overwrite.
RunManifest parse_manifest(const nlohmann::ordered_json& j, const fs::path& base_dir,
                           const std::optional<std::string>& scenario = std::nullopt);
RunManifest load_manifest(const fs::path& path,
                          const std::optional<std::string>& scenario = std::nullopt);
nlohmann::ordered_json manifest_to_json(const RunManifest& manifest);

// Resets the synth section, pipeline settings and sweep to the named
// scenario: demo, tail-gate or amplification.
void apply_scenario(RunManifest& manifest, const std::string& scenario);

int cmd_profile(const RunManifest& manifest, std::ostream& out);
int cmd_train_tail(const RunManifest& manifest, std::ostream& out);
int cmd_classify_tail(const RunManifest& manifest, std::ostream& out);
int cmd_evaluate(const RunManifest& manifest, std::ostream& out);
int cmd_synth(const RunManifest& manifest, std::ostream& out);
int cmd_report(const RunManifest& manifest, std::ostream& out);

// In-memory evaluation shared by evaluate and synth.
struct EvaluationInputs {
    std::vector<Sample> profiling;
    std::vector<Sample> evaluation;
    std::vector<ModelPredictions> predictions;  // in config model order
    std::vector<TailVerdict> verdicts;          // may be empty when no gate runs
};

struct CellResult {
    ReportRow row;
    std::optional<std::string> best_model;
    std::vector<PipelineOutcome> outcomes;
};

std::vector<CellResult> evaluate_matrix(const EvaluationInputs& inputs, const RunManifest& manifest,
                                        const std::optional<ModelProfile>& fixed_profile);

std::string report_document(const std::vector<CellResult>& cells, const RunManifest& manifest,
                            const nlohmann::ordered_json& extra = nullptr);

}  // namespace seqvote::app
