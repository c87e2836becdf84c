// Copyright 2026 The EQV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Configuration-driven experiment commands.
//
// Every command writes schema-versioned delimited tables into the output
// directory, each starting with '#' comment lines that hold the resolved
// configuration, plus a manifest.ini listing what was written. Nothing
// time- or host-dependent is written, so reruns are byte-identical.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eqv/analysis.hpp"
#include "eqv/ansatz.hpp"
#include "eqv/data.hpp"
#include "eqv/ensemble.hpp"
#include "eqv/noise.hpp"
#include "eqv/vqc.hpp"

namespace eqv {

enum class Task : std::uint8_t { Mnist2, Mnist4 };

std::string to_string(Task t);
/// "mnist2" or "mnist4"; throws ConfigError otherwise.
Task parse_task(const std::string& text);
/// {1, 9} for mnist2, {1, 4, 7, 9} for mnist4.
std::vector<Label> task_digits(Task t);

struct TrainSettings {
    std::size_t blocks = 3;
    RotationLayout rotations = RotationLayout::YZ;
    Entangler entangler = Entangler::Chain;
    std::size_t epochs = 150;
    std::size_t batch_size = 100;
    double learning_rate = 0.5;
};

/// Tuned defaults per task.
TrainSettings default_train_settings(Task t);

struct ExperimentConfig {
    Task task = Task::Mnist2;
    std::size_t n_qubits = 4;
    std::vector<std::size_t> sweep_qubits{2, 4, 6};
    std::size_t impact_qubits = 2;
    std::vector<std::size_t> ensemble_sizes{3, 5, 7, 9, 11};
    std::size_t compare_size = 0;  // 0 = 7 for mnist2, 11 for mnist4
    std::size_t n_variants = 3;
    std::vector<std::string> machines{"ibmq_lima", "ibmq_quito", "ibmq_belem"};
    std::vector<std::string> sweep_machines{"ibmq_lima", "ibmq_quito", "ibmq_belem", "ibm_oslo", "ibm_nairobi"};
    std::vector<Strategy> strategies{Strategy::Plurality, Strategy::Average, Strategy::AccuracyWeighted};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::filesystem::path output = "results";
    std::size_t trajectories = 0;  // 0 = each machine's shot count
    std::size_t workers = 0;       // 0 = hardware concurrency
    std::size_t impact_bins = 20;

    std::filesystem::path images = "data/mnist5k-images-idx3-ubyte.gz";
    std::filesystem::path labels = "data/mnist5k-labels-idx1-ubyte.gz";
    std::filesystem::path profiles_file;  // empty = built-in profiles
    std::size_t n_train = 300;
    std::size_t n_test = 30;
    std::size_t n_validation = 30;  // held out from the end of the training split
    bool rescale = true;            // min-max rescale features on the fitted samples

    TrainSettings train;

    std::size_t resolved_compare_size() const;
    /// Built-in profiles, or those in profiles_file.
    std::vector<MachineProfile> profiles() const;
    /// Throws ConfigError for unknown machines, empty seeds, bad sizes, etc.
    void validate() const;
};

/// Defaults for a task (training settings included).
ExperimentConfig default_config(Task t);

/// Reads an INI config with optional "section.key" overrides layered on
/// top. The task key is applied first so that unspecified training settings
/// take that task's defaults. Unknown sections or keys are rejected with
/// ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::map<std::string, std::string>& overrides = {});
/// Canonical INI text; parse_config(format_config(c)) reproduces c.
std::string format_config(const ExperimentConfig& config);

/// Split and trained models for one (seed, qubit count).
struct TrainedSet {
    std::uint64_t seed = 0;
    std::size_t n_qubits = 0;
    DatasetSplit split;              // unscaled
    FeatureScaler scaler;
    std::vector<Sample> fit;         // training samples actually used (scaled)
    std::vector<Sample> validation;  // held-out tail of the training split (scaled)
    std::vector<Sample> test;        // scaled
    std::vector<ClassifierModel> models;  // one per variant
    std::vector<double> final_losses;
};

/// Builds the split for `seed` and trains every variant noiselessly. If the
/// model cache under <output>/models holds models for the identical training
/// setup they are loaded instead; freshly trained models are written there.
/// With reuse = false the cache is ignored and overwritten.
TrainedSet obtain_models(const ExperimentConfig& config, std::span<const RawImage> images, std::uint64_t seed,
                         std::size_t n_qubits, bool reuse = true);

/// Variants trained per seed: n_variants capped by the number of distinct
/// layouts for n_qubits.
std::size_t effective_variants(const ExperimentConfig& config, std::size_t n_qubits);

/// Result of one command: written files (relative to the output directory)
/// and a human-readable summary.
struct CommandResult {
    std::vector<std::string> files;
    std::string summary;
};

CommandResult cmd_train(const ExperimentConfig& config);
CommandResult cmd_sweep_qubits(const ExperimentConfig& config);
CommandResult cmd_sweep_ensemble(const ExperimentConfig& config);
CommandResult cmd_compare(const ExperimentConfig& config);
CommandResult cmd_impact(const ExperimentConfig& config);

/// Dispatch by name: train, sweep-qubits, sweep-ensemble, compare, impact.
CommandResult run_command(const std::string& name, const ExperimentConfig& config);

inline constexpr int kSchemaVersion = 1;

}  // namespace eqv
