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

// A single variational quantum classifier.
//
// Class decoding: with K classes and readout qubits (r_0, ..., r_{m-1}),
// m = ceil(log2 K), class k owns the outcomes whose readout bits spell k with
// r_0 as the least significant bit. Mass on bit patterns >= K is discarded
// and the K class masses are renormalized.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqv/ansatz.hpp"
#include "eqv/data.hpp"
#include "eqv/noise.hpp"

namespace eqv {

/// Probability floor inside the cross-entropy.
inline constexpr double kProbabilityFloor = 1e-12;

struct ConfidenceVector {
    std::vector<double> values;
    std::vector<Label> class_labels;

    /// Throws InvariantError unless there are >= 2 classes, one value per
    /// label, each value in [0,1], summing to 1 within kAccumulatedTolerance.
    void validate() const;

    std::size_t size() const { return values.size(); }
    /// Position of `label`; throws IndexError for an unknown label.
    std::size_t index_of(Label label) const;
    double of(Label label) const { return values[index_of(label)]; }
};

/// Where circuits run: exact statevector or a noisy machine.
struct Executor {
    std::optional<MachineProfile> machine;  // empty = noiseless
    std::size_t trajectories = 0;           // 0 = machine's shot count
    std::uint64_t seed = 0;

    static Executor noiseless() { return {}; }
    static Executor noisy(MachineProfile machine, std::uint64_t seed, std::size_t trajectories = 0);

    bool is_noiseless() const { return !machine.has_value(); }
    /// Same executor with the seed replaced.
    Executor with_seed(std::uint64_t s) const;
};

struct ClassifierModel {
    Variant variant;
    std::vector<double> params;
    std::vector<Label> class_labels;
    std::vector<std::size_t> readout_qubits;

    /// Fresh model with parameters drawn uniformly in [-pi, pi) from `seed`
    /// and readout on the variant's default readout qubits.
    static ClassifierModel initialize(const Variant& variant, std::vector<Label> class_labels, std::uint64_t seed);

    /// Throws InvariantError for too few readout bits, wrong parameter count,
    /// or a readout qubit outside the register.
    void validate() const;
};

/// Runs the model on one input and decodes per-class confidences. Noisy
/// executors sample executor.trajectories shots with executor.seed.
/// Throws ArgumentError if features.size() != n_features.
ConfidenceVector confidence(const ClassifierModel& model, std::span<const double> features, const Executor& executor);

/// Class masses before renormalization, from a full outcome distribution.
std::vector<double> class_masses(std::span<const double> outcome_probs, std::span<const std::size_t> readout_qubits,
                                 std::size_t n_classes);

/// Cross-entropy -log(max(conf[true_label], 1e-12)). IndexError for an
/// unknown label.
double loss(const ConfidenceVector& conf, Label true_label);

/// Mean cross-entropy over samples.
double mean_loss(const ClassifierModel& model, std::span<const Sample> samples, const Executor& executor);

/// Gradient of the mean batch loss. Each class mass is differentiated with the
/// two-point shift rule (evaluations at +-pi/2) and the cross-entropy chain
/// rule is applied analytically. Sample contributions are summed in batch
/// order. Throws ArgumentError for an empty batch.
std::vector<double> parameter_shift_gradient(const ClassifierModel& model, std::span<const Sample> batch,
                                             const Executor& executor);

enum class Optimizer : std::uint8_t { GradientDescent, Spsa };

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 100;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    Executor executor;  // noiseless by default
    /// Empty = gradient descent for noiseless executors, SPSA for noisy ones.
    std::optional<Optimizer> optimizer;
    double spsa_perturbation = 0.1;  // c in c / (k+1)^0.101

    void validate() const;
};

struct TrainResult {
    ClassifierModel model;
    /// Mean training loss before the first epoch and after every epoch
    /// (evaluated noiselessly on the full training set).
    std::vector<double> epoch_losses;
};

/// Mini-batch training starting from model.params. Batches are drawn from a
/// per-epoch seeded shuffle. Throws ArgumentError for an empty training set
/// and ConfigError when a sample label is not one of the model's classes.
ClassifierModel train(const ClassifierModel& model, std::span<const Sample> train_set, const TrainConfig& config);
TrainResult train_with_history(const ClassifierModel& model, std::span<const Sample> train_set,
                               const TrainConfig& config);
/// Convenience overload that also checks the split's class list.
ClassifierModel train(const ClassifierModel& model, const DatasetSplit& split, const TrainConfig& config);

/// Argmax label; ties go to the label listed first.
Label predict(const ConfidenceVector& conf);

/// Fraction of samples predicted correctly. For noisy executors sample i runs
/// with seed derive_seed(executor.seed, {i}).
double accuracy(const ClassifierModel& model, std::span<const Sample> samples, const Executor& executor);

std::string format_model(const ClassifierModel& model);
ClassifierModel parse_model(const std::string& text);
void save_model(const std::filesystem::path& path, const ClassifierModel& model);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace eqv
