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

// Ensembles of classifiers spread over several machines, and the rules that
// turn their confidences into one label.
//
// Every allocated copy runs on every machine, so an ensemble of size s on m
// machines casts s * m votes per input.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eqv/noise.hpp"
#include "eqv/vqc.hpp"

namespace eqv {

enum class Strategy : std::uint8_t { Plurality, Average, AccuracyWeighted };

std::string to_string(Strategy s);
/// Accepts "plurality", "average", "accuracy_weighted". Throws ConfigError.
Strategy parse_strategy(const std::string& text);

struct EnsembleConfig {
    std::size_t ensemble_size = 7;
    std::size_t n_variants = 3;
    std::vector<MachineProfile> machines;
    std::uint64_t allocation_seed = 0;
    Strategy strategy = Strategy::Plurality;

    /// Throws ConfigError if ensemble_size < n_variants, n_variants == 0 or
    /// there are no machines.
    void validate() const;
};

/// Variant id of every copy, sorted by variant id. Every variant gets one
/// copy; remaining copies go out in rounds, each round giving one more copy
/// to every variant while at least n_variants copies remain, and the final
/// partial round picks its variants by a seeded draw without replacement.
/// Throws ArgumentError if ensemble_size < n_variants or n_variants == 0.
std::vector<std::size_t> allocate_variants(std::size_t ensemble_size, std::size_t n_variants, std::uint64_t seed);

/// Copies per variant id.
std::vector<std::size_t> variant_counts(std::span<const std::size_t> allocation, std::size_t n_variants);

/// One voter: copy `copy` (of variant `variant`) running on machine `machine`.
struct ClassifierId {
    std::size_t copy = 0;
    std::size_t variant = 0;
    std::size_t machine = 0;

    /// "v<variant>.c<copy>@m<machine>"
    std::string name() const;
    bool operator==(const ClassifierId&) const = default;
};

struct ClassifierVote {
    ClassifierId id;
    ConfidenceVector confidence;
    Label predicted = 0;
};

struct VoteTally {
    std::vector<ClassifierVote> per_classifier;
    std::map<Label, std::size_t> per_class_votes;

    /// Throws InvariantError unless vote totals match the classifier count and
    /// all classifiers share one label list.
    void validate() const;
};

/// Tally from confidences; classifier i gets id {i, 0, 0}.
VoteTally make_tally(std::span<const ConfidenceVector> confidences);
VoteTally make_tally(std::vector<ClassifierVote> votes);

/// Label with the most votes. Ties go to the larger confidence summed over
/// all classifiers, then to the label listed first. Throws ArgumentError for
/// an empty tally.
Label plurality_vote(const VoteTally& tally);

struct Aggregate {
    Label label = 0;
    ConfidenceVector confidence;
};

/// Elementwise mean, then argmax (first label on ties). Throws ArgumentError
/// for empty input or mismatched label lists.
Aggregate average_aggregate(std::span<const ConfidenceVector> confidences);

/// Weight-normalized elementwise mean, then argmax. Throws ArgumentError for
/// a length mismatch, negative weights, or all-zero weights.
Aggregate weighted_aggregate(std::span<const ConfidenceVector> confidences, std::span<const double> weights);

struct SampleVotes {
    std::size_t sample_id = 0;
    Label true_label = 0;
    VoteTally tally;
};

/// Every classifier's confidence on every test sample.
struct VoteRecords {
    std::vector<ClassifierId> classifiers;
    std::vector<MachineProfile> machines;
    std::vector<SampleVotes> samples;
};

/// Runs each allocated copy on each machine over the test set. models[v] is
/// the trained model for variant v; copies share parameters and differ only in
/// their noise streams. Classifier (copy c, machine m) on sample i uses seed
/// derive_seed(seed, {i, c, m}). `trajectories` = 0 uses each machine's
/// shot count. Throws ArgumentError for an empty test set or no machines.
VoteRecords collect_votes(std::span<const ClassifierModel> models, std::span<const std::size_t> allocation,
                          std::span<const MachineProfile> machines, std::span<const Sample> test_set,
                          std::uint64_t seed, std::size_t trajectories = 0, std::size_t workers = 0);

/// Same as collect_votes but with an exact statevector executor for every
/// classifier (machine ids still distinguish voters).
VoteRecords collect_noiseless_votes(std::span<const ClassifierModel> models, std::span<const std::size_t> allocation,
                                    std::span<const Sample> test_set);

struct EnsembleOutcome {
    std::vector<Label> predictions;
    double accuracy = 0.0;
};

/// Folds the records with one strategy. `weights` has one entry per
/// classifier and is required only for AccuracyWeighted.
EnsembleOutcome aggregate(const VoteRecords& records, Strategy strategy, std::span<const double> weights = {});

/// Per-classifier weights: the accuracy of its (variant, machine) pair on the
/// validation samples, executed noisily with seed derive_seed(seed, {v, m}).
std::vector<double> validation_weights(std::span<const ClassifierModel> models, const VoteRecords& records,
                                       std::span<const Sample> validation, std::uint64_t seed,
                                       std::size_t trajectories = 0, std::size_t workers = 0);

/// collect_votes followed by aggregate. For AccuracyWeighted the weights are
/// computed with validation_weights on `validation`.
EnsembleOutcome run_ensemble(std::span<const ClassifierModel> models, std::span<const std::size_t> allocation,
                             std::span<const MachineProfile> machines, std::span<const Sample> test_set,
                             Strategy strategy, std::uint64_t seed, std::span<const Sample> validation = {},
                             std::size_t trajectories = 0);

/// Delimited vote export, one row per (sample, classifier):
/// sample_id,true_label,classifier,variant,copy,machine,predicted,conf_<label>...,final_label
std::string format_vote_records(const VoteRecords& records, const EnsembleOutcome& outcome);

}  // namespace eqv
