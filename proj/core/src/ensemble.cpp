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

#include "eqv/ensemble.hpp"

#include <algorithm>
#include <numeric>

#include "eqv/error.hpp"
#include "eqv/kvfile.hpp"
#include "eqv/parallel.hpp"
#include "eqv/rng.hpp"

namespace eqv {

namespace {

void check_same_labels(std::span<const ConfidenceVector> confidences) {
    if (confidences.empty()) throw ArgumentError("no confidence vectors to aggregate");
    for (const ConfidenceVector& c : confidences) {
        if (c.class_labels != confidences.front().class_labels) throw ArgumentError("class label lists differ");
        if (c.values.size() != c.class_labels.size()) throw ArgumentError("confidence vector size mismatch");
    }
}

std::size_t argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

std::vector<ConfidenceVector> confidences_of(const VoteTally& tally) {
    std::vector<ConfidenceVector> out;
    out.reserve(tally.per_classifier.size());
    for (const ClassifierVote& v : tally.per_classifier) out.push_back(v.confidence);
    return out;
}

// Every allocated variant needs a model; all models share one label list.
void check_models(std::span<const ClassifierModel> models, std::span<const std::size_t> allocation) {
    if (allocation.empty()) throw ArgumentError("empty allocation");
    for (std::size_t v : allocation) {
        if (v >= models.size()) throw ArgumentError("allocation refers to variant " + std::to_string(v) + " without a model");
    }
    for (const ClassifierModel& m : models) {
        if (m.class_labels != models.front().class_labels) throw ArgumentError("models disagree on class labels");
    }
}

std::vector<ClassifierId> classifier_ids(std::span<const std::size_t> allocation, std::size_t n_machines) {
    std::vector<ClassifierId> ids;
    for (std::size_t m = 0; m < n_machines; ++m) {
        for (std::size_t c = 0; c < allocation.size(); ++c) ids.push_back({c, allocation[c], m});
    }
    return ids;
}

}  // namespace

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Plurality: return "plurality";
        case Strategy::Average: return "average";
        case Strategy::AccuracyWeighted: return "accuracy_weighted";
    }
    return "?";
}

Strategy parse_strategy(const std::string& text) {
    if (text == "plurality") return Strategy::Plurality;
    if (text == "average") return Strategy::Average;
    if (text == "accuracy_weighted") return Strategy::AccuracyWeighted;
    throw ConfigError("unknown strategy '" + text + "'");
}

void EnsembleConfig::validate() const {
    if (n_variants == 0) throw ConfigError("n_variants must be >= 1");
    if (ensemble_size < n_variants) throw ConfigError("ensemble_size must be >= n_variants");
    if (machines.empty()) throw ConfigError("an ensemble needs at least one machine");
    for (const MachineProfile& m : machines) m.validate();
}

std::vector<std::size_t> allocate_variants(std::size_t ensemble_size, std::size_t n_variants, std::uint64_t seed) {
    if (n_variants == 0) throw ArgumentError("n_variants must be >= 1");
    if (ensemble_size < n_variants) {
        throw ArgumentError("ensemble size " + std::to_string(ensemble_size) + " is smaller than the " +
                            std::to_string(n_variants) + " variants");
    }
    std::vector<std::size_t> counts(n_variants, 1);
    std::size_t remaining = ensemble_size - n_variants;
    while (remaining >= n_variants) {
        for (std::size_t& c : counts) ++c;
        remaining -= n_variants;
    }
    if (remaining > 0) {
        std::vector<std::size_t> ids(n_variants);
        std::iota(ids.begin(), ids.end(), std::size_t{0});
        Rng rng(seed);
        rng.shuffle(ids);
        for (std::size_t k = 0; k < remaining; ++k) ++counts[ids[k]];
    }
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < n_variants; ++v) out.insert(out.end(), counts[v], v);
    return out;
}

std::vector<std::size_t> variant_counts(std::span<const std::size_t> allocation, std::size_t n_variants) {
    std::vector<std::size_t> counts(n_variants, 0);
    for (std::size_t v : allocation) counts.at(v) += 1;
    return counts;
}

std::string ClassifierId::name() const {
    return "v" + std::to_string(variant) + ".c" + std::to_string(copy) + "@m" + std::to_string(machine);
}

void VoteTally::validate() const {
    std::size_t total = 0;
    for (const auto& [label, n] : per_class_votes) total += n;
    if (total != per_classifier.size()) throw InvariantError("vote count does not match classifier count");
    for (const ClassifierVote& v : per_classifier) {
        if (v.confidence.class_labels != per_classifier.front().confidence.class_labels) {
            throw InvariantError("classifiers disagree on class labels");
        }
    }
}

VoteTally make_tally(std::vector<ClassifierVote> votes) {
    VoteTally t;
    if (!votes.empty()) {
        for (Label l : votes.front().confidence.class_labels) t.per_class_votes[l] = 0;
    }
    for (const ClassifierVote& v : votes) t.per_class_votes[v.predicted] += 1;
    t.per_classifier = std::move(votes);
    t.validate();
    return t;
}

VoteTally make_tally(std::span<const ConfidenceVector> confidences) {
    std::vector<ClassifierVote> votes;
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        votes.push_back({{i, 0, 0}, confidences[i], predict(confidences[i])});
    }
    return make_tally(std::move(votes));
}

Label plurality_vote(const VoteTally& tally) {
    if (tally.per_classifier.empty()) throw ArgumentError("plurality vote over no classifiers");
    const std::vector<Label>& labels = tally.per_classifier.front().confidence.class_labels;
    std::vector<double> summed(labels.size(), 0.0);
    for (const ClassifierVote& v : tally.per_classifier) {
        for (std::size_t k = 0; k < labels.size(); ++k) summed[k] += v.confidence.values[k];
    }
    auto votes_for = [&](Label l) {
        const auto it = tally.per_class_votes.find(l);
        return it == tally.per_class_votes.end() ? std::size_t{0} : it->second;
    };
    std::size_t best = 0;
    for (std::size_t k = 1; k < labels.size(); ++k) {
        const std::size_t vk = votes_for(labels[k]);
        const std::size_t vb = votes_for(labels[best]);
        if (vk > vb || (vk == vb && summed[k] > summed[best])) best = k;
    }
    return labels[best];
}

Aggregate average_aggregate(std::span<const ConfidenceVector> confidences) {
    const std::vector<double> weights(confidences.size(), 1.0);
    return weighted_aggregate(confidences, weights);
}

Aggregate weighted_aggregate(std::span<const ConfidenceVector> confidences, std::span<const double> weights) {
    check_same_labels(confidences);
    if (weights.size() != confidences.size()) throw ArgumentError("one weight per classifier required");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ArgumentError("weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw ArgumentError("all weights are zero");
    const std::size_t k = confidences.front().values.size();
    std::vector<double> mean(k, 0.0);
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        for (std::size_t j = 0; j < k; ++j) mean[j] += weights[i] * confidences[i].values[j];
    }
    for (double& m : mean) m /= total;
    const std::vector<Label>& labels = confidences.front().class_labels;
    return {labels[argmax(mean)], {std::move(mean), labels}};
}

VoteRecords collect_votes(std::span<const ClassifierModel> models, std::span<const std::size_t> allocation,
                          std::span<const MachineProfile> machines, std::span<const Sample> test_set,
                          std::uint64_t seed, std::size_t trajectories, std::size_t workers) {
    if (test_set.empty()) throw ArgumentError("empty test set");
    if (machines.empty()) throw ArgumentError("an ensemble needs at least one machine");
    check_models(models, allocation);
    for (const MachineProfile& m : machines) m.validate();

    VoteRecords rec;
    rec.classifiers = classifier_ids(allocation, machines.size());
    rec.machines.assign(machines.begin(), machines.end());
    rec.samples.resize(test_set.size());
    parallel_for(test_set.size(), workers, [&](std::size_t i) {
        std::vector<ClassifierVote> votes;
        votes.reserve(rec.classifiers.size());
        for (const ClassifierId& id : rec.classifiers) {
            const Executor exec =
                Executor::noisy(machines[id.machine], derive_seed(seed, {i, id.copy, id.machine}), trajectories);
            ConfidenceVector conf = confidence(models[id.variant], test_set[i].features, exec);
            const Label p = predict(conf);
            votes.push_back({id, std::move(conf), p});
        }
        rec.samples[i] = {i, test_set[i].label, make_tally(std::move(votes))};
    });
    return rec;
}

VoteRecords collect_noiseless_votes(std::span<const ClassifierModel> models, std::span<const std::size_t> allocation,
                                    std::span<const Sample> test_set) {
    if (test_set.empty()) throw ArgumentError("empty test set");
    check_models(models, allocation);
    VoteRecords rec;
    rec.classifiers = classifier_ids(allocation, 1);
    rec.samples.resize(test_set.size());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        std::vector<ClassifierVote> votes;
        for (const ClassifierId& id : rec.classifiers) {
            ConfidenceVector conf = confidence(models[id.variant], test_set[i].features, Executor::noiseless());
            const Label p = predict(conf);
            votes.push_back({id, std::move(conf), p});
        }
        rec.samples[i] = {i, test_set[i].label, make_tally(std::move(votes))};
    }
    return rec;
}

EnsembleOutcome aggregate(const VoteRecords& records, Strategy strategy, std::span<const double> weights) {
    if (records.samples.empty()) throw ArgumentError("no vote records");
    if (strategy == Strategy::AccuracyWeighted && weights.size() != records.classifiers.size()) {
        throw ArgumentError("accuracy-weighted aggregation needs one weight per classifier");
    }
    EnsembleOutcome out;
    std::size_t correct = 0;
    for (const SampleVotes& s : records.samples) {
        Label label = 0;
        switch (strategy) {
            case Strategy::Plurality: label = plurality_vote(s.tally); break;
            case Strategy::Average: label = average_aggregate(confidences_of(s.tally)).label; break;
            case Strategy::AccuracyWeighted: label = weighted_aggregate(confidences_of(s.tally), weights).label; break;
        }
        out.predictions.push_back(label);
        if (label == s.true_label) ++correct;
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(records.samples.size());
    return out;
}

std::vector<double> validation_weights(std::span<const ClassifierModel> models, const VoteRecords& records,
                                       std::span<const Sample> validation, std::uint64_t seed,
                                       std::size_t trajectories, std::size_t workers) {
    if (validation.empty()) throw ArgumentError("empty validation set");
    const std::size_t n_machines = std::max<std::size_t>(records.machines.size(), 1);
    std::vector<double> pair_acc(models.size() * n_machines, 0.0);
    parallel_for(pair_acc.size(), workers, [&](std::size_t k) {
        const std::size_t v = k / n_machines;
        const std::size_t m = k % n_machines;
        const Executor exec = records.machines.empty()
                                  ? Executor::noiseless()
                                  : Executor::noisy(records.machines[m], derive_seed(seed, {v, m}), trajectories);
        pair_acc[k] = accuracy(models[v], validation, exec);
    });
    std::vector<double> weights;
    for (const ClassifierId& id : records.classifiers) weights.push_back(pair_acc[id.variant * n_machines + id.machine]);
    return weights;
}

EnsembleOutcome run_ensemble(std::span<const ClassifierModel> models, std::span<const std::size_t> allocation,
                             std::span<const MachineProfile> machines, std::span<const Sample> test_set,
                             Strategy strategy, std::uint64_t seed, std::span<const Sample> validation,
                             std::size_t trajectories) {
    const VoteRecords rec = collect_votes(models, allocation, machines, test_set, seed, trajectories);
    if (strategy != Strategy::AccuracyWeighted) return aggregate(rec, strategy);
    const std::vector<double> w = validation_weights(models, rec, validation, seed, trajectories);
    return aggregate(rec, strategy, w);
}

std::string format_vote_records(const VoteRecords& records, const EnsembleOutcome& outcome) {
    if (outcome.predictions.size() != records.samples.size()) throw ArgumentError("outcome does not match records");
    std::string out = "sample_id,true_label,classifier,variant,copy,machine,predicted";
    if (!records.samples.empty() && !records.samples.front().tally.per_classifier.empty()) {
        for (Label l : records.samples.front().tally.per_classifier.front().confidence.class_labels) {
            out += ",conf_" + std::to_string(l);
        }
    }
    out += ",final_label\n";
    for (std::size_t i = 0; i < records.samples.size(); ++i) {
        const SampleVotes& s = records.samples[i];
        for (const ClassifierVote& v : s.tally.per_classifier) {
            const std::string machine =
                records.machines.empty() ? std::string("noiseless") : records.machines[v.id.machine].name;
            out += std::to_string(s.sample_id) + ',' + std::to_string(s.true_label) + ',' + v.id.name() + ',' +
                   std::to_string(v.id.variant) + ',' + std::to_string(v.id.copy) + ',' + machine + ',' +
                   std::to_string(v.predicted);
            for (double c : v.confidence.values) out += ',' + kv::format_double(c);
            out += ',' + std::to_string(outcome.predictions[i]) + '\n';
        }
    }
    return out;
}

}  // namespace eqv
