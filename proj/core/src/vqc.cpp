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

#include "eqv/vqc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "eqv/error.hpp"
#include "eqv/kvfile.hpp"
#include "eqv/rng.hpp"

namespace eqv {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Stream tags for the training seed scheme.
enum : std::uint64_t { kTagShuffle = 1, kTagBatch = 2, kTagSpsaDirection = 3, kTagSpsaEval = 4 };

std::vector<double> outcome_distribution(const Circuit& circuit, std::span<const double> params,
                                         std::span<const double> angles, const Executor& executor) {
    if (executor.is_noiseless()) return born_probabilities(run_circuit(circuit, params, angles));
    NoisyExecutionConfig cfg{*executor.machine,
                             executor.trajectories ? executor.trajectories : executor.machine->shots, executor.seed};
    return noisy_execute(circuit, params, angles, cfg).frequencies();
}

ConfidenceVector to_confidence(std::vector<double> masses, const std::vector<Label>& labels) {
    const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
    if (total > 0.0) {
        for (double& m : masses) m /= total;
    } else {
        // Every shot landed on an unused bit pattern; no class is favoured.
        std::fill(masses.begin(), masses.end(), 1.0 / static_cast<double>(masses.size()));
    }
    return {std::move(masses), labels};
}

void check_features(const ClassifierModel& model, std::span<const double> features) {
    if (features.size() != model.variant.spec.n_features) {
        throw ArgumentError("expected " + std::to_string(model.variant.spec.n_features) + " features, got " +
                            std::to_string(features.size()));
    }
}

// Param slot -> indices of the rotation ops reading it.
std::vector<std::vector<std::size_t>> slot_ops(const Circuit& circuit) {
    std::vector<std::vector<std::size_t>> out(circuit.n_params());
    const auto ops = circuit.ops();
    for (std::size_t k = 0; k < ops.size(); ++k) {
        if (ops[k].angle && ops[k].angle->kind == AngleSource::Kind::Param) out[ops[k].angle->slot].push_back(k);
    }
    return out;
}

double sample_loss(const Circuit& circuit, const ClassifierModel& model, std::span<const double> params,
                   const Sample& s, const Executor& executor) {
    const std::vector<double> angles = embed_features(s.features);
    const std::vector<double> dist = outcome_distribution(circuit, params, angles, executor);
    return loss(to_confidence(class_masses(dist, model.readout_qubits, model.class_labels.size()), model.class_labels),
                s.label);
}

double batch_loss(const Circuit& circuit, const ClassifierModel& model, std::span<const double> params,
                  std::span<const Sample> samples, const Executor& executor) {
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Executor e = executor.is_noiseless() ? executor : executor.with_seed(derive_seed(executor.seed, {i}));
        total += sample_loss(circuit, model, params, samples[i], e);
    }
    return total / static_cast<double>(samples.size());
}

void check_labels(const ClassifierModel& model, std::span<const Sample> samples) {
    for (const Sample& s : samples) {
        if (std::find(model.class_labels.begin(), model.class_labels.end(), s.label) == model.class_labels.end()) {
            throw ConfigError("sample label " + std::to_string(s.label) + " is not one of the model's classes");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------

void ConfidenceVector::validate() const {
    if (values.size() < 2) throw InvariantError("confidence vector needs at least two classes");
    if (values.size() != class_labels.size()) throw InvariantError("one confidence per class label required");
    double total = 0.0;
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvariantError("confidence outside [0, 1]");
        total += v;
    }
    if (std::abs(total - 1.0) > kAccumulatedTolerance) throw InvariantError("confidences do not sum to 1");
}

std::size_t ConfidenceVector::index_of(Label label) const {
    const auto it = std::find(class_labels.begin(), class_labels.end(), label);
    if (it == class_labels.end()) throw IndexError("unknown class label " + std::to_string(label));
    return static_cast<std::size_t>(it - class_labels.begin());
}

Executor Executor::noisy(MachineProfile machine, std::uint64_t seed, std::size_t trajectories) {
    machine.validate();
    return {std::move(machine), trajectories, seed};
}

Executor Executor::with_seed(std::uint64_t s) const {
    Executor e = *this;
    e.seed = s;
    return e;
}

ClassifierModel ClassifierModel::initialize(const Variant& variant, std::vector<Label> class_labels,
                                            std::uint64_t seed) {
    ClassifierModel m;
    m.variant = variant;
    m.readout_qubits = variant.default_readout(class_labels.size());
    m.class_labels = std::move(class_labels);
    Rng rng(derive_seed(seed, {0x696e6974ULL}));  // "init"
    m.params.resize(variant.spec.n_params);
    for (double& p : m.params) p = std::numbers::pi * (2.0 * rng.uniform() - 1.0);
    m.validate();
    return m;
}

void ClassifierModel::validate() const {
    if (class_labels.size() < 2) throw InvariantError("a classifier needs at least two classes");
    if ((std::size_t{1} << readout_qubits.size()) < class_labels.size()) {
        throw InvariantError("too few readout qubits for the class count");
    }
    for (std::size_t q : readout_qubits) {
        if (q >= variant.spec.n_qubits) throw InvariantError("readout qubit outside the register");
    }
    if (params.size() != variant.spec.n_params) throw InvariantError("parameter count does not match the variant");
}

std::vector<double> class_masses(std::span<const double> outcome_probs, std::span<const std::size_t> readout_qubits,
                                 std::size_t n_classes) {
    std::vector<double> masses(n_classes, 0.0);
    for (std::size_t i = 0; i < outcome_probs.size(); ++i) {
        std::size_t cls = 0;
        for (std::size_t b = 0; b < readout_qubits.size(); ++b) cls |= ((i >> readout_qubits[b]) & 1U) << b;
        if (cls < n_classes) masses[cls] += outcome_probs[i];
    }
    return masses;
}

ConfidenceVector confidence(const ClassifierModel& model, std::span<const double> features, const Executor& executor) {
    check_features(model, features);
    const Circuit circuit = model.variant.circuit();
    const std::vector<double> angles = embed_features(features);
    const std::vector<double> dist = outcome_distribution(circuit, model.params, angles, executor);
    return to_confidence(class_masses(dist, model.readout_qubits, model.class_labels.size()), model.class_labels);
}

double loss(const ConfidenceVector& conf, Label true_label) {
    return -std::log(std::max(conf.of(true_label), kProbabilityFloor));
}

double mean_loss(const ClassifierModel& model, std::span<const Sample> samples, const Executor& executor) {
    if (samples.empty()) throw ArgumentError("mean loss of an empty sample set");
    for (const Sample& s : samples) check_features(model, s.features);
    return batch_loss(model.variant.circuit(), model, model.params, samples, executor);
}

std::vector<double> parameter_shift_gradient(const ClassifierModel& model, std::span<const Sample> batch,
                                             const Executor& executor) {
    if (batch.empty()) throw ArgumentError("gradient of an empty batch");
    const Circuit circuit = model.variant.circuit();
    const auto by_slot = slot_ops(circuit);
    const std::size_t n_classes = model.class_labels.size();
    std::vector<double> grad(model.params.size(), 0.0);

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Sample& s = batch[i];
        check_features(model, s.features);
        const std::vector<double> angles = embed_features(s.features);

        auto masses_at = [&](std::size_t slot, std::size_t op, double shift, std::uint64_t tag) {
            if (executor.is_noiseless()) {
                const StateVector psi = run_circuit_shifted(circuit, model.params, angles, op, shift);
                return class_masses(born_probabilities(psi), model.readout_qubits, n_classes);
            }
            // Shot-based: shift the parameter value itself. Valid because every
            // ansatz slot drives exactly one gate (checked below).
            std::vector<double> shifted = model.params;
            shifted[slot] += shift;
            const Executor e = executor.with_seed(derive_seed(executor.seed, {i, slot, tag}));
            return class_masses(outcome_distribution(circuit, shifted, angles, e), model.readout_qubits, n_classes);
        };

        const Executor base_exec =
            executor.is_noiseless() ? executor : executor.with_seed(derive_seed(executor.seed, {i}));
        const std::vector<double> m =
            class_masses(outcome_distribution(circuit, model.params, angles, base_exec), model.readout_qubits, n_classes);
        const double total = std::accumulate(m.begin(), m.end(), 0.0);
        if (total <= 0.0) continue;
        const std::size_t y = ConfidenceVector{m, model.class_labels}.index_of(s.label);
        const double p_y = m[y] / total;
        if (p_y < kProbabilityFloor) continue;  // loss is on the constant floor

        for (std::size_t j = 0; j < by_slot.size(); ++j) {
            if (!executor.is_noiseless() && by_slot[j].size() != 1) {
                throw ArgumentError("shot-based parameter shift needs each slot to drive one gate");
            }
            std::vector<double> dm(n_classes, 0.0);
            for (std::size_t op : by_slot[j]) {
                const std::vector<double> plus = masses_at(j, op, kHalfPi, 0);
                const std::vector<double> minus = masses_at(j, op, -kHalfPi, 1);
                for (std::size_t c = 0; c < n_classes; ++c) dm[c] += 0.5 * (plus[c] - minus[c]);
            }
            const double d_total = std::accumulate(dm.begin(), dm.end(), 0.0);
            const double dp_y = (dm[y] * total - m[y] * d_total) / (total * total);
            grad[j] += -dp_y / p_y;
        }
    }
    for (double& g : grad) g /= static_cast<double>(batch.size());
    return grad;
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(spsa_perturbation > 0.0)) throw ConfigError("spsa_perturbation must be positive");
}

TrainResult train_with_history(const ClassifierModel& model, std::span<const Sample> train_set,
                               const TrainConfig& config) {
    config.validate();
    model.validate();
    if (train_set.empty()) throw ArgumentError("empty training set");
    check_labels(model, train_set);
    for (const Sample& s : train_set) check_features(model, s.features);

    const Circuit circuit = model.variant.circuit();
    const Optimizer optimizer =
        config.optimizer.value_or(config.executor.is_noiseless() ? Optimizer::GradientDescent : Optimizer::Spsa);

    TrainResult result{model, {}};
    ClassifierModel& current = result.model;
    const Executor noiseless = Executor::noiseless();
    result.epoch_losses.push_back(batch_loss(circuit, current, current.params, train_set, noiseless));

    std::vector<std::size_t> order(train_set.size());
    std::vector<Sample> batch;
    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffler(derive_seed(config.seed, {kTagShuffle, epoch}));
        shuffler.shuffle(order);

        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++step) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (std::size_t k = start; k < stop; ++k) batch.push_back(train_set[order[k]]);
            const Executor exec = config.executor.with_seed(derive_seed(config.seed, {kTagBatch, step}));

            if (optimizer == Optimizer::GradientDescent) {
                const std::vector<double> g = parameter_shift_gradient(current, batch, exec);
                for (std::size_t j = 0; j < g.size(); ++j) current.params[j] -= config.learning_rate * g[j];
                continue;
            }

            // SPSA with the standard gain exponents; both perturbed evaluations
            // share one noise stream.
            const double k1 = static_cast<double>(step + 1);
            const double a_k = config.learning_rate / std::pow(k1, 0.602);
            const double c_k = config.spsa_perturbation / std::pow(k1, 0.101);
            Rng dir(derive_seed(config.seed, {kTagSpsaDirection, step}));
            std::vector<double> delta(current.params.size());
            for (double& d : delta) d = (dir.uniform() < 0.5) ? -1.0 : 1.0;
            std::vector<double> plus = current.params;
            std::vector<double> minus = current.params;
            for (std::size_t j = 0; j < delta.size(); ++j) {
                plus[j] += c_k * delta[j];
                minus[j] -= c_k * delta[j];
            }
            const Executor eval = exec.with_seed(derive_seed(config.seed, {kTagSpsaEval, step}));
            const double l_plus = batch_loss(circuit, current, plus, batch, eval);
            const double l_minus = batch_loss(circuit, current, minus, batch, eval);
            const double scale = (l_plus - l_minus) / (2.0 * c_k);
            for (std::size_t j = 0; j < delta.size(); ++j) current.params[j] -= a_k * scale / delta[j];
        }
        result.epoch_losses.push_back(batch_loss(circuit, current, current.params, train_set, noiseless));
    }
    return result;
}

ClassifierModel train(const ClassifierModel& model, std::span<const Sample> train_set, const TrainConfig& config) {
    return train_with_history(model, train_set, config).model;
}

ClassifierModel train(const ClassifierModel& model, const DatasetSplit& split, const TrainConfig& config) {
    if (split.class_labels != model.class_labels) throw ConfigError("dataset classes do not match the model's");
    return train(model, std::span<const Sample>(split.train), config);
}

Label predict(const ConfidenceVector& conf) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < conf.values.size(); ++i) {
        if (conf.values[i] > conf.values[best]) best = i;
    }
    return conf.class_labels.at(best);
}

double accuracy(const ClassifierModel& model, std::span<const Sample> samples, const Executor& executor) {
    if (samples.empty()) throw ArgumentError("accuracy of an empty sample set");
    const Circuit circuit = model.variant.circuit();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        check_features(model, samples[i].features);
        const Executor e = executor.is_noiseless() ? executor : executor.with_seed(derive_seed(executor.seed, {i}));
        const std::vector<double> dist =
            outcome_distribution(circuit, model.params, embed_features(samples[i].features), e);
        const ConfidenceVector conf =
            to_confidence(class_masses(dist, model.readout_qubits, model.class_labels.size()), model.class_labels);
        if (predict(conf) == samples[i].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Model files: a [model] section followed by the variant layout sections.

std::string format_model(const ClassifierModel& model) {
    kv::Tree tree;
    kv::Tree sec;
    sec.put("class_labels", kv::format_list(model.class_labels));
    sec.put("readout_qubits", kv::format_list(model.readout_qubits));
    sec.put("n_params", model.params.size());
    sec.put("params", kv::format_list(model.params));
    tree.add_child("model", sec);
    return kv::format(tree) + format_variant(model.variant);
}

ClassifierModel parse_model(const std::string& text) {
    const kv::Tree tree = kv::parse(text);
    const kv::Tree& sec = kv::section(tree, "model");
    ClassifierModel m;
    m.variant = parse_variant(text);
    m.class_labels = kv::parse_int_list(kv::get_string(sec, "class_labels"));
    m.readout_qubits = kv::parse_count_list(kv::get_string(sec, "readout_qubits"));
    m.params = kv::parse_double_list(kv::get_string(sec, "params"));
    if (m.params.size() != kv::get_count(sec, "n_params")) throw FormatError("parameter list length mismatch");
    try {
        m.validate();
    } catch (const InvariantError& e) {
        throw FormatError(std::string("inconsistent model file: ") + e.what());
    }
    return m;
}

void save_model(const std::filesystem::path& path, const ClassifierModel& model) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out << format_model(model);
}

ClassifierModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

}  // namespace eqv
