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

#include "eqv/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "eqv/error.hpp"
#include "eqv/kvfile.hpp"

namespace eqv {

namespace {

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError(std::string(what) + " must be in [0, 1]");
}

}  // namespace

void MachineProfile::validate() const {
    check_probability(readout_error, "readout_error");
    check_probability(cnot_error, "cnot_error");
    if (shots == 0) throw ArgumentError("profile " + name + ": shots must be >= 1");
    if (n_qubits == 0) throw ArgumentError("profile " + name + ": n_qubits must be >= 1");
}

std::vector<MachineProfile> load_profiles() {
    return {
        {"ibmq_lima", 5, 2.734e-2, 1.166e-2, 8, 1024},
        {"ibmq_quito", 5, 4.714e-2, 9.675e-3, 16, 1024},
        {"ibmq_belem", 5, 3.080e-2, 6.176e-2, 16, 1024},
        {"ibm_nairobi", 7, 4.599e-2, 1.015e-2, 32, 1024},
        {"ibm_oslo", 7, 2.411e-2, 1.111e-2, 32, 1024},
    };
}

const MachineProfile& find_profile(std::span<const MachineProfile> profiles, std::string_view name) {
    for (const MachineProfile& p : profiles) {
        if (p.name == name) return p;
    }
    throw ConfigError("unknown machine profile '" + std::string(name) + "'");
}

std::vector<MachineProfile> parse_profiles(const std::string& text) {
    const kv::Tree tree = kv::parse(text);
    std::vector<MachineProfile> out;
    for (const auto& [name, sec] : tree) {
        if (sec.empty()) continue;
        MachineProfile p;
        p.name = name;
        p.n_qubits = kv::get_count(sec, "n_qubits");
        p.readout_error = kv::get_double(sec, "readout_error");
        p.cnot_error = kv::get_double(sec, "cnot_error");
        p.quantum_volume = static_cast<int>(kv::get_int(sec, "quantum_volume"));
        p.shots = kv::get_count(sec, "shots");
        p.validate();
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<MachineProfile> load_profiles_file(const std::filesystem::path& path) {
    std::ifstream probe(path);
    if (!probe) throw ConfigError("cannot open profile file " + path.string());
    std::string text((std::istreambuf_iterator<char>(probe)), std::istreambuf_iterator<char>());
    return parse_profiles(text);
}

std::string format_profiles(std::span<const MachineProfile> profiles) {
    kv::Tree tree;
    for (const MachineProfile& p : profiles) {
        kv::Tree sec;
        sec.put("n_qubits", p.n_qubits);
        sec.put("readout_error", kv::format_double(p.readout_error));
        sec.put("cnot_error", kv::format_double(p.cnot_error));
        sec.put("quantum_volume", p.quantum_volume);
        sec.put("shots", p.shots);
        tree.add_child(kv::Tree::path_type(p.name, '\0'), sec);
    }
    return kv::format(tree);
}

NoisyExecutionConfig NoisyExecutionConfig::for_profile(const MachineProfile& profile, std::uint64_t seed) {
    return {profile, profile.shots, seed};
}

TwoQubitPauli draw_depolarizing(double p, Rng& rng) {
    check_probability(p, "depolarizing probability");
    if (p == 0.0) return {};
    if (!rng.bernoulli(p)) return {};
    return {static_cast<std::uint8_t>(1 + rng.below(15))};
}

StateVector apply_cnot_depolarizing(const StateVector& state, double p, std::size_t control, std::size_t target,
                                    Rng& rng) {
    StateVector out = apply_gate(state, GateOp::cnot(control, target), std::nullopt);
    const TwoQubitPauli err = draw_depolarizing(p, rng);
    if (!err.is_identity()) {
        out.apply_pauli(err.on_control(), control);
        out.apply_pauli(err.on_target(), target);
    }
    return out;
}

std::uint64_t apply_readout_error(std::uint64_t bits, std::size_t n_bits, double p_flip, Rng& rng) {
    check_probability(p_flip, "readout flip probability");
    if (p_flip == 0.0) return bits;
    for (std::size_t q = 0; q < n_bits; ++q) {
        if (rng.bernoulli(p_flip)) bits ^= std::uint64_t{1} << q;
    }
    return bits;
}

ShotHistogram noisy_execute(const Circuit& circuit, std::span<const double> params, std::span<const double> features,
                            const NoisyExecutionConfig& config) {
    config.profile.validate();
    if (config.trajectories == 0) throw ArgumentError("trajectories must be >= 1");
    if (circuit.n_qubits() > config.profile.n_qubits) {
        throw ArgumentError("circuit needs " + std::to_string(circuit.n_qubits()) + " qubits but " +
                            config.profile.name + " has " + std::to_string(config.profile.n_qubits));
    }
    check_circuit_inputs(circuit, params, features);

    const std::size_t n = circuit.n_qubits();
    const std::vector<double> ideal = born_probabilities(run_circuit(circuit, params, features));
    const std::size_t n_cnots = circuit.cnot_count();
    const double p_cnot = config.profile.cnot_error;
    const double p_read = config.profile.readout_error;

    ShotHistogram hist;
    hist.n_qubits = n;
    hist.counts.assign(std::size_t{1} << n, 0);
    hist.total_shots = config.trajectories;

    std::vector<TwoQubitPauli> events(n_cnots);
    for (std::size_t shot = 0; shot < config.trajectories; ++shot) {
        Rng rng(derive_seed(config.seed, {shot}));
        bool any_error = false;
        for (TwoQubitPauli& e : events) {
            e = draw_depolarizing(p_cnot, rng);
            any_error = any_error || !e.is_identity();
        }

        std::uint64_t outcome = 0;
        if (!any_error) {
            // Error-free trajectory: the outcome law is the ideal Born rule.
            outcome = sample_index(ideal, rng.uniform());
        } else {
            StateVector state(n);
            std::size_t k = 0;
            for (const GateOp& op : circuit.ops()) {
                if (op.is_rotation()) {
                    state.apply_rotation(op.kind, op.target, resolve_angle(*op.angle, params, features));
                    continue;
                }
                state.apply_cnot(op.control, op.target);
                const TwoQubitPauli e = events[k++];
                if (!e.is_identity()) {
                    state.apply_pauli(e.on_control(), op.control);
                    state.apply_pauli(e.on_target(), op.target);
                }
            }
            std::vector<double> probs(state.dimension());
            for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::norm(state[i]);
            outcome = sample_index(probs, rng.uniform());
        }
        outcome = apply_readout_error(outcome, n, p_read, rng);
        ++hist.counts[outcome];
    }
    return hist;
}

}  // namespace eqv
