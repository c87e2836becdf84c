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

#include "eqv/simcore.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <string>

#include "eqv/error.hpp"
#include "eqv/rng.hpp"

namespace eqv {

namespace {

void check_qubit(std::size_t qubit, std::size_t n_qubits, const char* what) {
    if (qubit >= n_qubits) {
        throw IndexError(std::string(what) + " qubit " + std::to_string(qubit) + " out of range for " +
                         std::to_string(n_qubits) + "-qubit register");
    }
}

void check_gate_indices(const GateOp& gate, std::size_t n_qubits) {
    check_qubit(gate.target, n_qubits, "target");
    if (gate.kind == GateKind::CNOT) {
        check_qubit(gate.control, n_qubits, "control");
        if (gate.control == gate.target) throw IndexError("CNOT control equals target");
    }
}

void check_gate_shape(const GateOp& gate) {
    if (gate.is_rotation() && !gate.angle) throw ArgumentError("rotation gate without angle source");
    if (!gate.is_rotation() && gate.angle) throw ArgumentError("CNOT carries an angle source");
}

}  // namespace

std::string_view to_string(GateKind kind) {
    switch (kind) {
        case GateKind::RX:
            return "RX";
        case GateKind::RY:
            return "RY";
        case GateKind::RZ:
            return "RZ";
        case GateKind::CNOT:
            return "CNOT";
    }
    return "?";
}

GateKind parse_gate_kind(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "RX") return GateKind::RX;
    if (upper == "RY") return GateKind::RY;
    if (upper == "RZ") return GateKind::RZ;
    if (upper == "CNOT" || upper == "CX") return GateKind::CNOT;
    throw FormatError("unknown gate kind '" + std::string(text) + "'");
}

GateOp GateOp::rotation(GateKind kind, std::size_t target, AngleSource source) {
    if (kind == GateKind::CNOT) throw ArgumentError("GateOp::rotation called with CNOT");
    return GateOp{kind, target, 0, source};
}

GateOp GateOp::cnot(std::size_t control, std::size_t target) {
    if (control == target) throw IndexError("CNOT control equals target");
    return GateOp{GateKind::CNOT, target, control, std::nullopt};
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits > kMaxQubits) throw ArgumentError("register wider than " + std::to_string(kMaxQubits) + " qubits");
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim == 0 || !std::has_single_bit(dim)) {
        throw ArgumentError("amplitude count " + std::to_string(dim) + " is not a power of two");
    }
    const std::size_t n = static_cast<std::size_t>(std::countr_zero(dim));
    if (n > kMaxQubits) throw ArgumentError("register wider than " + std::to_string(kMaxQubits) + " qubits");
    StateVector state(n, std::move(amplitudes));
    if (std::abs(state.norm_squared() - 1.0) > kExactTolerance) {
        throw InvariantError("state is not normalized");
    }
    return state;
}

StateVector StateVector::basis(std::size_t n_qubits, std::uint64_t index) {
    StateVector state(n_qubits);
    if (index >= state.dimension()) throw IndexError("basis index out of range");
    state.amplitudes_[0] = 0.0;
    state.amplitudes_[index] = 1.0;
    return state;
}

double StateVector::norm_squared() const {
    double sum = 0.0;
    for (const Complex& a : amplitudes_) sum += std::norm(a);
    return sum;
}

void StateVector::apply_rotation(GateKind kind, std::size_t target, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    const std::size_t stride = std::size_t{1} << target;
    const std::size_t dim = amplitudes_.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            Complex& a0 = amplitudes_[i];
            Complex& a1 = amplitudes_[i + stride];
            const Complex x0 = a0;
            const Complex x1 = a1;
            switch (kind) {
                case GateKind::RX:
                    // [[c, -is], [-is, c]]
                    a0 = c * x0 + Complex{0.0, -s} * x1;
                    a1 = Complex{0.0, -s} * x0 + c * x1;
                    break;
                case GateKind::RY:
                    a0 = c * x0 - s * x1;
                    a1 = s * x0 + c * x1;
                    break;
                case GateKind::RZ:
                    a0 = Complex{c, -s} * x0;
                    a1 = Complex{c, s} * x1;
                    break;
                case GateKind::CNOT:
                    throw ArgumentError("apply_rotation called with CNOT");
            }
        }
    }
}

void StateVector::apply_cnot(std::size_t control, std::size_t target) {
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t dim = amplitudes_.size();
    for (std::size_t i = 0; i < dim; ++i) {
        // Visit each swapped pair once, from its target-bit-0 member.
        if ((i & cmask) && !(i & tmask)) std::swap(amplitudes_[i], amplitudes_[i | tmask]);
    }
}

void StateVector::apply_pauli(Pauli pauli, std::size_t qubit) {
    if (pauli == Pauli::I) return;
    const std::size_t mask = std::size_t{1} << qubit;
    const std::size_t dim = amplitudes_.size();
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & mask) continue;
        Complex& a0 = amplitudes_[i];
        Complex& a1 = amplitudes_[i | mask];
        switch (pauli) {
            case Pauli::X:
                std::swap(a0, a1);
                break;
            case Pauli::Y: {
                const Complex x0 = a0;
                a0 = Complex{0.0, -1.0} * a1;
                a1 = Complex{0.0, 1.0} * x0;
                break;
            }
            case Pauli::Z:
                a1 = -a1;
                break;
            case Pauli::I:
                break;
        }
    }
}

StateVector apply_gate(const StateVector& state, const GateOp& gate, std::optional<double> angle) {
    check_gate_indices(gate, state.n_qubits());
    if (gate.is_rotation() && !angle) throw ArgumentError("angle missing for rotation gate");
    if (!gate.is_rotation() && angle) throw ArgumentError("angle supplied for CNOT");
    StateVector out = state;
    if (gate.is_rotation()) {
        out.apply_rotation(gate.kind, gate.target, *angle);
    } else {
        out.apply_cnot(gate.control, gate.target);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Circuit

Circuit::Circuit(std::size_t n_qubits, std::vector<GateOp> ops, std::size_t n_params, std::size_t n_features)
    : n_qubits_(n_qubits), ops_(std::move(ops)), n_params_(n_params), n_features_(n_features) {
    if (n_qubits == 0 || n_qubits > kMaxQubits) throw ArgumentError("circuit width must be in [1, 10]");
    std::vector<bool> param_seen(n_params, false);
    std::vector<bool> feature_seen(n_features, false);
    for (const GateOp& op : ops_) {
        check_gate_shape(op);
        check_gate_indices(op, n_qubits);
        if (!op.angle) continue;
        if (op.angle->kind == AngleSource::Kind::Param) {
            if (op.angle->slot >= n_params) throw IndexError("parameter slot out of range");
            param_seen[op.angle->slot] = true;
        } else if (op.angle->kind == AngleSource::Kind::Feature) {
            if (op.angle->slot >= n_features) throw IndexError("feature slot out of range");
            feature_seen[op.angle->slot] = true;
        }
    }
    if (std::find(param_seen.begin(), param_seen.end(), false) != param_seen.end()) {
        throw InvariantError("a parameter slot is never referenced");
    }
    if (std::find(feature_seen.begin(), feature_seen.end(), false) != feature_seen.end()) {
        throw InvariantError("a feature slot is never referenced");
    }
}

std::size_t Circuit::cnot_count() const {
    return static_cast<std::size_t>(
        std::count_if(ops_.begin(), ops_.end(), [](const GateOp& op) { return op.kind == GateKind::CNOT; }));
}

double resolve_angle(const AngleSource& source, std::span<const double> params, std::span<const double> features) {
    switch (source.kind) {
        case AngleSource::Kind::Bound:
            return source.radians;
        case AngleSource::Kind::Param:
            return params[source.slot];
        case AngleSource::Kind::Feature:
            return features[source.slot];
    }
    return 0.0;
}

void check_circuit_inputs(const Circuit& circuit, std::span<const double> params, std::span<const double> features) {
    if (params.size() != circuit.n_params()) {
        throw ArgumentError("expected " + std::to_string(circuit.n_params()) + " parameters, got " +
                            std::to_string(params.size()));
    }
    if (features.size() != circuit.n_features()) {
        throw ArgumentError("expected " + std::to_string(circuit.n_features()) + " features, got " +
                            std::to_string(features.size()));
    }
}

StateVector run_circuit(const Circuit& circuit, std::span<const double> params, std::span<const double> features) {
    check_circuit_inputs(circuit, params, features);
    StateVector state(circuit.n_qubits());
    for (const GateOp& op : circuit.ops()) {
        if (op.is_rotation()) {
            state.apply_rotation(op.kind, op.target, resolve_angle(*op.angle, params, features));
        } else {
            state.apply_cnot(op.control, op.target);
        }
    }
    return state;
}

StateVector run_circuit_shifted(const Circuit& circuit, std::span<const double> params,
                                std::span<const double> features, std::size_t op_index, double shift) {
    check_circuit_inputs(circuit, params, features);
    const auto ops = circuit.ops();
    if (op_index >= ops.size()) throw IndexError("shifted op index out of range");
    if (!ops[op_index].is_rotation()) throw ArgumentError("only rotation gates can be shifted");
    StateVector state(circuit.n_qubits());
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const GateOp& op = ops[k];
        if (op.is_rotation()) {
            double angle = resolve_angle(*op.angle, params, features);
            if (k == op_index) angle += shift;
            state.apply_rotation(op.kind, op.target, angle);
        } else {
            state.apply_cnot(op.control, op.target);
        }
    }
    return state;
}

// ---------------------------------------------------------------------------
// Measurement

std::vector<double> born_probabilities(const StateVector& state) {
    std::vector<double> probs(state.dimension());
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        probs[i] = std::norm(state[i]);
        total += probs[i];
    }
    if (std::abs(total - 1.0) > kAccumulatedTolerance) throw InvariantError("state is not normalized");
    return probs;
}

std::vector<double> ShotHistogram::frequencies() const {
    std::vector<double> f(counts.size(), 0.0);
    if (total_shots == 0) return f;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        f[i] = static_cast<double>(counts[i]) / static_cast<double>(total_shots);
    }
    return f;
}

std::string to_bitstring(std::uint64_t index, std::size_t n_qubits) {
    std::string s(n_qubits, '0');
    for (std::size_t q = 0; q < n_qubits; ++q) {
        if ((index >> q) & 1U) s[n_qubits - 1 - q] = '1';
    }
    return s;
}

std::size_t sample_index(std::span<const double> dist, double u) {
    double cumulative = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] <= 0.0) continue;
        last_nonzero = i;
        cumulative += dist[i];
        if (u < cumulative) return i;
    }
    // u landed in the rounding gap above the accumulated total.
    return last_nonzero;
}

ShotHistogram sample_shots(std::span<const double> dist, std::size_t shots, std::uint64_t seed) {
    if (shots == 0) throw ArgumentError("shots must be at least 1");
    if (dist.empty() || !std::has_single_bit(dist.size())) {
        throw ArgumentError("distribution length must be a power of two");
    }
    double total = 0.0;
    for (double p : dist) {
        if (p < 0.0 || !std::isfinite(p)) throw ArgumentError("distribution has a negative or non-finite entry");
        total += p;
    }
    if (std::abs(total - 1.0) > kAccumulatedTolerance) throw ArgumentError("distribution does not sum to 1");

    ShotHistogram hist;
    hist.n_qubits = static_cast<std::size_t>(std::countr_zero(dist.size()));
    hist.counts.assign(dist.size(), 0);
    hist.total_shots = shots;
    Rng rng(seed);
    for (std::size_t s = 0; s < shots; ++s) {
        ++hist.counts[sample_index(dist, rng.uniform())];
    }
    return hist;
}

}  // namespace eqv
