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

// Exact statevector simulation of {RX, RY, RZ, CNOT} circuits.
//
// Conventions used throughout the library:
//   * RX(t) = exp(-i t X / 2), RY(t) = exp(-i t Y / 2), RZ(t) = exp(-i t Z / 2).
//   * Basis index i encodes qubit q in bit q, i.e. qubit 0 is the least
//     significant bit. Printed bitstrings put qubit n-1 leftmost.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eqv {

using Complex = std::complex<double>;

/// Tolerance for exactness checks (normalization of a single state).
inline constexpr double kExactTolerance = 1e-10;
/// Tolerance for checks after accumulated floating-point work.
inline constexpr double kAccumulatedTolerance = 1e-9;
/// Largest register the simulator accepts.
inline constexpr std::size_t kMaxQubits = 10;

enum class GateKind : std::uint8_t { RX, RY, RZ, CNOT };

enum class Pauli : std::uint8_t { I, X, Y, Z };

std::string_view to_string(GateKind kind);
/// Parses "RX", "RY", "RZ" or "CNOT" (case-insensitive).
GateKind parse_gate_kind(std::string_view text);

/// Where a rotation gate takes its angle from.
struct AngleSource {
    enum class Kind : std::uint8_t { Bound, Param, Feature };

    Kind kind = Kind::Bound;
    double radians = 0.0;   // Bound only
    std::size_t slot = 0;  // Param / Feature only

    static AngleSource bound(double radians) { return {Kind::Bound, radians, 0}; }
    static AngleSource param(std::size_t slot) { return {Kind::Param, 0.0, slot}; }
    static AngleSource feature(std::size_t slot) { return {Kind::Feature, 0.0, slot}; }

    bool operator==(const AngleSource&) const = default;
};

struct GateOp {
    GateKind kind = GateKind::RY;
    std::size_t target = 0;
    std::size_t control = 0;  // CNOT only
    std::optional<AngleSource> angle;  // rotations only

    static GateOp rotation(GateKind kind, std::size_t target, AngleSource source);
    static GateOp cnot(std::size_t control, std::size_t target);

    bool is_rotation() const { return kind != GateKind::CNOT; }
    bool operator==(const GateOp&) const = default;
};

/// Amplitudes of an n-qubit register. Always normalized.
class StateVector {
   public:
    /// The all-zero basis state |0...0>.
    explicit StateVector(std::size_t n_qubits);

    /// Takes ownership of explicit amplitudes. Throws ArgumentError if the
    /// length is not a power of two and InvariantError if the squared norm
    /// differs from 1 by more than kExactTolerance.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    /// Computational basis state |index>.
    static StateVector basis(std::size_t n_qubits, std::uint64_t index);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
    double norm_squared() const;

    // In-place kernels. Callers are responsible for index validation; the
    // pure entry points (apply_gate, run_circuit) validate before use.
    void apply_rotation(GateKind kind, std::size_t target, double angle);
    void apply_cnot(std::size_t control, std::size_t target);
    void apply_pauli(Pauli pauli, std::size_t qubit);

    bool operator==(const StateVector&) const = default;

   private:
    StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes)
        : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

    std::size_t n_qubits_;
    std::vector<Complex> amplitudes_;
};

/// Applies one gate and returns the new state; `state` is left untouched.
/// `angle` must be present exactly when the gate is a rotation.
StateVector apply_gate(const StateVector& state, const GateOp& gate, std::optional<double> angle);

/// An ordered gate list with trainable-parameter and feature slots.
class Circuit {
   public:
    /// Validates every op against the register width and requires each slot in
    /// [0, n_params) and [0, n_features) to be referenced at least once.
    Circuit(std::size_t n_qubits, std::vector<GateOp> ops, std::size_t n_params, std::size_t n_features);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t n_params() const { return n_params_; }
    std::size_t n_features() const { return n_features_; }
    std::span<const GateOp> ops() const { return ops_; }
    std::size_t cnot_count() const;

   private:
    std::size_t n_qubits_;
    std::vector<GateOp> ops_;
    std::size_t n_params_;
    std::size_t n_features_;
};

/// Looks up the numeric angle for a rotation's source.
double resolve_angle(const AngleSource& source, std::span<const double> params, std::span<const double> features);

/// Runs the circuit from |0...0>.
StateVector run_circuit(const Circuit& circuit, std::span<const double> params, std::span<const double> features);

/// Same as run_circuit, but adds `shift` radians to the angle of the rotation
/// at position `op_index`. This is the hook used by parameter-shift gradients.
StateVector run_circuit_shifted(const Circuit& circuit, std::span<const double> params,
                                std::span<const double> features, std::size_t op_index, double shift);

/// Throws ArgumentError unless params/features match the circuit's slot counts.
void check_circuit_inputs(const Circuit& circuit, std::span<const double> params, std::span<const double> features);

/// Born-rule outcome probabilities, entry i = |amplitude_i|^2.
std::vector<double> born_probabilities(const StateVector& state);

/// Per-basis-state outcome counts. counts[i] is the number of shots that
/// produced basis index i.
struct ShotHistogram {
    std::size_t n_qubits = 0;
    std::vector<std::uint64_t> counts;
    std::uint64_t total_shots = 0;

    /// Counts divided by total_shots.
    std::vector<double> frequencies() const;
    bool operator==(const ShotHistogram&) const = default;
};

/// Bitstring for a basis index with qubit n-1 leftmost ("01" = qubit 0 set).
std::string to_bitstring(std::uint64_t index, std::size_t n_qubits);

/// Inverse-CDF draw: the first index whose cumulative mass exceeds u.
/// Zero-probability outcomes are never returned.
std::size_t sample_index(std::span<const double> dist, double u);

/// Draws `shots` independent outcomes from `dist` (length 2^n). Throws
/// ArgumentError for zero shots or a distribution that does not sum to 1
/// within kAccumulatedTolerance.
ShotHistogram sample_shots(std::span<const double> dist, std::size_t shots, std::uint64_t seed);

}  // namespace eqv
