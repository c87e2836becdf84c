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

// Noise channels and machine profiles.
//
// A machine's scalar CNOT error drives a two-qubit depolarizing channel
// applied after every CNOT; its scalar readout error drives independent
// symmetric bit flips on every measured bit. Noisy runs are realized as
// stochastic trajectories, one statevector simulation per shot.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eqv/rng.hpp"
#include "eqv/simcore.hpp"

namespace eqv {

struct MachineProfile {
    std::string name;
    std::size_t n_qubits = 1;
    double readout_error = 0.0;
    double cnot_error = 0.0;
    int quantum_volume = 0;  // metadata only
    std::size_t shots = 1024;

    /// Throws ArgumentError if a probability is outside [0,1] or a count is 0.
    void validate() const;
    bool operator==(const MachineProfile&) const = default;
};

/// The five IBM machines used in the experiments, in table order:
/// ibmq_lima, ibmq_quito, ibmq_belem, ibm_nairobi, ibm_oslo.
std::vector<MachineProfile> load_profiles();

/// Finds a profile by name; throws ConfigError if absent.
const MachineProfile& find_profile(std::span<const MachineProfile> profiles, std::string_view name);

/// Parses profiles from key-value text: one `[name]` section per machine with
/// keys n_qubits, readout_error, cnot_error, quantum_volume, shots.
std::vector<MachineProfile> parse_profiles(const std::string& text);
std::vector<MachineProfile> load_profiles_file(const std::filesystem::path& path);
std::string format_profiles(std::span<const MachineProfile> profiles);

struct NoisyExecutionConfig {
    MachineProfile profile;
    std::size_t trajectories = 1024;
    std::uint64_t seed = 0;

    /// trajectories defaults to the profile's shot count.
    static NoisyExecutionConfig for_profile(const MachineProfile& profile, std::uint64_t seed);
};

/// Two-qubit Pauli drawn by the depolarizing channel. `index` in [1, 15]
/// encodes (control Pauli, target Pauli) as index / 4, index % 4 with
/// 0 = I, 1 = X, 2 = Y, 3 = Z; 0 means no error.
struct TwoQubitPauli {
    std::uint8_t index = 0;

    Pauli on_control() const { return static_cast<Pauli>(index / 4); }
    Pauli on_target() const { return static_cast<Pauli>(index % 4); }
    bool is_identity() const { return index == 0; }
};

/// One depolarizing draw: with probability p a uniformly chosen non-identity
/// two-qubit Pauli, otherwise identity.
TwoQubitPauli draw_depolarizing(double p, Rng& rng);

/// Ideal CNOT followed by the depolarizing channel with parameter p.
StateVector apply_cnot_depolarizing(const StateVector& state, double p, std::size_t control, std::size_t target,
                                    Rng& rng);

/// Flips each of the low `n_bits` bits independently with probability p_flip.
std::uint64_t apply_readout_error(std::uint64_t bits, std::size_t n_bits, double p_flip, Rng& rng);

/// Runs `config.trajectories` noisy shots. Shot k uses the substream
/// derive_seed(config.seed, {k}), so the histogram is a pure function of the
/// arguments. Throws ArgumentError if the circuit is wider than the machine.
ShotHistogram noisy_execute(const Circuit& circuit, std::span<const double> params, std::span<const double> features,
                            const NoisyExecutionConfig& config);

}  // namespace eqv
