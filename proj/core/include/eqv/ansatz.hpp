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

// Hardware-efficient ansatz construction and structural variants.
//
// Layout: one encoding layer (an RY per qubit, angle taken from a feature
// slot), then n_blocks entangled unitaries. Each entangled unitary is a CNOT
// layer whose undirected graph connects every qubit, followed by trainable
// rotations on every qubit.
//
// CNOT layers are derived from a qubit ordering (o_0, o_1, ..., o_{n-1}):
//   chain:     o_0->o_1, o_1->o_2, ..., o_{n-2}->o_{n-1}
//   all-pairs: o_i->o_j for every i < j, in lexicographic order
// Variants of one base share everything except the ordering.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eqv/simcore.hpp"

namespace eqv {

struct CnotPair {
    std::size_t control = 0;
    std::size_t target = 0;
    bool operator==(const CnotPair&) const = default;
};

enum class Entangler : std::uint8_t { Chain, AllPairs };

/// Trainable rotations applied to each qubit in every entangled unitary.
enum class RotationLayout : std::uint8_t { Y, YZ };

std::string to_string(Entangler e);
std::string to_string(RotationLayout r);
Entangler parse_entangler(const std::string& text);
RotationLayout parse_rotation_layout(const std::string& text);

/// Gate kinds a layout places on each qubit, in application order.
std::vector<GateKind> rotation_kinds(RotationLayout layout);

/// True when the undirected graph induced by `pairs` over n_qubits vertices
/// is connected.
bool cnot_graph_connected(std::size_t n_qubits, std::span<const CnotPair> pairs);

struct EntangledUnitary {
    std::vector<CnotPair> cnot_pairs;
    /// rotation_layer[q] lists the trainable rotation kinds on qubit q.
    std::vector<std::vector<GateKind>> rotation_layer;
};

struct AnsatzSpec {
    std::size_t n_qubits = 0;
    std::vector<GateOp> encoding_gates;
    std::vector<EntangledUnitary> blocks;
    std::size_t n_features = 0;
    std::size_t n_params = 0;

    // How the blocks were generated; variants regenerate CNOT layers from a
    // different ordering with the same entangler and rotation layout.
    Entangler entangler = Entangler::Chain;
    RotationLayout rotations = RotationLayout::Y;
    std::vector<std::size_t> ordering;

    /// Throws InvariantError unless every block rotates every qubit, every
    /// block's CNOT graph is connected, and the slot counts match the gates.
    void validate() const;

    /// Flattens to a gate list: encoding layer, then for each block its CNOTs
    /// followed by its rotations (qubit-major). Parameter slots are numbered
    /// in that order.
    Circuit to_circuit() const;
};

struct HeaOptions {
    RotationLayout rotations = RotationLayout::Y;
    Entangler entangler = Entangler::Chain;
};

/// Base ordering used by build_hea: 0, 1, ..., n-1.
std::vector<std::size_t> identity_ordering(std::size_t n_qubits);

/// CNOT layer for an ordering.
std::vector<CnotPair> cnot_layout(std::span<const std::size_t> ordering, Entangler entangler);

/// Builds the base ansatz. Throws ArgumentError for n_qubits < 2 or n_blocks < 1.
AnsatzSpec build_hea(std::size_t n_qubits, std::size_t n_blocks, HeaOptions options = {});

/// Rebuilds `base` with every block's CNOT layer generated from `ordering`.
AnsatzSpec with_ordering(const AnsatzSpec& base, std::span<const std::size_t> ordering);

/// One structural variant of a base ansatz.
struct Variant {
    AnsatzSpec spec;
    std::size_t variant_id = 0;

    std::size_t n_qubits() const { return spec.n_qubits; }
    Circuit circuit() const { return spec.to_circuit(); }

    /// Per-block CNOT pairs.
    std::vector<std::vector<CnotPair>> cnot_layouts() const;

    /// Readout qubits for a K-class decoder: the last ceil(log2 K) qubits of
    /// the ordering, tail first. The tail of a chain is the qubit whose
    /// marginal depends on every feature.
    std::vector<std::size_t> default_readout(std::size_t n_classes) const;
};

/// Number of distinct CNOT layouts (orderings) available for a width: n!.
std::uint64_t count_layouts(std::size_t n_qubits);

/// Returns k distinct variants: variant 0 uses the base ordering; the others
/// are orderings sampled without replacement under `seed`. Throws
/// ArgumentError if k is 0 or exceeds count_layouts(base.n_qubits).
std::vector<Variant> generate_variants(const AnsatzSpec& base, std::size_t k, std::uint64_t seed);

/// Maps features in [0,1] to encoding angles pi * x. Throws ArgumentError
/// for any feature outside [0,1].
std::vector<double> embed_features(std::span<const double> features);

/// Structured-text form of a variant (qubits, blocks, CNOT pairs, rotation
/// kinds). parse_variant(format_variant(v)) reproduces v.
std::string format_variant(const Variant& variant);
Variant parse_variant(const std::string& text);

}  // namespace eqv
