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

#include "eqv/ansatz.hpp"

#include <algorithm>
#include <bit>
#include <numbers>
#include <numeric>
#include <set>

#include "eqv/error.hpp"
#include "eqv/kvfile.hpp"
#include "eqv/rng.hpp"

namespace eqv {

std::string to_string(Entangler e) { return e == Entangler::Chain ? "chain" : "all-pairs"; }

std::string to_string(RotationLayout r) { return r == RotationLayout::Y ? "y" : "yz"; }

Entangler parse_entangler(const std::string& text) {
    if (text == "chain") return Entangler::Chain;
    if (text == "all-pairs" || text == "all_pairs") return Entangler::AllPairs;
    throw FormatError("unknown entangler '" + text + "'");
}

RotationLayout parse_rotation_layout(const std::string& text) {
    if (text == "y" || text == "Y") return RotationLayout::Y;
    if (text == "yz" || text == "YZ") return RotationLayout::YZ;
    throw FormatError("unknown rotation layout '" + text + "'");
}

std::vector<GateKind> rotation_kinds(RotationLayout layout) {
    if (layout == RotationLayout::YZ) return {GateKind::RY, GateKind::RZ};
    return {GateKind::RY};
}

bool cnot_graph_connected(std::size_t n_qubits, std::span<const CnotPair> pairs) {
    if (n_qubits <= 1) return true;
    std::vector<std::size_t> parent(n_qubits);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t components = n_qubits;
    for (const CnotPair& p : pairs) {
        if (p.control >= n_qubits || p.target >= n_qubits) return false;
        const std::size_t a = find(p.control);
        const std::size_t b = find(p.target);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

void AnsatzSpec::validate() const {
    if (encoding_gates.size() != n_features) throw InvariantError("n_features must equal the encoding gate count");
    std::size_t params = 0;
    for (const EntangledUnitary& block : blocks) {
        if (!cnot_graph_connected(n_qubits, block.cnot_pairs)) {
            throw InvariantError("entangled unitary CNOT graph does not connect all qubits");
        }
        if (block.rotation_layer.size() != n_qubits) throw InvariantError("rotation layer must cover every qubit");
        for (const auto& kinds : block.rotation_layer) {
            if (kinds.empty()) throw InvariantError("rotation layer must cover every qubit");
            params += kinds.size();
        }
    }
    if (params != n_params) throw InvariantError("n_params does not match the trainable rotation count");
}

Circuit AnsatzSpec::to_circuit() const {
    std::vector<GateOp> ops = encoding_gates;
    std::size_t slot = 0;
    for (const EntangledUnitary& block : blocks) {
        for (const CnotPair& p : block.cnot_pairs) ops.push_back(GateOp::cnot(p.control, p.target));
        for (std::size_t q = 0; q < block.rotation_layer.size(); ++q) {
            for (GateKind kind : block.rotation_layer[q]) {
                ops.push_back(GateOp::rotation(kind, q, AngleSource::param(slot++)));
            }
        }
    }
    return Circuit(n_qubits, std::move(ops), n_params, n_features);
}

std::vector<std::size_t> identity_ordering(std::size_t n_qubits) {
    std::vector<std::size_t> order(n_qubits);
    std::iota(order.begin(), order.end(), std::size_t{0});
    return order;
}

std::vector<CnotPair> cnot_layout(std::span<const std::size_t> ordering, Entangler entangler) {
    std::vector<CnotPair> pairs;
    if (entangler == Entangler::Chain) {
        for (std::size_t i = 0; i + 1 < ordering.size(); ++i) pairs.push_back({ordering[i], ordering[i + 1]});
    } else {
        for (std::size_t i = 0; i < ordering.size(); ++i) {
            for (std::size_t j = i + 1; j < ordering.size(); ++j) pairs.push_back({ordering[i], ordering[j]});
        }
    }
    return pairs;
}

AnsatzSpec build_hea(std::size_t n_qubits, std::size_t n_blocks, HeaOptions options) {
    if (n_qubits < 2) throw ArgumentError("hardware-efficient ansatz needs at least 2 qubits to entangle");
    if (n_qubits > kMaxQubits) throw ArgumentError("ansatz wider than the simulator limit");
    if (n_blocks < 1) throw ArgumentError("ansatz needs at least one entangled unitary");

    AnsatzSpec spec;
    spec.n_qubits = n_qubits;
    spec.entangler = options.entangler;
    spec.rotations = options.rotations;
    spec.ordering = identity_ordering(n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        spec.encoding_gates.push_back(GateOp::rotation(GateKind::RY, q, AngleSource::feature(q)));
    }
    spec.n_features = n_qubits;

    const std::vector<GateKind> kinds = rotation_kinds(options.rotations);
    const std::vector<CnotPair> pairs = cnot_layout(spec.ordering, options.entangler);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        spec.blocks.push_back({pairs, std::vector<std::vector<GateKind>>(n_qubits, kinds)});
    }
    spec.n_params = n_qubits * n_blocks * kinds.size();
    spec.validate();
    return spec;
}

AnsatzSpec with_ordering(const AnsatzSpec& base, std::span<const std::size_t> ordering) {
    std::vector<std::size_t> sorted(ordering.begin(), ordering.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted != identity_ordering(base.n_qubits)) throw ArgumentError("ordering is not a permutation of the qubits");
    AnsatzSpec spec = base;
    spec.ordering.assign(ordering.begin(), ordering.end());
    const std::vector<CnotPair> pairs = cnot_layout(ordering, base.entangler);
    for (EntangledUnitary& block : spec.blocks) block.cnot_pairs = pairs;
    spec.validate();
    return spec;
}

std::vector<std::vector<CnotPair>> Variant::cnot_layouts() const {
    std::vector<std::vector<CnotPair>> out;
    for (const EntangledUnitary& block : spec.blocks) out.push_back(block.cnot_pairs);
    return out;
}

std::vector<std::size_t> Variant::default_readout(std::size_t n_classes) const {
    if (n_classes < 2) throw ArgumentError("a classifier needs at least two classes");
    const auto width = static_cast<std::size_t>(std::bit_width(n_classes - 1));
    if (width > spec.n_qubits) throw ArgumentError("not enough qubits to decode the classes");
    std::vector<std::size_t> readout;
    for (std::size_t i = 0; i < width; ++i) readout.push_back(spec.ordering[spec.n_qubits - 1 - i]);
    return readout;
}

std::uint64_t count_layouts(std::size_t n_qubits) {
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= n_qubits; ++i) f *= i;
    return f;
}

std::vector<Variant> generate_variants(const AnsatzSpec& base, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw ArgumentError("at least one variant must be requested");
    const std::uint64_t available = count_layouts(base.n_qubits);
    if (k > available) {
        throw ArgumentError("requested " + std::to_string(k) + " variants but only " + std::to_string(available) +
                            " distinct CNOT layouts exist for " + std::to_string(base.n_qubits) + " qubits");
    }

    std::vector<Variant> out;
    out.push_back({base, 0});
    if (k == 1) return out;

    Rng rng(derive_seed(seed, {0x7661726961ULL}));  // "varia"
    std::vector<std::vector<std::size_t>> picked;
    if (base.n_qubits <= 8) {
        // Enumerate every ordering, drop the base, and take a seeded prefix of
        // a shuffle: sampling without replacement.
        std::vector<std::vector<std::size_t>> all;
        std::vector<std::size_t> perm = identity_ordering(base.n_qubits);
        do {
            if (perm != base.ordering) all.push_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));
        rng.shuffle(all);
        picked.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k - 1));
    } else {
        std::set<std::vector<std::size_t>> seen{base.ordering};
        while (picked.size() < k - 1) {
            std::vector<std::size_t> perm = identity_ordering(base.n_qubits);
            rng.shuffle(perm);
            if (seen.insert(perm).second) picked.push_back(std::move(perm));
        }
    }
    for (std::size_t i = 0; i < picked.size(); ++i) out.push_back({with_ordering(base, picked[i]), i + 1});
    return out;
}

std::vector<double> embed_features(std::span<const double> features) {
    std::vector<double> angles;
    angles.reserve(features.size());
    for (double x : features) {
        if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("feature outside [0, 1]");
        angles.push_back(std::numbers::pi * x);
    }
    return angles;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_pairs(std::span<const CnotPair> pairs) {
    std::string out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(pairs[i].control) + ">" + std::to_string(pairs[i].target);
    }
    return out;
}

}  // namespace

std::string format_variant(const Variant& variant) {
    const AnsatzSpec& s = variant.spec;
    kv::Tree tree;
    kv::Tree head;
    head.put("variant_id", variant.variant_id);
    head.put("n_qubits", s.n_qubits);
    head.put("n_blocks", s.blocks.size());
    head.put("entangler", to_string(s.entangler));
    head.put("rotations", to_string(s.rotations));
    head.put("encoding", "RY");
    head.put("ordering", kv::format_list(s.ordering));
    head.put("n_features", s.n_features);
    head.put("n_params", s.n_params);
    tree.add_child("variant", head);
    for (std::size_t b = 0; b < s.blocks.size(); ++b) {
        kv::Tree block;
        block.put("cnot_pairs", format_pairs(s.blocks[b].cnot_pairs));
        std::vector<std::string> kinds;
        for (GateKind g : s.blocks[b].rotation_layer.front()) kinds.emplace_back(to_string(g));
        block.put("rotation_kinds", kv::format_list(kinds));
        tree.add_child(kv::Tree::path_type("block." + std::to_string(b), '\0'), block);
    }
    return kv::format(tree);
}

Variant parse_variant(const std::string& text) {
    const kv::Tree tree = kv::parse(text);
    const kv::Tree& head = kv::section(tree, "variant");
    HeaOptions options;
    options.entangler = parse_entangler(kv::get_string(head, "entangler"));
    options.rotations = parse_rotation_layout(kv::get_string(head, "rotations"));
    const AnsatzSpec base = build_hea(kv::get_count(head, "n_qubits"), kv::get_count(head, "n_blocks"), options);
    const std::vector<std::size_t> ordering = kv::parse_count_list(kv::get_string(head, "ordering"));
    if (ordering.size() != base.n_qubits) throw FormatError("ordering length does not match n_qubits");
    Variant v{with_ordering(base, ordering), kv::get_count(head, "variant_id")};

    for (std::size_t b = 0; b < v.spec.blocks.size(); ++b) {
        const std::string name = "block." + std::to_string(b);
        if (!tree.get_child_optional(kv::Tree::path_type(name, '\0'))) continue;
        const kv::Tree& block = kv::section(tree, name);
        if (kv::get_string(block, "cnot_pairs") != format_pairs(v.spec.blocks[b].cnot_pairs)) {
            throw FormatError(name + ": CNOT pairs disagree with the recorded ordering");
        }
    }
    if (kv::get_count(head, "n_params") != v.spec.n_params || kv::get_count(head, "n_features") != v.spec.n_features) {
        throw FormatError("slot counts disagree with the recorded layout");
    }
    return v;
}

}  // namespace eqv
