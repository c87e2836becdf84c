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

#include <benchmark/benchmark.h>

#include <vector>

#include "eqv/ansatz.hpp"
#include "eqv/ensemble.hpp"
#include "eqv/noise.hpp"
#include "eqv/rng.hpp"
#include "eqv/simcore.hpp"
#include "eqv/vqc.hpp"

namespace {

using namespace eqv;

ClassifierModel model_for(std::size_t n, std::size_t blocks) {
    const AnsatzSpec base = build_hea(n, blocks, {RotationLayout::YZ, Entangler::Chain});
    return ClassifierModel::initialize({base, 0}, {1, 9}, 1);
}

std::vector<double> features_for(std::size_t n) {
    Rng rng(2);
    std::vector<double> f(n);
    for (double& x : f) x = rng.uniform();
    return f;
}

void BM_Rotation(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    StateVector psi(n);
    double theta = 0.1;
    for (auto _ : state) {
        psi.apply_rotation(GateKind::RY, n / 2, theta);
        theta += 1e-3;
        benchmark::DoNotOptimize(psi[0]);
    }
}
BENCHMARK(BM_Rotation)->Arg(2)->Arg(4)->Arg(6)->Arg(10);

void BM_Cnot(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    StateVector psi(n);
    psi.apply_rotation(GateKind::RX, 0, 0.3);
    for (auto _ : state) {
        psi.apply_cnot(0, n - 1);
        benchmark::DoNotOptimize(psi[0]);
    }
}
BENCHMARK(BM_Cnot)->Arg(2)->Arg(4)->Arg(6)->Arg(10);

void BM_NoiselessConfidence(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ClassifierModel m = model_for(n, 3);
    const auto f = features_for(n);
    for (auto _ : state) benchmark::DoNotOptimize(confidence(m, f, Executor::noiseless()));
}
BENCHMARK(BM_NoiselessConfidence)->Arg(2)->Arg(4)->Arg(6);

void BM_NoisyExecute(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ClassifierModel m = model_for(n, 3);
    const Circuit c = m.variant.circuit();
    const auto angles = embed_features(features_for(n));
    const auto profiles = load_profiles();
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto cfg = NoisyExecutionConfig::for_profile(find_profile(profiles, "ibm_oslo"), seed++);
        benchmark::DoNotOptimize(noisy_execute(c, m.params, angles, cfg));
    }
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_NoisyExecute)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMicrosecond);

void BM_ParameterShiftGradient(benchmark::State& state) {
    const ClassifierModel m = model_for(4, static_cast<std::size_t>(state.range(0)));
    std::vector<Sample> batch;
    Rng rng(3);
    for (int i = 0; i < 10; ++i) batch.push_back({{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()}, i % 2 ? 9 : 1, 0});
    for (auto _ : state) benchmark::DoNotOptimize(parameter_shift_gradient(m, batch, Executor::noiseless()));
}
BENCHMARK(BM_ParameterShiftGradient)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_PluralityVote(benchmark::State& state) {
    Rng rng(4);
    std::vector<ConfidenceVector> c;
    for (int i = 0; i < 33; ++i) {
        const double p = rng.uniform();
        c.push_back({{p, 1 - p}, {1, 9}});
    }
    const VoteTally t = make_tally(c);
    for (auto _ : state) benchmark::DoNotOptimize(plurality_vote(t));
}
BENCHMARK(BM_PluralityVote);

}  // namespace

BENCHMARK_MAIN();
