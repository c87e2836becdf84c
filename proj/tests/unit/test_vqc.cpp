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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "eqv/error.hpp"
#include "eqv/rng.hpp"

namespace eqv {
namespace {

constexpr double kPi = std::numbers::pi;

Variant base_variant(std::size_t n, std::size_t blocks, RotationLayout r = RotationLayout::Y) {
    return {build_hea(n, blocks, {r, Entangler::Chain}), 0};
}

ClassifierModel zero_model(std::size_t n, std::size_t blocks, std::vector<Label> labels) {
    ClassifierModel m = ClassifierModel::initialize(base_variant(n, blocks), std::move(labels), 0);
    std::fill(m.params.begin(), m.params.end(), 0.0);
    return m;
}

std::vector<Sample> random_samples(std::size_t n, std::size_t d, const std::vector<Label>& labels, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < n; ++i) {
        Sample s;
        for (std::size_t k = 0; k < d; ++k) s.features.push_back(rng.uniform());
        s.label = labels[rng.below(labels.size())];
        s.source_index = i;
        out.push_back(std::move(s));
    }
    return out;
}

// Label by the first feature: an easy problem for a trained model.
std::vector<Sample> separable(std::size_t n, std::uint64_t seed) {
    auto s = random_samples(n, 2, {1, 9}, seed);
    for (auto& x : s) x.label = x.features[0] < 0.5 ? 1 : 9;
    return s;
}

TEST(ClassMasses, TwoClassSingleQubit) {
    const std::vector<double> probs{0.43, 0.57};
    const std::vector<std::size_t> readout{0};
    const auto m = class_masses(probs, readout, 2);
    EXPECT_DOUBLE_EQ(m[0], 0.43);
    EXPECT_DOUBLE_EQ(m[1], 0.57);
}

TEST(ClassMasses, FourClassMarginal) {
    // 3-qubit register, readout on qubits 0 and 1, qubit 2 spread evenly
    const std::vector<double> marg{0.1, 0.2, 0.3, 0.4};
    std::vector<double> probs(8);
    for (std::size_t i = 0; i < 8; ++i) probs[i] = marg[i & 3] / 2;
    const std::vector<std::size_t> readout{0, 1};
    const auto m = class_masses(probs, readout, 4);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(m[k], marg[k], 1e-15);
    const std::vector<std::size_t> swapped{1, 0};
    const auto s = class_masses(probs, swapped, 4);
    EXPECT_NEAR(s[1], 0.3, 1e-15);
    EXPECT_NEAR(s[2], 0.2, 1e-15);
}

TEST(ClassMasses, ThreeClassesDropUnusedPattern) {
    const std::vector<double> probs{0.2, 0.2, 0.2, 0.4};
    const std::vector<std::size_t> readout{0, 1};
    EXPECT_EQ(class_masses(probs, readout, 3), (std::vector<double>{0.2, 0.2, 0.2}));
}

TEST(Confidence, HandBuiltPointFiveSeven) {
    // only the encoding angle on the readout qubit matters when params are 0 and qubit 0 stays |0>
    ClassifierModel m = zero_model(2, 1, {0, 1});
    ASSERT_EQ(m.readout_qubits, (std::vector<std::size_t>{1}));
    const double x = 2.0 * std::asin(std::sqrt(0.57)) / kPi;
    const std::vector<double> f{0.0, x};
    const auto c = confidence(m, f, Executor::noiseless());
    EXPECT_NEAR(c.of(1), 0.57, 1e-12);
    EXPECT_NEAR(c.of(0), 0.43, 1e-12);
    EXPECT_NO_THROW(c.validate());
}

TEST(Confidence, UniformWhenOutputUniform) {
    ClassifierModel m = zero_model(2, 1, {1, 9});
    const std::vector<double> f{0.5, 0.5};
    const auto c = confidence(m, f, Executor::noiseless());
    EXPECT_NEAR(c.values[0], 0.5, 1e-12);
    EXPECT_NEAR(c.values[1], 0.5, 1e-12);
}

TEST(Confidence, FeatureLengthMismatch) {
    const ClassifierModel m = zero_model(4, 1, {1, 9});
    const std::vector<double> f{0.5, 0.5};
    EXPECT_THROW(confidence(m, f, Executor::noiseless()), ArgumentError);
}

TEST(Confidence, ZeroNoiseShotsMatchNoiseless) {
    const MachineProfile quiet{"quiet", 5, 0.0, 0.0, 0, 1024};
    Rng rng(8);
    for (int t = 0; t < 3; ++t) {
        const ClassifierModel m = ClassifierModel::initialize(base_variant(4, 2), {1, 4, 7, 9}, 100 + t);
        std::vector<double> f(4);
        for (double& x : f) x = rng.uniform();
        const auto exact = confidence(m, f, Executor::noiseless());
        const auto shots = confidence(m, f, Executor::noisy(quiet, 5 + t, 1000000));
        for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(shots.values[k], exact.values[k], 0.01);
    }
}

TEST(Confidence, ValidateRejectsBadVectors) {
    EXPECT_THROW((ConfidenceVector{{1.0}, {1}}.validate()), InvariantError);
    EXPECT_THROW((ConfidenceVector{{0.6, 0.6}, {1, 9}}.validate()), InvariantError);
    EXPECT_THROW((ConfidenceVector{{0.5, 0.5}, {1}}.validate()), InvariantError);
    EXPECT_THROW((ConfidenceVector{{0.5, 0.5}, {1, 9}}.index_of(4)), IndexError);
}

TEST(Loss, AnalyticValues) {
    EXPECT_EQ(loss({{1.0, 0.0}, {1, 9}}, 1), 0.0);
    EXPECT_NEAR(loss({{0.5, 0.5}, {1, 9}}, 9), std::log(2.0), 1e-15);
    EXPECT_NEAR(loss({{0.25, 0.25, 0.25, 0.25}, {1, 4, 7, 9}}, 7), std::log(4.0), 1e-15);
    EXPECT_NEAR(loss({{1.0, 0.0}, {1, 9}}, 9), -std::log(kProbabilityFloor), 1e-9);
    EXPECT_THROW(loss({{0.5, 0.5}, {1, 9}}, 3), IndexError);
}

TEST(Gradient, MatchesFiniteDifferences) {
    const double h = 1e-5;
    int checked = 0;
    for (std::size_t n : {2u, 4u}) {
        const std::vector<Label> labels = n == 2 ? std::vector<Label>{1, 9} : std::vector<Label>{1, 4, 7, 9};
        for (int t = 0; t < 10; ++t) {
            const RotationLayout r = t % 2 ? RotationLayout::YZ : RotationLayout::Y;
            const ClassifierModel m = ClassifierModel::initialize(base_variant(n, 2, r), labels, 1000 + t);
            const auto batch = random_samples(3, n, labels, 50 + t);
            const auto g = parameter_shift_gradient(m, batch, Executor::noiseless());
            ASSERT_EQ(g.size(), m.params.size());
            for (std::size_t j = 0; j < g.size(); ++j) {
                ClassifierModel up = m;
                ClassifierModel dn = m;
                up.params[j] += h;
                dn.params[j] -= h;
                const double fd = (mean_loss(up, batch, Executor::noiseless()) -
                                   mean_loss(dn, batch, Executor::noiseless())) / (2 * h);
                EXPECT_NEAR(g[j], fd, 1e-6) << "n=" << n << " t=" << t << " j=" << j;
            }
            ++checked;
        }
    }
    EXPECT_EQ(checked, 20);
}

TEST(Gradient, PeriodicInParameters) {
    const ClassifierModel m = ClassifierModel::initialize(base_variant(4, 2), {1, 9}, 3);
    ClassifierModel shifted = m;
    for (double& p : shifted.params) p += 2 * kPi;
    const auto batch = random_samples(4, 4, {1, 9}, 1);
    const auto a = parameter_shift_gradient(m, batch, Executor::noiseless());
    const auto b = parameter_shift_gradient(shifted, batch, Executor::noiseless());
    for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-9);
}

TEST(Gradient, InsensitiveParameterIsZero) {
    // last-block rotation on qubit 0 never reaches readout qubit 1
    const ClassifierModel m = ClassifierModel::initialize(base_variant(2, 2), {1, 9}, 12);
    const auto batch = random_samples(5, 2, {1, 9}, 2);
    const auto g = parameter_shift_gradient(m, batch, Executor::noiseless());
    EXPECT_NEAR(g[2], 0.0, 1e-9);
    EXPECT_GT(std::abs(g[3]), 1e-6);
    EXPECT_THROW(parameter_shift_gradient(m, std::span<const Sample>{}, Executor::noiseless()), ArgumentError);
}

TEST(Gradient, NoisyEstimateTracksExact) {
    const MachineProfile quiet{"quiet", 5, 0.0, 0.0, 0, 1024};
    const ClassifierModel m = ClassifierModel::initialize(base_variant(2, 1), {1, 9}, 4);
    const auto batch = random_samples(2, 2, {1, 9}, 6);
    const auto exact = parameter_shift_gradient(m, batch, Executor::noiseless());
    const auto noisy = parameter_shift_gradient(m, batch, Executor::noisy(quiet, 1, 200000));
    for (std::size_t j = 0; j < exact.size(); ++j) EXPECT_NEAR(noisy[j], exact[j], 0.05);
}

TEST(Train, ZeroEpochsKeepsParameters) {
    const ClassifierModel m = ClassifierModel::initialize(base_variant(2, 1), {1, 9}, 1);
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto r = train_with_history(m, separable(20, 1), cfg);
    EXPECT_EQ(r.model.params, m.params);
    EXPECT_EQ(r.epoch_losses.size(), 1u);
}

TEST(Train, LearnsSeparableProblemDeterministically) {
    const ClassifierModel m = ClassifierModel::initialize(base_variant(2, 2, RotationLayout::YZ), {1, 9}, 2);
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 10;
    cfg.learning_rate = 0.5;
    cfg.seed = 77;
    const auto data = separable(60, 3);
    const auto a = train_with_history(m, data, cfg);
    const auto b = train_with_history(m, data, cfg);
    EXPECT_EQ(a.model.params, b.model.params);
    EXPECT_EQ(a.epoch_losses.size(), 41u);
    EXPECT_LT(a.epoch_losses.back(), a.epoch_losses.front());
    EXPECT_GE(accuracy(a.model, separable(100, 4), Executor::noiseless()), 0.8);
    cfg.seed = 78;
    EXPECT_NE(train(m, data, cfg).params, a.model.params);
}

TEST(Train, FinalLossNotAboveInitialForEverySeed) {
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.batch_size = 10;
    cfg.learning_rate = 0.5;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ClassifierModel m = ClassifierModel::initialize(base_variant(4, 2, RotationLayout::YZ), {1, 9}, seed);
        cfg.seed = seed;
        auto data = random_samples(40, 4, {1, 9}, 100 + seed);
        for (auto& x : data) x.label = x.features[0] + x.features[3] < 1.0 ? 1 : 9;
        const auto r = train_with_history(m, data, cfg);
        EXPECT_LE(r.epoch_losses.back(), r.epoch_losses.front()) << "seed " << seed;
    }
}

TEST(Train, SpsaOnNoisyExecutorIsDeterministic) {
    const auto profiles = load_profiles();
    const ClassifierModel m = ClassifierModel::initialize(base_variant(2, 1), {1, 9}, 5);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 5;
    cfg.learning_rate = 0.2;
    cfg.executor = Executor::noisy(find_profile(profiles, "ibmq_lima"), 9, 64);
    const auto data = separable(10, 5);
    const auto a = train(m, data, cfg);
    EXPECT_EQ(train(m, data, cfg).params, a.params);
    EXPECT_NE(a.params, m.params);
}

TEST(Train, RejectsBadInputs) {
    const ClassifierModel m = ClassifierModel::initialize(base_variant(2, 1), {1, 9}, 5);
    TrainConfig cfg;
    EXPECT_THROW(train(m, std::span<const Sample>{}, cfg), ArgumentError);
    auto data = separable(4, 1);
    data[2].label = 4;
    EXPECT_THROW(train(m, data, cfg), ConfigError);
    cfg.batch_size = 0;
    EXPECT_THROW(train(m, separable(4, 1), cfg), ConfigError);
    DatasetSplit split;
    split.class_labels = {1, 4};
    split.train = separable(4, 1);
    EXPECT_THROW(train(m, split, TrainConfig{}), ConfigError);
}

TEST(Predict, ArgmaxAndTies) {
    EXPECT_EQ(predict({{0.6, 0.4}, {1, 9}}), 1);
    EXPECT_EQ(predict({{0.5, 0.5}, {1, 9}}), 1);
    EXPECT_EQ(predict({{0.1, 0.2, 0.3, 0.4}, {1, 4, 7, 9}}), 9);
}

TEST(Model, InitializeIsSeeded) {
    const Variant v = base_variant(4, 3, RotationLayout::YZ);
    const auto a = ClassifierModel::initialize(v, {1, 9}, 10);
    EXPECT_EQ(a.params, ClassifierModel::initialize(v, {1, 9}, 10).params);
    EXPECT_NE(a.params, ClassifierModel::initialize(v, {1, 9}, 11).params);
    for (double p : a.params) {
        EXPECT_GE(p, -kPi);
        EXPECT_LT(p, kPi);
    }
}

TEST(Model, FileRoundTrip) {
    const auto vs = generate_variants(build_hea(4, 2, {RotationLayout::YZ, Entangler::Chain}), 3, 1);
    const auto m = ClassifierModel::initialize(vs[2], {1, 4, 7, 9}, 3);
    const auto back = parse_model(format_model(m));
    EXPECT_EQ(back.params, m.params);
    EXPECT_EQ(back.class_labels, m.class_labels);
    EXPECT_EQ(back.readout_qubits, m.readout_qubits);
    EXPECT_EQ(back.variant.spec.ordering, m.variant.spec.ordering);
    const auto path = std::filesystem::temp_directory_path() / "eqv_model_test.model";
    save_model(path, m);
    EXPECT_EQ(load_model(path).params, m.params);
    std::filesystem::remove(path);
    std::string text = format_model(m);
    text.replace(text.find("readout_qubits = "), 17, "readout_qubits = 7, ");
    EXPECT_THROW(parse_model(text), FormatError);
}

}  // namespace
}  // namespace eqv
