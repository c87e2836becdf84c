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
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "eqv/error.hpp"
#include "eqv/rng.hpp"

namespace eqv {
namespace {

ConfidenceVector binary(double p_first, Label a = 1, Label b = 9) { return {{p_first, 1.0 - p_first}, {a, b}}; }

std::vector<std::size_t> sorted_counts(std::size_t size, std::size_t n_variants, std::uint64_t seed) {
    auto c = variant_counts(allocate_variants(size, n_variants, seed), n_variants);
    std::sort(c.begin(), c.end(), std::greater<>());
    return c;
}

std::vector<ClassifierModel> small_models(std::size_t k, std::uint64_t seed) {
    const auto vs = generate_variants(build_hea(2, 1), k, seed);
    std::vector<ClassifierModel> out;
    for (const auto& v : vs) out.push_back(ClassifierModel::initialize(v, {1, 9}, seed + v.variant_id));
    return out;
}

std::vector<Sample> samples(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({{rng.uniform(), rng.uniform()}, rng.below(2) ? 9 : 1, i});
    return out;
}

TEST(Allocation, CountsPerSize) {
    EXPECT_EQ(sorted_counts(3, 3, 0), (std::vector<std::size_t>{1, 1, 1}));
    EXPECT_EQ(sorted_counts(5, 3, 0), (std::vector<std::size_t>{2, 2, 1}));
    EXPECT_EQ(sorted_counts(7, 3, 0), (std::vector<std::size_t>{3, 2, 2}));
    EXPECT_EQ(sorted_counts(9, 3, 0), (std::vector<std::size_t>{3, 3, 3}));
    EXPECT_EQ(sorted_counts(11, 3, 0), (std::vector<std::size_t>{4, 4, 3}));
}

TEST(Allocation, SeededPartialRound) {
    std::set<std::vector<std::size_t>> seen;
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto a = allocate_variants(7, 3, s);
        EXPECT_EQ(a, allocate_variants(7, 3, s));
        EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
        seen.insert(variant_counts(a, 3));
    }
    EXPECT_EQ(seen.size(), 3u);
    EXPECT_THROW(allocate_variants(2, 3, 0), ArgumentError);
    EXPECT_THROW(allocate_variants(2, 0, 0), ArgumentError);
}

TEST(Strategy, NamesRoundTrip) {
    for (Strategy s : {Strategy::Plurality, Strategy::Average, Strategy::AccuracyWeighted}) {
        EXPECT_EQ(parse_strategy(to_string(s)), s);
    }
    EXPECT_THROW(parse_strategy("median"), ConfigError);
}

TEST(Plurality, FiveBinaryClassifiers) {
    const std::vector<ConfidenceVector> c{binary(0.57), binary(0.63), binary(0.38), binary(0.27), binary(0.61)};
    const auto t = make_tally(c);
    EXPECT_EQ(t.per_class_votes.at(1), 3u);
    EXPECT_EQ(t.per_class_votes.at(9), 2u);
    EXPECT_EQ(plurality_vote(t), 1);
    // the same five averaged land on the other side of 0.5
    const auto avg = average_aggregate(c);
    EXPECT_NEAR(avg.confidence.values[0], 0.492, 1e-12);
    EXPECT_EQ(avg.label, 9);
}

TEST(Plurality, FourClassCounts) {
    // c1:3, c3:2, c9:2, c6:2
    const std::vector<Label> labels{1, 3, 6, 9};
    auto one_hot = [&](std::size_t k) {
        ConfidenceVector v{{0.1, 0.1, 0.1, 0.1}, labels};
        v.values[k] = 0.7;
        return v;
    };
    std::vector<ConfidenceVector> c;
    for (std::size_t k : {0u, 0u, 0u, 1u, 1u, 3u, 3u, 2u, 2u}) c.push_back(one_hot(k));
    EXPECT_EQ(plurality_vote(make_tally(c)), 1);
}

TEST(Plurality, TieBreaks) {
    // 1-1 tie, larger summed confidence wins
    const std::vector<ConfidenceVector> a{binary(0.9), binary(0.45)};
    EXPECT_EQ(plurality_vote(make_tally(a)), 1);
    const std::vector<ConfidenceVector> b{binary(0.55), binary(0.1)};
    EXPECT_EQ(plurality_vote(make_tally(b)), 9);
    // exact tie on both counts goes to the first label
    const std::vector<ConfidenceVector> c{{{0.75, 0.25}, {1, 9}}, {{0.25, 0.75}, {1, 9}}};
    EXPECT_EQ(plurality_vote(make_tally(c)), 1);
}

TEST(Plurality, DegenerateAndEmpty) {
    const std::vector<ConfidenceVector> one{binary(0.2)};
    EXPECT_EQ(plurality_vote(make_tally(one)), 9);
    EXPECT_THROW(plurality_vote(VoteTally{}), ArgumentError);
}

TEST(Plurality, UnanimityAndPermutationInvariance) {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        std::vector<ConfidenceVector> c;
        const std::size_t n = 1 + rng.below(9);
        for (std::size_t i = 0; i < n; ++i) c.push_back(binary(rng.uniform()));
        const Label first = plurality_vote(make_tally(c));
        auto shuffled = c;
        rng.shuffle(shuffled);
        EXPECT_EQ(plurality_vote(make_tally(shuffled)), first);

        std::vector<ConfidenceVector> same;
        for (std::size_t i = 0; i < n; ++i) same.push_back(binary(0.5 + 0.5 * rng.uniform() + 1e-9));
        EXPECT_EQ(plurality_vote(make_tally(same)), 1);
    }
}

TEST(Plurality, StrictMajorityWins) {
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        std::vector<ConfidenceVector> c;
        for (int i = 0; i < 4; ++i) c.push_back(binary(0.01 + 0.48 * rng.uniform()));  // votes for 9
        for (int i = 0; i < 3; ++i) c.push_back(binary(0.99));
        EXPECT_EQ(plurality_vote(make_tally(c)), 9);
    }
}

TEST(Average, ThreeClassifierExample) {
    const std::vector<ConfidenceVector> c{binary(0.6, 1, 2), binary(0.55, 1, 2), binary(0.1, 1, 2)};
    const auto a = average_aggregate(c);
    EXPECT_NEAR(a.confidence.values[0], 0.4167, 5e-5);
    EXPECT_NEAR(a.confidence.values[1], 0.5833, 5e-5);
    EXPECT_EQ(a.label, 2);
    EXPECT_EQ(plurality_vote(make_tally(c)), 1);
}

TEST(Average, IdempotentAndErrors) {
    const ConfidenceVector v{{0.2, 0.5, 0.3}, {1, 4, 7}};
    const std::vector<ConfidenceVector> same{v, v, v};
    const auto a = average_aggregate(same);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.confidence.values[k], v.values[k], 1e-15);
    EXPECT_EQ(a.label, 4);
    EXPECT_THROW(average_aggregate(std::span<const ConfidenceVector>{}), ArgumentError);
    const std::vector<ConfidenceVector> mixed{binary(0.5), binary(0.5, 1, 4)};
    EXPECT_THROW(average_aggregate(mixed), ArgumentError);
}

TEST(Weighted, HandArithmetic) {
    const std::vector<ConfidenceVector> c{binary(0.9), binary(0.2)};
    const std::vector<double> w{0.8, 0.6};
    const auto a = weighted_aggregate(c, w);
    EXPECT_NEAR(a.confidence.values[0], 0.6, 1e-12);
    EXPECT_NEAR(a.confidence.values[1], 0.4, 1e-12);
    EXPECT_EQ(a.label, 1);
}

TEST(Weighted, SelectionAndReduction) {
    Rng rng(6);
    std::vector<ConfidenceVector> c;
    for (int i = 0; i < 5; ++i) c.push_back(binary(rng.uniform()));
    const std::vector<double> pick{1, 0, 0, 0, 0};
    EXPECT_EQ(weighted_aggregate(c, pick).confidence.values, c[0].values);
    const std::vector<double> equal(5, 0.37);
    const auto w = weighted_aggregate(c, equal);
    const auto a = average_aggregate(c);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(w.confidence.values[k], a.confidence.values[k], 1e-12);
    EXPECT_EQ(w.label, a.label);
}

TEST(Weighted, Errors) {
    const std::vector<ConfidenceVector> c{binary(0.9), binary(0.2)};
    const std::vector<double> short_w{1.0};
    const std::vector<double> zero{0.0, 0.0};
    const std::vector<double> neg{1.0, -0.1};
    EXPECT_THROW(weighted_aggregate(c, short_w), ArgumentError);
    EXPECT_THROW(weighted_aggregate(c, zero), ArgumentError);
    EXPECT_THROW(weighted_aggregate(c, neg), ArgumentError);
}

TEST(ClassifierIdName, Format) { EXPECT_EQ((ClassifierId{2, 1, 0}.name()), "v1.c2@m0"); }

TEST(Votes, EveryCopyOnEveryMachine) {
    const auto models = small_models(2, 1);
    const auto profiles = load_profiles();
    const std::vector<MachineProfile> machines(profiles.begin(), profiles.begin() + 3);
    const auto alloc = allocate_variants(3, 2, 0);
    const auto test = samples(4, 2);
    const auto rec = collect_votes(models, alloc, machines, test, 5, 32);
    EXPECT_EQ(rec.classifiers.size(), 9u);
    ASSERT_EQ(rec.samples.size(), 4u);
    for (const auto& s : rec.samples) {
        EXPECT_EQ(s.tally.per_classifier.size(), 9u);
        EXPECT_NO_THROW(s.tally.validate());
    }
    const auto again = collect_votes(models, alloc, machines, test, 5, 32, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t k = 0; k < 9; ++k) {
            EXPECT_EQ(again.samples[i].tally.per_classifier[k].confidence.values,
                      rec.samples[i].tally.per_classifier[k].confidence.values);
        }
    }
    EXPECT_THROW(collect_votes(models, alloc, machines, {}, 5, 32), ArgumentError);
}

TEST(Votes, SingleClassifierMatchesDirectRun) {
    const auto models = small_models(1, 3);
    const auto profiles = load_profiles();
    const std::vector<MachineProfile> one{profiles[0]};
    const std::vector<std::size_t> alloc{0};
    const auto test = samples(12, 7);
    const auto rec = collect_votes(models, alloc, one, test, 11, 64);
    const auto out = aggregate(rec, Strategy::Plurality);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Executor e = Executor::noisy(profiles[0], derive_seed(11, {i, 0, 0}), 64);
        const Label p = predict(confidence(models[0], test[i].features, e));
        EXPECT_EQ(out.predictions[i], p);
        correct += p == test[i].label ? 1 : 0;
    }
    EXPECT_DOUBLE_EQ(out.accuracy, static_cast<double>(correct) / 12.0);
}

TEST(Votes, NoiselessSharedVariantAgreesWithSingle) {
    const auto models = small_models(1, 4);
    const std::vector<std::size_t> alloc{0, 0, 0};
    const auto test = samples(20, 8);
    const auto rec = collect_noiseless_votes(models, alloc, test);
    const double single = accuracy(models[0], test, Executor::noiseless());
    const std::vector<double> w(rec.classifiers.size(), 1.0);
    EXPECT_DOUBLE_EQ(aggregate(rec, Strategy::Plurality).accuracy, single);
    EXPECT_DOUBLE_EQ(aggregate(rec, Strategy::Average).accuracy, single);
    EXPECT_DOUBLE_EQ(aggregate(rec, Strategy::AccuracyWeighted, w).accuracy, single);
    EXPECT_THROW(aggregate(rec, Strategy::AccuracyWeighted), ArgumentError);
}

TEST(Votes, ValidationWeightsArePairAccuracies) {
    const auto models = small_models(2, 5);
    const auto profiles = load_profiles();
    const std::vector<MachineProfile> machines(profiles.begin(), profiles.begin() + 2);
    const auto alloc = allocate_variants(3, 2, 1);
    const auto rec = collect_votes(models, alloc, machines, samples(3, 1), 2, 16);
    const auto val = samples(6, 9);
    const auto w = validation_weights(models, rec, val, 13, 16);
    ASSERT_EQ(w.size(), rec.classifiers.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const auto& id = rec.classifiers[k];
        const Executor e = Executor::noisy(machines[id.machine], derive_seed(13, {id.variant, id.machine}), 16);
        EXPECT_DOUBLE_EQ(w[k], accuracy(models[id.variant], val, e));
    }
}

TEST(Votes, CsvExport) {
    const auto models = small_models(1, 6);
    const std::vector<std::size_t> alloc{0};
    const auto rec = collect_noiseless_votes(models, alloc, samples(2, 3));
    const auto out = aggregate(rec, Strategy::Plurality);
    const std::string csv = format_vote_records(rec, out);
    EXPECT_EQ(csv.rfind("sample_id,true_label,classifier,variant,copy,machine,predicted,conf_1,conf_9,final_label\n", 0),
              0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

}  // namespace
}  // namespace eqv
