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

// Impact factors, their distributions, and accuracy summaries.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqv/ensemble.hpp"
#include "eqv/vqc.hpp"

namespace eqv {

/// Gap between the largest and second-largest confidence. For two classes
/// this is |c1 - c2|.
double impact_factor(const ConfidenceVector& conf);
/// Raw two-number form, |a - b|.
double impact_factor(double a, double b);

struct ImpactRecord {
    double impact = 0.0;
    bool correct = false;
    std::size_t sample_id = 0;
    std::string classifier_id;
};

/// One record per (sample, classifier) vote.
std::vector<ImpactRecord> impact_records(const VoteRecords& records);

struct ImpactDistribution {
    std::size_t bins = 0;
    std::vector<double> bin_centers;
    std::vector<std::size_t> counts_correct;
    std::vector<std::size_t> counts_wrong;
    std::vector<double> density_correct;  // integrates to 1 over [0, 1]
    std::vector<double> density_wrong;
    double mean_correct = 0.0;
    double mean_wrong = 0.0;
};

/// Normalized histograms over [0, 1] with `bins` equal bins; an impact of
/// exactly 1 falls in the last bin. Throws ArgumentError if bins == 0 or if
/// either group is empty.
ImpactDistribution impact_distribution(std::span<const ImpactRecord> records, std::size_t bins = 20);

struct AccuracyReport {
    double mean = 0.0;
    std::optional<double> std;  // sample std, absent for a single run
    std::size_t n_runs = 0;
    std::string setting;
};

/// Sample mean and sample standard deviation (n - 1 denominator). Throws
/// ArgumentError for empty input.
AccuracyReport accuracy_stats(std::span<const double> run_accuracies, std::string setting = {});

/// "0.650 +- 0.032", or just the mean when std is absent.
std::string format_accuracy(const AccuracyReport& report, int digits = 3);

/// bin_center,density_correct,density_wrong,count_correct,count_wrong
std::string format_impact_distribution(const ImpactDistribution& dist);
/// sample_id,classifier,impact,correct
std::string format_impact_records(std::span<const ImpactRecord> records);

}  // namespace eqv
