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

#include "eqv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "eqv/error.hpp"
#include "eqv/kvfile.hpp"

namespace eqv {

double impact_factor(double a, double b) { return std::abs(a - b); }

double impact_factor(const ConfidenceVector& conf) {
    if (conf.values.size() < 2) throw ArgumentError("impact factor needs at least two confidences");
    double first = -1.0;
    double second = -1.0;
    for (double v : conf.values) {
        if (v > first) {
            second = first;
            first = v;
        } else if (v > second) {
            second = v;
        }
    }
    return first - second;
}

std::vector<ImpactRecord> impact_records(const VoteRecords& records) {
    std::vector<ImpactRecord> out;
    for (const SampleVotes& s : records.samples) {
        for (const ClassifierVote& v : s.tally.per_classifier) {
            out.push_back({impact_factor(v.confidence), v.predicted == s.true_label, s.sample_id, v.id.name()});
        }
    }
    return out;
}

ImpactDistribution impact_distribution(std::span<const ImpactRecord> records, std::size_t bins) {
    if (bins == 0) throw ArgumentError("histogram needs at least one bin");
    ImpactDistribution d;
    d.bins = bins;
    d.counts_correct.assign(bins, 0);
    d.counts_wrong.assign(bins, 0);
    const double width = 1.0 / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) d.bin_centers.push_back((static_cast<double>(b) + 0.5) * width);

    double sum_correct = 0.0;
    double sum_wrong = 0.0;
    for (const ImpactRecord& r : records) {
        if (!(r.impact >= 0.0 && r.impact <= 1.0)) throw ArgumentError("impact factor outside [0, 1]");
        const auto bin = std::min(bins - 1, static_cast<std::size_t>(r.impact * static_cast<double>(bins)));
        if (r.correct) {
            ++d.counts_correct[bin];
            sum_correct += r.impact;
        } else {
            ++d.counts_wrong[bin];
            sum_wrong += r.impact;
        }
    }
    std::size_t n_correct = 0;
    std::size_t n_wrong = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        n_correct += d.counts_correct[b];
        n_wrong += d.counts_wrong[b];
    }
    if (n_correct == 0) throw ArgumentError("no correct predictions to histogram");
    if (n_wrong == 0) throw ArgumentError("no wrong predictions to histogram");
    for (std::size_t b = 0; b < bins; ++b) {
        d.density_correct.push_back(static_cast<double>(d.counts_correct[b]) / (static_cast<double>(n_correct) * width));
        d.density_wrong.push_back(static_cast<double>(d.counts_wrong[b]) / (static_cast<double>(n_wrong) * width));
    }
    d.mean_correct = sum_correct / static_cast<double>(n_correct);
    d.mean_wrong = sum_wrong / static_cast<double>(n_wrong);
    return d;
}

AccuracyReport accuracy_stats(std::span<const double> run_accuracies, std::string setting) {
    if (run_accuracies.empty()) throw ArgumentError("accuracy statistics of no runs");
    AccuracyReport r;
    r.n_runs = run_accuracies.size();
    r.setting = std::move(setting);
    double sum = 0.0;
    for (double a : run_accuracies) sum += a;
    r.mean = sum / static_cast<double>(r.n_runs);
    if (r.n_runs >= 2) {
        double ss = 0.0;
        for (double a : run_accuracies) ss += (a - r.mean) * (a - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(r.n_runs - 1));
    }
    return r;
}

std::string format_accuracy(const AccuracyReport& report, int digits) {
    char buf[64];
    if (report.std) {
        std::snprintf(buf, sizeof buf, "%.*f +- %.*f", digits, report.mean, digits, *report.std);
    } else {
        std::snprintf(buf, sizeof buf, "%.*f", digits, report.mean);
    }
    return buf;
}

std::string format_impact_distribution(const ImpactDistribution& dist) {
    std::string out = "bin_center,density_correct,density_wrong,count_correct,count_wrong\n";
    for (std::size_t b = 0; b < dist.bins; ++b) {
        out += kv::format_double(dist.bin_centers[b]) + ',' + kv::format_double(dist.density_correct[b]) + ',' +
               kv::format_double(dist.density_wrong[b]) + ',' + std::to_string(dist.counts_correct[b]) + ',' +
               std::to_string(dist.counts_wrong[b]) + '\n';
    }
    return out;
}

std::string format_impact_records(std::span<const ImpactRecord> records) {
    std::string out = "sample_id,classifier,impact,correct\n";
    for (const ImpactRecord& r : records) {
        out += std::to_string(r.sample_id) + ',' + r.classifier_id + ',' + kv::format_double(r.impact) + ',' +
               (r.correct ? "1" : "0") + '\n';
    }
    return out;
}

}  // namespace eqv
