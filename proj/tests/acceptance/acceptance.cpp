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

// Acceptance run: one PASS/FAIL line per criterion.
//
//   eqv_acceptance [--out DIR] [--only 1,2,7]
//
// Criteria 7-9 train and evaluate the full experiment and take minutes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eqv/analysis.hpp"
#include "eqv/ansatz.hpp"
#include "eqv/ensemble.hpp"
#include "eqv/error.hpp"
#include "eqv/experiment.hpp"
#include "eqv/kvfile.hpp"
#include "eqv/noise.hpp"
#include "eqv/rng.hpp"
#include "eqv/simcore.hpp"
#include "eqv/vqc.hpp"

namespace fs = std::filesystem;
using namespace eqv;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double limit_seconds;  // 0 = no limit
    std::function<Outcome()> run;
};

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// Rows of a delimited table, comment lines dropped, header included.
std::vector<std::vector<std::string>> read_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing table " + path.string());
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

ExperimentConfig full_config(Task task, const fs::path& out) {
    ExperimentConfig c = default_config(task);
    const fs::path data = EQV_DATA_DIR;
    c.images = data / "mnist5k-images-idx3-ubyte.gz";
    c.labels = data / "mnist5k-labels-idx1-ubyte.gz";
    c.output = out;
    return c;
}

ConfidenceVector pair(double first, double second, Label a, Label b) { return {{first, second}, {a, b}}; }

// ---------------------------------------------------------------------------
// worked examples

Outcome averaging_vs_voting() {
    const std::vector<ConfidenceVector> c{pair(0.6, 0.4, 1, 2), pair(0.55, 0.45, 1, 2), pair(0.1, 0.9, 1, 2)};
    const Aggregate avg = average_aggregate(c);
    const Label vote = plurality_vote(make_tally(c));
    const bool ok = std::abs(avg.confidence.values[0] - 0.4167) <= 1e-4 &&
                    std::abs(avg.confidence.values[1] - 0.5833) <= 1e-4 && avg.label == 2 && vote == 1;
    return {ok, "average (" + num(avg.confidence.values[0]) + ", " + num(avg.confidence.values[1]) + ") -> class " +
                    std::to_string(avg.label) + ", plurality -> class " + std::to_string(vote)};
}

Outcome five_binary_classifiers() {
    std::vector<ConfidenceVector> c;
    for (double p : {0.57, 0.63, 0.38, 0.27, 0.61}) c.push_back(pair(p, 1.0 - p, 1, 0));
    const Aggregate avg = average_aggregate(c);
    const VoteTally t = make_tally(c);
    const Label vote = plurality_vote(t);
    const bool ok = std::abs(avg.confidence.values[0] - 0.492) <= 1e-9 && avg.label == 0 && vote == 1 &&
                    t.per_class_votes.at(1) == 3 && t.per_class_votes.at(0) == 2;
    return {ok, "mean " + num(avg.confidence.values[0], 6) + " -> class " + std::to_string(avg.label) +
                    ", votes " + std::to_string(t.per_class_votes.at(1)) + "-" +
                    std::to_string(t.per_class_votes.at(0)) + " -> class " + std::to_string(vote)};
}

Outcome four_class_vote() {
    const std::vector<Label> labels{1, 3, 6, 9};
    std::vector<ConfidenceVector> c;
    const std::vector<std::pair<Label, int>> votes{{1, 3}, {3, 2}, {9, 2}, {6, 2}};
    for (const auto& [label, n] : votes) {
        for (int i = 0; i < n; ++i) {
            ConfidenceVector v{{0.1, 0.1, 0.1, 0.1}, labels};
            v.values[static_cast<std::size_t>(std::find(labels.begin(), labels.end(), label) - labels.begin())] = 0.7;
            c.push_back(v);
        }
    }
    const Label vote = plurality_vote(make_tally(c));
    return {vote == 1, "votes {c1:3, c3:2, c9:2, c6:2} -> c" + std::to_string(vote)};
}

Outcome impact_examples() {
    // confidences listed as (digit 1, digit 0)
    const std::vector<ConfidenceVector> c{pair(0.1, 0.9, 1, 0), pair(0.6, 0.4, 1, 0), pair(0.55, 0.45, 1, 0)};
    const std::array<double, 3> want{0.8, 0.2, 0.1};
    bool ok = true;
    std::string detail = "impacts";
    for (std::size_t i = 0; i < 3; ++i) {
        const double f = impact_factor(c[i]);
        ok = ok && std::abs(f - want[i]) <= 1e-12;
        detail += ' ' + num(f, 3);
    }
    const Label avg = average_aggregate(c).label;
    const Label vote = plurality_vote(make_tally(c));
    ok = ok && avg == 0 && vote == 1;
    return {ok, detail + "; average -> digit " + std::to_string(avg) + ", voting -> digit " + std::to_string(vote)};
}

Outcome machine_table() {
    // name, qubits, readout, cnot, quantum volume, shots as printed in the machine table
    const std::vector<MachineProfile> want{
        {"ibmq_lima", 5, 2.734e-2, 1.166e-2, 8, 1024},   {"ibmq_quito", 5, 4.714e-2, 9.675e-3, 16, 1024},
        {"ibmq_belem", 5, 3.080e-2, 6.176e-2, 16, 1024}, {"ibm_nairobi", 7, 4.599e-2, 1.015e-2, 32, 1024},
        {"ibm_oslo", 7, 2.411e-2, 1.111e-2, 32, 1024},
    };
    const auto got = load_profiles();
    bool ok = got.size() == want.size();
    for (std::size_t i = 0; ok && i < want.size(); ++i) ok = got[i] == want[i];
    const auto& belem = find_profile(got, "ibmq_belem");
    return {ok && belem.cnot_error == 6.176e-2,
            std::to_string(got.size()) + " profiles, belem cnot_error " + kv::format_double(belem.cnot_error)};
}

// ---------------------------------------------------------------------------
// simulator suite

std::vector<Complex> random_amplitudes(std::size_t n, Rng& rng) {
    std::vector<Complex> a(std::size_t{1} << n);
    double norm = 0.0;
    for (Complex& x : a) {
        x = {rng.uniform() - 0.5, rng.uniform() - 0.5};
        norm += std::norm(x);
    }
    for (Complex& x : a) x /= std::sqrt(norm);
    return a;
}

// Dense single-qubit rotation applied by explicit index arithmetic.
std::vector<Complex> dense_rotation(const std::vector<Complex>& psi, GateKind kind, std::size_t q, double t) {
    const Complex i{0.0, 1.0};
    const double c = std::cos(t / 2);
    const double s = std::sin(t / 2);
    std::array<Complex, 4> m{};
    if (kind == GateKind::RX) m = {c, -i * s, -i * s, c};
    if (kind == GateKind::RY) m = {c, -s, s, c};
    if (kind == GateKind::RZ) m = {std::exp(-i * (t / 2)), 0.0, 0.0, std::exp(i * (t / 2))};
    std::vector<Complex> out(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) {
        const std::size_t b = (k >> q) & 1;
        const std::size_t k0 = k & ~(std::size_t{1} << q);
        out[k] = m[b * 2] * psi[k0] + m[b * 2 + 1] * psi[k0 | (std::size_t{1} << q)];
    }
    return out;
}

double max_diff(const StateVector& a, const std::vector<Complex>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

// Upper 1% points of the chi-square distribution, df = 1..15.
constexpr std::array<double, 15> kChiSquare99{6.635,  9.210,  11.345, 13.277, 15.086, 16.812, 18.475, 20.090,
                                              21.666, 23.209, 24.725, 26.217, 27.688, 29.141, 30.578};

bool chi_square_rejects(const std::vector<double>& probs, const ShotHistogram& h) {
    const double n = static_cast<double>(h.total_shots);
    std::vector<std::pair<double, double>> cells;  // (expected, observed)
    double pool_e = 0.0;
    double pool_o = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        const double e = probs[k] * n;
        if (e < 5.0) {
            pool_e += e;
            pool_o += static_cast<double>(h.counts[k]);
        } else {
            cells.emplace_back(e, static_cast<double>(h.counts[k]));
        }
    }
    if (pool_e > 0.0) cells.emplace_back(pool_e, pool_o);
    if (cells.size() < 2) return false;
    double stat = 0.0;
    for (const auto& [e, o] : cells) stat += (o - e) * (o - e) / e;
    return stat > kChiSquare99[cells.size() - 2];
}

Outcome simulator_suite() {
    Rng rng(20240611);
    double worst_norm = 0.0;
    double worst_dense = 0.0;
    double worst_inverse = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.below(5);
        const std::vector<Complex> amps = random_amplitudes(n, rng);
        const StateVector psi = StateVector::from_amplitudes(amps);
        const int kind = static_cast<int>(rng.below(n >= 2 ? 4 : 3));
        if (kind == 3) {
            const std::size_t c = rng.below(n);
            std::size_t g = rng.below(n - 1);
            if (g >= c) ++g;
            const StateVector once = apply_gate(psi, GateOp::cnot(c, g), std::nullopt);
            const StateVector twice = apply_gate(once, GateOp::cnot(c, g), std::nullopt);
            worst_norm = std::max(worst_norm, std::abs(once.norm_squared() - 1.0));
            worst_inverse = std::max(worst_inverse, max_diff(twice, amps));
            std::vector<Complex> perm(amps.size());
            for (std::size_t k = 0; k < amps.size(); ++k) {
                perm[((k >> c) & 1) ? k ^ (std::size_t{1} << g) : k] = amps[k];
            }
            worst_dense = std::max(worst_dense, max_diff(once, perm));
            continue;
        }
        const GateKind gk = std::array{GateKind::RX, GateKind::RY, GateKind::RZ}[static_cast<std::size_t>(kind)];
        const std::size_t q = rng.below(n);
        const double theta = (2.0 * rng.uniform() - 1.0) * 2.0 * kPi;
        const StateVector out = apply_gate(psi, GateOp::rotation(gk, q, AngleSource::bound(theta)), theta);
        const StateVector back = apply_gate(out, GateOp::rotation(gk, q, AngleSource::bound(-theta)), -theta);
        worst_norm = std::max(worst_norm, std::abs(out.norm_squared() - 1.0));
        worst_dense = std::max(worst_dense, max_diff(out, dense_rotation(amps, gk, q, theta)));
        worst_inverse = std::max(worst_inverse, max_diff(back, amps));
    }
    const bool gates_ok = worst_norm <= 1e-10 && worst_dense <= 1e-10 && worst_inverse <= 1e-10;

    int rejections = 0;
    for (std::uint64_t run = 0; run < 100; ++run) {
        Rng r(derive_seed(77, {run}));
        const StateVector psi = StateVector::from_amplitudes(random_amplitudes(3, r));
        const std::vector<double> p = born_probabilities(psi);
        rejections += chi_square_rejects(p, sample_shots(p, 1024, derive_seed(78, {run}))) ? 1 : 0;
    }

    const double h = 1e-5;
    double worst_grad = 0.0;
    int models = 0;
    for (std::size_t n : {2u, 4u}) {
        const std::vector<Label> labels = n == 2 ? std::vector<Label>{1, 9} : std::vector<Label>{1, 4, 7, 9};
        for (int t = 0; t < 10; ++t, ++models) {
            const AnsatzSpec base = build_hea(n, 2, {t % 2 ? RotationLayout::YZ : RotationLayout::Y, Entangler::Chain});
            const Variant v = generate_variants(base, 2, static_cast<std::uint64_t>(t))[static_cast<std::size_t>(t % 2)];
            const ClassifierModel m = ClassifierModel::initialize(v, labels, 500 + static_cast<std::uint64_t>(t));
            Rng r(900 + static_cast<std::uint64_t>(t));
            std::vector<Sample> batch;
            for (int s = 0; s < 4; ++s) {
                Sample x;
                for (std::size_t k = 0; k < n; ++k) x.features.push_back(r.uniform());
                x.label = labels[r.below(labels.size())];
                batch.push_back(x);
            }
            const std::vector<double> g = parameter_shift_gradient(m, batch, Executor::noiseless());
            for (std::size_t j = 0; j < g.size(); ++j) {
                ClassifierModel up = m;
                ClassifierModel dn = m;
                up.params[j] += h;
                dn.params[j] -= h;
                const double fd = (mean_loss(up, batch, Executor::noiseless()) -
                                   mean_loss(dn, batch, Executor::noiseless())) / (2.0 * h);
                worst_grad = std::max(worst_grad, std::abs(fd - g[j]));
            }
        }
    }
    const bool ok = gates_ok && rejections <= 5 && worst_grad <= 1e-6 && models == 20;
    std::ostringstream d;
    d << "100 gate cases: max norm error " << worst_norm << ", max dense error " << worst_dense
      << ", max inverse error " << worst_inverse << "; chi-square rejections " << rejections
      << "/100; parameter-shift vs finite difference max gap " << worst_grad << " over " << models << " models";
    return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// experiments

double table_value(const std::vector<std::vector<std::string>>& rows, const std::string& key, std::size_t column,
                   const std::string& key2 = {}, std::size_t key2_column = 0) {
    for (const auto& r : rows) {
        if (r.size() > column && r[0] == key && (key2.empty() || r[key2_column] == key2)) return std::stod(r[column]);
    }
    throw std::runtime_error("no row '" + key + "' " + key2);
}

Outcome training_target(Task task, const fs::path& out, double threshold) {
    const ExperimentConfig c = full_config(task, out);
    cmd_train(c);
    const auto rows = read_table(out / "train_summary.csv");
    const double mean = std::stod(rows.at(1).at(2));
    const std::string ref = rows.at(1).at(5);
    return {mean >= threshold, to_string(task) + " 4-qubit noiseless test accuracy " + num(mean, 3) + " over " +
                                   rows.at(1).at(4) + " models (threshold " + num(threshold, 2) + ", reference " +
                                   ref + ")"};
}

Outcome noise_ordering(const fs::path& out) {
    ExperimentConfig c = full_config(Task::Mnist2, out);
    c.sweep_qubits = {2, 4};
    cmd_sweep_qubits(c);
    cmd_compare(c);

    std::ostringstream d;
    bool a_ok = true;
    bool b_ok = true;
    const auto sweep = read_table(out / "sweep_qubits_stats.csv");
    for (std::size_t q : c.sweep_qubits) {
        const double sim = table_value(sweep, "simulation", 2, std::to_string(q), 1);
        for (const std::string& m : c.sweep_machines) {
            const double acc = table_value(sweep, m, 2, std::to_string(q), 1);
            if (acc > sim) {
                a_ok = false;
                d << "[a] " << m << " q" << q << ' ' << num(acc, 3) << " > noiseless " << num(sim, 3) << "; ";
            }
        }
    }
    d << "q2->q4:";
    for (const std::string& m : c.sweep_machines) {
        const double a2 = table_value(sweep, m, 2, "2", 1);
        const double a4 = table_value(sweep, m, 2, "4", 1);
        b_ok = b_ok && a4 > a2;
        d << ' ' << m << ' ' << num(a2, 3) << "->" << num(a4, 3);
    }

    const auto cmp = read_table(out / "compare.csv");
    const double eqv_acc = table_value(cmp, "EQV", 1);
    const double sim = table_value(cmp, "simulation", 1);
    bool c_ok = true;
    d << "; EQV " << num(eqv_acc, 3) << " vs";
    for (const std::string& m : c.machines) {
        const double acc = table_value(cmp, m, 1);
        c_ok = c_ok && eqv_acc >= acc;
        a_ok = a_ok && acc <= sim;
        d << ' ' << m << ' ' << num(acc, 3);
    }
    d << ", noiseless " << num(sim, 3);
    const auto strat = read_table(out / "compare_strategies.csv");
    const double plural = table_value(strat, "plurality", 1);
    const double average = table_value(strat, "average", 1);
    c_ok = c_ok && plural >= average;
    d << "; plurality " << num(plural, 3) << " vs average " << num(average, 3);
    d << " [a " << (a_ok ? "ok" : "fail") << ", b " << (b_ok ? "ok" : "fail") << ", c " << (c_ok ? "ok" : "fail")
      << "]";
    return {a_ok && b_ok && c_ok, d.str()};
}

Outcome impact_ordering(const fs::path& out) {
    const ExperimentConfig c = full_config(Task::Mnist2, out);
    cmd_impact(c);
    const auto rows = read_table(out / "impact_summary.csv");
    int higher = 0;
    int seeds = 0;
    bool enough = true;
    std::ostringstream d;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ++seeds;
        enough = enough && std::stoul(rows[i][1]) >= 200;
        if (rows[i][6] == "1") ++higher;
        d << " s" << rows[i][0] << ' ' << rows[i][4] << '/' << rows[i][5];
    }
    return {enough && seeds >= 5 && higher >= 4,
            "wrong > correct in " + std::to_string(higher) + "/" + std::to_string(seeds) +
                " seeds (mean impact correct/wrong:" + d.str() + ")"};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        files[fs::relative(e.path(), dir).string()] = s.str();
    }
    return files;
}

Outcome determinism(const fs::path& out) {
    const fs::path root = out / "determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path data = EQV_DATA_DIR;
    const fs::path cfg = root / "config.ini";
    {
        std::ofstream f(cfg);
        f << "[experiment]\ntask = mnist2\nseeds = 0, 1\nsweep_qubits = 2, 4\nensemble_sizes = 3, 5\n"
          << "compare_size = 5\ntrajectories = 256\noutput = " << (root / "run").string() << '\n'
          << "[data]\nimages = " << (data / "mnist5k-images-idx3-ubyte.gz").string() << '\n'
          << "labels = " << (data / "mnist5k-labels-idx1-ubyte.gz").string() << '\n'
          << "n_train = 80\nn_validation = 20\nn_test = 20\n"
          << "[train]\nblocks = 2\nepochs = 5\nbatch_size = 20\n";
    }
    std::size_t compared = 0;
    std::vector<std::string> bad;
    for (const std::string cmd : {"train", "sweep-qubits", "sweep-ensemble", "compare", "impact"}) {
        std::map<std::string, std::string> first;
        for (int pass = 0; pass < 2; ++pass) {
            fs::remove_all(root / "run");
            const std::string line = std::string("\"") + EQV_CLI + "\" " + cmd + " --config \"" + cfg.string() +
                                     "\" > \"" + (root / (cmd + ".log")).string() + "\" 2>&1";
            if (std::system(line.c_str()) != 0) return {false, cmd + " exited with an error"};
            if (pass == 0) {
                first = snapshot(root / "run");
                continue;
            }
            const auto second = snapshot(root / "run");
            if (first.size() != second.size()) bad.push_back(cmd + ": file sets differ");
            for (const auto& [name, bytes] : first) {
                const auto it = second.find(name);
                if (it == second.end() || it->second != bytes) bad.push_back(cmd + ": " + name);
                ++compared;
            }
        }
    }
    std::string detail = std::to_string(compared) + " files from 5 commands compared byte-for-byte";
    if (!bad.empty()) detail += "; differing: " + bad.front() + (bad.size() > 1 ? " and others" : "");
    return {bad.empty() && compared > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string out = "acceptance_runs";
    std::vector<int> only;
    app.add_option("--out", out, "working directory for experiment outputs");
    app.add_option("--only", only, "criterion ids to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const fs::path root = fs::absolute(out);
    const std::vector<Criterion> criteria{
        {1, "averaging vs voting worked example", 1, averaging_vs_voting},
        {2, "five binary classifiers", 1, five_binary_classifiers},
        {3, "four-class plurality", 0, four_class_vote},
        {4, "impact factors", 0, impact_examples},
        {5, "machine profiles", 0, machine_table},
        {6, "simulator correctness", 120, simulator_suite},
        {7, "noiseless training target", 1200,
         [&] {
             const auto t0 = std::chrono::steady_clock::now();
             Outcome a = training_target(Task::Mnist2, root / "mnist2", 0.85);
             const double s2 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
             Outcome b = training_target(Task::Mnist4, root / "mnist4", 0.55);
             const double s4 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() - s2;
             const bool in_time = s2 < 600 && s4 < 600;
             return Outcome{a.pass && b.pass && in_time, a.detail + " in " + num(s2, 0) + "s; " + b.detail + " in " +
                                                             num(s4, 0) + "s"};
         }},
        {8, "noise ordering", 1800, [&] { return noise_ordering(root / "mnist2"); }},
        {9, "impact of wrong vs correct predictions", 600, [&] { return impact_ordering(root / "mnist2"); }},
        {10, "determinism", 0, [&] { return determinism(root); }},
    };

    int passed = 0;
    int ran = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
            o.pass = false;
            o.detail += " (over the " + num(c.limit_seconds, 0) + "s budget)";
        }
        passed += o.pass ? 1 : 0;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
                  << " [" << num(secs, 1) << "s]" << std::endl;
    }
    std::cout << passed << "/" << ran << " criteria passed" << std::endl;
    return passed == ran ? 0 : 1;
}
