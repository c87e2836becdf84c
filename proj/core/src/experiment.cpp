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

#include "eqv/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "eqv/error.hpp"
#include "eqv/kvfile.hpp"
#include "eqv/parallel.hpp"
#include "eqv/rng.hpp"

namespace eqv {

namespace {

namespace fs = std::filesystem;

// Substream tags under each run seed.
enum : std::uint64_t {
    kTagVariants = 0x7661,
    kTagInit = 0x696e,
    kTagTrain = 0x7472,
    kTagAllocate = 0x616c,
    kTagVotes = 0x766f,
    kTagWeights = 0x7765,
    kTagSingle = 0x7367,
};

using Setter = void (*)(ExperimentConfig&, const std::string&);

std::size_t to_count(const std::string& v) { return kv::parse_count_list(v).at(0); }

std::vector<std::uint64_t> to_u64_list(const std::string& v) {
    std::vector<std::uint64_t> out;
    for (std::size_t x : kv::parse_count_list(v)) out.push_back(x);
    return out;
}

std::string join_u64(const std::vector<std::uint64_t>& v) {
    std::vector<std::size_t> tmp(v.begin(), v.end());
    return kv::format_list(tmp);
}

std::string join_strategies(const std::vector<Strategy>& v) {
    std::vector<std::string> names;
    for (Strategy s : v) names.push_back(to_string(s));
    return kv::format_list(names);
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table{
        {"experiment.n_qubits", [](ExperimentConfig& c, const std::string& v) { c.n_qubits = to_count(v); }},
        {"experiment.sweep_qubits",
         [](ExperimentConfig& c, const std::string& v) { c.sweep_qubits = kv::parse_count_list(v); }},
        {"experiment.impact_qubits", [](ExperimentConfig& c, const std::string& v) { c.impact_qubits = to_count(v); }},
        {"experiment.ensemble_sizes",
         [](ExperimentConfig& c, const std::string& v) { c.ensemble_sizes = kv::parse_count_list(v); }},
        {"experiment.compare_size", [](ExperimentConfig& c, const std::string& v) { c.compare_size = to_count(v); }},
        {"experiment.n_variants", [](ExperimentConfig& c, const std::string& v) { c.n_variants = to_count(v); }},
        {"experiment.machines",
         [](ExperimentConfig& c, const std::string& v) { c.machines = kv::parse_string_list(v); }},
        {"experiment.sweep_machines",
         [](ExperimentConfig& c, const std::string& v) { c.sweep_machines = kv::parse_string_list(v); }},
        {"experiment.strategies",
         [](ExperimentConfig& c, const std::string& v) {
             c.strategies.clear();
             for (const std::string& s : kv::parse_string_list(v)) c.strategies.push_back(parse_strategy(s));
         }},
        {"experiment.seeds", [](ExperimentConfig& c, const std::string& v) { c.seeds = to_u64_list(v); }},
        {"experiment.output", [](ExperimentConfig& c, const std::string& v) { c.output = v; }},
        {"experiment.trajectories", [](ExperimentConfig& c, const std::string& v) { c.trajectories = to_count(v); }},
        {"experiment.workers", [](ExperimentConfig& c, const std::string& v) { c.workers = to_count(v); }},
        {"experiment.impact_bins", [](ExperimentConfig& c, const std::string& v) { c.impact_bins = to_count(v); }},
        {"data.images", [](ExperimentConfig& c, const std::string& v) { c.images = v; }},
        {"data.labels", [](ExperimentConfig& c, const std::string& v) { c.labels = v; }},
        {"data.profiles", [](ExperimentConfig& c, const std::string& v) { c.profiles_file = v; }},
        {"data.n_train", [](ExperimentConfig& c, const std::string& v) { c.n_train = to_count(v); }},
        {"data.n_test", [](ExperimentConfig& c, const std::string& v) { c.n_test = to_count(v); }},
        {"data.n_validation", [](ExperimentConfig& c, const std::string& v) { c.n_validation = to_count(v); }},
        {"data.rescale",
         [](ExperimentConfig& c, const std::string& v) {
             if (v != "minmax" && v != "none") throw ConfigError("rescale must be minmax or none");
             c.rescale = v == "minmax";
         }},
        {"train.blocks", [](ExperimentConfig& c, const std::string& v) { c.train.blocks = to_count(v); }},
        {"train.rotations",
         [](ExperimentConfig& c, const std::string& v) { c.train.rotations = parse_rotation_layout(v); }},
        {"train.entangler", [](ExperimentConfig& c, const std::string& v) { c.train.entangler = parse_entangler(v); }},
        {"train.epochs", [](ExperimentConfig& c, const std::string& v) { c.train.epochs = to_count(v); }},
        {"train.batch_size", [](ExperimentConfig& c, const std::string& v) { c.train.batch_size = to_count(v); }},
        {"train.learning_rate",
         [](ExperimentConfig& c, const std::string& v) { c.train.learning_rate = kv::parse_double(v); }},
    };
    return table;
}

void set_key(kv::Tree& tree, const std::string& section, const std::string& key, const std::string& value) {
    tree.put(kv::Tree::path_type(section + '\0' + key, '\0'), value);
}

std::string comment_block(const std::string& text) {
    std::string out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out += line.empty() ? "#\n" : "# " + line + '\n';
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

// Writes a delimited table with the schema line and resolved config on top.
class TableWriter {
public:
    TableWriter(const ExperimentConfig& config, std::string command)
        : config_(config), command_(std::move(command)), config_text_(format_config(config)) {}

    void write(const std::string& name, const std::string& body) {
        std::string text = "# schema: eqv." + fs::path(name).stem().string() + '/' + std::to_string(kSchemaVersion) +
                           "\n# command: " + command_ + "\n# config:\n" + comment_block(config_text_) + body;
        write_text(config_.output / name, text);
        files_.push_back(name);
    }

    CommandResult finish(std::string summary) {
        kv::Tree manifest;
        set_key(manifest, "run", "command", command_);
        set_key(manifest, "run", "schema_version", std::to_string(kSchemaVersion));
        set_key(manifest, "run", "n_seeds", std::to_string(config_.seeds.size()));
        for (std::size_t i = 0; i < files_.size(); ++i) set_key(manifest, "files", std::to_string(i), files_[i]);
        const std::string name = "manifest-" + command_ + ".ini";
        write_text(config_.output / name, kv::format(manifest, "run manifest") + '\n' + comment_block(config_text_));
        files_.push_back(name);
        return {files_, std::move(summary)};
    }

private:
    const ExperimentConfig& config_;
    std::string command_;
    std::string config_text_;
    std::vector<std::string> files_;
};

std::string fmt(double v, int digits = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string std_text(const AccuracyReport& r) { return r.std ? kv::format_double(*r.std) : std::string("-"); }

std::vector<RawImage> load_images(const ExperimentConfig& config) { return load_idx(config.images, config.labels); }

// Reference accuracies reported next to measured ones.
std::string reference_value(Task task, const std::string& setting) {
    static const std::map<std::string, std::pair<std::string, std::string>> table{
        {"EQV", {"0.87", "0.451"}},         {"ibmq_lima", {"0.81", "0.416"}},
        {"ibmq_quito", {"0.83", "0.413"}},  {"ibmq_belem", {"0.78", "0.406"}},
        {"simulation", {"0.91", "0.71"}},
    };
    const auto it = table.find(setting);
    if (it == table.end()) return "-";
    return task == Task::Mnist2 ? it->second.first : it->second.second;
}

std::string training_fingerprint(const ExperimentConfig& c, std::uint64_t seed, std::size_t n_qubits) {
    kv::Tree t;
    set_key(t, "models", "task", to_string(c.task));
    set_key(t, "models", "seed", std::to_string(seed));
    set_key(t, "models", "n_qubits", std::to_string(n_qubits));
    set_key(t, "models", "n_variants", std::to_string(effective_variants(c, n_qubits)));
    set_key(t, "models", "images", c.images.string());
    set_key(t, "models", "labels", c.labels.string());
    set_key(t, "models", "n_train", std::to_string(c.n_train));
    set_key(t, "models", "n_test", std::to_string(c.n_test));
    set_key(t, "models", "n_validation", std::to_string(c.n_validation));
    set_key(t, "models", "rescale", c.rescale ? "minmax" : "none");
    set_key(t, "models", "blocks", std::to_string(c.train.blocks));
    set_key(t, "models", "rotations", to_string(c.train.rotations));
    set_key(t, "models", "entangler", to_string(c.train.entangler));
    set_key(t, "models", "epochs", std::to_string(c.train.epochs));
    set_key(t, "models", "batch_size", std::to_string(c.train.batch_size));
    set_key(t, "models", "learning_rate", kv::format_double(c.train.learning_rate));
    return kv::format(t);
}

std::string read_text_or_empty(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Per-machine mean of the individual classifier accuracies in a record set.
std::vector<double> single_machine_accuracies(const VoteRecords& rec) {
    const std::size_t n_machines = rec.machines.size();
    std::vector<double> correct(n_machines, 0.0);
    std::vector<double> total(n_machines, 0.0);
    for (const SampleVotes& s : rec.samples) {
        for (const ClassifierVote& v : s.tally.per_classifier) {
            total[v.id.machine] += 1.0;
            if (v.predicted == s.true_label) correct[v.id.machine] += 1.0;
        }
    }
    for (std::size_t m = 0; m < n_machines; ++m) correct[m] /= total[m];
    return correct;
}

std::vector<MachineProfile> resolve_machines(const ExperimentConfig& c, const std::vector<std::string>& names) {
    const std::vector<MachineProfile> all = c.profiles();
    std::vector<MachineProfile> out;
    for (const std::string& n : names) out.push_back(find_profile(all, n));
    return out;
}

}  // namespace

std::string to_string(Task t) { return t == Task::Mnist2 ? "mnist2" : "mnist4"; }

Task parse_task(const std::string& text) {
    if (text == "mnist2") return Task::Mnist2;
    if (text == "mnist4") return Task::Mnist4;
    throw ConfigError("unknown task '" + text + "' (expected mnist2 or mnist4)");
}

std::vector<Label> task_digits(Task t) {
    if (t == Task::Mnist2) return {1, 9};
    return {1, 4, 7, 9};
}

TrainSettings default_train_settings(Task t) {
    TrainSettings s;
    if (t == Task::Mnist2) {
        s.blocks = 3;
        s.epochs = 100;
        s.learning_rate = 0.5;
    } else {
        s.blocks = 5;
        s.epochs = 150;
        s.learning_rate = 0.5;
    }
    return s;
}

std::size_t ExperimentConfig::resolved_compare_size() const {
    if (compare_size != 0) return compare_size;
    return task == Task::Mnist2 ? 7 : 11;
}

std::vector<MachineProfile> ExperimentConfig::profiles() const {
    if (profiles_file.empty()) return load_profiles();
    return load_profiles_file(profiles_file);
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (n_qubits < 2 || n_qubits > kMaxQubits) throw ConfigError("n_qubits must be in [2, 10]");
    if (impact_qubits < 2 || impact_qubits > kMaxQubits) throw ConfigError("impact_qubits must be in [2, 10]");
    for (std::size_t q : sweep_qubits) {
        if (q < 2 || q > kMaxQubits) throw ConfigError("sweep_qubits entries must be in [2, 10]");
    }
    if (n_variants == 0) throw ConfigError("n_variants must be >= 1");
    if (ensemble_sizes.empty()) throw ConfigError("ensemble_sizes must not be empty");
    if (strategies.empty()) throw ConfigError("strategies must not be empty");
    if (machines.empty()) throw ConfigError("machines must not be empty");
    const std::vector<MachineProfile> all = profiles();
    for (const auto* list : {&machines, &sweep_machines}) {
        for (const std::string& m : *list) find_profile(all, m);
    }
    if (n_train <= n_validation) throw ConfigError("n_train must exceed n_validation");
    if (n_test == 0) throw ConfigError("n_test must be >= 1");
    if (train.blocks == 0 || train.batch_size == 0) throw ConfigError("blocks and batch_size must be >= 1");
    if (!(train.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (impact_bins == 0) throw ConfigError("impact_bins must be >= 1");
}

ExperimentConfig default_config(Task t) {
    ExperimentConfig c;
    c.task = t;
    c.train = default_train_settings(t);
    return c;
}

ExperimentConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
    kv::Tree tree = kv::parse(text);
    for (const auto& [key, value] : overrides) {
        const std::size_t dot = key.find('.');
        if (dot == std::string::npos) throw ConfigError("override '" + key + "' must look like section.key");
        set_key(tree, key.substr(0, dot), key.substr(dot + 1), value);
    }
    Task task = Task::Mnist2;
    if (const auto exp = tree.get_child_optional(kv::Tree::path_type("experiment", '\0'))) {
        if (exp->count("task")) task = parse_task(kv::get_string(*exp, "task"));
    }
    ExperimentConfig c = default_config(task);
    for (const auto& [section, sec] : tree) {
        if (sec.empty()) throw ConfigError("key '" + section + "' must be inside a section");
        for (const auto& [key, leaf] : sec) {
            const std::string full = section + '.' + key;
            if (full == "experiment.task") continue;
            const auto it = setters().find(full);
            if (it == setters().end()) throw ConfigError("unknown config key '" + full + "'");
            try {
                it->second(c, kv::get_string(sec, key));
            } catch (const FormatError& e) {
                throw ConfigError("bad value for '" + full + "': " + e.what());
            }
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const fs::path& path, const std::map<std::string, std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

std::string format_config(const ExperimentConfig& c) {
    kv::Tree t;
    set_key(t, "experiment", "task", to_string(c.task));
    set_key(t, "experiment", "n_qubits", std::to_string(c.n_qubits));
    set_key(t, "experiment", "sweep_qubits", kv::format_list(c.sweep_qubits));
    set_key(t, "experiment", "impact_qubits", std::to_string(c.impact_qubits));
    set_key(t, "experiment", "ensemble_sizes", kv::format_list(c.ensemble_sizes));
    set_key(t, "experiment", "compare_size", std::to_string(c.compare_size));
    set_key(t, "experiment", "n_variants", std::to_string(c.n_variants));
    set_key(t, "experiment", "machines", kv::format_list(c.machines));
    set_key(t, "experiment", "sweep_machines", kv::format_list(c.sweep_machines));
    set_key(t, "experiment", "strategies", join_strategies(c.strategies));
    set_key(t, "experiment", "seeds", join_u64(c.seeds));
    set_key(t, "experiment", "output", c.output.string());
    set_key(t, "experiment", "trajectories", std::to_string(c.trajectories));
    set_key(t, "experiment", "workers", std::to_string(c.workers));
    set_key(t, "experiment", "impact_bins", std::to_string(c.impact_bins));
    set_key(t, "data", "images", c.images.string());
    set_key(t, "data", "labels", c.labels.string());
    set_key(t, "data", "profiles", c.profiles_file.string());
    set_key(t, "data", "n_train", std::to_string(c.n_train));
    set_key(t, "data", "n_test", std::to_string(c.n_test));
    set_key(t, "data", "n_validation", std::to_string(c.n_validation));
    set_key(t, "data", "rescale", c.rescale ? "minmax" : "none");
    set_key(t, "train", "blocks", std::to_string(c.train.blocks));
    set_key(t, "train", "rotations", to_string(c.train.rotations));
    set_key(t, "train", "entangler", to_string(c.train.entangler));
    set_key(t, "train", "epochs", std::to_string(c.train.epochs));
    set_key(t, "train", "batch_size", std::to_string(c.train.batch_size));
    set_key(t, "train", "learning_rate", kv::format_double(c.train.learning_rate));
    return kv::format(t);
}

std::size_t effective_variants(const ExperimentConfig& config, std::size_t n_qubits) {
    const std::uint64_t layouts = count_layouts(n_qubits);
    return static_cast<std::size_t>(std::min<std::uint64_t>(config.n_variants, layouts));
}

TrainedSet obtain_models(const ExperimentConfig& config, std::span<const RawImage> images, std::uint64_t seed,
                         std::size_t n_qubits, bool reuse) {
    const std::vector<Label> digits = task_digits(config.task);
    TrainedSet ts;
    ts.seed = seed;
    ts.n_qubits = n_qubits;
    ts.split = build_subset(images, digits, config.n_train, config.n_test, seed, n_qubits);
    const std::span<const Sample> train_part(ts.split.train);
    const std::size_t n_fit = train_part.size() - config.n_validation;
    ts.scaler = config.rescale ? FeatureScaler::fit(train_part.first(n_fit)) : FeatureScaler::identity(n_qubits);
    ts.fit = ts.scaler.apply(train_part.first(n_fit));
    ts.validation = ts.scaler.apply(train_part.subspan(n_fit));
    ts.test = ts.scaler.apply(std::span<const Sample>(ts.split.test));

    const std::size_t k = effective_variants(config, n_qubits);
    const fs::path dir = config.output / "models" /
                         (to_string(config.task) + "_q" + std::to_string(n_qubits) + "_s" + std::to_string(seed));
    const std::string fingerprint = training_fingerprint(config, seed, n_qubits);
    auto model_path = [&](std::size_t v) { return dir / ("variant_" + std::to_string(v) + ".model"); };

    bool loaded = false;
    if (reuse && read_text_or_empty(dir / "fingerprint.ini") == fingerprint) {
        try {
            for (std::size_t v = 0; v < k; ++v) ts.models.push_back(load_model(model_path(v)));
            loaded = true;
        } catch (const FormatError&) {
            ts.models.clear();
        }
    }
    if (!loaded) {
        HeaOptions opts;
        opts.rotations = config.train.rotations;
        opts.entangler = config.train.entangler;
        const AnsatzSpec base = build_hea(n_qubits, config.train.blocks, opts);
        const std::vector<Variant> variants = generate_variants(base, k, derive_seed(seed, {kTagVariants}));
        ts.models.resize(k);
        parallel_for(k, config.workers, [&](std::size_t v) {
            const ClassifierModel init =
                ClassifierModel::initialize(variants[v], digits, derive_seed(seed, {kTagInit, v}));
            TrainConfig tc;
            tc.epochs = config.train.epochs;
            tc.batch_size = config.train.batch_size;
            tc.learning_rate = config.train.learning_rate;
            tc.seed = derive_seed(seed, {kTagTrain, v});
            ts.models[v] = train(init, ts.fit, tc);
        });
        fs::remove_all(dir);
        for (std::size_t v = 0; v < k; ++v) save_model(model_path(v), ts.models[v]);
        write_text(dir / "scaler.ini", format_scaler(ts.scaler));
        write_text(dir / "fingerprint.ini", fingerprint);
    }
    for (const ClassifierModel& m : ts.models) ts.final_losses.push_back(mean_loss(m, ts.fit, Executor::noiseless()));
    return ts;
}

// ---------------------------------------------------------------------------

CommandResult cmd_train(const ExperimentConfig& config) {
    config.validate();
    const std::vector<RawImage> images = load_images(config);
    TableWriter out(config, "train");
    std::string rows = "seed,variant,final_train_loss,test_accuracy\n";
    std::vector<double> accs;
    std::ostringstream summary;
    summary << "task " << to_string(config.task) << ", " << config.n_qubits << " qubits, noiseless test accuracy\n";
    for (std::uint64_t seed : config.seeds) {
        const TrainedSet ts = obtain_models(config, images, seed, config.n_qubits, false);
        for (std::size_t v = 0; v < ts.models.size(); ++v) {
            const double acc = accuracy(ts.models[v], ts.test, Executor::noiseless());
            accs.push_back(acc);
            rows += std::to_string(seed) + ',' + std::to_string(v) + ',' + kv::format_double(ts.final_losses[v]) + ',' +
                    kv::format_double(acc) + '\n';
            summary << "  seed " << seed << " variant " << v << ": " << fmt(acc) << '\n';
        }
    }
    out.write("train.csv", rows);
    const AccuracyReport r = accuracy_stats(accs, "simulation");
    const std::string ref = reference_value(config.task, "simulation");
    out.write("train_summary.csv", "task,n_qubits,mean,std,n_runs,reference\n" + to_string(config.task) + ',' +
                                       std::to_string(config.n_qubits) + ',' + kv::format_double(r.mean) + ',' +
                                       std_text(r) + ',' + std::to_string(r.n_runs) + ',' + ref + '\n');
    summary << "  mean " << format_accuracy(r) << " over " << r.n_runs << " models (reference " << ref << ")\n";
    return out.finish(summary.str());
}

CommandResult cmd_sweep_qubits(const ExperimentConfig& config) {
    config.validate();
    const std::vector<RawImage> images = load_images(config);
    const std::vector<MachineProfile> machines = resolve_machines(config, config.sweep_machines);
    TableWriter out(config, "sweep-qubits");

    // acc[q][machine] over seeds; the last machine slot holds the noiseless run.
    std::vector<std::vector<std::vector<double>>> acc(
        config.sweep_qubits.size(), std::vector<std::vector<double>>(machines.size() + 1));
    std::string runs = "machine,n_qubits,seed,accuracy\n";
    for (std::size_t qi = 0; qi < config.sweep_qubits.size(); ++qi) {
        const std::size_t q = config.sweep_qubits[qi];
        for (std::uint64_t seed : config.seeds) {
            const TrainedSet ts = obtain_models(config, images, seed, q);
            std::vector<double> per_machine(machines.size() + 1, -1.0);
            parallel_for(machines.size() + 1, config.workers, [&](std::size_t m) {
                if (m < machines.size() && machines[m].n_qubits < q) return;
                double total = 0.0;
                for (std::size_t v = 0; v < ts.models.size(); ++v) {
                    const Executor exec =
                        m == machines.size()
                            ? Executor::noiseless()
                            : Executor::noisy(machines[m], derive_seed(seed, {kTagSingle, q, m, v}), config.trajectories);
                    total += accuracy(ts.models[v], ts.test, exec);
                }
                per_machine[m] = total / static_cast<double>(ts.models.size());
            });
            for (std::size_t m = 0; m <= machines.size(); ++m) {
                if (per_machine[m] < 0.0) continue;
                acc[qi][m].push_back(per_machine[m]);
                const std::string name = m == machines.size() ? "simulation" : machines[m].name;
                runs += name + ',' + std::to_string(q) + ',' + std::to_string(seed) + ',' +
                        kv::format_double(per_machine[m]) + '\n';
            }
        }
    }
    std::string table = "machine";
    std::string stats = "machine,n_qubits,mean,std,n_runs\n";
    for (std::size_t q : config.sweep_qubits) table += ",q" + std::to_string(q);
    table += '\n';
    std::ostringstream summary;
    summary << "single-classifier accuracy, mean +- std over " << config.seeds.size() << " seeds\n";
    for (std::size_t m = 0; m <= machines.size(); ++m) {
        const std::string name = m == machines.size() ? "simulation" : machines[m].name;
        table += name;
        summary << "  " << name;
        for (std::size_t qi = 0; qi < config.sweep_qubits.size(); ++qi) {
            if (acc[qi][m].empty()) {
                table += ",-";
                summary << "  q" << config.sweep_qubits[qi] << " -";
                continue;
            }
            const AccuracyReport r = accuracy_stats(acc[qi][m]);
            table += ',' + format_accuracy(r);
            stats += name + ',' + std::to_string(config.sweep_qubits[qi]) + ',' + kv::format_double(r.mean) + ',' +
                     std_text(r) + ',' + std::to_string(r.n_runs) + '\n';
            summary << "  q" << config.sweep_qubits[qi] << ' ' << format_accuracy(r);
        }
        table += '\n';
        summary << '\n';
    }
    out.write("sweep_qubits.csv", table);
    out.write("sweep_qubits_stats.csv", stats);
    out.write("sweep_qubits_runs.csv", runs);
    return out.finish(summary.str());
}

CommandResult cmd_sweep_ensemble(const ExperimentConfig& config) {
    config.validate();
    const std::vector<RawImage> images = load_images(config);
    const std::vector<MachineProfile> machines = resolve_machines(config, config.machines);
    TableWriter out(config, "sweep-ensemble");
    const bool need_weights =
        std::find(config.strategies.begin(), config.strategies.end(), Strategy::AccuracyWeighted) !=
        config.strategies.end();

    std::map<std::pair<std::size_t, Strategy>, std::vector<double>> acc;
    std::string runs = "size,strategy,seed,accuracy\n";
    for (std::uint64_t seed : config.seeds) {
        const TrainedSet ts = obtain_models(config, images, seed, config.n_qubits);
        for (std::size_t size : config.ensemble_sizes) {
            const std::vector<std::size_t> alloc =
                allocate_variants(size, ts.models.size(), derive_seed(seed, {kTagAllocate, size}));
            const VoteRecords rec = collect_votes(ts.models, alloc, machines, ts.test,
                                                  derive_seed(seed, {kTagVotes, size}), config.trajectories,
                                                  config.workers);
            std::vector<double> weights;
            if (need_weights) {
                weights = validation_weights(ts.models, rec, ts.validation, derive_seed(seed, {kTagWeights}),
                                             config.trajectories, config.workers);
            }
            for (Strategy s : config.strategies) {
                const double a = aggregate(rec, s, weights).accuracy;
                acc[{size, s}].push_back(a);
                runs += std::to_string(size) + ',' + to_string(s) + ',' + std::to_string(seed) + ',' +
                        kv::format_double(a) + '\n';
            }
        }
    }
    std::string rows = "size,strategy,mean,std,n_runs\n";
    std::ostringstream summary;
    summary << "ensemble accuracy on " << kv::format_list(config.machines) << ", mean +- std over "
            << config.seeds.size() << " seeds\n";
    for (Strategy s : config.strategies) {
        std::size_t best = 0;
        double best_mean = -1.0;
        for (std::size_t size : config.ensemble_sizes) {
            const AccuracyReport r = accuracy_stats(acc[{size, s}]);
            rows += std::to_string(size) + ',' + to_string(s) + ',' + kv::format_double(r.mean) + ',' + std_text(r) +
                    ',' + std::to_string(r.n_runs) + '\n';
            summary << "  size " << size << ' ' << to_string(s) << ": " << format_accuracy(r) << '\n';
            if (r.mean > best_mean) {
                best_mean = r.mean;
                best = size;
            }
        }
        summary << "  best size for " << to_string(s) << ": " << best << '\n';
    }
    out.write("sweep_ensemble.csv", rows);
    out.write("sweep_ensemble_runs.csv", runs);
    return out.finish(summary.str());
}

CommandResult cmd_compare(const ExperimentConfig& config) {
    config.validate();
    const std::vector<RawImage> images = load_images(config);
    const std::vector<MachineProfile> machines = resolve_machines(config, config.machines);
    TableWriter out(config, "compare");
    const std::size_t size = config.resolved_compare_size();

    std::vector<std::string> settings{"EQV"};
    for (const MachineProfile& m : machines) settings.push_back(m.name);
    settings.push_back("simulation");
    std::map<std::string, std::vector<double>> acc;
    std::map<Strategy, std::vector<double>> strat;
    std::string runs = "seed,setting,accuracy\n";

    for (std::uint64_t seed : config.seeds) {
        const TrainedSet ts = obtain_models(config, images, seed, config.n_qubits);
        const std::vector<std::size_t> alloc =
            allocate_variants(size, ts.models.size(), derive_seed(seed, {kTagAllocate, size}));
        const VoteRecords rec = collect_votes(ts.models, alloc, machines, ts.test,
                                              derive_seed(seed, {kTagVotes, size}), config.trajectories,
                                              config.workers);
        const std::vector<double> weights = validation_weights(
            ts.models, rec, ts.validation, derive_seed(seed, {kTagWeights}), config.trajectories, config.workers);

        std::map<std::string, double> row;
        const EnsembleOutcome plural = aggregate(rec, Strategy::Plurality);
        row["EQV"] = plural.accuracy;
        const std::vector<double> singles = single_machine_accuracies(rec);
        for (std::size_t m = 0; m < machines.size(); ++m) row[machines[m].name] = singles[m];
        std::vector<double> sim;
        for (const ClassifierModel& model : ts.models) sim.push_back(accuracy(model, ts.test, Executor::noiseless()));
        row["simulation"] = mean_of(sim);
        for (const std::string& s : settings) {
            acc[s].push_back(row[s]);
            runs += std::to_string(seed) + ',' + s + ',' + kv::format_double(row[s]) + '\n';
        }
        for (Strategy s : config.strategies) {
            const double a = aggregate(rec, s, weights).accuracy;
            strat[s].push_back(a);
            runs += std::to_string(seed) + ",strategy:" + to_string(s) + ',' + kv::format_double(a) + '\n';
        }
        out.write("votes_seed" + std::to_string(seed) + ".csv", format_vote_records(rec, plural));
    }

    std::string rows = "setting,mean,std,n_runs,reference\n";
    std::ostringstream summary;
    summary << to_string(config.task) << ", ensemble size " << size << ", mean +- std over " << config.seeds.size()
            << " seeds\n";
    for (const std::string& s : settings) {
        const AccuracyReport r = accuracy_stats(acc[s]);
        const std::string ref = reference_value(config.task, s);
        rows += s + ',' + kv::format_double(r.mean) + ',' + std_text(r) + ',' + std::to_string(r.n_runs) + ',' + ref +
                '\n';
        summary << "  " << s << ": " << format_accuracy(r) << " (reference " << ref << ")\n";
    }
    std::string srows = "strategy,mean,std,n_runs\n";
    for (Strategy s : config.strategies) {
        const AccuracyReport r = accuracy_stats(strat[s]);
        srows += to_string(s) + ',' + kv::format_double(r.mean) + ',' + std_text(r) + ',' + std::to_string(r.n_runs) +
                 '\n';
        summary << "  strategy " << to_string(s) << ": " << format_accuracy(r) << '\n';
    }
    out.write("compare.csv", rows);
    out.write("compare_strategies.csv", srows);
    out.write("compare_runs.csv", runs);
    return out.finish(summary.str());
}

CommandResult cmd_impact(const ExperimentConfig& config) {
    config.validate();
    const std::vector<RawImage> images = load_images(config);
    const std::vector<MachineProfile> machines = resolve_machines(config, config.machines);
    TableWriter out(config, "impact");
    const std::size_t q = config.impact_qubits;
    const std::size_t size = config.resolved_compare_size();

    std::vector<ImpactRecord> pooled;
    std::string rows = "seed,n_records,n_correct,n_wrong,mean_correct,mean_wrong,wrong_higher\n";
    std::ostringstream summary;
    summary << "impact factors, " << q << "-qubit " << to_string(config.task) << " on "
            << kv::format_list(config.machines) << '\n';
    std::size_t wrong_higher = 0;
    for (std::uint64_t seed : config.seeds) {
        const TrainedSet ts = obtain_models(config, images, seed, q);
        const std::vector<std::size_t> alloc =
            allocate_variants(std::max(size, ts.models.size()), ts.models.size(), derive_seed(seed, {kTagAllocate, size}));
        const VoteRecords rec = collect_votes(ts.models, alloc, machines, ts.test,
                                              derive_seed(seed, {kTagVotes, size}), config.trajectories,
                                              config.workers);
        const std::vector<ImpactRecord> records = impact_records(rec);
        pooled.insert(pooled.end(), records.begin(), records.end());
        out.write("impact_records_seed" + std::to_string(seed) + ".csv", format_impact_records(records));
        const std::size_t n_correct = static_cast<std::size_t>(
            std::count_if(records.begin(), records.end(), [](const ImpactRecord& r) { return r.correct; }));
        const std::size_t n_wrong = records.size() - n_correct;
        rows += std::to_string(seed) + ',' + std::to_string(records.size()) + ',' + std::to_string(n_correct) + ',' +
                std::to_string(n_wrong) + ',';
        try {
            const ImpactDistribution d = impact_distribution(records, config.impact_bins);
            const bool higher = d.mean_wrong > d.mean_correct;
            wrong_higher += higher ? 1 : 0;
            rows += kv::format_double(d.mean_correct) + ',' + kv::format_double(d.mean_wrong) + ',' +
                    (higher ? "1" : "0") + '\n';
            summary << "  seed " << seed << ": mean impact correct " << fmt(d.mean_correct) << ", wrong "
                    << fmt(d.mean_wrong) << " (" << records.size() << " records)\n";
        } catch (const ArgumentError& e) {
            rows += "-,-,-\n";
            summary << "  seed " << seed << ": " << e.what() << '\n';
        }
    }
    const ImpactDistribution all = impact_distribution(pooled, config.impact_bins);
    out.write("impact_summary.csv", rows);
    out.write("impact_density.csv", format_impact_distribution(all));
    summary << "  wrong > correct in " << wrong_higher << " of " << config.seeds.size() << " seeds; pooled means "
            << fmt(all.mean_correct) << " (correct) vs " << fmt(all.mean_wrong) << " (wrong)\n";
    return out.finish(summary.str());
}

CommandResult run_command(const std::string& name, const ExperimentConfig& config) {
    if (name == "train") return cmd_train(config);
    if (name == "sweep-qubits") return cmd_sweep_qubits(config);
    if (name == "sweep-ensemble") return cmd_sweep_ensemble(config);
    if (name == "compare") return cmd_compare(config);
    if (name == "impact") return cmd_impact(config);
    throw ConfigError("unknown command '" + name + "'");
}

}  // namespace eqv
