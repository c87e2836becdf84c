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

// eqv: experiment runner.
//
//   eqv <command> [--config FILE] [--task mnist2|mnist4] [--qubits N]
//       [--sizes 3,5,7] [--machines a,b] [--strategies plurality,average]
//       [--seeds 0,1,2] [--out DIR] [--set section.key=value ...]

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eqv/error.hpp"
#include "eqv/experiment.hpp"

namespace {

struct Flags {
    std::string config;
    std::string task;
    std::string qubits;
    std::string sizes;
    std::string machines;
    std::string strategies;
    std::string seeds;
    std::string out;
    std::vector<std::string> sets;
};

void add_common(CLI::App& cmd, Flags& f) {
    cmd.add_option("--config", f.config, "INI configuration file")->check(CLI::ExistingFile);
    cmd.add_option("--task", f.task, "mnist2 or mnist4");
    cmd.add_option("--qubits", f.qubits, "qubit count (comma list for sweep-qubits)");
    cmd.add_option("--sizes", f.sizes, "ensemble sizes, comma separated");
    cmd.add_option("--machines", f.machines, "machine profile names, comma separated");
    cmd.add_option("--strategies", f.strategies, "plurality, average, accuracy_weighted");
    cmd.add_option("--seeds", f.seeds, "run seeds, comma separated");
    cmd.add_option("--out", f.out, "output directory");
    cmd.add_option("--set", f.sets, "raw override section.key=value (repeatable)");
}

std::map<std::string, std::string> overrides_for(const std::string& command, const Flags& f) {
    std::map<std::string, std::string> o;
    for (const std::string& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw eqv::ConfigError("--set expects section.key=value, got '" + s + "'");
        o[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (!f.task.empty()) o["experiment.task"] = f.task;
    if (!f.qubits.empty()) {
        if (command == "sweep-qubits") {
            o["experiment.sweep_qubits"] = f.qubits;
        } else if (command == "impact") {
            o["experiment.impact_qubits"] = f.qubits;
        } else {
            o["experiment.n_qubits"] = f.qubits;
        }
    }
    if (!f.sizes.empty()) {
        if (command == "compare" || command == "impact") {
            o["experiment.compare_size"] = f.sizes;
        } else {
            o["experiment.ensemble_sizes"] = f.sizes;
        }
    }
    if (!f.machines.empty()) o[command == "sweep-qubits" ? "experiment.sweep_machines" : "experiment.machines"] = f.machines;
    if (!f.strategies.empty()) o["experiment.strategies"] = f.strategies;
    if (!f.seeds.empty()) o["experiment.seeds"] = f.seeds;
    if (!f.out.empty()) o["experiment.output"] = f.out;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ensembles of variational quantum classifiers on simulated noisy machines"};
    app.require_subcommand(1);
    Flags flags;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"train", "train every variant noiselessly and write model files"},
        {"sweep-qubits", "single-classifier accuracy per machine and qubit count"},
        {"sweep-ensemble", "ensemble accuracy per size and strategy"},
        {"compare", "ensemble vs single machines vs noiseless simulation"},
        {"impact", "impact-factor records and densities"},
    };
    for (const auto& [name, help] : commands) add_common(*app.add_subcommand(name, help), flags);
    bool show_config = false;
    app.add_flag("--print-config", show_config, "print the resolved configuration before running");

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const auto overrides = overrides_for(command, flags);
        const eqv::ExperimentConfig config =
            flags.config.empty() ? eqv::parse_config("", overrides) : eqv::load_config(flags.config, overrides);
        if (show_config) std::cout << eqv::format_config(config) << '\n';
        const eqv::CommandResult result = eqv::run_command(command, config);
        std::cout << result.summary;
        for (const std::string& f : result.files) std::cout << "wrote " << (config.output / f).string() << '\n';
    } catch (const eqv::Error& e) {
        std::cerr << "eqv " << command << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
