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

// Sectioned key-value text ("INI") used for configs, profiles, models,
// ansatz layouts and cached dataset splits.
//
//   # comment
//   [section]
//   key = value
//
// Doubles are written in shortest round-trip form so reloading a file
// reproduces every value bit-exactly.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace eqv::kv {

using Tree = boost::property_tree::ptree;

Tree parse(const std::string& text);
Tree read_file(const std::filesystem::path& path);

/// Serializes `tree`; each line of `header` is emitted as a leading comment.
std::string format(const Tree& tree, std::string_view header = {});
void write_file(const std::filesystem::path& path, const Tree& tree, std::string_view header = {});

std::string format_double(double value);
double parse_double(std::string_view text);

std::string format_list(const std::vector<double>& values);
std::string format_list(const std::vector<std::size_t>& values);
std::string format_list(const std::vector<int>& values);
std::string format_list(const std::vector<std::string>& values);

std::vector<double> parse_double_list(std::string_view text);
std::vector<std::size_t> parse_count_list(std::string_view text);
std::vector<int> parse_int_list(std::string_view text);
std::vector<std::string> parse_string_list(std::string_view text);

// Typed lookups. Throw FormatError naming the missing or malformed key.
const Tree& section(const Tree& tree, const std::string& name);
std::string get_string(const Tree& section, const std::string& key);
double get_double(const Tree& section, const std::string& key);
std::size_t get_count(const Tree& section, const std::string& key);
std::int64_t get_int(const Tree& section, const std::string& key);
std::uint64_t get_u64(const Tree& section, const std::string& key);

}  // namespace eqv::kv
