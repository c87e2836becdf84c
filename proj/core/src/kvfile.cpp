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

#include "eqv/kvfile.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <boost/property_tree/ini_parser.hpp>

#include "eqv/error.hpp"

namespace eqv::kv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_list(std::string_view text) {
    std::vector<std::string_view> out;
    text = trim(text);
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        out.push_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_integral(std::string_view text, const char* what) {
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw FormatError(std::string("malformed ") + what + " '" + std::string(text) + "'");
    }
    return value;
}

template <class T>
std::string join(const std::vector<T>& values, auto&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += fmt(values[i]);
    }
    return out;
}

}  // namespace

Tree parse(const std::string& text) {
    std::istringstream in(text);
    Tree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw FormatError(std::string("key-value parse error: ") + e.what());
    }
    return tree;
}

Tree read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string format(const Tree& tree, std::string_view header) {
    std::ostringstream out;
    std::size_t pos = 0;
    while (!header.empty() && pos <= header.size()) {
        const std::size_t nl = header.find('\n', pos);
        const std::string_view line = header.substr(pos, nl == header.npos ? header.npos : nl - pos);
        out << "# " << line << '\n';
        if (nl == header.npos) break;
        pos = nl + 1;
    }
    for (const auto& [key, child] : tree) {
        if (child.empty()) out << key << " = " << child.data() << '\n';
    }
    for (const auto& [name, sec] : tree) {
        if (sec.empty()) continue;
        out << '\n' << '[' << name << "]\n";
        for (const auto& [key, leaf] : sec) out << key << " = " << leaf.data() << '\n';
    }
    return out.str();
}

void write_file(const std::filesystem::path& path, const Tree& tree, std::string_view header) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out << format(tree, header);
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw FormatError("malformed number '" + std::string(text) + "'");
    }
    return value;
}

std::string format_list(const std::vector<double>& values) { return join(values, format_double); }
std::string format_list(const std::vector<std::size_t>& values) {
    return join(values, [](std::size_t v) { return std::to_string(v); });
}
std::string format_list(const std::vector<int>& values) {
    return join(values, [](int v) { return std::to_string(v); });
}
std::string format_list(const std::vector<std::string>& values) {
    return join(values, [](const std::string& v) { return v; });
}

std::vector<double> parse_double_list(std::string_view text) {
    std::vector<double> out;
    for (auto item : split_list(text)) out.push_back(parse_double(item));
    return out;
}

std::vector<std::size_t> parse_count_list(std::string_view text) {
    std::vector<std::size_t> out;
    for (auto item : split_list(text)) out.push_back(parse_integral<std::size_t>(item, "count"));
    return out;
}

std::vector<int> parse_int_list(std::string_view text) {
    std::vector<int> out;
    for (auto item : split_list(text)) out.push_back(parse_integral<int>(item, "integer"));
    return out;
}

std::vector<std::string> parse_string_list(std::string_view text) {
    std::vector<std::string> out;
    for (auto item : split_list(text)) out.emplace_back(item);
    return out;
}

const Tree& section(const Tree& tree, const std::string& name) {
    const auto child = tree.get_child_optional(Tree::path_type(name, '\0'));
    if (!child) throw FormatError("missing section [" + name + "]");
    return *child;
}

std::string get_string(const Tree& sec, const std::string& key) {
    const auto value = sec.get_optional<std::string>(Tree::path_type(key, '\0'));
    if (!value) throw FormatError("missing key '" + key + "'");
    return std::string(trim(*value));
}

double get_double(const Tree& sec, const std::string& key) { return parse_double(get_string(sec, key)); }

std::size_t get_count(const Tree& sec, const std::string& key) {
    return parse_integral<std::size_t>(get_string(sec, key), key.c_str());
}

std::int64_t get_int(const Tree& sec, const std::string& key) {
    return parse_integral<std::int64_t>(get_string(sec, key), key.c_str());
}

std::uint64_t get_u64(const Tree& sec, const std::string& key) {
    return parse_integral<std::uint64_t>(get_string(sec, key), key.c_str());
}

}  // namespace eqv::kv
