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

#include "eqv/data.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "eqv/error.hpp"
#include "eqv/kvfile.hpp"
#include "eqv/rng.hpp"

namespace eqv {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::string format_sample(const Sample& s) {
    std::string out = std::to_string(s.source_index) + ", " + std::to_string(s.label);
    for (double f : s.features) out += ", " + kv::format_double(f);
    return out;
}

Sample parse_sample(const std::string& text) {
    const std::vector<std::string> fields = kv::parse_string_list(text);
    if (fields.size() < 3) throw FormatError("sample record needs index, label and features");
    Sample s;
    s.source_index = kv::parse_count_list(fields[0]).at(0);
    s.label = kv::parse_int_list(fields[1]).at(0);
    for (std::size_t i = 2; i < fields.size(); ++i) s.features.push_back(kv::parse_double(fields[i]));
    return s;
}

}  // namespace

IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw FormatError("IDX file truncated before magic number");
    IdxHeader h;
    h.magic = read_be32(bytes, 0);
    if (bytes[0] != 0 || bytes[1] != 0) throw FormatError("IDX magic has non-zero leading bytes");
    const std::size_t n_dims = bytes[3];
    h.header_bytes = 4 + 4 * n_dims;
    if (bytes.size() < h.header_bytes) throw FormatError("IDX file truncated inside dimension fields");
    for (std::size_t d = 0; d < n_dims; ++d) h.dims.push_back(read_be32(bytes, 4 + 4 * d));
    return h;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    gzFile file = gzopen(path.string().c_str(), "rb");
    if (file == nullptr) throw FormatError("cannot open " + path.string());
    std::vector<std::uint8_t> out;
    std::array<std::uint8_t, 1 << 16> buf{};
    while (true) {
        const int n = gzread(file, buf.data(), static_cast<unsigned>(buf.size()));
        if (n < 0) {
            gzclose(file);
            throw FormatError("read error in " + path.string());
        }
        if (n == 0) break;
        out.insert(out.end(), buf.begin(), buf.begin() + n);
    }
    gzclose(file);
    return out;
}

std::vector<RawImage> parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes) {
    const IdxHeader ih = parse_idx_header(image_bytes);
    if (ih.magic != kIdxImageMagic) throw FormatError("bad image-file magic " + std::to_string(ih.magic));
    const IdxHeader lh = parse_idx_header(label_bytes);
    if (lh.magic != kIdxLabelMagic) throw FormatError("bad label-file magic " + std::to_string(lh.magic));
    if (ih.dims.size() != 3 || lh.dims.size() != 1) throw FormatError("unexpected IDX dimensionality");
    if (ih.dims[1] != kImageSide || ih.dims[2] != kImageSide) throw FormatError("images are not 28x28");

    const std::size_t count = ih.dims[0];
    if (lh.dims[0] != count) {
        throw FormatError("count mismatch: " + std::to_string(count) + " images vs " + std::to_string(lh.dims[0]) +
                          " labels");
    }
    if (image_bytes.size() < ih.header_bytes + count * kImagePixels) throw FormatError("image file truncated");
    if (label_bytes.size() < lh.header_bytes + count) throw FormatError("label file truncated");

    std::vector<RawImage> images(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto* src = image_bytes.data() + ih.header_bytes + i * kImagePixels;
        std::copy(src, src + kImagePixels, images[i].pixels.begin());
        const std::uint8_t label = label_bytes[lh.header_bytes + i];
        if (label > 9) throw FormatError("label " + std::to_string(label) + " outside [0, 9]");
        images[i].label = label;
        images[i].source_index = i;
    }
    return images;
}

std::vector<RawImage> load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    const std::vector<std::uint8_t> images = read_file_bytes(images_path);
    const std::vector<std::uint8_t> labels = read_file_bytes(labels_path);
    return parse_idx(images, labels);
}

std::vector<PoolRegion> pooling_regions(std::size_t d) {
    constexpr std::size_t S = kImageSide;
    if (d == 4) {
        return {{0, 14, 0, 14}, {0, 14, 14, 28}, {14, 28, 0, 14}, {14, 28, 14, 28}};
    }
    if (d == 6) {
        const std::array<std::size_t, 4> cols{0, 10, 19, 28};
        std::vector<PoolRegion> out;
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t c = 0; c < 3; ++c) out.push_back({r * 14, r * 14 + 14, cols[c], cols[c + 1]});
        }
        return out;
    }
    if (d == 0 || S % d != 0) throw ArgumentError("unsupported feature count " + std::to_string(d));
    std::vector<PoolRegion> out;
    const std::size_t w = S / d;
    for (std::size_t k = 0; k < d; ++k) out.push_back({0, S, k * w, k * w + w});
    return out;
}

std::vector<double> preprocess(const RawImage& image, std::size_t d) {
    std::vector<double> features;
    for (const PoolRegion& r : pooling_regions(d)) {
        std::uint64_t sum = 0;
        for (std::size_t row = r.row_begin; row < r.row_end; ++row) {
            for (std::size_t col = r.col_begin; col < r.col_end; ++col) sum += image.at(row, col);
        }
        const double area = static_cast<double>((r.row_end - r.row_begin) * (r.col_end - r.col_begin));
        features.push_back(std::clamp(static_cast<double>(sum) / area / 255.0, 0.0, 1.0));
    }
    return features;
}

std::size_t DatasetSplit::n_features() const {
    if (!train.empty()) return train.front().features.size();
    if (!test.empty()) return test.front().features.size();
    return 0;
}

DatasetSplit build_subset(std::span<const RawImage> images, std::span<const Label> digits, std::size_t n_train,
                          std::size_t n_test, std::uint64_t seed, std::size_t n_features) {
    if (digits.size() < 2) throw ArgumentError("a split needs at least two digits");
    DatasetSplit split;
    split.class_labels.assign(digits.begin(), digits.end());
    split.seed = seed;
    const std::size_t k = digits.size();
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t want_train = n_train / k + (c < n_train % k ? 1 : 0);
        const std::size_t want_test = n_test / k + (c < n_test % k ? 1 : 0);
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < images.size(); ++i) {
            if (images[i].label == digits[c]) pool.push_back(i);
        }
        if (pool.size() < want_train + want_test) {
            throw ArgumentError("digit " + std::to_string(digits[c]) + " has " + std::to_string(pool.size()) +
                                " images, need " + std::to_string(want_train + want_test));
        }
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(digits[c])}));
        rng.shuffle(pool);
        for (std::size_t j = 0; j < want_train + want_test; ++j) {
            const RawImage& img = images[pool[j]];
            Sample s{preprocess(img, n_features), img.label, img.source_index};
            (j < want_train ? split.train : split.test).push_back(std::move(s));
        }
    }
    Rng order(derive_seed(seed, {0x6f72646572ULL}));  // "order"
    order.shuffle(split.train);
    order.shuffle(split.test);
    return split;
}

FeatureScaler FeatureScaler::fit(std::span<const Sample> samples) {
    if (samples.empty()) throw ArgumentError("cannot fit a scaler on no samples");
    const std::size_t d = samples.front().features.size();
    FeatureScaler s{samples.front().features, samples.front().features};
    for (const Sample& x : samples) {
        if (x.features.size() != d) throw ArgumentError("samples have different feature counts");
        for (std::size_t j = 0; j < d; ++j) {
            s.lo[j] = std::min(s.lo[j], x.features[j]);
            s.hi[j] = std::max(s.hi[j], x.features[j]);
        }
    }
    return s;
}

FeatureScaler FeatureScaler::identity(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }

std::vector<double> FeatureScaler::apply(std::span<const double> features) const {
    if (features.size() != lo.size()) throw ArgumentError("scaler fitted for a different feature count");
    std::vector<double> out(features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
        const double range = hi[j] - lo[j];
        out[j] = range > 0.0 ? std::clamp((features[j] - lo[j]) / range, 0.0, 1.0) : 0.0;
    }
    return out;
}

std::vector<Sample> FeatureScaler::apply(std::span<const Sample> samples) const {
    std::vector<Sample> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) out.push_back({apply(s.features), s.label, s.source_index});
    return out;
}

std::string format_scaler(const FeatureScaler& scaler) {
    kv::Tree tree;
    kv::Tree sec;
    sec.put("lo", kv::format_list(scaler.lo));
    sec.put("hi", kv::format_list(scaler.hi));
    tree.add_child("scaler", sec);
    return kv::format(tree);
}

FeatureScaler parse_scaler(const std::string& text) {
    const kv::Tree tree = kv::parse(text);
    const kv::Tree& sec = kv::section(tree, "scaler");
    FeatureScaler s{kv::parse_double_list(kv::get_string(sec, "lo")), kv::parse_double_list(kv::get_string(sec, "hi"))};
    if (s.lo.size() != s.hi.size()) throw FormatError("scaler bounds differ in length");
    return s;
}

std::string format_split(const DatasetSplit& split) {
    kv::Tree tree;
    kv::Tree meta;
    meta.put("seed", split.seed);
    meta.put("digits", kv::format_list(split.class_labels));
    meta.put("n_features", split.n_features());
    meta.put("n_train", split.train.size());
    meta.put("n_test", split.test.size());
    tree.add_child("split", meta);
    kv::Tree train;
    for (std::size_t i = 0; i < split.train.size(); ++i) train.put(std::to_string(i), format_sample(split.train[i]));
    kv::Tree test;
    for (std::size_t i = 0; i < split.test.size(); ++i) test.put(std::to_string(i), format_sample(split.test[i]));
    tree.add_child("train", train);
    tree.add_child("test", test);
    return kv::format(tree, "record = source_index, label, features...");
}

DatasetSplit parse_split(const std::string& text) {
    const kv::Tree tree = kv::parse(text);
    const kv::Tree& meta = kv::section(tree, "split");
    DatasetSplit split;
    split.seed = kv::get_u64(meta, "seed");
    split.class_labels = kv::parse_int_list(kv::get_string(meta, "digits"));
    const std::size_t n_train = kv::get_count(meta, "n_train");
    const std::size_t n_test = kv::get_count(meta, "n_test");
    auto read_part = [&](const char* name, std::size_t n, std::vector<Sample>& out) {
        if (n == 0) return;
        const kv::Tree& sec = kv::section(tree, name);
        for (std::size_t i = 0; i < n; ++i) out.push_back(parse_sample(kv::get_string(sec, std::to_string(i))));
    };
    read_part("train", n_train, split.train);
    read_part("test", n_test, split.test);
    return split;
}

void save_split(const std::filesystem::path& path, const DatasetSplit& split) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out << format_split(split);
}

DatasetSplit load_split(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_split(buf.str());
}

}  // namespace eqv
