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

// MNIST ingestion and image-to-feature reduction.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace eqv {

using Label = int;

inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kImagePixels = kImageSide * kImageSide;
inline constexpr std::uint32_t kIdxImageMagic = 2051;  // 0x00000803
inline constexpr std::uint32_t kIdxLabelMagic = 2049;  // 0x00000801

struct RawImage {
    std::array<std::uint8_t, kImagePixels> pixels{};  // row-major
    Label label = 0;
    std::size_t source_index = 0;  // position in the source file

    std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * kImageSide + col]; }
};

struct IdxHeader {
    std::uint32_t magic = 0;
    std::vector<std::uint32_t> dims;
    std::size_t header_bytes = 0;
};

/// Parses the big-endian magic and dimension fields. The low byte of the
/// magic gives the number of dimensions. Throws FormatError on truncation.
IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes);

/// Reads a whole file; gzip-compressed files are inflated transparently.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Pairs an IDX image buffer with an IDX label buffer. Throws FormatError for
/// a wrong magic number, non-28x28 images, a truncated payload, a label
/// outside [0,9], or differing item counts.
std::vector<RawImage> parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes);

/// Loads an image file and a label file (raw IDX or .gz).
std::vector<RawImage> load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Rectangular pooling region, half-open.
struct PoolRegion {
    std::size_t row_begin, row_end, col_begin, col_end;
};

/// Pooling layout for d features: a 2x2 grid for d = 4, a 2x3 grid with
/// column widths (10, 9, 9) for d = 6, otherwise d equal vertical strips
/// (d must divide 28). Throws ArgumentError for unsupported d.
std::vector<PoolRegion> pooling_regions(std::size_t d);

/// Average-pools the image into d regions and scales to [0, 1].
std::vector<double> preprocess(const RawImage& image, std::size_t d);

struct Sample {
    std::vector<double> features;
    Label label = 0;
    std::size_t source_index = 0;

    bool operator==(const Sample&) const = default;
};

struct DatasetSplit {
    std::vector<Sample> train;
    std::vector<Sample> test;
    std::vector<Label> class_labels;
    std::uint64_t seed = 0;

    std::size_t n_features() const;
    bool operator==(const DatasetSplit&) const = default;
};

/// Seeded, class-balanced subset. Each digit contributes n_train / |digits|
/// training images (the first n_train % |digits| digits one more), likewise
/// for the test set; train and test never share a source image. Throws
/// ArgumentError if some digit has too few images.
DatasetSplit build_subset(std::span<const RawImage> images, std::span<const Label> digits, std::size_t n_train,
                          std::size_t n_test, std::uint64_t seed, std::size_t n_features);

/// Per-feature min-max map fitted on a sample set. Values are mapped to
/// (x - lo) / (hi - lo) and clamped to [0, 1]; a constant feature maps to 0.
struct FeatureScaler {
    std::vector<double> lo;
    std::vector<double> hi;

    /// Throws ArgumentError for an empty sample set or ragged features.
    static FeatureScaler fit(std::span<const Sample> samples);
    /// Identity scaler for d features.
    static FeatureScaler identity(std::size_t d);

    std::vector<double> apply(std::span<const double> features) const;
    std::vector<Sample> apply(std::span<const Sample> samples) const;
    bool operator==(const FeatureScaler&) const = default;
};

std::string format_scaler(const FeatureScaler& scaler);
FeatureScaler parse_scaler(const std::string& text);

/// Text cache for a split; values round-trip bit-exactly.
std::string format_split(const DatasetSplit& split);
DatasetSplit parse_split(const std::string& text);
void save_split(const std::filesystem::path& path, const DatasetSplit& split);
DatasetSplit load_split(const std::filesystem::path& path);

}  // namespace eqv
