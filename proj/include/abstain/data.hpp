#pragma once

// Dataset ingestion for real-data runs: LIBSVM and CSV parsing, min-max
// normalization into [0,1]^D, label binarization and a seeded
// labeled/unlabeled/test split.

#include "abstain/common.hpp"

#include <array>
#include <map>
#include <ostream>
#include <string>
#include <string_view>

namespace abstain {

struct RawDataset {
    std::size_t dim = 0;
    std::vector<double> features;  // row-major rows x dim
    std::vector<std::string> labels;
    std::vector<std::string> feature_names;  // empty for LIBSVM input

    std::size_t rows() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
    bool operator==(const RawDataset&) const = default;
};

/// "label idx:val ..." per line with 1-based ascending indices; blank lines
/// and '#' comments are skipped. Errors name the offending line.
RawDataset parse_libsvm(std::string_view text);
/// Zero entries are omitted; values printed with 17 significant digits.
std::string serialize_libsvm(const RawDataset& data);

/// Header row required. `label_column` is a header name; an empty name picks
/// the last column.
RawDataset parse_csv(std::string_view text, std::string_view label_column = {});

struct MinMaxTransform {
    std::vector<double> min, max;
    /// (x - min) / (max - min) clipped to [0,1]; constant features map to 0.
    void apply(std::span<const double> x, std::span<double> out) const;
    bool operator==(const MinMaxTransform&) const = default;
};

MinMaxTransform fit_minmax(const RawDataset& data);
RawDataset apply_minmax(const RawDataset& data, const MinMaxTransform& t);
inline RawDataset normalize_minmax(const RawDataset& data, MinMaxTransform* out = nullptr) {
    MinMaxTransform t = fit_minmax(data);
    RawDataset r = apply_minmax(data, t);
    if (out != nullptr) *out = std::move(t);
    return r;
}

struct LabelMap {
    enum class Mode { Auto, Parity, Explicit };
    Mode mode = Mode::Auto;
    std::map<std::string, int> mapping;  // Explicit only

    /// Auto: numeric labels within {-1, +1} or {0, 1} map by sign; otherwise
    /// exactly two distinct labels are required and the smaller (numerically
    /// when both parse, else lexicographically) maps to -1.
    /// Parity: integer labels, even -> -1, odd -> +1.
    std::vector<int> binarize(const std::vector<std::string>& raw) const;
};

struct SplitSpec {
    std::array<double, 3> fractions{0.6, 0.2, 0.2};  // labeled, unlabeled, test
    std::uint64_t seed = 0;
    LabelMap labels;
    void validate() const;
};

enum class Part : int { Labeled = 0, Unlabeled = 1, Test = 2 };

struct Split {
    LabeledSet labeled;
    UnlabeledSet unlabeled;
    LabeledSet test;
    std::vector<Part> assignment;  // per raw row
};

/// Seeded shuffle, then contiguous cuts of sizes round(f_1 n), round(f_2 n),
/// and the remainder. Rows must already lie in [0,1]^D.
Split split(const RawDataset& data, const SplitSpec& spec);

/// CSV with columns row, part.
void write_split_manifest(std::ostream& out, const Split& s);

std::string read_file(const std::string& path);

}  // namespace abstain
