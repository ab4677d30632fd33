#include "abstain/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace abstain {

namespace {

std::runtime_error line_error(std::size_t line, const std::string& msg) {
    return std::runtime_error("line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        out.push_back(text.substr(start, end - start));
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

// --- LIBSVM ---------------------------------------------------------------------

RawDataset parse_libsvm(std::string_view text) {
    struct Row {
        std::string label;
        std::vector<std::pair<std::size_t, double>> entries;
    };
    std::vector<Row> rows;
    std::size_t dim = 0;
    const auto lines = lines_of(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::string_view line = lines[ln];
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream in{std::string(line)};
        Row row;
        in >> row.label;
        std::string tok;
        std::size_t prev = 0;
        while (in >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw line_error(ln + 1, "expected idx:val, got '" + tok + "'");
            std::size_t idx = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
            if (ec != std::errc() || p != tok.data() + colon || idx == 0) {
                throw line_error(ln + 1, "bad feature index in '" + tok + "'");
            }
            if (idx <= prev) throw line_error(ln + 1, "feature indices must be strictly ascending");
            double v = 0.0;
            if (!parse_double(std::string_view(tok).substr(colon + 1), v)) {
                throw line_error(ln + 1, "bad feature value in '" + tok + "'");
            }
            prev = idx;
            dim = std::max(dim, idx);
            row.entries.emplace_back(idx, v);
        }
        rows.push_back(std::move(row));
    }
    RawDataset d;
    d.dim = dim;
    d.features.assign(rows.size() * dim, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (auto [idx, v] : rows[i].entries) d.features[i * dim + idx - 1] = v;
        d.labels.push_back(std::move(rows[i].label));
    }
    return d;
}

std::string serialize_libsvm(const RawDataset& data) {
    std::string out;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out += data.labels[i];
        auto r = data.row(i);
        for (std::size_t d = 0; d < r.size(); ++d) {
            if (r[d] != 0.0) out += " " + std::to_string(d + 1) + ":" + format_double(r[d]);
        }
        out += '\n';
    }
    return out;
}

// --- CSV ------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(std::string_view line, std::size_t ln) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw line_error(ln, "unterminated quote");
    cells.push_back(std::move(cur));
    return cells;
}

}  // namespace

RawDataset parse_csv(std::string_view text, std::string_view label_column) {
    const auto lines = lines_of(text);
    std::size_t ln = 0;
    while (ln < lines.size() && trim(lines[ln]).empty()) ++ln;
    if (ln == lines.size()) throw std::runtime_error("csv: missing header row");
    const auto header = split_csv_line(lines[ln], ln + 1);
    std::size_t label_idx = header.size() - 1;
    if (!label_column.empty()) {
        auto it = std::find(header.begin(), header.end(), label_column);
        if (it == header.end()) throw std::runtime_error("csv: no column named '" + std::string(label_column) + "'");
        label_idx = static_cast<std::size_t>(it - header.begin());
    }
    if (header.size() < 2) throw std::runtime_error("csv: need a label column and at least one feature");

    RawDataset d;
    d.dim = header.size() - 1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_idx) d.feature_names.push_back(header[c]);
    }
    for (++ln; ln < lines.size(); ++ln) {
        if (trim(lines[ln]).empty()) continue;
        const auto cells = split_csv_line(lines[ln], ln + 1);
        if (cells.size() != header.size()) {
            throw line_error(ln + 1, "expected " + std::to_string(header.size()) + " cells, got " +
                                         std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) {
                const auto label = trim(cells[c]);
                if (label.empty()) throw line_error(ln + 1, "missing label");
                d.labels.emplace_back(label);
                continue;
            }
            double v = 0.0;
            if (!parse_double(cells[c], v)) throw line_error(ln + 1, "missing or non-numeric cell in column " + header[c]);
            d.features.push_back(v);
        }
    }
    return d;
}

// --- normalization ------------------------------------------------------------------

void MinMaxTransform::apply(std::span<const double> x, std::span<double> out) const {
    if (x.size() != min.size() || out.size() != min.size()) throw std::invalid_argument("minmax: dimension mismatch");
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double range = max[d] - min[d];
        out[d] = range > 0.0 ? std::clamp((x[d] - min[d]) / range, 0.0, 1.0) : 0.0;
    }
}

MinMaxTransform fit_minmax(const RawDataset& data) {
    if (data.rows() == 0) throw std::invalid_argument("normalize: empty dataset");
    MinMaxTransform t{std::vector<double>(data.dim, std::numeric_limits<double>::infinity()),
                      std::vector<double>(data.dim, -std::numeric_limits<double>::infinity())};
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto r = data.row(i);
        for (std::size_t d = 0; d < data.dim; ++d) {
            t.min[d] = std::min(t.min[d], r[d]);
            t.max[d] = std::max(t.max[d], r[d]);
        }
    }
    return t;
}

RawDataset apply_minmax(const RawDataset& data, const MinMaxTransform& t) {
    RawDataset out = data;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        t.apply(data.row(i), std::span<double>(out.features.data() + i * data.dim, data.dim));
    }
    return out;
}

// --- labels and split ---------------------------------------------------------------

std::vector<int> LabelMap::binarize(const std::vector<std::string>& raw) const {
    std::vector<int> out;
    out.reserve(raw.size());
    switch (mode) {
        case Mode::Explicit:
            for (const auto& l : raw) {
                auto it = mapping.find(l);
                if (it == mapping.end()) throw std::runtime_error("label map has no entry for '" + l + "'");
                if (it->second != 1 && it->second != -1) throw std::runtime_error("label map values must be -1 or +1");
                out.push_back(it->second);
            }
            return out;
        case Mode::Parity:
            for (const auto& l : raw) {
                long long v = 0;
                std::string_view s = trim(l);
                if (!s.empty() && s.front() == '+') s.remove_prefix(1);
                auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                if (ec != std::errc() || p != s.data() + s.size()) {
                    throw std::runtime_error("parity label map needs integer labels, got '" + l + "'");
                }
                out.push_back(v % 2 == 0 ? -1 : 1);
            }
            return out;
        case Mode::Auto: break;
    }
    std::set<std::string> distinct(raw.begin(), raw.end());
    // Labels in {-1, +1} or {0, 1} map directly, so a test file holding a
    // single class still binarizes consistently.
    std::set<double> values;
    const bool numeric = std::all_of(distinct.begin(), distinct.end(), [&](const std::string& s) {
        double v = 0.0;
        if (!parse_double(s, v)) return false;
        values.insert(v);
        return true;
    });
    auto subset_of = [&](std::set<double> allowed) {
        return std::includes(allowed.begin(), allowed.end(), values.begin(), values.end());
    };
    if (numeric && (subset_of({-1.0, 1.0}) || subset_of({0.0, 1.0}))) {
        for (const auto& l : raw) {
            double v = 0.0;
            parse_double(l, v);
            out.push_back(v > 0.0 ? 1 : -1);
        }
        return out;
    }
    if (distinct.size() != 2) {
        throw std::runtime_error("automatic label map needs exactly two distinct labels, found " +
                                 std::to_string(distinct.size()) + "; configure a label map");
    }
    std::string negative = *distinct.begin();
    double a = 0.0, b = 0.0;
    if (parse_double(*distinct.begin(), a) && parse_double(*distinct.rbegin(), b) && b < a) negative = *distinct.rbegin();
    for (const auto& l : raw) out.push_back(l == negative ? -1 : 1);
    return out;
}

void SplitSpec::validate() const {
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) throw std::invalid_argument("split fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
}

Split split(const RawDataset& data, const SplitSpec& spec) {
    spec.validate();
    const std::size_t n = data.rows();
    const auto labels = spec.labels.binarize(data.labels);
    for (double v : data.features) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("split: features must be normalized to [0,1]");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(spec.seed, Stream::Split);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)), i - 1);
        std::swap(order[i - 1], order[j]);
    }
    const auto n1 = static_cast<std::size_t>(std::llround(spec.fractions[0] * static_cast<double>(n)));
    const auto n2 = static_cast<std::size_t>(std::llround(spec.fractions[1] * static_cast<double>(n)));
    if (n1 == 0 || n2 == 0 || n1 + n2 >= n) {
        throw std::runtime_error("split: a part would be empty (" + std::to_string(n) + " rows)");
    }
    Split s;
    s.labeled.points = PointSet(data.dim);
    s.unlabeled = PointSet(data.dim);
    s.test.points = PointSet(data.dim);
    s.assignment.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        if (k < n1) {
            s.assignment[i] = Part::Labeled;
            s.labeled.points.push_back(data.row(i));
            s.labeled.labels.push_back(labels[i]);
        } else if (k < n1 + n2) {
            s.assignment[i] = Part::Unlabeled;
            s.unlabeled.push_back(data.row(i));
        } else {
            s.assignment[i] = Part::Test;
            s.test.points.push_back(data.row(i));
            s.test.labels.push_back(labels[i]);
        }
    }
    return s;
}

void write_split_manifest(std::ostream& out, const Split& s) {
    static constexpr const char* kNames[] = {"labeled", "unlabeled", "test"};
    out << "row,part\n";
    for (std::size_t i = 0; i < s.assignment.size(); ++i) out << i << ',' << kNames[static_cast<int>(s.assignment[i])] << '\n';
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace abstain
