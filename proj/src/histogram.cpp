#include "abstain/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace abstain {

BandwidthLadder BandwidthLadder::make(std::size_t n, double mu_min, std::size_t dim) {
    if (n == 0) throw std::invalid_argument("ladder needs n >= 1");
    if (dim == 0) throw std::invalid_argument("ladder needs dim >= 1");
    if (!(mu_min > 0.0)) throw std::invalid_argument("ladder needs mu_min > 0");
    BandwidthLadder ladder{.N = 1, .n = n, .mu_min = mu_min, .dim = dim};
    if (n >= 2) {
        const double base = static_cast<double>(n) * mu_min / (16.0 * std::log(static_cast<double>(n)));
        const double root = std::pow(base, 1.0 / static_cast<double>(dim));
        if (root >= 1.0) ladder.N = static_cast<std::size_t>(std::floor(root));
    }
    return ladder;
}

std::vector<double> BandwidthLadder::bandwidths() const {
    std::vector<double> out(N);
    for (std::size_t k = 1; k <= N; ++k) out[k - 1] = bandwidth(k);
    return out;
}

std::size_t cells_per_axis(double h) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("bandwidth must lie in (0,1]");
    // 1/(1/3) evaluates to 3.0000000000000004; do not round it up to 4.
    return static_cast<std::size_t>(std::ceil(1.0 / h - 1e-9));
}

std::uint64_t cell_index(double h, std::span<const double> x) {
    const std::size_t cells = cells_per_axis(h);
    std::uint64_t flat = 0;
    for (double v : x) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("cell_index: coordinate outside [0,1]");
        auto axis = static_cast<std::size_t>(std::floor(v / h));
        axis = std::min(axis, cells - 1);
        flat = flat * cells + axis;
    }
    return flat;
}

const CellCount* GridStats::find(std::uint64_t index) const {
    auto it = std::lower_bound(cells.begin(), cells.end(), index,
                               [](const CellCount& c, std::uint64_t i) { return c.index < i; });
    return (it != cells.end() && it->index == index) ? &*it : nullptr;
}

double GridStats::estimate(std::span<const double> x) const {
    const CellCount* c = find(cell_index(h, x));
    if (c == nullptr || c->total == 0) return global_fraction();
    return static_cast<double>(c->positives) / static_cast<double>(c->total);
}

GridStats fit_grid(const LabeledSet& data, double h) {
    if (data.size() == 0) throw std::invalid_argument("fit: empty dataset");
    GridStats g{.h = h, .cells_per_axis = cells_per_axis(h), .cells = {}, .positives = 0, .n = data.size()};
    std::unordered_map<std::uint64_t, CellCount> counts;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::uint64_t idx = cell_index(h, data.points.point(i));
        CellCount& c = counts[idx];
        c.index = idx;
        ++c.total;
        if (data.labels[i] > 0) {
            ++c.positives;
            ++g.positives;
        }
    }
    g.cells.reserve(counts.size());
    for (const auto& [idx, c] : counts) g.cells.push_back(c);
    std::sort(g.cells.begin(), g.cells.end(), [](const CellCount& a, const CellCount& b) { return a.index < b.index; });
    return g;
}

// --- bounds -----------------------------------------------------------------

double e_S(double n, double mu_min, double h, std::size_t dim) {
    const double nm = n * mu_min;
    return std::sqrt(32.0 * std::log(nm) / (nm * std::pow(h, static_cast<double>(dim))));
}

double e_D(double L, double beta, double h, std::size_t dim) {
    return L * std::pow(std::sqrt(static_cast<double>(dim)) * h, beta);
}

double b_n(double n, double mu_min, double L, double beta, std::size_t dim) {
    const double D = static_cast<double>(dim);
    const double denom = 2.0 * beta + D;
    const double value = 9.0 * std::pow(L, D / denom) * std::pow(D, beta * D / (2.0 * denom)) *
                         std::pow(32.0 * std::log(n * mu_min) / mu_min, beta / denom) * std::pow(n, -beta / denom);
    return std::min(value, 0.5);
}

double balanced_bandwidth(double n, double mu_min, double L, double beta, std::size_t dim) {
    const double D = static_cast<double>(dim);
    const double nm = n * mu_min;
    const double h = std::pow(32.0 * std::log(nm) / (nm * L * L * std::pow(D, beta)), 1.0 / (2.0 * beta + D));
    return std::min(h, 1.0);
}

// --- estimator --------------------------------------------------------------

HistogramEstimator::HistogramEstimator(BandwidthLadder ladder, std::vector<GridStats> grids,
                                       std::optional<Smoothness> smoothness, double lepski_scale)
    : ladder_(ladder), grids_(std::move(grids)), smoothness_(smoothness), lepski_scale_(lepski_scale) {
    if (grids_.size() != ladder_.N) throw std::invalid_argument("estimator needs one grid per ladder bandwidth");
    if (!(lepski_scale > 0.0)) throw std::invalid_argument("lepski_scale must be positive");
    stochastic_.resize(ladder_.N);
    for (std::size_t k = 0; k < ladder_.N; ++k) {
        stochastic_[k] = e_S(static_cast<double>(ladder_.n), ladder_.mu_min, ladder_.bandwidth(k + 1), ladder_.dim);
    }
}

void HistogramEstimator::check_point(std::span<const double> x) const {
    if (x.size() != ladder_.dim) throw std::domain_error("point has wrong dimension");
    for (double v : x) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("point outside [0,1]^D");
    }
}

std::vector<double> HistogramEstimator::ladder_estimates(std::span<const double> x) const {
    check_point(x);
    std::vector<double> out(grids_.size());
    for (std::size_t k = 0; k < grids_.size(); ++k) out[k] = grids_[k].estimate(x);
    return out;
}

std::size_t HistogramEstimator::select(std::span<const double> est) const {
    // Candidate k is admissible iff est[k] lies in [max_{j<=k}(est[j] - 4e_j),
    // min_{j<=k}(est[j] + 4e_j)]. The prefix envelope decides this in one
    // pass; candidates within rounding distance of an envelope edge are
    // re-checked with the defining inequality itself.
    const double c = 4.0 * lepski_scale_;
    auto admissible = [&](std::size_t k) {
        for (std::size_t j = 0; j < k; ++j) {
            if (std::abs(est[k] - est[j]) > c * stochastic_[j]) return false;
        }
        return true;
    };
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t k = 0; k < est.size(); ++k) {
        lo = std::max(lo, est[k] - c * stochastic_[k]);
        hi = std::min(hi, est[k] + c * stochastic_[k]);
        if (est[k] > lo + 1e-12 && est[k] < hi - 1e-12) {
            best = k;
        } else if (est[k] >= lo - 1e-12 && est[k] <= hi + 1e-12 && admissible(k)) {
            best = k;
        }
    }
    return best;
}

std::size_t HistogramEstimator::lepski_position(std::span<const double> x) const {
    const auto est = ladder_estimates(x);
    return select(est);
}

double HistogramEstimator::lepski_bandwidth(std::span<const double> x) const {
    return ladder_.bandwidth(lepski_position(x) + 1);
}

double HistogramEstimator::predict_eta(std::span<const double> x) const {
    const auto est = ladder_estimates(x);
    return est[select(est)];
}

namespace {
void check_fit_inputs(const LabeledSet& data, const BandwidthLadder& ladder) {
    if (data.size() == 0) throw std::invalid_argument("fit: empty dataset");
    if (data.dim() != ladder.dim) throw std::invalid_argument("fit: data dimension differs from ladder dimension");
}
}  // namespace

HistogramEstimator fit(const LabeledSet& data, const BandwidthLadder& ladder, std::optional<Smoothness> smoothness,
                       double lepski_scale) {
    check_fit_inputs(data, ladder);
    std::vector<GridStats> grids(ladder.N);
    const auto count = static_cast<std::ptrdiff_t>(ladder.N);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        grids[static_cast<std::size_t>(k)] = fit_grid(data, ladder.bandwidth(static_cast<std::size_t>(k) + 1));
    }
    return HistogramEstimator(ladder, std::move(grids), smoothness, lepski_scale);
}

std::vector<double> predict_eta_batch(const HistogramEstimator& estimator, const PointSet& points) {
    std::vector<double> out(points.size());
    const auto count = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = estimator.predict_eta(points.point(static_cast<std::size_t>(i)));
    }
    return out;
}

std::vector<double> lepski_bandwidth_batch(const HistogramEstimator& estimator, const PointSet& points) {
    std::vector<double> out(points.size());
    const auto count = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = estimator.lepski_bandwidth(points.point(static_cast<std::size_t>(i)));
    }
    return out;
}

namespace reference {

HistogramEstimator fit_serial(const LabeledSet& data, const BandwidthLadder& ladder,
                              std::optional<Smoothness> smoothness, double lepski_scale) {
    check_fit_inputs(data, ladder);
    std::vector<GridStats> grids;
    grids.reserve(ladder.N);
    for (std::size_t k = 1; k <= ladder.N; ++k) grids.push_back(fit_grid(data, ladder.bandwidth(k)));
    return HistogramEstimator(ladder, std::move(grids), smoothness, lepski_scale);
}

std::vector<double> predict_eta_batch_serial(const HistogramEstimator& estimator, const PointSet& points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out.push_back(estimator.predict_eta(points.point(i)));
    return out;
}

}  // namespace reference

}  // namespace abstain
