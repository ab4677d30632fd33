#pragma once

// Partition estimator of eta over a ladder of bandwidths with pointwise
// Lepski selection.
//
// For bandwidth h the cube is cut into ceil(1/h)^D cells; eta_h(x) is the
// positive-label fraction of the cell containing x (global fraction when the
// cell is empty). The adaptive estimate uses, at each x, the largest h in the
// ladder whose estimate stays within 4 e_S(h') of every finer h' <= h.

#include "abstain/common.hpp"

#include <optional>

namespace abstain {

/// H = {1/N, 2/N, ..., 1} with N = floor((n mu_min / (16 ln n))^(1/D)), N >= 1.
struct BandwidthLadder {
    std::size_t N = 1;
    std::size_t n = 1;
    double mu_min = 1.0;
    std::size_t dim = 1;

    static BandwidthLadder make(std::size_t n, double mu_min, std::size_t dim);

    std::size_t size() const { return N; }
    /// k-th bandwidth, k in [1, N].
    double bandwidth(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(N); }
    std::vector<double> bandwidths() const;

    bool operator==(const BandwidthLadder&) const = default;
};

/// Hoelder smoothness constants, when known.
struct Smoothness {
    double L = 1.0;
    double beta = 1.0;
    bool operator==(const Smoothness&) const = default;
};

std::size_t cells_per_axis(double h);

/// Row-major flat cell index (axis 0 slowest). Per-axis index floor(x_d / h)
/// clamped to the last cell. Throws std::domain_error outside [0,1]^D.
std::uint64_t cell_index(double h, std::span<const double> x);

struct CellCount {
    std::uint64_t index = 0;
    std::uint32_t positives = 0;
    std::uint32_t total = 0;
    bool operator==(const CellCount&) const = default;
};

/// Occupied cells of one grid, sorted by index.
struct GridStats {
    double h = 1.0;
    std::size_t cells_per_axis = 1;
    std::vector<CellCount> cells;
    std::size_t positives = 0;
    std::size_t n = 0;

    double global_fraction() const { return n == 0 ? 0.5 : static_cast<double>(positives) / static_cast<double>(n); }
    const CellCount* find(std::uint64_t index) const;
    /// eta_h(x).
    double estimate(std::span<const double> x) const;

    bool operator==(const GridStats&) const = default;
};

GridStats fit_grid(const LabeledSet& data, double h);

// Error bounds ---------------------------------------------------------------

/// sqrt(32 ln(n mu_min) / (n mu_min h^D)).
double e_S(double n, double mu_min, double h, std::size_t dim);
/// L (sqrt(D) h)^beta.
double e_D(double L, double beta, double h, std::size_t dim);
/// Uniform error bound of the adaptive estimator under Hoelder smoothness,
/// clipped to 1/2.
double b_n(double n, double mu_min, double L, double beta, std::size_t dim);
/// h* = max{h in (0,1) : e_S(h) >= e_D(h)}, closed form.
double balanced_bandwidth(double n, double mu_min, double L, double beta, std::size_t dim);

class HistogramEstimator {
public:
    HistogramEstimator() = default;
    /// `lepski_scale` multiplies e_S inside the selection rule only; 1 is the
    /// theoretical rule. Smaller values trust finer bandwidths sooner.
    HistogramEstimator(BandwidthLadder ladder, std::vector<GridStats> grids, std::optional<Smoothness> smoothness = {},
                       double lepski_scale = 1.0);

    const BandwidthLadder& ladder() const { return ladder_; }
    const std::vector<GridStats>& grids() const { return grids_; }
    const std::optional<Smoothness>& smoothness() const { return smoothness_; }
    std::size_t dim() const { return ladder_.dim; }
    double lepski_scale() const { return lepski_scale_; }

    /// e_S at the k-th ladder bandwidth (k is 0-based here).
    double stochastic_bound(std::size_t k) const { return stochastic_[k]; }

    /// eta_h(x) for every ladder bandwidth, ascending h.
    std::vector<double> ladder_estimates(std::span<const double> x) const;
    /// 0-based ladder position of the Lepski bandwidth at x.
    std::size_t lepski_position(std::span<const double> x) const;
    double lepski_bandwidth(std::span<const double> x) const;
    double predict_eta(std::span<const double> x) const;

    bool operator==(const HistogramEstimator& o) const {
        return ladder_ == o.ladder_ && grids_ == o.grids_ && smoothness_ == o.smoothness_ &&
               lepski_scale_ == o.lepski_scale_;
    }

private:
    std::size_t select(std::span<const double> estimates) const;
    void check_point(std::span<const double> x) const;

    BandwidthLadder ladder_;
    std::vector<GridStats> grids_;
    std::optional<Smoothness> smoothness_;
    double lepski_scale_ = 1.0;
    std::vector<double> stochastic_;
};

/// One grid per ladder bandwidth; grids are fitted concurrently.
HistogramEstimator fit(const LabeledSet& data, const BandwidthLadder& ladder,
                       std::optional<Smoothness> smoothness = {}, double lepski_scale = 1.0);

/// Adaptive estimate at every point, evaluated concurrently.
std::vector<double> predict_eta_batch(const HistogramEstimator& estimator, const PointSet& points);
/// Lepski bandwidth at every point, evaluated concurrently.
std::vector<double> lepski_bandwidth_batch(const HistogramEstimator& estimator, const PointSet& points);

namespace reference {
HistogramEstimator fit_serial(const LabeledSet& data, const BandwidthLadder& ladder,
                              std::optional<Smoothness> smoothness = {}, double lepski_scale = 1.0);
std::vector<double> predict_eta_batch_serial(const HistogramEstimator& estimator, const PointSet& points);
}  // namespace reference

}  // namespace abstain
