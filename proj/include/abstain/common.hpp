#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace abstain {

/// Three-way output of an abstaining classifier.
enum class Decision : int { Minus = -1, Abstain = 0, Plus = 1 };

/// Two values of |eta - 1/2| closer than this are treated as the same level.
/// Probabilities computed as count ratios or differences of decimal literals
/// (0.55 - 0.5 vs 0.5 - 0.45) otherwise land on different sides of a threshold.
inline constexpr double kLevelTol = 1e-12;

inline double level(double eta) { return std::abs(eta - 0.5); }

/// Row-major points in [0,1]^D.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t dim) : dim_(dim) {}
    PointSet(std::size_t dim, std::vector<double> coords);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
    bool empty() const { return coords_.empty(); }

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }
    void push_back(std::span<const double> x);
    void reserve(std::size_t n) { coords_.reserve(n * dim_); }

    const std::vector<double>& coords() const { return coords_; }
    std::vector<double>& coords() { return coords_; }

    bool operator==(const PointSet&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> coords_;
};

using UnlabeledSet = PointSet;

struct LabeledSet {
    PointSet points;
    std::vector<int> labels;  // values in {-1, +1}

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return points.dim(); }
    bool operator==(const LabeledSet&) const = default;
};

/// Probabilities of the three outputs at a point.
struct DecisionDistribution {
    double minus = 0.0;
    double plus = 0.0;
    double abstain = 0.0;
};

struct Metrics {
    double risk = 0.0;                  // errors among all points; abstentions are not errors
    double rejection_rate = 0.0;
    double accuracy_on_accepted = 1.0;  // 1.0 when nothing is declared
    std::size_t count = 0;
};

Metrics tally(std::span<const Decision> decisions, std::span<const int> labels);

/// Anything that maps (x, u) to a decision with u uniform on [0,1).
template <class C>
concept RandomizedClassifier = requires(const C& c, std::span<const double> x, double u) {
    { c.decide(x, u) } -> std::same_as<Decision>;
    { c.distribution(x) } -> std::same_as<DecisionDistribution>;
};

// --- seeded streams -------------------------------------------------------

using Rng = std::mt19937_64;

/// Stream identifiers mixed into a base seed so that each role draws from
/// an independent generator.
enum class Stream : std::uint64_t {
    Labeled = 1,
    Unlabeled = 2,
    Test = 3,
    Decisions = 4,
    Features = 5,
    Split = 6,
    Holdout = 7,
    Sigma = 8,
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, Stream stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, Stream stream) { return Rng(derive_seed(seed, stream)); }

/// Uniform draw on [0,1) built from the top 53 bits; independent of the
/// standard library's distribution implementation.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(Rng& rng);

/// Evaluate a randomized classifier on a labeled set, drawing one uniform per
/// decision from the seeded Decisions stream.
template <RandomizedClassifier C>
Metrics evaluate(const C& classifier, const LabeledSet& test, std::uint64_t seed) {
    if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
    Rng rng = make_rng(seed, Stream::Decisions);
    std::vector<Decision> decisions(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        decisions[i] = classifier.decide(test.points.point(i), uniform01(rng));
    }
    return tally(decisions, test.labels);
}

/// Mean over points of P(declared label != Y | x) using a known regression
/// function; a low-variance estimate of R(g) = P(g(X) != Y, g(X) != abstain).
template <RandomizedClassifier C, class Eta>
double expected_risk(const C& classifier, const PointSet& points, const Eta& eta) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto x = points.point(i);
        DecisionDistribution d = classifier.distribution(x);
        double e = eta(x);
        total += d.minus * e + d.plus * (1.0 - e);
    }
    return points.size() == 0 ? 0.0 : total / static_cast<double>(points.size());
}

}  // namespace abstain
