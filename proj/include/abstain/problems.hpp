#pragma once

// Synthetic problem catalog with exact Bayes-optimal abstaining rules.
//
// A problem is a joint law of (X, Y) on [0,1]^D x {-1,+1}. The optimal rule
// under an abstention budget delta thresholds |eta(x) - 1/2| at
//
//   gamma_delta = sup{ gamma > 0 : P_X(|eta(X) - 1/2| <= gamma) <= delta }
//
// abstains strictly inside the band, and randomizes on the two level sets
// |eta - 1/2| = gamma_delta with abstention probability
// c0 = (delta - delta1) / (delta2 - delta1), where delta1 is the mass strictly
// inside the band and delta2 adds the level sets.

#include "abstain/common.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace abstain {

/// Margin, detectability, smoothness and density constants. Metadata only.
struct AssumptionMeta {
    std::optional<double> C0, rho0, C1, rho1;
    std::optional<double> L, beta;
    std::optional<double> mu_min, mu_max;
};

struct Atom {
    std::vector<double> location;
    double mass = 0.0;
    double eta = 0.0;
};

namespace kinds {
/// eta(x) = x, X uniform on [0,1].
struct Linear1d {};
/// eta(x) = 1/2 + A sin(2 pi k x), X uniform on [0,1].
struct Sine1d {
    int frequency = 1;
    double amplitude = 0.25;
};
/// eta(x) = 1/2 + (A/D) sum_d sin(pi (x_d - 1/2)), X uniform on [0,1]^D.
struct SmoothNd {
    std::size_t dim = 2;
    double amplitude = 0.4;
};
/// Finite support.
struct Atoms {
    std::vector<Atom> atoms;
};
/// Balanced classes, Y=-1 ~ N((0.3,0.3), s^2 I), Y=+1 ~ N((0.7,0.7), s^2 I),
/// coordinates clipped to [0,1]. eta is exact only off the clipped boundary,
/// so no Bayes quantities are provided.
struct TwoGaussians {
    double sigma = 0.15;
};
}  // namespace kinds

class Problem {
public:
    using Kind = std::variant<kinds::Linear1d, kinds::Sine1d, kinds::SmoothNd, kinds::Atoms, kinds::TwoGaussians>;

    static Problem linear1d();
    static Problem sine1d(int frequency, double amplitude);
    static Problem smooth_nd(std::size_t dim, double amplitude);
    static Problem atoms(std::vector<Atom> atoms);
    static Problem two_gaussians(double sigma = 0.15);

    const Kind& kind() const { return kind_; }
    std::string name() const;
    std::size_t dim() const;
    const AssumptionMeta& meta() const { return meta_; }
    AssumptionMeta& meta() { return meta_; }

    bool is_atoms() const { return std::holds_alternative<kinds::Atoms>(kind_); }
    /// Whether bayes_threshold / bayes_rule / bayes_risk are available.
    bool has_bayes() const;

    /// Regression function P(Y=+1 | X=x). Throws std::domain_error outside
    /// the support (for atoms: x must equal an atom location).
    double eta(std::span<const double> x) const;

    LabeledSet sample_labeled(std::size_t n, std::uint64_t seed) const;
    UnlabeledSet sample_unlabeled(std::size_t m, std::uint64_t seed) const;

    /// F(gamma) = P_X(|eta(X) - 1/2| <= gamma).
    double level_cdf(double gamma) const;

private:
    explicit Problem(Kind kind) : kind_(std::move(kind)) {}
    std::vector<double> sample_x(std::size_t count, Rng& rng) const;
    std::size_t atom_at(std::span<const double> x) const;

    Kind kind_;
    AssumptionMeta meta_;
};

enum class Region { Minus, Plus, Abstain, BoundaryPlus, BoundaryMinus };

std::string_view to_string(Region r);

/// The randomized Bayes-optimal rule at a budget.
struct AbstainRule {
    Problem problem;
    double delta = 0.0;
    double gamma = 0.0;
    double c0 = 0.0;      // abstention probability on the boundary sets
    double delta1 = 0.0;  // P_X(G_abstain)
    double delta2 = 0.0;  // delta1 + P_X(boundary sets)

    Region region(std::span<const double> x) const;
    Region region_of_eta(double eta) const;
    Decision decide(std::span<const double> x, double u) const;
    DecisionDistribution distribution(std::span<const double> x) const;
    /// delta1 + c0 (delta2 - delta1).
    double abstention() const { return delta1 + c0 * (delta2 - delta1); }
};

double bayes_threshold(const Problem& problem, double delta);
AbstainRule bayes_rule(const Problem& problem, double delta);
double bayes_risk(const Problem& problem, double delta);

/// Same as rule.decide; kept as a free function for symmetry with the
/// plug-in classifier.
Decision classify(const AbstainRule& rule, std::span<const double> x, double u);

struct GreedyResult {
    double risk = 0.0;
    double abstention = 0.0;
    std::vector<double> abstain_fraction;  // per atom, in input order
};

/// Brute-force optimum over randomized rules on a finite support: spend the
/// budget on atoms in increasing |eta - 1/2|, splitting the marginal atom.
GreedyResult greedy_oracle(const Problem& problem, double delta);

/// Atoms from CSV text with header; columns location..., mass, eta.
Problem parse_atoms_csv(std::string_view text);

/// Problem from a catalog name: linear1d, sine1d, smooth-nd, two-gaussians.
Problem make_catalog_problem(std::string_view kind, int frequency = 1, double amplitude = 0.25,
                             std::size_t dim = 2, double sigma = 0.15);

}  // namespace abstain
