#pragma once

// Convex-surrogate abstaining classifiers over random Fourier features.
//
// A model is a pair of linear scorers (h, r) on a shared embedding z(x):
// sign(h) predicts, r <= 0 abstains. Two learners are provided: a fixed-cost
// learner that minimizes
//
//   (1/n) sum hinge((y h(x) - r(x)) / 2) + lambda hinge(r(x)) + l2 (|u|^2 + |v|^2)
//
// and a constrained learner that drops the lambda term and instead bounds
// the unlabeled hinge average (1/m) sum hinge(r(x_j)) by a budget.

#include "abstain/common.hpp"

#include <optional>
#include <string>

namespace abstain {

class FourierFeatures {
public:
    FourierFeatures() = default;
    /// Frequencies N(0, 1/sigma^2) per entry, offsets U[0, 2 pi), from `seed`.
    static FourierFeatures sample(std::size_t dim_in, std::size_t dim_out, double sigma, std::uint64_t seed);
    /// Explicit parameters; `frequencies` is dim_out x dim_in row-major.
    static FourierFeatures from_parameters(std::size_t dim_in, double sigma, std::vector<double> frequencies,
                                           std::vector<double> offsets, std::uint64_t seed = 0);

    std::size_t dim_in() const { return dim_in_; }
    std::size_t dim_out() const { return offsets_.size(); }
    double sigma() const { return sigma_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<double>& frequencies() const { return frequencies_; }
    const std::vector<double>& offsets() const { return offsets_; }

    /// z(x) = sqrt(2 / D_phi) cos(W x + b). Throws on dimension mismatch.
    void embed(std::span<const double> x, std::span<double> out) const;
    std::vector<double> embed(std::span<const double> x) const;

    bool operator==(const FourierFeatures&) const = default;

private:
    std::size_t dim_in_ = 0;
    double sigma_ = 1.0;
    std::uint64_t seed_ = 0;
    std::vector<double> frequencies_;
    std::vector<double> offsets_;
};

/// Row-major embedded sample: rows x dim_out.
struct EmbeddedSet {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> z;
    std::span<const double> row(std::size_t i) const { return {z.data() + i * cols, cols}; }
};

EmbeddedSet embed_batch(const FourierFeatures& features, const PointSet& points);

/// Median pairwise distance of up to 200 seeded subsampled points (1 when degenerate).
double median_heuristic_sigma(const PointSet& points, std::uint64_t seed);

struct SolverConfig {
    std::size_t iterations = 2000;
    double step = 1.0;  // step size is step / sqrt(t)
    double l2 = 1e-3;   // per scorer; biases are not regularized
    std::uint64_t seed = 0;
    double tolerance = 1e-3;  // constraint tolerance for the constrained learner
    bool grid_search = false;  // choose l2 over {1e-5, ..., 1e5} on a held-out fifth
    double nu_max = 100.0;
    std::size_t bisection_steps = 40;
    std::size_t warm_iterations = 250;  // per bisection step, warm-started from the previous solution

    void validate() const;
};

struct LinearScorer {
    std::vector<double> weights;
    double bias = 0.0;
    double score(std::span<const double> z) const;
    bool operator==(const LinearScorer&) const = default;
};

/// Parameters the model was trained with, kept for provenance.
struct TrainingEcho {
    std::string learner;  // "fixed-cost" or "constrained"
    double lambda = 0.0;
    double l2 = 0.0;
    double nu = 0.0;
    double budget = 0.0;
    std::size_t iterations = 0;
    double step = 0.0;
    bool operator==(const TrainingEcho&) const = default;
};

class SurrogateModel {
public:
    SurrogateModel() = default;
    SurrogateModel(FourierFeatures features, LinearScorer h, LinearScorer r, TrainingEcho echo = {});

    const FourierFeatures& features() const { return features_; }
    const LinearScorer& h() const { return h_; }
    const LinearScorer& r() const { return r_; }
    const TrainingEcho& echo() const { return echo_; }

    double h_score(std::span<const double> x) const;
    double r_score(std::span<const double> x) const;
    /// sign(h) if r > 0, otherwise abstain. u is ignored.
    Decision decide(std::span<const double> x, double u = 0.0) const;
    DecisionDistribution distribution(std::span<const double> x) const;

    bool operator==(const SurrogateModel&) const = default;

private:
    FourierFeatures features_;
    LinearScorer h_, r_;
    TrainingEcho echo_;
};

double hinge(double z);
/// hinge((y h - r) / 2) + lambda hinge(r).
double fixed_cost_loss(double h, double r, int y, double lambda);
/// 1{declare and wrong} + lambda 1{abstain} for the decision induced by (h, r).
double abstain_loss(double h, double r, int y, double lambda);

/// Weights of the two scorers as one vector: [u (D), b_h, v (D), b_r].
struct ObjectiveTerms {
    double lambda = 0.0;  // weight of hinge(r) on labeled points
    double nu = 0.0;      // weight of the unlabeled hinge average
    double l2 = 0.0;
};

/// Objective value and a subgradient at theta. Rows are split into fixed
/// chunks reduced in chunk order, so the result is independent of the
/// number of threads.
double objective_and_subgradient(std::span<const double> theta, const EmbeddedSet& labeled,
                                 std::span<const int> labels, const EmbeddedSet* unlabeled,
                                 const ObjectiveTerms& terms, std::span<double> grad);

namespace reference {
double objective_and_subgradient_serial(std::span<const double> theta, const EmbeddedSet& labeled,
                                        std::span<const int> labels, const EmbeddedSet* unlabeled,
                                        const ObjectiveTerms& terms, std::span<double> grad);
EmbeddedSet embed_batch_serial(const FourierFeatures& features, const PointSet& points);
}  // namespace reference

struct FitTrace {
    std::vector<double> best_objective;  // best-so-far objective per iteration
    double final_objective = 0.0;        // objective at the returned (averaged) weights
    double selected_l2 = 0.0;
};

SurrogateModel train_fixed_cost(const LabeledSet& labeled, double lambda, const FourierFeatures& features,
                                const SolverConfig& config, FitTrace* trace = nullptr);

struct ConstrainedReport {
    double budget = 0.0;
    double nu = 0.0;
    double constraint = 0.0;  // (1/m) sum hinge(r(X_j)) of the returned model
    double objective = 0.0;   // labeled surrogate objective of the returned model
    std::size_t bisection_steps = 0;
};

/// Minimize the labeled surrogate subject to (1/m) sum hinge(r(X_j)) <= b,
/// b = c_relax * delta - alpha, by bisection on a Lagrange multiplier.
/// Throws std::invalid_argument when b <= 0 and std::runtime_error when
/// nu_max does not reach feasibility.
SurrogateModel train_constrained(const LabeledSet& labeled, const UnlabeledSet& unlabeled, double delta,
                                 double alpha, double c_relax, const FourierFeatures& features,
                                 const SolverConfig& config, ConstrainedReport* report = nullptr);

/// (2 B R + sqrt(2 ln(2m))) / sqrt(m).
double tau_slack(std::size_t m, double feature_norm_bound, double weight_norm_bound);

/// Fraction of points with r(x) <= 0.
double rejection_rate(const SurrogateModel& model, const PointSet& points);
/// (1/m) sum hinge(r(x_j)).
double hinge_constraint_value(const SurrogateModel& model, const PointSet& points);
/// (1/n) sum hinge((y h - r)/2) + lambda hinge(r) + l2 (|u|^2 + |v|^2).
double surrogate_objective(const SurrogateModel& model, const LabeledSet& labeled, double lambda, double l2);

}  // namespace abstain
