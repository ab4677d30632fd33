#include "abstain/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace abstain {

// --- features -----------------------------------------------------------------

FourierFeatures FourierFeatures::sample(std::size_t dim_in, std::size_t dim_out, double sigma, std::uint64_t seed) {
    if (dim_in == 0 || dim_out == 0) throw std::invalid_argument("FourierFeatures: dimensions must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("FourierFeatures: sigma must be positive");
    Rng rng = make_rng(seed, Stream::Features);
    std::vector<double> w(dim_out * dim_in);
    for (double& v : w) v = standard_normal(rng) / sigma;
    std::vector<double> b(dim_out);
    for (double& v : b) v = 2.0 * std::numbers::pi * uniform01(rng);
    return from_parameters(dim_in, sigma, std::move(w), std::move(b), seed);
}

FourierFeatures FourierFeatures::from_parameters(std::size_t dim_in, double sigma, std::vector<double> frequencies,
                                                 std::vector<double> offsets, std::uint64_t seed) {
    if (dim_in == 0 || offsets.empty()) throw std::invalid_argument("FourierFeatures: dimensions must be positive");
    if (frequencies.size() != dim_in * offsets.size()) {
        throw std::invalid_argument("FourierFeatures: frequency matrix has wrong size");
    }
    FourierFeatures f;
    f.dim_in_ = dim_in;
    f.sigma_ = sigma;
    f.seed_ = seed;
    f.frequencies_ = std::move(frequencies);
    f.offsets_ = std::move(offsets);
    return f;
}

void FourierFeatures::embed(std::span<const double> x, std::span<double> out) const {
    if (x.size() != dim_in_) throw std::invalid_argument("embed: input dimension mismatch");
    if (out.size() != dim_out()) throw std::invalid_argument("embed: output dimension mismatch");
    const double scale = std::sqrt(2.0 / static_cast<double>(dim_out()));
    for (std::size_t k = 0; k < dim_out(); ++k) {
        const double* w = frequencies_.data() + k * dim_in_;
        double acc = offsets_[k];
        for (std::size_t d = 0; d < dim_in_; ++d) acc += w[d] * x[d];
        out[k] = scale * std::cos(acc);
    }
}

std::vector<double> FourierFeatures::embed(std::span<const double> x) const {
    std::vector<double> out(dim_out());
    embed(x, out);
    return out;
}

EmbeddedSet embed_batch(const FourierFeatures& features, const PointSet& points) {
    if (!points.empty() && points.dim() != features.dim_in()) throw std::invalid_argument("embed: input dimension mismatch");
    EmbeddedSet e{.rows = points.size(), .cols = features.dim_out(), .z = {}};
    e.z.resize(e.rows * e.cols);
    const auto rows = static_cast<std::ptrdiff_t>(e.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        const auto r = static_cast<std::size_t>(i);
        features.embed(points.point(r), std::span<double>(e.z.data() + r * e.cols, e.cols));
    }
    return e;
}

double median_heuristic_sigma(const PointSet& points, std::uint64_t seed) {
    constexpr std::size_t kSubsample = 200;
    if (points.size() < 2) return 1.0;
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (idx.size() > kSubsample) {
        Rng rng = make_rng(seed, Stream::Sigma);
        for (std::size_t i = 0; i < kSubsample; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(idx.size() - i));
            std::swap(idx[i], idx[std::min(j, idx.size() - 1)]);
        }
        idx.resize(kSubsample);
    }
    std::vector<double> dist;
    dist.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            auto p = points.point(idx[a]);
            auto q = points.point(idx[b]);
            double s = 0.0;
            for (std::size_t d = 0; d < p.size(); ++d) s += (p[d] - q[d]) * (p[d] - q[d]);
            dist.push_back(std::sqrt(s));
        }
    }
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    return *mid > 0.0 ? *mid : 1.0;
}

// --- losses -------------------------------------------------------------------

double hinge(double z) { return std::max(0.0, 1.0 - z); }

double fixed_cost_loss(double h, double r, int y, double lambda) {
    return hinge((y * h - r) / 2.0) + lambda * hinge(r);
}

double abstain_loss(double h, double r, int y, double lambda) {
    if (r <= 0.0) return lambda;
    const int predicted = h >= 0.0 ? 1 : -1;
    return predicted == y ? 0.0 : 1.0;
}

void SolverConfig::validate() const {
    if (iterations == 0) throw std::invalid_argument("solver: iterations must be positive");
    if (!(step > 0.0)) throw std::invalid_argument("solver: step must be positive");
    if (!(l2 > 0.0)) throw std::invalid_argument("solver: l2 must be positive");
    if (!(tolerance > 0.0 && tolerance <= 0.1)) throw std::invalid_argument("solver: tolerance must lie in (0, 0.1]");
    if (!(nu_max > 0.0)) throw std::invalid_argument("solver: nu_max must be positive");
    if (warm_iterations == 0) throw std::invalid_argument("solver: warm_iterations must be positive");
}

double LinearScorer::score(std::span<const double> z) const {
    double s = bias;
    for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * z[k];
    return s;
}

SurrogateModel::SurrogateModel(FourierFeatures features, LinearScorer h, LinearScorer r, TrainingEcho echo)
    : features_(std::move(features)), h_(std::move(h)), r_(std::move(r)), echo_(std::move(echo)) {
    if (h_.weights.size() != features_.dim_out() || r_.weights.size() != features_.dim_out()) {
        throw std::invalid_argument("SurrogateModel: weight length differs from feature dimension");
    }
}

double SurrogateModel::h_score(std::span<const double> x) const { return h_.score(features_.embed(x)); }
double SurrogateModel::r_score(std::span<const double> x) const { return r_.score(features_.embed(x)); }

Decision SurrogateModel::decide(std::span<const double> x, double) const {
    const auto z = features_.embed(x);
    if (r_.score(z) <= 0.0) return Decision::Abstain;
    return h_.score(z) >= 0.0 ? Decision::Plus : Decision::Minus;
}

DecisionDistribution SurrogateModel::distribution(std::span<const double> x) const {
    switch (decide(x)) {
        case Decision::Minus: return {1.0, 0.0, 0.0};
        case Decision::Plus: return {0.0, 1.0, 0.0};
        case Decision::Abstain: return {0.0, 0.0, 1.0};
    }
    return {};
}

// --- objective kernel -----------------------------------------------------------

namespace {

constexpr std::size_t kChunkRows = 256;

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

// Accumulates the per-row loss and subgradient for rows [begin, end) of the
// labeled block into (loss, grad). grad layout: [u, b_h, v, b_r].
double labeled_rows(std::span<const double> theta, const EmbeddedSet& e, std::span<const int> labels, double lambda,
                    std::size_t begin, std::size_t end, double* grad) {
    const std::size_t D = e.cols;
    const double* u = theta.data();
    const double bh = theta[D];
    const double* v = theta.data() + D + 1;
    const double br = theta[2 * D + 1];
    double loss = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double* z = e.z.data() + i * D;
        const double y = labels[i];
        const double h = dot(u, z, D) + bh;
        const double r = dot(v, z, D) + br;
        const double a = (y * h - r) / 2.0;
        if (a < 1.0) {
            loss += 1.0 - a;
            axpy(-y / 2.0, z, grad, D);
            grad[D] += -y / 2.0;
            axpy(0.5, z, grad + D + 1, D);
            grad[2 * D + 1] += 0.5;
        }
        if (lambda > 0.0 && r < 1.0) {
            loss += lambda * (1.0 - r);
            axpy(-lambda, z, grad + D + 1, D);
            grad[2 * D + 1] += -lambda;
        }
    }
    return loss;
}

double unlabeled_rows(std::span<const double> theta, const EmbeddedSet& e, std::size_t begin, std::size_t end,
                      double* grad) {
    const std::size_t D = e.cols;
    const double* v = theta.data() + D + 1;
    const double br = theta[2 * D + 1];
    double loss = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double* z = e.z.data() + i * D;
        const double r = dot(v, z, D) + br;
        if (r < 1.0) {
            loss += 1.0 - r;
            axpy(-1.0, z, grad + D + 1, D);
            grad[2 * D + 1] += -1.0;
        }
    }
    return loss;
}

void check_kernel_inputs(std::span<const double> theta, const EmbeddedSet& labeled, std::span<const int> labels,
                         const EmbeddedSet* unlabeled, std::span<double> grad) {
    const std::size_t P = 2 * labeled.cols + 2;
    if (theta.size() != P || grad.size() != P) throw std::invalid_argument("objective: parameter length mismatch");
    if (labels.size() != labeled.rows) throw std::invalid_argument("objective: label count mismatch");
    if (labeled.rows == 0) throw std::invalid_argument("objective: empty labeled set");
    if (unlabeled != nullptr && unlabeled->cols != labeled.cols) {
        throw std::invalid_argument("objective: embedding width mismatch");
    }
}

// Adds the l2 term and rescales the data terms.
double finish(std::span<const double> theta, std::size_t D, double labeled_loss, double unlabeled_loss,
              std::size_t n, std::size_t m, const ObjectiveTerms& t, std::span<double> grad,
              std::span<const double> grad_labeled, std::span<const double> grad_unlabeled) {
    const double inv_n = 1.0 / static_cast<double>(n);
    const double w_u = (m > 0 && t.nu > 0.0) ? t.nu / static_cast<double>(m) : 0.0;
    double reg = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
        grad[k] = inv_n * grad_labeled[k] + (grad_unlabeled.empty() ? 0.0 : w_u * grad_unlabeled[k]);
    }
    for (std::size_t k = 0; k < D; ++k) {
        const double wu = theta[k];
        const double wv = theta[D + 1 + k];
        reg += wu * wu + wv * wv;
        grad[k] += 2.0 * t.l2 * wu;
        grad[D + 1 + k] += 2.0 * t.l2 * wv;
    }
    return inv_n * labeled_loss + w_u * unlabeled_loss + t.l2 * reg;
}

}  // namespace

double objective_and_subgradient(std::span<const double> theta, const EmbeddedSet& labeled,
                                 std::span<const int> labels, const EmbeddedSet* unlabeled,
                                 const ObjectiveTerms& terms, std::span<double> grad) {
    check_kernel_inputs(theta, labeled, labels, unlabeled, grad);
    const std::size_t P = grad.size();
    const bool use_unlabeled = unlabeled != nullptr && unlabeled->rows > 0 && terms.nu > 0.0;
    const std::size_t n_chunks = (labeled.rows + kChunkRows - 1) / kChunkRows;
    const std::size_t m_chunks = use_unlabeled ? (unlabeled->rows + kChunkRows - 1) / kChunkRows : 0;
    const std::size_t chunks = n_chunks + m_chunks;

    std::vector<double> partial(chunks * P, 0.0);
    std::vector<double> losses(chunks, 0.0);
    const auto total = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < total; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        double* g = partial.data() + ci * P;
        if (ci < n_chunks) {
            const std::size_t begin = ci * kChunkRows;
            const std::size_t end = std::min(labeled.rows, begin + kChunkRows);
            losses[ci] = labeled_rows(theta, labeled, labels, terms.lambda, begin, end, g);
        } else {
            const std::size_t begin = (ci - n_chunks) * kChunkRows;
            const std::size_t end = std::min(unlabeled->rows, begin + kChunkRows);
            losses[ci] = unlabeled_rows(theta, *unlabeled, begin, end, g);
        }
    }
    std::vector<double> gl(P, 0.0), gu(use_unlabeled ? P : 0, 0.0);
    double ll = 0.0, lu = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        const double* g = partial.data() + c * P;
        if (c < n_chunks) {
            ll += losses[c];
            for (std::size_t k = 0; k < P; ++k) gl[k] += g[k];
        } else {
            lu += losses[c];
            for (std::size_t k = 0; k < P; ++k) gu[k] += g[k];
        }
    }
    return finish(theta, labeled.cols, ll, lu, labeled.rows, use_unlabeled ? unlabeled->rows : 0, terms, grad, gl, gu);
}

namespace reference {

double objective_and_subgradient_serial(std::span<const double> theta, const EmbeddedSet& labeled,
                                        std::span<const int> labels, const EmbeddedSet* unlabeled,
                                        const ObjectiveTerms& terms, std::span<double> grad) {
    check_kernel_inputs(theta, labeled, labels, unlabeled, grad);
    const std::size_t P = grad.size();
    const bool use_unlabeled = unlabeled != nullptr && unlabeled->rows > 0 && terms.nu > 0.0;
    std::vector<double> gl(P, 0.0), gu(use_unlabeled ? P : 0, 0.0);
    const double ll = labeled_rows(theta, labeled, labels, terms.lambda, 0, labeled.rows, gl.data());
    const double lu = use_unlabeled ? unlabeled_rows(theta, *unlabeled, 0, unlabeled->rows, gu.data()) : 0.0;
    return finish(theta, labeled.cols, ll, lu, labeled.rows, use_unlabeled ? unlabeled->rows : 0, terms, grad, gl, gu);
}

EmbeddedSet embed_batch_serial(const FourierFeatures& features, const PointSet& points) {
    EmbeddedSet e{.rows = points.size(), .cols = features.dim_out(), .z = {}};
    e.z.resize(e.rows * e.cols);
    for (std::size_t i = 0; i < e.rows; ++i) {
        features.embed(points.point(i), std::span<double>(e.z.data() + i * e.cols, e.cols));
    }
    return e;
}

}  // namespace reference

// --- solver -------------------------------------------------------------------

namespace {

struct SolveResult {
    std::vector<double> theta;  // tail-averaged iterate
    std::vector<double> best_objective;
};

// Full-batch subgradient descent with step c / (sqrt(t) (1 + nu)), averaging
// the iterates of the second half.
SolveResult subgradient_descent(const EmbeddedSet& labeled, std::span<const int> labels, const EmbeddedSet* unlabeled,
                                const ObjectiveTerms& terms, std::vector<double> theta, const SolverConfig& config,
                                bool keep_trace) {
    const std::size_t P = theta.size();
    std::vector<double> grad(P), avg(P, 0.0);
    SolveResult out;
    if (keep_trace) out.best_objective.reserve(config.iterations);
    double best = std::numeric_limits<double>::infinity();
    const std::size_t T = config.iterations;
    const std::size_t tail_start = T / 2 + 1;
    std::size_t averaged = 0;
    const double scale = config.step / (1.0 + terms.nu);
    for (std::size_t t = 1; t <= T; ++t) {
        const double f = objective_and_subgradient(theta, labeled, labels, unlabeled, terms, grad);
        best = std::min(best, f);
        if (keep_trace) out.best_objective.push_back(best);
        const double eta = scale / std::sqrt(static_cast<double>(t));
        for (std::size_t k = 0; k < P; ++k) theta[k] -= eta * grad[k];
        if (t >= tail_start) {
            ++averaged;
            const double w = 1.0 / static_cast<double>(averaged);
            for (std::size_t k = 0; k < P; ++k) avg[k] += w * (theta[k] - avg[k]);
        }
    }
    out.theta = averaged > 0 ? std::move(avg) : std::move(theta);
    return out;
}

SurrogateModel model_from_theta(const FourierFeatures& features, std::span<const double> theta, TrainingEcho echo) {
    const std::size_t D = features.dim_out();
    LinearScorer h{{theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(D)}, theta[D]};
    LinearScorer r{{theta.begin() + static_cast<std::ptrdiff_t>(D + 1), theta.begin() + static_cast<std::ptrdiff_t>(2 * D + 1)},
                   theta[2 * D + 1]};
    return SurrogateModel(features, std::move(h), std::move(r), std::move(echo));
}

void check_labeled(const LabeledSet& labeled, const FourierFeatures& features) {
    if (labeled.size() == 0) throw std::invalid_argument("train: empty labeled set");
    if (labeled.dim() != features.dim_in()) throw std::invalid_argument("train: feature input dimension mismatch");
}

SurrogateModel fit_fixed_cost(const LabeledSet& labeled, double lambda, double l2, const FourierFeatures& features,
                              const SolverConfig& config, FitTrace* trace) {
    const EmbeddedSet z = embed_batch(features, labeled.points);
    const ObjectiveTerms terms{.lambda = lambda, .nu = 0.0, .l2 = l2};
    SolveResult res = subgradient_descent(z, labeled.labels, nullptr, terms,
                                          std::vector<double>(2 * features.dim_out() + 2, 0.0), config, trace != nullptr);
    TrainingEcho echo{.learner = "fixed-cost", .lambda = lambda, .l2 = l2, .nu = 0.0, .budget = 0.0,
                      .iterations = config.iterations, .step = config.step};
    if (trace != nullptr) {
        std::vector<double> grad(res.theta.size());
        trace->best_objective = std::move(res.best_objective);
        trace->final_objective = objective_and_subgradient(res.theta, z, labeled.labels, nullptr, terms, grad);
        trace->selected_l2 = l2;
    }
    return model_from_theta(features, res.theta, std::move(echo));
}

LabeledSet subset(const LabeledSet& s, std::span<const std::size_t> idx) {
    LabeledSet out;
    out.points = PointSet(s.dim());
    out.points.reserve(idx.size());
    for (std::size_t i : idx) {
        out.points.push_back(s.points.point(i));
        out.labels.push_back(s.labels[i]);
    }
    return out;
}

}  // namespace

SurrogateModel train_fixed_cost(const LabeledSet& labeled, double lambda, const FourierFeatures& features,
                                const SolverConfig& config, FitTrace* trace) {
    check_labeled(labeled, features);
    config.validate();
    if (!(lambda > 0.0 && lambda < 0.5)) throw std::invalid_argument("train_fixed_cost: lambda must lie in (0, 1/2)");
    if (!config.grid_search || labeled.size() < 5) return fit_fixed_cost(labeled, lambda, config.l2, features, config, trace);

    // Hold out a seeded fifth, score each l2 = 10^i by the abstention loss.
    std::vector<std::size_t> idx(labeled.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(config.seed, Stream::Holdout);
    for (std::size_t i = idx.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
        std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
    const std::size_t holdout = idx.size() / 5;
    const LabeledSet valid = subset(labeled, std::span(idx).first(holdout));
    const LabeledSet train = subset(labeled, std::span(idx).subspan(holdout));

    constexpr int kLowExp = -5, kHighExp = 5;
    constexpr std::size_t kCandidates = kHighExp - kLowExp + 1;
    std::array<double, kCandidates> scores{};
    const auto count = static_cast<std::ptrdiff_t>(kCandidates);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < count; ++c) {
        const double l2 = std::pow(10.0, static_cast<double>(kLowExp + c));
        const SurrogateModel m = fit_fixed_cost(train, lambda, l2, features, config, nullptr);
        double loss = 0.0;
        for (std::size_t i = 0; i < valid.size(); ++i) {
            const auto z = features.embed(valid.points.point(i));
            loss += abstain_loss(m.h().score(z), m.r().score(z), valid.labels[i], lambda);
        }
        scores[static_cast<std::size_t>(c)] = loss;
    }
    // Ties go to the smaller exponent.
    const auto best = static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
    const double chosen = std::pow(10.0, static_cast<double>(kLowExp + static_cast<int>(best)));
    return fit_fixed_cost(labeled, lambda, chosen, features, config, trace);
}

SurrogateModel train_constrained(const LabeledSet& labeled, const UnlabeledSet& unlabeled, double delta,
                                 double alpha, double c_relax, const FourierFeatures& features,
                                 const SolverConfig& config, ConstrainedReport* report) {
    check_labeled(labeled, features);
    config.validate();
    if (unlabeled.empty()) throw std::invalid_argument("train_constrained: empty unlabeled set");
    const double budget = c_relax * delta - alpha;
    if (!(budget > 0.0)) throw std::invalid_argument("train_constrained: infeasible budget c_relax * delta - alpha <= 0");

    const EmbeddedSet zl = embed_batch(features, labeled.points);
    const EmbeddedSet zu = embed_batch(features, unlabeled);
    const std::size_t P = 2 * features.dim_out() + 2;

    SolverConfig warm = config;
    warm.iterations = config.warm_iterations;
    auto solve = [&](double nu, std::vector<double> init, const SolverConfig& cfg) {
        const ObjectiveTerms terms{.lambda = 0.0, .nu = nu, .l2 = config.l2};
        return subgradient_descent(zl, labeled.labels, &zu, terms, std::move(init), cfg, false).theta;
    };
    auto constraint = [&](std::span<const double> theta) {
        const std::size_t D = features.dim_out();
        double s = 0.0;
        for (std::size_t i = 0; i < zu.rows; ++i) {
            s += hinge(dot(theta.data() + D + 1, zu.z.data() + i * D, D) + theta[2 * D + 1]);
        }
        return s / static_cast<double>(zu.rows);
    };
    auto objective = [&](std::span<const double> theta) {
        std::vector<double> grad(P);
        return objective_and_subgradient(theta, zl, labeled.labels, nullptr, {.lambda = 0.0, .nu = 0.0, .l2 = config.l2},
                                         grad);
    };

    struct Candidate {
        std::vector<double> theta;
        double nu, constraint, objective;
    };
    std::optional<Candidate> best;
    auto consider = [&](const std::vector<double>& theta, double nu, double g) {
        const double f = objective(theta);
        if (!best || f < best->objective) best = Candidate{theta, nu, g, f};
    };

    std::vector<double> theta = solve(config.nu_max, std::vector<double>(P, 0.0), config);
    double g = constraint(theta);
    if (g > budget) {
        throw std::runtime_error("train_constrained: constraint " + std::to_string(g) + " exceeds budget " +
                                 std::to_string(budget) + " at nu_max = " + std::to_string(config.nu_max));
    }
    consider(theta, config.nu_max, g);

    double lo = 0.0, hi = config.nu_max;
    std::size_t steps = 0;
    if (budget - g > config.tolerance) {
        for (; steps < config.bisection_steps; ++steps) {
            const double nu = 0.5 * (lo + hi);
            theta = solve(nu, theta, warm);
            g = constraint(theta);
            if (g <= budget) {
                consider(theta, nu, g);
                hi = nu;
                if (budget - g <= config.tolerance) {
                    ++steps;
                    break;
                }
            } else {
                lo = nu;
            }
        }
    }

    TrainingEcho echo{.learner = "constrained", .lambda = 0.0, .l2 = config.l2, .nu = best->nu, .budget = budget,
                      .iterations = config.iterations, .step = config.step};
    if (report != nullptr) {
        *report = {.budget = budget, .nu = best->nu, .constraint = best->constraint, .objective = best->objective,
                   .bisection_steps = steps};
    }
    return model_from_theta(features, best->theta, std::move(echo));
}

double tau_slack(std::size_t m, double feature_norm_bound, double weight_norm_bound) {
    if (m < 2) throw std::invalid_argument("tau_slack needs m >= 2");
    const double md = static_cast<double>(m);
    return (2.0 * feature_norm_bound * weight_norm_bound + std::sqrt(2.0 * std::log(2.0 * md))) / std::sqrt(md);
}

double rejection_rate(const SurrogateModel& model, const PointSet& points) {
    if (points.empty()) throw std::invalid_argument("rejection_rate: empty point set");
    std::size_t rejected = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (model.r_score(points.point(i)) <= 0.0) ++rejected;
    }
    return static_cast<double>(rejected) / static_cast<double>(points.size());
}

double hinge_constraint_value(const SurrogateModel& model, const PointSet& points) {
    if (points.empty()) throw std::invalid_argument("hinge_constraint_value: empty point set");
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += hinge(model.r_score(points.point(i)));
    return s / static_cast<double>(points.size());
}

double surrogate_objective(const SurrogateModel& model, const LabeledSet& labeled, double lambda, double l2) {
    if (labeled.size() == 0) throw std::invalid_argument("surrogate_objective: empty labeled set");
    double s = 0.0;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        const auto z = model.features().embed(labeled.points.point(i));
        s += fixed_cost_loss(model.h().score(z), model.r().score(z), labeled.labels[i], lambda);
    }
    double reg = 0.0;
    for (double w : model.h().weights) reg += w * w;
    for (double w : model.r().weights) reg += w * w;
    return s / static_cast<double>(labeled.size()) + l2 * reg;
}

}  // namespace abstain
