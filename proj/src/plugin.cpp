#include "abstain/plugin.hpp"

#include <algorithm>
#include <cmath>

namespace abstain {

double slack_a_m(std::size_t m, double scale) {
    if (m < 2) throw std::invalid_argument("slack_a_m needs m >= 2");
    if (!(scale >= 0.0)) throw std::invalid_argument("slack scale must be non-negative");
    const double md = static_cast<double>(m);
    return std::clamp(scale * std::sqrt(72.0 * std::log(4.0 * md) / md), 0.0, 1.0);
}

namespace {

// Empirical mass of {level <= gamma} given levels sorted ascending.
std::size_t core_count(const std::vector<double>& sorted_levels, double gamma) {
    return static_cast<std::size_t>(
        std::upper_bound(sorted_levels.begin(), sorted_levels.end(), gamma + kLevelTol) - sorted_levels.begin());
}

std::vector<double> sorted_levels(std::span<const double> values) {
    std::vector<double> levels;
    levels.reserve(values.size());
    for (double v : values) levels.push_back(level(v));
    std::sort(levels.begin(), levels.end());
    return levels;
}

}  // namespace

double estimate_threshold(std::span<const double> eta_hat_values, double delta, double a_m) {
    if (eta_hat_values.empty()) throw std::invalid_argument("estimate_threshold: empty unlabeled set");
    const double budget = delta - a_m;
    if (budget <= 0.0) return 0.0;
    const auto levels = sorted_levels(eta_hat_values);
    const double limit = budget * static_cast<double>(levels.size()) + 1e-9;
    double best = 0.0;
    // Candidates in increasing order; the core count is monotone, so stop at
    // the first infeasible candidate.
    for (std::size_t i = 0; i < levels.size();) {
        const double candidate = levels[i];
        const std::size_t count = core_count(levels, candidate);
        if (static_cast<double>(count) > limit) break;
        best = candidate;
        i = count;
    }
    return best;
}

PluginClassifier::Parameters plugin_parameters(std::span<const double> eta_hat_values, double delta, double a_m,
                                               double band) {
    if (eta_hat_values.empty()) throw std::invalid_argument("plugin: empty unlabeled set");
    if (!(band >= 0.0)) throw std::invalid_argument("plugin: band must be non-negative");
    PluginClassifier::Parameters p{.delta = delta, .a_m = a_m};
    const double budget = delta - a_m;
    p.gamma_hat = estimate_threshold(eta_hat_values, delta, a_m);
    const auto levels = sorted_levels(eta_hat_values);
    const auto m = static_cast<double>(levels.size());
    if (budget <= 0.0) {
        p.core_enabled = false;
        p.band = 0.0;
        p.c_hat = 0.0;
        p.p1_hat = 0.0;
        p.p2_hat = 0.0;
        return p;
    }
    p.core_enabled = static_cast<double>(core_count(levels, p.gamma_hat)) <= budget * m + 1e-9;
    p.band = band;
    p.p1_hat = p.core_enabled ? static_cast<double>(core_count(levels, p.gamma_hat)) / m : 0.0;
    p.p2_hat = static_cast<double>(core_count(levels, p.gamma_hat + band)) / m;

    const double target = delta - 5.0 * a_m;
    const double denom = p.p2_hat - p.p1_hat - 2.0 * a_m;
    p.c_hat = (p.p1_hat < target && denom > 0.0) ? std::clamp((target - p.p1_hat) / denom, 0.0, 1.0) : 0.0;
    return p;
}

PluginClassifier build(const HistogramEstimator& estimator, const UnlabeledSet& unlabeled, double delta, double a_m,
                       double band) {
    const auto values = predict_eta_batch(estimator, unlabeled);
    return PluginClassifier(estimator, plugin_parameters(values, delta, a_m, band));
}

double default_band(const HistogramEstimator& estimator, const UnlabeledSet& unlabeled) {
    const auto& ladder = estimator.ladder();
    if (const auto& s = estimator.smoothness()) {
        return 2.0 * b_n(static_cast<double>(ladder.n), ladder.mu_min, s->L, s->beta, ladder.dim);
    }
    if (unlabeled.empty()) throw std::invalid_argument("default_band: empty unlabeled set");
    auto bandwidths = lepski_bandwidth_batch(estimator, unlabeled);
    std::vector<double> bounds;
    bounds.reserve(bandwidths.size());
    for (double h : bandwidths) bounds.push_back(9.0 * e_S(static_cast<double>(ladder.n), ladder.mu_min, h, ladder.dim));
    const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(bounds.size()))) - 1;
    std::nth_element(bounds.begin(), bounds.begin() + static_cast<std::ptrdiff_t>(rank), bounds.end());
    return std::clamp(bounds[rank], 0.0, 0.5);
}

PluginRegion PluginClassifier::region_of_value(double v) const {
    const double lv = level(v);
    const double g = params_.gamma_hat;
    if (params_.core_enabled) {
        if (lv <= g + kLevelTol) return PluginRegion::Abstain;
        if (lv <= g + params_.band + kLevelTol) return v > 0.5 ? PluginRegion::BoundaryPlus : PluginRegion::BoundaryMinus;
        return v > 0.5 ? PluginRegion::Plus : PluginRegion::Minus;
    }
    if (lv <= params_.band + kLevelTol) return v >= 0.5 ? PluginRegion::BoundaryPlus : PluginRegion::BoundaryMinus;
    return v > 0.5 ? PluginRegion::Plus : PluginRegion::Minus;
}

Decision PluginClassifier::decide_value(double v, double u) const {
    switch (region_of_value(v)) {
        case PluginRegion::Minus: return Decision::Minus;
        case PluginRegion::Plus: return Decision::Plus;
        case PluginRegion::Abstain: return Decision::Abstain;
        case PluginRegion::BoundaryMinus: return u < params_.c_hat ? Decision::Abstain : Decision::Minus;
        case PluginRegion::BoundaryPlus: return u < params_.c_hat ? Decision::Abstain : Decision::Plus;
    }
    return Decision::Abstain;
}

DecisionDistribution PluginClassifier::distribution_of_value(double v) const {
    const double c = params_.c_hat;
    switch (region_of_value(v)) {
        case PluginRegion::Minus: return {1.0, 0.0, 0.0};
        case PluginRegion::Plus: return {0.0, 1.0, 0.0};
        case PluginRegion::Abstain: return {0.0, 0.0, 1.0};
        case PluginRegion::BoundaryMinus: return {1.0 - c, 0.0, c};
        case PluginRegion::BoundaryPlus: return {0.0, 1.0 - c, c};
    }
    return {};
}

}  // namespace abstain
