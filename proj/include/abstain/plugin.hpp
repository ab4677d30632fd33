#pragma once

// Randomized plug-in abstaining classifier.
//
// Given an estimate eta_hat from labeled data, m unlabeled points fix the
// abstention core {|eta_hat - 1/2| <= gamma_hat} with empirical mass at most
// delta - a_m, and two boundary bands of width `band` just outside it on which
// the classifier abstains with probability c_hat.

#include "abstain/common.hpp"
#include "abstain/histogram.hpp"

#include <optional>

namespace abstain {

/// scale * sqrt(72 ln(4m) / m), clipped to [0, 1].
double slack_a_m(std::size_t m, double scale);

/// Largest gamma in {0} u {|v - 1/2|} whose empirical core mass
/// #{|v - 1/2| <= gamma} / m is at most delta - a_m; 0 when none qualifies.
double estimate_threshold(std::span<const double> eta_hat_values, double delta, double a_m);

enum class PluginRegion { Minus, Plus, Abstain, BoundaryMinus, BoundaryPlus };

class PluginClassifier {
public:
    struct Parameters {
        double delta = 0.0;
        double a_m = 0.0;
        double gamma_hat = 0.0;
        double band = 0.0;
        double c_hat = 0.0;
        double p1_hat = 0.0;
        double p2_hat = 0.0;
        /// False when even gamma = 0 exceeds the budget (atoms of eta_hat at
        /// exactly 1/2). The core is then empty and those points join the
        /// +1 boundary band.
        bool core_enabled = true;
        bool operator==(const Parameters&) const = default;
    };

    PluginClassifier() = default;
    PluginClassifier(HistogramEstimator estimator, Parameters params)
        : estimator_(std::move(estimator)), params_(params) {}

    const HistogramEstimator& estimator() const { return estimator_; }
    const Parameters& parameters() const { return params_; }

    PluginRegion region_of_value(double eta_hat) const;
    Decision decide_value(double eta_hat, double u) const;
    DecisionDistribution distribution_of_value(double eta_hat) const;

    PluginRegion region(std::span<const double> x) const { return region_of_value(estimator_.predict_eta(x)); }
    Decision decide(std::span<const double> x, double u) const { return decide_value(estimator_.predict_eta(x), u); }
    DecisionDistribution distribution(std::span<const double> x) const {
        return distribution_of_value(estimator_.predict_eta(x));
    }

    bool operator==(const PluginClassifier&) const = default;

private:
    HistogramEstimator estimator_;
    Parameters params_;
};

/// Threshold, bands and c_hat from eta_hat evaluated on the unlabeled sample.
/// When delta - a_m <= 0 the classifier never abstains (band and c_hat are 0).
PluginClassifier::Parameters plugin_parameters(std::span<const double> eta_hat_values, double delta, double a_m,
                                               double band);

PluginClassifier build(const HistogramEstimator& estimator, const UnlabeledSet& unlabeled, double delta, double a_m,
                       double band);

/// 2 b_n when smoothness is known; otherwise the 90th percentile over the
/// unlabeled points of 9 e_S(h_x), clipped to [0, 1/2].
double default_band(const HistogramEstimator& estimator, const UnlabeledSet& unlabeled);

}  // namespace abstain
