#pragma once

// Bisection over the abstention cost lambda so that a fixed-cost surrogate
// learner meets a rejection budget delta. Each round trains at the bracket
// midpoint and measures Q = (rejection on the unlabeled set) + alpha_m; a Q
// above delta raises the cost (less abstention), otherwise it is lowered.

#include "abstain/common.hpp"
#include "abstain/surrogate.hpp"

#include <optional>
#include <ostream>
#include <string_view>
#include <utility>

namespace abstain {

struct SearchConfig {
    std::optional<double> alpha_m;                  // default 0.1 / sqrt(m)
    double tol = 0.01;                              // stop when 0 <= delta - Q <= tol
    std::optional<std::pair<double, double>> interval;  // stop when Q lies in [lo, hi]
    std::size_t max_iter = 12;
};

enum class StopReason { IntervalHit, ToleranceHit, MaxIterations };
std::string_view to_string(StopReason r);

struct SearchStep {
    std::size_t iter = 0;  // 1-based
    double lower = 0.0;    // bracket before the update
    double upper = 0.0;
    double lambda = 0.0;
    double rejection = 0.0;  // on the unlabeled set
    double Q = 0.0;
    double objective = 0.0;  // training surrogate objective
};

struct SearchResult {
    double lambda_star = 0.0;
    double Q = 0.0;
    SurrogateModel model;
    std::size_t iterations = 0;
    std::vector<SearchStep> trace;
    StopReason stop_reason = StopReason::MaxIterations;
};

/// Thrown when no round achieved Q <= delta; carries the full trace.
class SearchFailure : public std::runtime_error {
public:
    SearchFailure(const std::string& what, std::vector<SearchStep> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<SearchStep>& trace() const { return trace_; }

private:
    std::vector<SearchStep> trace_;
};

double default_alpha_m(std::size_t m);

SearchResult run_search(const LabeledSet& labeled, const UnlabeledSet& unlabeled, double delta,
                        const SearchConfig& search, const FourierFeatures& features, const SolverConfig& solver);

/// Metrics of the deterministic decision sign(h) if r > 0 else abstain.
Metrics evaluate_search(const SearchResult& result, const LabeledSet& test);

/// CSV with columns iter, lambda, rejection, Q, objective.
void write_trace_csv(std::ostream& out, const std::vector<SearchStep>& trace);

}  // namespace abstain
