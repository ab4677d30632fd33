#include "abstain/search.hpp"

#include <cmath>
#include <cstdio>

namespace abstain {

std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::IntervalHit: return "interval-hit";
        case StopReason::ToleranceHit: return "tolerance-hit";
        case StopReason::MaxIterations: return "max-iterations";
    }
    return "unknown";
}

double default_alpha_m(std::size_t m) {
    if (m == 0) throw std::invalid_argument("default_alpha_m needs m >= 1");
    return 0.1 / std::sqrt(static_cast<double>(m));
}

SearchResult run_search(const LabeledSet& labeled, const UnlabeledSet& unlabeled, double delta,
                        const SearchConfig& search, const FourierFeatures& features, const SolverConfig& solver) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("run_search: delta must lie in (0,1)");
    if (!(search.tol > 0.0)) throw std::invalid_argument("run_search: tol must be positive");
    if (search.max_iter == 0) throw std::invalid_argument("run_search: max_iter must be >= 1");
    if (unlabeled.empty()) throw std::invalid_argument("run_search: empty unlabeled set");
    if (search.interval && search.interval->first > search.interval->second) {
        throw std::invalid_argument("run_search: interval lower end exceeds upper end");
    }
    const double alpha = search.alpha_m.value_or(default_alpha_m(unlabeled.size()));

    SearchResult result;
    std::optional<std::size_t> best;  // index into trace of the feasible Q closest to delta
    double lower = 0.0, upper = 0.5;

    for (std::size_t k = 1; k <= search.max_iter; ++k) {
        const double lambda = 0.5 * (lower + upper);
        FitTrace fit;
        SurrogateModel model = train_fixed_cost(labeled, lambda, features, solver, &fit);
        const double rej = rejection_rate(model, unlabeled);
        const double Q = rej + alpha;
        result.trace.push_back({.iter = k, .lower = lower, .upper = upper, .lambda = lambda, .rejection = rej, .Q = Q,
                                .objective = fit.final_objective});
        result.iterations = k;

        const bool in_interval = search.interval && Q >= search.interval->first && Q <= search.interval->second;
        const bool in_tolerance = delta - Q >= 0.0 && delta - Q <= search.tol;
        if (Q <= delta && (!best || Q > result.trace[*best].Q)) {
            best = result.trace.size() - 1;
            result.model = model;
        }
        if (in_interval || (!search.interval && in_tolerance)) {
            result.lambda_star = lambda;
            result.Q = Q;
            result.model = std::move(model);
            result.stop_reason = in_interval ? StopReason::IntervalHit : StopReason::ToleranceHit;
            return result;
        }
        if (Q <= delta) {
            upper = lambda;
        } else {
            lower = lambda;
        }
    }

    if (!best) {
        throw SearchFailure("run_search: no rejection cost reached Q <= delta = " + std::to_string(delta) + " in " +
                                std::to_string(search.max_iter) + " rounds",
                            result.trace);
    }
    result.lambda_star = result.trace[*best].lambda;
    result.Q = result.trace[*best].Q;
    result.stop_reason = StopReason::MaxIterations;
    return result;
}

Metrics evaluate_search(const SearchResult& result, const LabeledSet& test) {
    return evaluate(result.model, test, 0);
}

void write_trace_csv(std::ostream& out, const std::vector<SearchStep>& trace) {
    out << "iter,lambda,rejection,Q,objective\n";
    char buf[160];
    for (const auto& s : trace) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", s.iter, s.lambda, s.rejection, s.Q, s.objective);
        out << buf;
    }
}

}  // namespace abstain
