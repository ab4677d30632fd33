#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abstain/problems.hpp"
#include "abstain/search.hpp"

#include <cmath>
#include <sstream>

using namespace abstain;

namespace {

struct Fixture {
    Problem problem = Problem::two_gaussians();
    LabeledSet labeled = problem.sample_labeled(600, 1);
    UnlabeledSet unlabeled = problem.sample_unlabeled(600, 2);
    FourierFeatures features = FourierFeatures::sample(2, 40, 0.3, 3);
    SolverConfig solver = [] {
        SolverConfig s;
        s.iterations = 400;
        return s;
    }();
};

void check_trace(const SearchResult& r) {
    REQUIRE(r.trace.size() == r.iterations);
    double lower = 0.0, upper = 0.5;
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        const auto& s = r.trace[k];
        CHECK(s.iter == k + 1);
        CHECK(s.lower == lower);
        CHECK(s.upper == upper);
        CHECK(s.lambda == 0.5 * (lower + upper));
        CHECK(s.lambda > lower);
        CHECK(s.lambda < upper);
        CHECK(upper - lower == doctest::Approx(0.5 * std::pow(0.5, static_cast<double>(k))));
        // The next bracket keeps one end and moves the other to lambda.
        if (k + 1 < r.trace.size()) {
            const auto& n = r.trace[k + 1];
            CHECK((n.lower == s.lambda || n.upper == s.lambda));
            lower = n.lower;
            upper = n.upper;
        }
    }
}

}  // namespace

TEST_CASE("alpha default") {
    CHECK(default_alpha_m(10000) == doctest::Approx(0.001));
    CHECK(default_alpha_m(2000) == doctest::Approx(0.1 / std::sqrt(2000.0)));
    CHECK_THROWS(default_alpha_m(0));
}

TEST_CASE("search brackets and stops within budget") {
    Fixture fx;
    const double delta = 0.3;
    SearchConfig cfg;
    const auto r = run_search(fx.labeled, fx.unlabeled, delta, cfg, fx.features, fx.solver);
    REQUIRE(!r.trace.empty());
    CHECK(r.trace.front().lambda == 0.25);
    CHECK(r.iterations <= cfg.max_iter);
    CHECK(r.Q <= delta);
    check_trace(r);
    for (std::size_t k = 0; k + 1 < r.trace.size(); ++k) {
        const auto& s = r.trace[k];
        const auto& n = r.trace[k + 1];
        if (s.Q <= delta) {
            CHECK(n.upper == s.lambda);
            CHECK(n.lower == s.lower);
        } else {
            CHECK(n.lower == s.lambda);
            CHECK(n.upper == s.upper);
        }
        const double alpha = default_alpha_m(fx.unlabeled.size());
        CHECK(s.Q == doctest::Approx(s.rejection + alpha).epsilon(1e-14));
    }
    if (r.stop_reason == StopReason::ToleranceHit) {
        CHECK(delta - r.Q >= 0.0);
        CHECK(delta - r.Q <= cfg.tol);
        CHECK(r.lambda_star == r.trace.back().lambda);
    }
    CHECK(rejection_rate(r.model, fx.unlabeled) + default_alpha_m(fx.unlabeled.size()) ==
          doctest::Approx(r.Q).epsilon(1e-14));

    const auto again = run_search(fx.labeled, fx.unlabeled, delta, cfg, fx.features, fx.solver);
    CHECK(again.model == r.model);
    CHECK(again.iterations == r.iterations);

    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    CHECK(csv.str().rfind("iter,lambda,rejection,Q,objective\n", 0) == 0);
}

TEST_CASE("interval stop") {
    Fixture fx;
    SearchConfig cfg;
    cfg.interval = std::make_pair(0.0, 1.0);
    const auto r = run_search(fx.labeled, fx.unlabeled, 0.3, cfg, fx.features, fx.solver);
    CHECK(r.iterations == 1);
    CHECK(r.stop_reason == StopReason::IntervalHit);
    CHECK(to_string(r.stop_reason) == "interval-hit");
    CHECK(r.lambda_star == 0.25);
}

TEST_CASE("max-iterations returns the feasible round closest to the budget") {
    Fixture fx;
    SearchConfig cfg;
    cfg.tol = 1e-9;
    cfg.max_iter = 4;
    const auto r = run_search(fx.labeled, fx.unlabeled, 0.3, cfg, fx.features, fx.solver);
    if (r.stop_reason == StopReason::MaxIterations) {
        CHECK(r.iterations == 4);
        double best = -1.0;
        for (const auto& s : r.trace) {
            if (s.Q <= 0.3) best = std::max(best, s.Q);
        }
        CHECK(r.Q == best);
        CHECK(to_string(r.stop_reason) == "max-iterations");
    }
    CHECK(r.Q <= 0.3);
}

TEST_CASE("failure carries the trace") {
    Fixture fx;
    SearchConfig cfg;
    cfg.alpha_m = 0.5;
    cfg.max_iter = 3;
    try {
        run_search(fx.labeled, fx.unlabeled, 0.1, cfg, fx.features, fx.solver);
        FAIL("expected SearchFailure");
    } catch (const SearchFailure& e) {
        CHECK(e.trace().size() == 3);
        for (const auto& s : e.trace()) CHECK(s.Q > 0.1);
    }
}

TEST_CASE("argument checks") {
    Fixture fx;
    SearchConfig cfg;
    CHECK_THROWS(run_search(fx.labeled, fx.unlabeled, 0.0, cfg, fx.features, fx.solver));
    CHECK_THROWS(run_search(fx.labeled, fx.unlabeled, 1.0, cfg, fx.features, fx.solver));
    cfg.max_iter = 0;
    CHECK_THROWS(run_search(fx.labeled, fx.unlabeled, 0.3, cfg, fx.features, fx.solver));
    cfg.max_iter = 12;
    CHECK_THROWS(run_search(fx.labeled, PointSet(2), 0.3, cfg, fx.features, fx.solver));
}

TEST_CASE("evaluate of an always-abstaining model") {
    const auto f = FourierFeatures::from_parameters(2, 1.0, {0.0, 0.0}, {0.0});
    SearchResult r;
    r.model = SurrogateModel(f, {{0.0}, 1.0}, {{0.0}, -1.0});
    Fixture fx;
    const auto m = evaluate_search(r, fx.labeled);
    CHECK(m.rejection_rate == 1.0);
    CHECK(m.risk == 0.0);
}
