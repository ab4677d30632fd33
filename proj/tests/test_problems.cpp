#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abstain/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace abstain;

namespace {

const std::vector<double> kA{0.1}, kB{0.5}, kC{0.9};

Problem three_atoms() {
    return Problem::atoms({{kA, 1.0 / 3, 0.5}, {kB, 1.0 / 3, 0.9}, {kC, 1.0 - 2.0 / 3, 0.1}});
}

// Random finite-support problem with masses summing to 1 and levels that
// frequently coincide (eta drawn from a small grid) to exercise ties.
Problem random_atoms(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 12), grid(0, 10);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    const int k = count(rng);
    std::vector<double> w(static_cast<std::size_t>(k));
    for (double& v : w) v = u(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<Atom> atoms;
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
        const double mass = i + 1 == k ? 1.0 - acc : w[static_cast<std::size_t>(i)] / total;
        acc += mass;
        const double eta = (rng() % 2 == 0) ? grid(rng) / 10.0 : u(rng);
        atoms.push_back({{(i + 0.5) / k}, mass, std::clamp(eta, 0.0, 1.0)});
    }
    return Problem::atoms(std::move(atoms));
}

// Independent risk of an arbitrary randomized rule on atoms: abstain with
// probability a_i, otherwise predict +1 with probability p_i.
double rule_risk(const std::vector<Atom>& atoms, const std::vector<double>& a, const std::vector<double>& p) {
    double r = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        r += atoms[i].mass * (1.0 - a[i]) * (p[i] * (1.0 - atoms[i].eta) + (1.0 - p[i]) * atoms[i].eta);
    }
    return r;
}

// sine1d: |eta - 1/2| = A |sin(2 pi k x)|, so F(g) = (2/pi) asin(g/A) and the
// optimal risk has a closed form in u0 = asin(g/A).
double sine_threshold(double A, double delta) { return A * std::sin(std::numbers::pi * delta / 2.0); }
double sine_risk(double A, double delta) {
    const double u0 = std::asin(sine_threshold(A, delta) / A);
    return (2.0 / std::numbers::pi) * (0.5 * (std::numbers::pi / 2.0 - u0) - A * std::cos(u0));
}

}  // namespace

TEST_CASE("eta on the catalog") {
    const auto p = Problem::linear1d();
    CHECK(p.eta(std::vector<double>{0.3}) == doctest::Approx(0.3));
    CHECK(p.eta(std::vector<double>{0.5}) == doctest::Approx(0.5));
    CHECK(three_atoms().eta(kB) == 0.9);
    CHECK_THROWS_AS(p.eta(std::vector<double>{1.2}), std::domain_error);
    CHECK_THROWS_AS(three_atoms().eta(std::vector<double>{0.3}), std::domain_error);
}

TEST_CASE("sampling: label balance, atom masses, determinism") {
    const auto lin = Problem::linear1d();
    const auto s = lin.sample_labeled(100000, 7);
    const double pos = static_cast<double>(std::count(s.labels.begin(), s.labels.end(), 1)) / 1e5;
    CHECK(std::abs(pos - 0.5) <= 0.01);
    CHECK(s == lin.sample_labeled(100000, 7));
    CHECK(!(s == lin.sample_labeled(100000, 8)));

    const auto atoms = three_atoms();
    const auto u = atoms.sample_unlabeled(100000, 3);
    std::size_t at_a = 0;
    for (std::size_t i = 0; i < u.size(); ++i) at_a += u.point(i)[0] == kA[0];
    CHECK(std::abs(static_cast<double>(at_a) / 1e5 - 1.0 / 3) <= 0.01);

    // Labeled and unlabeled draws come from different streams.
    const auto l = lin.sample_labeled(50, 11);
    const auto ul = lin.sample_unlabeled(50, 11);
    CHECK(!(l.points == ul));
}

TEST_CASE("bayes threshold spot values") {
    CHECK(bayes_threshold(Problem::linear1d(), 0.2) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(bayes_threshold(Problem::linear1d(), 1e-12) <= 1e-9);
    CHECK(std::abs(bayes_threshold(three_atoms(), 0.5) - 0.4) <= 1e-12);
}

TEST_CASE("bayes rule on the three-atom problem") {
    const auto rule = bayes_rule(three_atoms(), 0.5);
    CHECK(std::abs(rule.gamma - 0.4) <= 1e-12);
    CHECK(rule.region(kA) == Region::Abstain);
    CHECK(rule.region(kB) == Region::BoundaryPlus);
    CHECK(rule.region(kC) == Region::BoundaryMinus);
    CHECK(std::abs(rule.c0 - 0.25) <= 1e-12);
    CHECK(std::abs(rule.abstention() - 0.5) <= 1e-12);

    // Budget exactly equal to the strict-core mass needs no randomization.
    const auto exact = bayes_rule(three_atoms(), 1.0 / 3);
    CHECK(exact.c0 == 0.0);
}

TEST_CASE("bayes rule on linear1d") {
    const auto rule = bayes_rule(Problem::linear1d(), 0.2);
    CHECK(rule.c0 == 0.0);
    CHECK(rule.region(std::vector<double>{0.45}) == Region::Abstain);
    CHECK(rule.region(std::vector<double>{0.59}) == Region::Abstain);
    CHECK(rule.region(std::vector<double>{0.39}) == Region::Minus);
    CHECK(rule.region(std::vector<double>{0.61}) == Region::Plus);
}

TEST_CASE("bayes risk spot values") {
    CHECK(std::abs(bayes_risk(Problem::linear1d(), 0.2) - 0.16) <= 1e-10);
    CHECK(std::abs(bayes_risk(Problem::linear1d(), 0.0) - 0.25) <= 1e-10);
    CHECK(std::abs(bayes_risk(three_atoms(), 0.5) - 0.05) <= 1e-12);
}

TEST_CASE("sine1d matches its closed form") {
    // sine1d goes through the 1e5-node quadrature table; each of the 4k level
    // crossings shifts the tabulated cdf by up to one node mass.
    for (double A : {0.1, 0.25, 0.5}) {
        for (double delta : {0.05, 0.3, 0.7}) {
            const auto p = Problem::sine1d(2, A);
            CHECK(std::abs(bayes_threshold(p, delta) - sine_threshold(A, delta)) <= 1e-4);
            CHECK(std::abs(bayes_risk(p, delta) - sine_risk(A, delta)) <= 1e-4);
        }
    }
}

TEST_CASE("greedy oracle spot values") {
    const auto p = three_atoms();
    CHECK(std::abs(greedy_oracle(p, 0.5).risk - 0.05) <= 1e-12);
    CHECK(greedy_oracle(p, 1.0).risk <= 1e-15);
    CHECK(std::abs(greedy_oracle(p, 0.0).risk - (1.0 / 3) * 0.5 - (1.0 / 3) * 0.1 - (1.0 / 3) * 0.1) <= 1e-12);
}

TEST_CASE("classify on boundary sets") {
    const auto rule = bayes_rule(three_atoms(), 0.5);
    CHECK(classify(rule, kB, 0.1) == Decision::Abstain);
    CHECK(classify(rule, kB, 0.9) == Decision::Plus);
    CHECK(classify(rule, kC, 0.1) == Decision::Abstain);
    CHECK(classify(rule, kC, 0.9) == Decision::Minus);
    CHECK(classify(rule, kA, 0.99) == Decision::Abstain);

    AbstainRule no_random = rule;
    no_random.c0 = 0.0;
    CHECK(classify(no_random, kB, 0.0) == Decision::Plus);

    const auto lin = bayes_rule(Problem::linear1d(), 0.2);
    for (double u : {0.0, 0.5, 0.999}) CHECK(classify(lin, std::vector<double>{0.9}, u) == Decision::Plus);
}

TEST_CASE("property: exact budget on atoms") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ud(0.01, 0.99);
    int checked = 0;
    for (int t = 0; t < 300; ++t) {
        const auto p = random_atoms(rng);
        const double delta = ud(rng);
        const auto rule = bayes_rule(p, delta);
        if (rule.delta1 < delta && delta <= rule.delta2) {
            CHECK(std::abs(rule.abstention() - delta) <= 1e-12);
            ++checked;
        }
        CHECK(rule.abstention() <= delta + 1e-12);
    }
    CHECK(checked > 50);
}

TEST_CASE("property: Bayes risk equals the greedy optimum") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const auto p = random_atoms(rng);
        const double delta = ud(rng);
        CHECK(std::abs(bayes_risk(p, delta) - greedy_oracle(p, delta).risk) <= 1e-9);
    }
}

TEST_CASE("property: no feasible randomized rule beats the Bayes rule") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const auto p = random_atoms(rng);
        const auto& atoms = std::get<kinds::Atoms>(p.kind()).atoms;
        const double delta = ud(rng);
        std::vector<double> a(atoms.size()), pr(atoms.size());
        double used = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            a[i] = ud(rng);
            pr[i] = ud(rng);
            used += atoms[i].mass * a[i];
        }
        if (used > delta) {
            for (double& v : a) v *= delta / used;
        }
        CHECK(rule_risk(atoms, a, pr) >= bayes_risk(p, delta) - 1e-9);
    }
}

TEST_CASE("property: risk is non-increasing in delta") {
    std::vector<Problem> problems{Problem::linear1d(), Problem::sine1d(1, 0.3), Problem::smooth_nd(2, 0.4),
                                  three_atoms()};
    for (const auto& p : problems) {
        double prev = bayes_risk(p, 0.0);
        for (int i = 1; i <= 19; ++i) {
            const double r = bayes_risk(p, 0.05 * i);
            CHECK(r <= prev + 1e-12);
            prev = r;
        }
    }
}

TEST_CASE("property: strict core mass within budget") {
    std::vector<Problem> problems{Problem::linear1d(), Problem::sine1d(3, 0.5), Problem::smooth_nd(3, 0.3),
                                  three_atoms()};
    for (const auto& p : problems) {
        for (int i = 1; i <= 19; ++i) {
            const double delta = 0.05 * i;
            const auto rule = bayes_rule(p, delta);
            CHECK(rule.delta1 <= delta + 1e-9);
            CHECK(rule.gamma >= 0.0);
            CHECK(rule.gamma <= 0.5);
        }
    }
}

TEST_CASE("regions partition the support") {
    const auto rule = bayes_rule(Problem::sine1d(1, 0.4), 0.3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        const std::vector<double> x{ux(rng)};
        const auto d = rule.distribution(x);
        CHECK(d.minus + d.plus + d.abstain == doctest::Approx(1.0));
    }
}

TEST_CASE("atoms CSV") {
    const auto p = parse_atoms_csv("x,mass,eta\n0.1,0.25,0.5\n0.5,0.25,0.9\n0.9,0.5,0.1\n");
    CHECK(p.is_atoms());
    CHECK(p.eta(std::vector<double>{0.5}) == 0.9);
    CHECK_THROWS(parse_atoms_csv("x,mass,eta\n0.1,0.5,0.5\n0.5,0.25,0.9\n"));
    CHECK_THROWS(parse_atoms_csv("x,mass,eta\n0.1,0.5,0.5\n0.1,0.5,0.9\n"));
    CHECK_THROWS(parse_atoms_csv("x,mass,eta\n0.1,0.5,1.5\n0.3,0.5,0.9\n"));
}
