#include "abstain/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace abstain {

namespace {

constexpr std::size_t kQuadratureNodes = 100000;
constexpr int kBisectionSteps = 200;
constexpr std::size_t kMaxQuadratureDim = 6;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_unit_cube(std::span<const double> x, std::size_t dim) {
    if (x.size() != dim) throw std::domain_error("point has wrong dimension");
    for (double v : x) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("point outside [0,1]^D");
    }
}

void check_delta(double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in [0,1]");
}

double smooth_nd_eta(const kinds::SmoothNd& k, std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::sin(std::numbers::pi * (v - 0.5));
    return 0.5 + k.amplitude * s / static_cast<double>(k.dim);
}

double two_gaussians_eta(const kinds::TwoGaussians& k, std::span<const double> x) {
    double d0 = 0.0, d1 = 0.0;
    for (double v : x) {
        d0 += (v - 0.3) * (v - 0.3);
        d1 += (v - 0.7) * (v - 0.7);
    }
    const double log_ratio = (d0 - d1) / (2.0 * k.sigma * k.sigma);
    return 1.0 / (1.0 + std::exp(-log_ratio));
}

// Midpoint-rule nodes summarised as (level, min(eta, 1 - eta)), sorted by level.
struct LevelTable {
    std::vector<double> levels;
    std::vector<double> conditional_risk;
    std::vector<double> risk_suffix;  // risk_suffix[i] = sum of conditional_risk[i..]

    double cdf(double gamma) const {  // fraction of nodes with level <= gamma
        auto it = std::upper_bound(levels.begin(), levels.end(), gamma);
        return static_cast<double>(it - levels.begin()) / static_cast<double>(levels.size());
    }
    double risk_from(double gamma) const {  // mean over nodes with level >= gamma
        auto i = static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), gamma) - levels.begin());
        return i == levels.size() ? 0.0 : risk_suffix[i] / static_cast<double>(levels.size());
    }
};

LevelTable build_table(const Problem& p) {
    const std::size_t dim = p.dim();
    if (dim > kMaxQuadratureDim) {
        throw std::invalid_argument("Bayes quantities by quadrature are limited to dimension <= 6");
    }
    auto per_axis = static_cast<std::size_t>(
        std::floor(std::pow(static_cast<double>(kQuadratureNodes), 1.0 / static_cast<double>(dim)) + 1e-9));
    per_axis = std::max<std::size_t>(per_axis, 2);
    std::size_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) total *= per_axis;

    std::vector<std::pair<double, double>> rows(total);
    std::vector<std::size_t> digits(dim, 0);
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            x[d] = (static_cast<double>(digits[d]) + 0.5) / static_cast<double>(per_axis);
        }
        const double e = p.eta(x);
        rows[i] = {level(e), std::min(e, 1.0 - e)};
        for (std::size_t d = dim; d-- > 0;) {
            if (++digits[d] < per_axis) break;
            digits[d] = 0;
        }
    }
    std::sort(rows.begin(), rows.end());
    LevelTable t;
    t.levels.reserve(total);
    t.conditional_risk.reserve(total);
    for (const auto& [l, r] : rows) {
        t.levels.push_back(l);
        t.conditional_risk.push_back(r);
    }
    t.risk_suffix.assign(total, 0.0);
    double acc = 0.0;
    for (std::size_t i = total; i-- > 0;) {
        acc += t.conditional_risk[i];
        t.risk_suffix[i] = acc;
    }
    return t;
}

// sup{ gamma > 0 : F(gamma) <= delta } by bisection on [0, 1/2].
template <class Cdf>
double bisect_threshold(const Cdf& cdf, double delta) {
    if (cdf(0.5) <= delta) return 0.5;
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < kBisectionSteps; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) <= delta) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

// Atom threshold: the smallest level at which the cumulative mass exceeds delta.
double atoms_threshold(const std::vector<Atom>& atoms, double delta) {
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return level(atoms[a].eta) < level(atoms[b].eta); });
    double cumulative = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double lv = level(atoms[order[i]].eta);
        std::size_t j = i;
        while (j < order.size() && level(atoms[order[j]].eta) <= lv + kLevelTol) {
            cumulative += atoms[order[j]].mass;
            ++j;
        }
        if (cumulative > delta + kLevelTol) return lv;
        i = j;
    }
    return 0.5;
}

void validate_atoms(const std::vector<Atom>& atoms) {
    if (atoms.empty()) throw std::invalid_argument("atoms problem needs at least one atom");
    const std::size_t dim = atoms.front().location.size();
    if (dim == 0) throw std::invalid_argument("atom location must be non-empty");
    double total = 0.0;
    for (const Atom& a : atoms) {
        if (a.location.size() != dim) throw std::invalid_argument("atom locations differ in dimension");
        for (double v : a.location) {
            if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("atom location outside [0,1]^D");
        }
        if (!(a.mass > 0.0)) throw std::invalid_argument("atom mass must be positive");
        if (!(a.eta >= 0.0 && a.eta <= 1.0)) throw std::invalid_argument("atom eta must lie in [0,1]");
        total += a.mass;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("atom masses must sum to 1");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        for (std::size_t j = i + 1; j < atoms.size(); ++j) {
            if (atoms[i].location == atoms[j].location) throw std::invalid_argument("atom locations must be distinct");
        }
    }
}

}  // namespace

// --- construction -----------------------------------------------------------

Problem Problem::linear1d() {
    Problem p{kinds::Linear1d{}};
    p.meta_ = {.C0 = 2.0, .rho0 = 1.0, .C1 = 2.0, .rho1 = 1.0, .L = 1.0, .beta = 1.0, .mu_min = 1.0, .mu_max = 1.0};
    return p;
}

Problem Problem::sine1d(int frequency, double amplitude) {
    if (frequency < 1) throw std::invalid_argument("sine1d frequency must be a positive integer");
    if (!(amplitude > 0.0 && amplitude <= 0.5)) throw std::invalid_argument("sine1d amplitude must lie in (0, 1/2]");
    Problem p{kinds::Sine1d{frequency, amplitude}};
    p.meta_.L = 2.0 * std::numbers::pi * frequency * amplitude;
    p.meta_.beta = 1.0;
    p.meta_.mu_min = 1.0;
    p.meta_.mu_max = 1.0;
    return p;
}

Problem Problem::smooth_nd(std::size_t dim, double amplitude) {
    if (dim == 0) throw std::invalid_argument("smooth-nd dimension must be positive");
    if (!(amplitude > 0.0 && amplitude <= 0.5)) throw std::invalid_argument("smooth-nd amplitude must lie in (0, 1/2]");
    Problem p{kinds::SmoothNd{dim, amplitude}};
    p.meta_.L = std::numbers::pi * amplitude / std::sqrt(static_cast<double>(dim));
    p.meta_.beta = 1.0;
    p.meta_.mu_min = 1.0;
    p.meta_.mu_max = 1.0;
    return p;
}

Problem Problem::atoms(std::vector<Atom> atoms) {
    validate_atoms(atoms);
    return Problem{kinds::Atoms{std::move(atoms)}};
}

Problem Problem::two_gaussians(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("two-gaussians sigma must be positive");
    return Problem{kinds::TwoGaussians{sigma}};
}

Problem make_catalog_problem(std::string_view kind, int frequency, double amplitude, std::size_t dim,
                             double sigma) {
    if (kind == "linear1d") return Problem::linear1d();
    if (kind == "sine1d") return Problem::sine1d(frequency, amplitude);
    if (kind == "smooth-nd") return Problem::smooth_nd(dim, amplitude);
    if (kind == "two-gaussians") return Problem::two_gaussians(sigma);
    throw std::invalid_argument("unknown problem kind: " + std::string(kind));
}

std::string Problem::name() const {
    return std::visit(overloaded{
                          [](const kinds::Linear1d&) { return std::string("linear1d"); },
                          [](const kinds::Sine1d&) { return std::string("sine1d"); },
                          [](const kinds::SmoothNd&) { return std::string("smooth-nd"); },
                          [](const kinds::Atoms&) { return std::string("atoms"); },
                          [](const kinds::TwoGaussians&) { return std::string("two-gaussians"); },
                      },
                      kind_);
}

std::size_t Problem::dim() const {
    return std::visit(overloaded{
                          [](const kinds::Linear1d&) -> std::size_t { return 1; },
                          [](const kinds::Sine1d&) -> std::size_t { return 1; },
                          [](const kinds::SmoothNd& k) -> std::size_t { return k.dim; },
                          [](const kinds::Atoms& k) -> std::size_t { return k.atoms.front().location.size(); },
                          [](const kinds::TwoGaussians&) -> std::size_t { return 2; },
                      },
                      kind_);
}

bool Problem::has_bayes() const {
    if (std::holds_alternative<kinds::TwoGaussians>(kind_)) return false;
    return dim() <= kMaxQuadratureDim;
}

std::size_t Problem::atom_at(std::span<const double> x) const {
    const auto& atoms = std::get<kinds::Atoms>(kind_).atoms;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const auto& loc = atoms[i].location;
        if (loc.size() != x.size()) continue;
        bool same = true;
        for (std::size_t d = 0; d < loc.size() && same; ++d) same = std::abs(loc[d] - x[d]) <= kLevelTol;
        if (same) return i;
    }
    throw std::domain_error("point is not an atom location");
}

double Problem::eta(std::span<const double> x) const {
    check_unit_cube(x, dim());
    return std::visit(overloaded{
                          [&](const kinds::Linear1d&) { return x[0]; },
                          [&](const kinds::Sine1d& k) {
                              return 0.5 + k.amplitude * std::sin(2.0 * std::numbers::pi * k.frequency * x[0]);
                          },
                          [&](const kinds::SmoothNd& k) { return smooth_nd_eta(k, x); },
                          [&](const kinds::Atoms& k) { return k.atoms[atom_at(x)].eta; },
                          [&](const kinds::TwoGaussians& k) { return two_gaussians_eta(k, x); },
                      },
                      kind_);
}

// --- sampling ---------------------------------------------------------------

std::vector<double> Problem::sample_x(std::size_t count, Rng& rng) const {
    const std::size_t dim = this->dim();
    std::vector<double> coords;
    coords.reserve(count * dim);
    if (const auto* a = std::get_if<kinds::Atoms>(&kind_)) {
        std::vector<double> cumulative;
        double acc = 0.0;
        for (const Atom& atom : a->atoms) cumulative.push_back(acc += atom.mass);
        for (std::size_t i = 0; i < count; ++i) {
            const double u = uniform01(rng) * acc;
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
            auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
            const auto& loc = a->atoms[idx].location;
            coords.insert(coords.end(), loc.begin(), loc.end());
        }
        return coords;
    }
    for (std::size_t i = 0; i < count * dim; ++i) coords.push_back(uniform01(rng));
    return coords;
}

LabeledSet Problem::sample_labeled(std::size_t n, std::uint64_t seed) const {
    Rng rng = make_rng(seed, Stream::Labeled);
    LabeledSet out;
    out.labels.reserve(n);
    if (const auto* g = std::get_if<kinds::TwoGaussians>(&kind_)) {
        std::vector<double> coords;
        coords.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            const int y = uniform01(rng) < 0.5 ? -1 : 1;
            const double mean = y > 0 ? 0.7 : 0.3;
            for (int d = 0; d < 2; ++d) {
                coords.push_back(std::clamp(mean + g->sigma * standard_normal(rng), 0.0, 1.0));
            }
            out.labels.push_back(y);
        }
        out.points = PointSet(2, std::move(coords));
        return out;
    }
    out.points = PointSet(dim(), sample_x(n, rng));
    for (std::size_t i = 0; i < n; ++i) {
        out.labels.push_back(uniform01(rng) < eta(out.points.point(i)) ? 1 : -1);
    }
    return out;
}

UnlabeledSet Problem::sample_unlabeled(std::size_t m, std::uint64_t seed) const {
    if (std::holds_alternative<kinds::TwoGaussians>(kind_)) {
        // The marginal is a mixture; draw (X, Y) on the unlabeled stream and drop Y.
        LabeledSet s = sample_labeled(m, derive_seed(seed, Stream::Unlabeled));
        return std::move(s.points);
    }
    Rng rng = make_rng(seed, Stream::Unlabeled);
    return PointSet(dim(), sample_x(m, rng));
}

// --- Bayes quantities -------------------------------------------------------

double Problem::level_cdf(double gamma) const {
    return std::visit(overloaded{
                          [&](const kinds::Linear1d&) { return std::clamp(2.0 * gamma, 0.0, 1.0); },
                          [&](const kinds::Atoms& k) {
                              double mass = 0.0;
                              for (const Atom& a : k.atoms) {
                                  if (level(a.eta) <= gamma + kLevelTol) mass += a.mass;
                              }
                              return mass;
                          },
                          [&](const kinds::TwoGaussians&) -> double {
                              throw std::invalid_argument("two-gaussians has no Bayes quantities");
                          },
                          [&](const auto&) { return build_table(*this).cdf(gamma); },
                      },
                      kind_);
}

double bayes_threshold(const Problem& problem, double delta) {
    check_delta(delta);
    if (!problem.has_bayes()) throw std::invalid_argument("problem has no Bayes quantities: " + problem.name());
    return std::visit(overloaded{
                          [&](const kinds::Linear1d&) { return std::min(0.5, delta / 2.0); },
                          [&](const kinds::Atoms& k) { return atoms_threshold(k.atoms, delta); },
                          [&](const auto&) {
                              const LevelTable table = build_table(problem);
                              return bisect_threshold([&](double g) { return table.cdf(g); }, delta);
                          },
                      },
                      problem.kind());
}

AbstainRule bayes_rule(const Problem& problem, double delta) {
    AbstainRule rule{.problem = problem, .delta = delta};
    rule.gamma = bayes_threshold(problem, delta);
    if (const auto* k = std::get_if<kinds::Atoms>(&problem.kind())) {
        for (const Atom& a : k->atoms) {
            const double lv = level(a.eta);
            if (lv < rule.gamma - kLevelTol) {
                rule.delta1 += a.mass;
            } else if (lv <= rule.gamma + kLevelTol) {
                rule.delta2 += a.mass;
            }
        }
        rule.delta2 += rule.delta1;
        const double spread = rule.delta2 - rule.delta1;
        rule.c0 = spread > 0.0 ? std::clamp((delta - rule.delta1) / spread, 0.0, 1.0) : 0.0;
    } else {
        // Continuous level distribution: the boundary sets are P_X-null.
        rule.delta1 = std::min(problem.level_cdf(rule.gamma), delta);
        rule.delta2 = rule.delta1;
        rule.c0 = 0.0;
    }
    return rule;
}

double bayes_risk(const Problem& problem, double delta) {
    const AbstainRule rule = bayes_rule(problem, delta);
    return std::visit(overloaded{
                          [&](const kinds::Linear1d&) { return (0.5 - rule.gamma) * (0.5 - rule.gamma); },
                          [&](const kinds::Atoms& k) {
                              double risk = 0.0;
                              for (const Atom& a : k.atoms) {
                                  const double lv = level(a.eta);
                                  const double cond = std::min(a.eta, 1.0 - a.eta);
                                  if (lv > rule.gamma + kLevelTol) {
                                      risk += a.mass * cond;
                                  } else if (lv >= rule.gamma - kLevelTol) {
                                      risk += (1.0 - rule.c0) * a.mass * cond;
                                  }
                              }
                              return risk;
                          },
                          [&](const auto&) { return build_table(problem).risk_from(rule.gamma); },
                      },
                      problem.kind());
}

std::string_view to_string(Region r) {
    switch (r) {
        case Region::Minus: return "G-1";
        case Region::Plus: return "G+1";
        case Region::Abstain: return "G_abstain";
        case Region::BoundaryPlus: return "dG+1";
        case Region::BoundaryMinus: return "dG-1";
    }
    return "?";
}

Region AbstainRule::region_of_eta(double e) const {
    const double lv = level(e);
    if (lv < gamma - kLevelTol) return Region::Abstain;
    if (lv <= gamma + kLevelTol) return e >= 0.5 ? Region::BoundaryPlus : Region::BoundaryMinus;
    return e > 0.5 ? Region::Plus : Region::Minus;
}

Region AbstainRule::region(std::span<const double> x) const { return region_of_eta(problem.eta(x)); }

Decision AbstainRule::decide(std::span<const double> x, double u) const {
    switch (region(x)) {
        case Region::Minus: return Decision::Minus;
        case Region::Plus: return Decision::Plus;
        case Region::Abstain: return Decision::Abstain;
        case Region::BoundaryPlus: return u < c0 ? Decision::Abstain : Decision::Plus;
        case Region::BoundaryMinus: return u < c0 ? Decision::Abstain : Decision::Minus;
    }
    return Decision::Abstain;
}

DecisionDistribution AbstainRule::distribution(std::span<const double> x) const {
    switch (region(x)) {
        case Region::Minus: return {1.0, 0.0, 0.0};
        case Region::Plus: return {0.0, 1.0, 0.0};
        case Region::Abstain: return {0.0, 0.0, 1.0};
        case Region::BoundaryPlus: return {0.0, 1.0 - c0, c0};
        case Region::BoundaryMinus: return {1.0 - c0, 0.0, c0};
    }
    return {};
}

Decision classify(const AbstainRule& rule, std::span<const double> x, double u) { return rule.decide(x, u); }

GreedyResult greedy_oracle(const Problem& problem, double delta) {
    const auto* k = std::get_if<kinds::Atoms>(&problem.kind());
    if (k == nullptr) throw std::invalid_argument("greedy_oracle requires a finite-support problem");
    check_delta(delta);
    const auto& atoms = k->atoms;
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return level(atoms[a].eta) < level(atoms[b].eta); });
    GreedyResult out;
    out.abstain_fraction.assign(atoms.size(), 0.0);
    double budget = delta;
    for (std::size_t idx : order) {
        const Atom& a = atoms[idx];
        const double fraction = budget <= 0.0 ? 0.0 : std::min(1.0, budget / a.mass);
        out.abstain_fraction[idx] = fraction;
        budget -= fraction * a.mass;
        out.abstention += fraction * a.mass;
        out.risk += (1.0 - fraction) * a.mass * std::min(a.eta, 1.0 - a.eta);
    }
    return out;
}

// --- CSV loading ------------------------------------------------------------

Problem parse_atoms_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    std::vector<Atom> atoms;
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument("atoms CSV line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (columns == 0) {  // header
            columns = cells.size();
            if (columns < 3) fail("need at least one location column plus mass and eta");
            continue;
        }
        if (cells.size() != columns) fail("expected " + std::to_string(columns) + " columns");
        std::vector<double> values;
        for (auto& c : cells) {
            const auto first = c.find_first_not_of(" \t");
            const auto last = c.find_last_not_of(" \t");
            if (first == std::string::npos) fail("empty cell");
            std::string_view v(c.data() + first, last - first + 1);
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
            if (ec != std::errc{} || ptr != v.data() + v.size()) fail("not a number: " + std::string(v));
            values.push_back(value);
        }
        Atom a;
        a.location.assign(values.begin(), values.end() - 2);
        a.mass = values[values.size() - 2];
        a.eta = values.back();
        atoms.push_back(std::move(a));
    }
    if (columns == 0) throw std::invalid_argument("atoms CSV: missing header");
    return Problem::atoms(std::move(atoms));
}

}  // namespace abstain
