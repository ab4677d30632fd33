#include "abstain/harness.hpp"

#include "abstain/histogram.hpp"
#include "abstain/model_io.hpp"
#include "abstain/plugin.hpp"
#include "abstain/svg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

namespace abstain {

using nlohmann::json;

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Plugin: return "plugin";
        case Algorithm::Search: return "search";
        case Algorithm::Constrained: return "constrained";
        case Algorithm::BayesOracle: return "bayes-oracle";
    }
    return "unknown";
}

namespace {

Algorithm parse_algorithm(const std::string& s) {
    if (s == "plugin") return Algorithm::Plugin;
    if (s == "search") return Algorithm::Search;
    if (s == "constrained") return Algorithm::Constrained;
    if (s == "bayes-oracle") return Algorithm::BayesOracle;
    throw ConfigError("unknown algorithm '" + s + "' (expected plugin, search, constrained, bayes-oracle)");
}

// --- config parsing -----------------------------------------------------------------

class Reader {
public:
    explicit Reader(const json& j) : j_(j) {}

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("key '") + key + "': wrong type");
        }
    }
    template <class T>
    void get(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return;
        T v{};
        get(key, v);
        out = v;
    }
    const json* raw(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    void reject_unknown() const {
        for (const auto& [k, _] : j_.items()) {
            if (!seen_.contains(k)) throw ConfigError("unknown config key '" + k + "'");
        }
    }

private:
    const json& j_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    require(j.is_object(), "config must be a JSON object");
    RunConfig c;
    Reader r(j);

    int version = 0;
    r.get("format_version", version);
    require(j.contains("format_version"), "config needs \"format_version\"");
    require(version == kConfigFormatVersion, "unsupported config format_version " + std::to_string(version));

    r.get("problem", c.problem);
    r.get("frequency", c.frequency);
    r.get("amplitude", c.amplitude);
    r.get("dim", c.dim);
    r.get("gaussian_sigma", c.gaussian_sigma);
    r.get("atoms", c.atoms);
    r.get("dataset", c.dataset);
    r.get("dataset_format", c.dataset_format);
    r.get("label_column", c.label_column);
    if (const json* lm = r.raw("label_map")) {
        if (lm->is_string() && *lm == "auto") {
            c.label_map.mode = LabelMap::Mode::Auto;
        } else if (lm->is_string() && *lm == "parity") {
            c.label_map.mode = LabelMap::Mode::Parity;
        } else if (lm->is_object()) {
            c.label_map.mode = LabelMap::Mode::Explicit;
            for (const auto& [k, v] : lm->items()) {
                require(v.is_number_integer() && (v == 1 || v == -1), "label_map values must be -1 or +1");
                c.label_map.mapping[k] = v.get<int>();
            }
        } else {
            throw ConfigError("label_map must be \"auto\", \"parity\" or an object of raw label -> -1/+1");
        }
    }
    std::vector<double> fractions;
    r.get("fractions", fractions);
    if (!fractions.empty()) {
        require(fractions.size() == 3, "fractions needs three values (labeled, unlabeled, test)");
        std::copy(fractions.begin(), fractions.end(), c.fractions.begin());
    }

    std::vector<std::string> algorithms;
    r.get("algorithms", algorithms);
    if (j.contains("algorithms")) {
        c.algorithms.clear();
        for (const auto& a : algorithms) c.algorithms.push_back(parse_algorithm(a));
    }
    r.get("deltas", c.deltas);
    r.get("seeds", c.seeds);
    r.get("seed_base", c.seed_base);
    r.get("n", c.n);
    r.get("m", c.m);
    r.get("n_test", c.n_test);
    r.get("slack_scale", c.slack_scale);
    r.get("band", c.band);
    r.get("mu_min", c.mu_min);
    r.get("lepski_scale", c.lepski_scale);
    r.get("features", c.features);
    r.get("rff_sigma", c.rff_sigma);
    r.get("iterations", c.solver.iterations);
    r.get("step", c.solver.step);
    r.get("l2", c.solver.l2);
    r.get("grid_search", c.solver.grid_search);
    r.get("tolerance", c.solver.tolerance);
    r.get("nu_max", c.solver.nu_max);
    r.get("bisection_steps", c.solver.bisection_steps);
    r.get("warm_iterations", c.solver.warm_iterations);
    r.get("c_relax", c.c_relax);
    r.get("alpha", c.alpha);
    r.get("alpha_m", c.search.alpha_m);
    r.get("tol", c.search.tol);
    r.get("max_iter", c.search.max_iter);
    std::vector<double> interval;
    r.get("interval", interval);
    if (!interval.empty()) {
        require(interval.size() == 2 && interval[0] <= interval[1], "interval must be [lo, hi] with lo <= hi");
        c.search.interval = std::make_pair(interval[0], interval[1]);
    }
    r.get("n_list", c.n_list);
    r.get("save_models", c.save_models);
    r.get("svg", c.svg);
    r.reject_unknown();

    // validation
    const int sources = !c.problem.empty() + !c.atoms.empty() + !c.dataset.empty();
    require(sources == 1, "exactly one of \"problem\", \"atoms\", \"dataset\" must be set");
    require(!c.algorithms.empty(), "algorithms must not be empty");
    require(!c.deltas.empty(), "deltas must not be empty");
    for (double d : c.deltas) require(d > 0.0 && d < 1.0, "every delta must lie in (0,1)");
    require(!c.seeds.empty(), "seeds must not be empty");
    require(c.n >= 1 && c.m >= 2 && c.n_test >= 1, "need n >= 1, m >= 2, n_test >= 1");
    require(c.slack_scale >= 0.0, "slack_scale must be non-negative");
    require(!c.band || *c.band >= 0.0, "band must be non-negative");
    require(c.mu_min > 0.0, "mu_min must be positive");
    require(c.lepski_scale > 0.0, "lepski_scale must be positive");
    require(c.features >= 1, "features must be >= 1");
    require(!c.rff_sigma || *c.rff_sigma > 0.0, "rff_sigma must be positive");
    try {
        c.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    require(c.c_relax >= 1.0 && c.c_relax <= 2.0, "c_relax must lie in [1,2]");
    require(!c.alpha || *c.alpha >= 0.0, "alpha must be non-negative");
    require(!c.search.alpha_m || *c.search.alpha_m >= 0.0, "alpha_m must be non-negative");
    require(c.search.tol > 0.0, "tol must be positive");
    require(c.search.max_iter >= 1, "max_iter must be >= 1");
    for (double f : c.fractions) require(f > 0.0, "fractions must be positive");
    require(std::abs(c.fractions[0] + c.fractions[1] + c.fractions[2] - 1.0) <= 1e-9, "fractions must sum to 1");
    require(c.dataset_format.empty() || c.dataset_format == "libsvm" || c.dataset_format == "csv",
            "dataset_format must be libsvm or csv");
    if (c.synthetic()) {
        const Problem p = config_problem(c);
        const bool oracle = std::find(c.algorithms.begin(), c.algorithms.end(), Algorithm::BayesOracle) != c.algorithms.end();
        require(!oracle || p.has_bayes(), "bayes-oracle needs a problem with a known Bayes rule");
    } else {
        require(std::find(c.algorithms.begin(), c.algorithms.end(), Algorithm::BayesOracle) == c.algorithms.end(),
                "bayes-oracle needs a synthetic problem");
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text);
}

std::string config_echo(const RunConfig& c) {
    json j = {{"format_version", kConfigFormatVersion}};
    if (!c.problem.empty()) {
        j["problem"] = c.problem;
        j["frequency"] = c.frequency;
        j["amplitude"] = c.amplitude;
        j["dim"] = c.dim;
        j["gaussian_sigma"] = c.gaussian_sigma;
    }
    if (!c.atoms.empty()) j["atoms"] = c.atoms;
    if (!c.dataset.empty()) {
        j["dataset"] = c.dataset;
        j["dataset_format"] = c.dataset_format;
        j["label_column"] = c.label_column;
        j["fractions"] = c.fractions;
        j["mu_min"] = c.mu_min;
        switch (c.label_map.mode) {
            case LabelMap::Mode::Auto: j["label_map"] = "auto"; break;
            case LabelMap::Mode::Parity: j["label_map"] = "parity"; break;
            case LabelMap::Mode::Explicit: j["label_map"] = c.label_map.mapping; break;
        }
    }
    json algs = json::array();
    for (auto a : c.algorithms) algs.push_back(std::string(to_string(a)));
    j["algorithms"] = algs;
    j["deltas"] = c.deltas;
    j["seeds"] = c.seeds;
    j["seed_base"] = c.seed_base;
    j["n"] = c.n;
    j["m"] = c.m;
    j["n_test"] = c.n_test;
    j["slack_scale"] = c.slack_scale;
    j["lepski_scale"] = c.lepski_scale;
    j["band"] = c.band ? json(*c.band) : json(nullptr);
    j["features"] = c.features;
    j["rff_sigma"] = c.rff_sigma ? json(*c.rff_sigma) : json(nullptr);
    j["iterations"] = c.solver.iterations;
    j["step"] = c.solver.step;
    j["l2"] = c.solver.l2;
    j["grid_search"] = c.solver.grid_search;
    j["tolerance"] = c.solver.tolerance;
    j["nu_max"] = c.solver.nu_max;
    j["bisection_steps"] = c.solver.bisection_steps;
    j["warm_iterations"] = c.solver.warm_iterations;
    j["c_relax"] = c.c_relax;
    j["alpha"] = c.alpha ? json(*c.alpha) : json(nullptr);
    j["alpha_m"] = c.search.alpha_m ? json(*c.search.alpha_m) : json(nullptr);
    j["tol"] = c.search.tol;
    j["max_iter"] = c.search.max_iter;
    if (c.search.interval) j["interval"] = {c.search.interval->first, c.search.interval->second};
    if (!c.n_list.empty()) j["n_list"] = c.n_list;
    j["save_models"] = c.save_models;
    j["svg"] = c.svg;
    return j.dump(1);
}

Problem config_problem(const RunConfig& c) {
    if (!c.atoms.empty()) {
        try {
            return parse_atoms_csv(read_file(c.atoms));
        } catch (const std::exception& e) {
            throw ConfigError("atoms file: " + std::string(e.what()));
        }
    }
    if (c.problem.empty()) throw ConfigError("dataset runs have no synthetic problem");
    try {
        return make_catalog_problem(c.problem, c.frequency, c.amplitude, c.dim, c.gaussian_sigma);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

// --- runs -------------------------------------------------------------------------------

namespace {

struct RunData {
    LabeledSet labeled;
    UnlabeledSet unlabeled;
    LabeledSet test;
    std::optional<MinMaxTransform> normalizer;
};

RunData synthetic_data(const Problem& p, std::size_t n, std::size_t m, std::size_t n_test, std::uint64_t seed) {
    return {p.sample_labeled(n, seed), p.sample_unlabeled(m, seed),
            p.sample_labeled(n_test, derive_seed(seed, Stream::Test)), std::nullopt};
}

RawDataset load_dataset(const RunConfig& c) {
    const std::string text = read_file(c.dataset);
    std::string format = c.dataset_format;
    if (format.empty()) {
        const auto ext = std::filesystem::path(c.dataset).extension().string();
        format = ext == ".csv" ? "csv" : "libsvm";
    }
    return format == "csv" ? parse_csv(text, c.label_column) : parse_libsvm(text);
}

std::optional<Smoothness> problem_smoothness(const Problem& p) {
    const auto& meta = p.meta();
    if (meta.L && meta.beta) return Smoothness{*meta.L, *meta.beta};
    return std::nullopt;
}

std::string model_name(Algorithm a, double delta, std::uint64_t seed) {
    return "model_" + std::string(to_string(a)) + "_d" + fmt(delta) + "_s" + std::to_string(seed) + ".json";
}

struct Cell {
    Algorithm algorithm;
    double delta;
    std::uint64_t seed;
};

RunRow run_cell(const RunConfig& c, const Cell& cell, const RunData& data, const Problem* problem,
                const std::filesystem::path* model_dir) {
    RunRow row;
    row.algorithm = cell.algorithm;
    row.delta = cell.delta;
    row.seed = cell.seed;
    const std::uint64_t s = c.seed_base + cell.seed;
    const bool bayes = problem != nullptr && problem->has_bayes();
    auto eta = [&](std::span<const double> x) { return problem->eta(x); };
    std::optional<double> bayes_expected;
    if (bayes) bayes_expected = expected_risk(bayes_rule(*problem, cell.delta), data.test.points, eta);

    auto finish = [&](const auto& classifier) {
        row.metrics = evaluate(classifier, data.test, s);
        if (bayes) row.excess_risk = expected_risk(classifier, data.test.points, eta) - *bayes_expected;
    };
    auto save = [&](auto model) {
        if (model_dir == nullptr || !c.save_models) return;
        save_model_file((*model_dir / model_name(cell.algorithm, cell.delta, cell.seed)).string(),
                        ModelFile{std::move(model), data.normalizer});
    };
    auto features = [&] {
        const double sigma = c.rff_sigma.value_or(median_heuristic_sigma(data.labeled.points, s));
        return FourierFeatures::sample(data.labeled.dim(), c.features, sigma, s);
    };
    SolverConfig solver = c.solver;
    solver.seed = s;

    switch (cell.algorithm) {
        case Algorithm::Plugin: {
            const double mu = problem != nullptr ? problem->meta().mu_min.value_or(c.mu_min) : c.mu_min;
            const auto ladder = BandwidthLadder::make(data.labeled.size(), mu, data.labeled.dim());
            const auto est = fit(data.labeled, ladder, problem != nullptr ? problem_smoothness(*problem) : std::nullopt,
                                 c.lepski_scale);
            const double a = slack_a_m(data.unlabeled.size(), c.slack_scale);
            const double band = c.band.value_or(default_band(est, data.unlabeled));
            const PluginClassifier cls = build(est, data.unlabeled, cell.delta, a, band);
            const auto& q = cls.parameters();
            row.unlabeled_rejection = q.p1_hat + q.c_hat * (q.p2_hat - q.p1_hat);
            finish(cls);
            save(cls);
            break;
        }
        case Algorithm::Search: {
            const SearchResult res = run_search(data.labeled, data.unlabeled, cell.delta, c.search, features(), solver);
            row.Q = res.Q;
            row.iterations = res.iterations;
            row.stop_reason = std::string(to_string(res.stop_reason));
            row.unlabeled_rejection = rejection_rate(res.model, data.unlabeled);
            finish(res.model);
            save(res.model);
            break;
        }
        case Algorithm::Constrained: {
            const double alpha = c.alpha.value_or(default_alpha_m(data.unlabeled.size()));
            ConstrainedReport report;
            const SurrogateModel model = train_constrained(data.labeled, data.unlabeled, cell.delta, alpha, c.c_relax,
                                                           features(), solver, &report);
            row.constraint = report.constraint;
            row.budget = report.budget;
            row.iterations = report.bisection_steps;
            row.unlabeled_rejection = rejection_rate(model, data.unlabeled);
            finish(model);
            save(model);
            break;
        }
        case Algorithm::BayesOracle: {
            const AbstainRule rule = bayes_rule(*problem, cell.delta);
            row.metrics = evaluate(rule, data.test, s);
            row.excess_risk = 0.0;
            break;
        }
    }
    return row;
}

bool row_less(const RunRow& a, const RunRow& b) {
    return std::tie(a.algorithm, a.delta, a.seed) < std::tie(b.algorithm, b.delta, b.seed);
}

}  // namespace

SweepOutput run_sweep(const RunConfig& c, const std::filesystem::path* model_dir) {
    std::optional<Problem> problem;
    std::optional<RawDataset> raw;
    std::optional<MinMaxTransform> normalizer;
    if (c.synthetic()) {
        problem = config_problem(c);
    } else {
        MinMaxTransform t;
        raw = normalize_minmax(load_dataset(c), &t);
        normalizer = std::move(t);
    }

    // Data per seed, shared by every algorithm and delta so comparisons are paired.
    std::vector<RunData> data(c.seeds.size());
    std::vector<std::string> data_errors(c.seeds.size());
    for (std::size_t i = 0; i < c.seeds.size(); ++i) {
        const std::uint64_t s = c.seed_base + c.seeds[i];
        try {
            if (problem) {
                data[i] = synthetic_data(*problem, c.n, c.m, c.n_test, s);
            } else {
                SplitSpec spec{.fractions = c.fractions, .seed = s, .labels = c.label_map};
                Split sp = split(*raw, spec);
                data[i] = {std::move(sp.labeled), std::move(sp.unlabeled), std::move(sp.test), normalizer};
            }
        } catch (const std::exception& e) {
            data_errors[i] = e.what();
        }
    }

    std::vector<std::pair<Cell, std::size_t>> cells;
    for (auto a : c.algorithms) {
        for (double d : c.deltas) {
            for (std::size_t i = 0; i < c.seeds.size(); ++i) cells.push_back({{a, d, c.seeds[i]}, i});
        }
    }
    std::vector<std::optional<RunRow>> rows(cells.size());
    std::vector<std::string> errors(cells.size());
    const auto count = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        const auto& [cell, i] = cells[static_cast<std::size_t>(k)];
        if (!data_errors[i].empty()) {
            errors[static_cast<std::size_t>(k)] = data_errors[i];
            continue;
        }
        try {
            rows[static_cast<std::size_t>(k)] = run_cell(c, cell, data[i], problem ? &*problem : nullptr, model_dir);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(k)] = e.what();
        }
    }

    SweepOutput out;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (rows[k]) {
            out.rows.push_back(std::move(*rows[k]));
        } else {
            const auto& cell = cells[k].first;
            out.failures.push_back({cell.algorithm, cell.delta, cell.seed, errors[k]});
        }
    }
    std::sort(out.rows.begin(), out.rows.end(), row_less);
    return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<RunRow>& rows) {
    out << "algorithm,delta,seed,rejection_rate,accuracy_on_accepted,risk,excess_risk\n";
    for (const auto& r : rows) {
        out << to_string(r.algorithm) << ',' << fmt(r.delta) << ',' << r.seed << ',' << fmt(r.metrics.rejection_rate)
            << ',' << fmt(r.metrics.accuracy_on_accepted) << ',' << fmt(r.metrics.risk) << ','
            << (r.excess_risk ? fmt(*r.excess_risk) : std::string()) << '\n';
    }
}

std::string sweep_svg(const std::vector<RunRow>& rows) {
    // Mean (rejection, accuracy) per (algorithm, delta), one series per algorithm.
    std::map<Algorithm, std::map<double, std::pair<std::pair<double, double>, int>>> acc;
    for (const auto& r : rows) {
        auto& slot = acc[r.algorithm][r.delta];
        slot.first.first += r.metrics.rejection_rate;
        slot.first.second += r.metrics.accuracy_on_accepted;
        ++slot.second;
    }
    std::vector<ChartSeries> series;
    for (const auto& [a, by_delta] : acc) {
        ChartSeries s{std::string(to_string(a)), {}};
        for (const auto& [d, v] : by_delta) s.points.emplace_back(v.first.first / v.second, v.first.second / v.second);
        series.push_back(std::move(s));
    }
    return line_chart("Accuracy on accepted vs rejection rate", "mean rejection rate", "mean accuracy on accepted",
                      series);
}

namespace {

json row_diagnostics(const RunRow& r) {
    json j = {{"algorithm", to_string(r.algorithm)}, {"delta", r.delta}, {"seed", r.seed}};
    if (r.Q) j["Q"] = *r.Q;
    if (r.iterations) j["iterations"] = *r.iterations;
    if (r.stop_reason) j["stop_reason"] = *r.stop_reason;
    if (r.constraint) j["constraint"] = *r.constraint;
    if (r.budget) j["budget"] = *r.budget;
    if (r.unlabeled_rejection) j["unlabeled_rejection"] = *r.unlabeled_rejection;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace

int cmd_sweep(const RunConfig& c, const std::filesystem::path& out_dir, bool quiet) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out_dir);
    const SweepOutput out = run_sweep(c, &out_dir);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ofstream csv(out_dir / "sweep.csv", std::ios::binary);
    write_sweep_csv(csv, out.rows);
    if (c.svg) write_text(out_dir / "sweep.svg", sweep_svg(out.rows));

    json failures = json::array();
    for (const auto& f : out.failures) {
        failures.push_back({{"algorithm", to_string(f.algorithm)}, {"delta", f.delta}, {"seed", f.seed},
                            {"error", f.message}});
    }
    json diagnostics = json::array();
    for (const auto& r : out.rows) diagnostics.push_back(row_diagnostics(r));
    json report = {{"command", "sweep"},
                   {"version", ABSTAIN_VERSION},
                   {"config", json::parse(config_echo(c))},
                   {"wall_time_seconds", wall},
                   {"rows", out.rows.size()},
                   {"failures", failures},
                   {"diagnostics", diagnostics}};
    write_text(out_dir / "report.json", report.dump(1) + "\n");

    if (!quiet) {
        std::cout << "wrote " << out.rows.size() << " rows to " << (out_dir / "sweep.csv").string() << " in "
                  << fmt(wall) << " s\n";
    }
    for (const auto& f : out.failures) {
        std::cerr << "failed: algorithm=" << to_string(f.algorithm) << " delta=" << fmt(f.delta) << " seed=" << f.seed
                  << ": " << f.message << '\n';
    }
    return out.failures.empty() ? 0 : 1;
}

// --- rates ------------------------------------------------------------------------------

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs at least two points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::domain_error("log-log slope needs positive values");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("slope needs at least two distinct n values");
    return sxy / sxx;
}

RatesOutput run_rates(const RunConfig& c) {
    if (!c.synthetic()) throw ConfigError("rates needs a synthetic problem");
    const Problem problem = config_problem(c);
    if (!problem.has_bayes()) throw ConfigError("rates needs a problem with a known Bayes rule");
    if (c.n_list.size() < 2) throw ConfigError("rates needs at least two values in n_list");
    const double delta = c.deltas.front();
    const auto smooth = problem_smoothness(problem);
    const double mu = problem.meta().mu_min.value_or(c.mu_min);
    auto eta = [&](std::span<const double> x) { return problem.eta(x); };
    const AbstainRule rule = bayes_rule(problem, delta);

    const std::size_t S = c.seeds.size();
    std::vector<double> excess(c.n_list.size() * S);
    std::vector<std::string> errors(excess.size());
    const auto count = static_cast<std::ptrdiff_t>(excess.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        const std::size_t n = c.n_list[static_cast<std::size_t>(k) / S];
        const std::uint64_t s = c.seed_base + c.seeds[static_cast<std::size_t>(k) % S];
        try {
            const RunData d = synthetic_data(problem, n, n, c.n_test, s);
            const auto est = fit(d.labeled, BandwidthLadder::make(n, mu, problem.dim()), smooth, c.lepski_scale);
            const double band = c.band.value_or(default_band(est, d.unlabeled));
            const auto cls = build(est, d.unlabeled, delta, slack_a_m(n, c.slack_scale), band);
            excess[static_cast<std::size_t>(k)] =
                expected_risk(cls, d.test.points, eta) - expected_risk(rule, d.test.points, eta);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(k)] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw std::runtime_error("rates run failed: " + e);
    }

    RatesOutput out;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < c.n_list.size(); ++i) {
        RatePoint p{.n = c.n_list[i], .median_excess_risk = 0.0,
                    .excess_risks = {excess.begin() + static_cast<std::ptrdiff_t>(i * S),
                                     excess.begin() + static_cast<std::ptrdiff_t>((i + 1) * S)}};
        std::vector<double> sorted = p.excess_risks;
        std::sort(sorted.begin(), sorted.end());
        p.median_excess_risk = S % 2 == 1 ? sorted[S / 2] : 0.5 * (sorted[S / 2 - 1] + sorted[S / 2]);
        xs.push_back(static_cast<double>(p.n));
        ys.push_back(p.median_excess_risk);
        out.points.push_back(std::move(p));
    }
    out.slope = loglog_slope(xs, ys);
    return out;
}

void write_rates_csv(std::ostream& out, const RatesOutput& rates) {
    out << "n,median_excess_risk\n";
    for (const auto& p : rates.points) out << p.n << ',' << fmt(p.median_excess_risk) << '\n';
}

int cmd_rates(const RunConfig& c, const std::filesystem::path& out_dir, bool quiet) {
    const auto start = std::chrono::steady_clock::now();
    const RatesOutput rates = run_rates(c);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir / "rates.csv", std::ios::binary);
    write_rates_csv(csv, rates);
    json points = json::array();
    for (const auto& p : rates.points) {
        points.push_back({{"n", p.n}, {"median_excess_risk", p.median_excess_risk}, {"excess_risks", p.excess_risks}});
    }
    json report = {{"command", "rates"},       {"version", ABSTAIN_VERSION}, {"config", json::parse(config_echo(c))},
                   {"wall_time_seconds", wall}, {"slope", rates.slope},       {"points", points}};
    write_text(out_dir / "report.json", report.dump(1) + "\n");
    if (!quiet) {
        for (const auto& p : rates.points) std::cout << "n=" << p.n << " median excess risk " << fmt(p.median_excess_risk) << '\n';
        std::cout << "log-log slope " << fmt(rates.slope) << '\n';
    }
    return 0;
}

// --- eval / synth ------------------------------------------------------------------------

EvalResult run_eval(const std::string& model_path, const std::string& test_path, const LabelMap& labels,
                    std::uint64_t seed) {
    const ModelFile file = load_model_file(model_path);
    const std::string text = read_file(test_path);
    RawDataset raw = std::filesystem::path(test_path).extension() == ".csv" ? parse_csv(text) : parse_libsvm(text);
    const std::size_t dim = std::visit(
        [](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, PluginClassifier>) return m.estimator().dim();
            else return m.features().dim_in();
        },
        file.model);
    if (raw.dim > dim) throw std::runtime_error("test file has more features than the model");
    if (raw.dim < dim) {
        // LIBSVM drops trailing zero features.
        RawDataset padded = raw;
        padded.dim = dim;
        padded.features.assign(raw.rows() * dim, 0.0);
        for (std::size_t i = 0; i < raw.rows(); ++i) std::copy_n(raw.row(i).begin(), raw.dim, padded.features.begin() + static_cast<std::ptrdiff_t>(i * dim));
        raw = std::move(padded);
    }
    if (raw.rows() == 0) throw std::runtime_error("test file has no rows");
    if (file.normalizer) raw = apply_minmax(raw, *file.normalizer);
    for (double v : raw.features) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::runtime_error("test features outside [0,1] and the model has no normalizer");
    }
    LabeledSet test{PointSet(dim, raw.features), labels.binarize(raw.labels)};
    EvalResult out;
    out.metrics = std::visit([&](const auto& m) { return evaluate(m, test, seed); }, file.model);
    out.model_type = std::holds_alternative<PluginClassifier>(file.model) ? "plugin" : "surrogate";
    return out;
}

std::string synth_libsvm(const Problem& problem, std::size_t n, std::uint64_t seed) {
    const LabeledSet s = problem.sample_labeled(n, seed);
    RawDataset raw;
    raw.dim = s.dim();
    raw.features = s.points.coords();
    for (int y : s.labels) raw.labels.push_back(y > 0 ? "+1" : "-1");
    return serialize_libsvm(raw);
}

}  // namespace abstain
