#pragma once

// Experiment harness behind the CLI: a validated run configuration, delta
// sweeps over (algorithm, delta, seed) cells, excess-risk rate studies, and
// the eval/synth/oracle helpers.

#include "abstain/common.hpp"
#include "abstain/data.hpp"
#include "abstain/problems.hpp"
#include "abstain/search.hpp"
#include "abstain/surrogate.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace abstain {

inline constexpr int kConfigFormatVersion = 1;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Algorithm { Plugin, Search, Constrained, BayesOracle };
std::string_view to_string(Algorithm a);

struct RunConfig {
    // Source: exactly one of problem / atoms / dataset.
    std::string problem;  // linear1d, sine1d, smooth-nd, two-gaussians
    int frequency = 1;
    double amplitude = 0.25;
    std::size_t dim = 2;
    double gaussian_sigma = 0.15;
    std::string atoms;    // CSV path
    std::string dataset;  // LIBSVM or CSV path
    std::string dataset_format;  // "libsvm" | "csv"; inferred from the extension when empty
    std::string label_column;
    LabelMap label_map;
    std::array<double, 3> fractions{0.6, 0.2, 0.2};

    std::vector<Algorithm> algorithms{Algorithm::Plugin};
    std::vector<double> deltas{0.2};
    std::vector<std::uint64_t> seeds{1};
    std::uint64_t seed_base = 0;
    std::size_t n = 2000, m = 2000, n_test = 20000;

    // plug-in
    double slack_scale = 0.1;
    std::optional<double> band;
    double lepski_scale = 1.0;  // 1 is the theoretical selection rule
    double mu_min = 1.0;  // ladder constant for dataset runs; problems use their metadata

    // surrogate learners
    std::size_t features = 100;
    std::optional<double> rff_sigma;  // median heuristic when absent
    SolverConfig solver;
    double c_relax = 1.0;
    std::optional<double> alpha;  // constrained slack; 0.1/sqrt(m) when absent
    SearchConfig search;

    // rates
    std::vector<std::size_t> n_list;

    bool save_models = false;
    bool svg = true;

    bool synthetic() const { return !problem.empty() || !atoms.empty(); }
};

/// Parses and validates a JSON config. Unknown keys, wrong types, or
/// inconsistent settings throw ConfigError before any work is done.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
/// The fully resolved configuration as JSON text.
std::string config_echo(const RunConfig& config);

/// Problem described by the config (throws ConfigError for dataset runs).
Problem config_problem(const RunConfig& config);

struct RunRow {
    Algorithm algorithm = Algorithm::Plugin;
    double delta = 0.0;
    std::uint64_t seed = 0;
    Metrics metrics;
    std::optional<double> excess_risk;
    // diagnostics
    std::optional<double> Q;  // search: slack-padded unlabeled rejection at termination
    std::optional<std::size_t> iterations;
    std::optional<std::string> stop_reason;
    std::optional<double> constraint, budget;  // constrained: unlabeled hinge average and its budget
    std::optional<double> unlabeled_rejection;
};

struct RunFailure {
    Algorithm algorithm;
    double delta;
    std::uint64_t seed;
    std::string message;
};

struct SweepOutput {
    std::vector<RunRow> rows;  // sorted by (algorithm, delta, seed)
    std::vector<RunFailure> failures;
};

/// Runs every (algorithm, delta, seed) cell. Cells are independent and may
/// run concurrently; each owns its random streams.
SweepOutput run_sweep(const RunConfig& config, const std::filesystem::path* model_dir = nullptr);

void write_sweep_csv(std::ostream& out, const std::vector<RunRow>& rows);
std::string sweep_svg(const std::vector<RunRow>& rows);

struct RatePoint {
    std::size_t n = 0;
    double median_excess_risk = 0.0;
    std::vector<double> excess_risks;  // per seed, in seed order
};

struct RatesOutput {
    std::vector<RatePoint> points;
    double slope = 0.0;  // least squares of ln(median excess) on ln n
};

/// Plug-in excess risk at m = n for each n in n_list, first delta in the
/// config. Requires a synthetic problem with a known Bayes rule and at least
/// two n values.
RatesOutput run_rates(const RunConfig& config);
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_rates_csv(std::ostream& out, const RatesOutput& rates);

/// Command entry points; they write files under out_dir and return an exit code.
int cmd_sweep(const RunConfig& config, const std::filesystem::path& out_dir, bool quiet);
int cmd_rates(const RunConfig& config, const std::filesystem::path& out_dir, bool quiet);

struct EvalResult {
    Metrics metrics;
    std::string model_type;
};

/// Scores a saved model on a LIBSVM/CSV test file.
EvalResult run_eval(const std::string& model_path, const std::string& test_path, const LabelMap& labels,
                    std::uint64_t seed);

/// n labeled draws from the problem as LIBSVM text with labels -1/+1.
std::string synth_libsvm(const Problem& problem, std::size_t n, std::uint64_t seed);

}  // namespace abstain
