// abstain: command-line front end for sweeps, rate studies, model evaluation,
// synthetic data and the Bayes oracle.

#include "abstain/harness.hpp"
#include "abstain/problems.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

using namespace abstain;

namespace {

struct Globals {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed_base;
    bool quiet = false;
};

RunConfig resolved_config(const Globals& g) {
    if (g.config.empty()) throw ConfigError("--config is required");
    RunConfig c = load_config(g.config);
    if (g.seed_base) c.seed_base = *g.seed_base;
    return c;
}

Problem cli_problem(const std::string& kind, const std::string& atoms, int frequency, double amplitude,
                    std::size_t dim) {
    if (!atoms.empty()) return parse_atoms_csv(read_file(atoms));
    return make_catalog_problem(kind, frequency, amplitude, dim);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classification with a bounded abstention rate"};
    app.set_version_flag("--version", ABSTAIN_VERSION);
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Run configuration (JSON)");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--seed-base", g.seed_base, "Offset added to every configured seed");
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    auto* sweep = app.add_subcommand("sweep", "Run every (algorithm, delta, seed) cell and write sweep.csv");
    auto* rates = app.add_subcommand("rates", "Plug-in excess risk against n and its log-log slope");

    std::string model_path, test_path, label_map = "auto";
    auto* eval = app.add_subcommand("eval", "Score a saved model on a LIBSVM/CSV test file");
    eval->add_option("model", model_path, "Model file")->required();
    eval->add_option("test", test_path, "Test data file")->required();
    eval->add_option("--labels", label_map, "Label map: auto or parity")->check(CLI::IsMember({"auto", "parity"}));

    std::string kind = "linear1d", atoms, synth_out;
    int frequency = 1;
    double amplitude = 0.25;
    std::size_t dim = 2, count = 1000;
    std::uint64_t seed = 1;
    auto* synth = app.add_subcommand("synth", "Write a labeled synthetic sample as LIBSVM");
    synth->add_option("--problem", kind, "linear1d, sine1d, smooth-nd, two-gaussians");
    synth->add_option("--frequency", frequency);
    synth->add_option("--amplitude", amplitude);
    synth->add_option("--dim", dim);
    synth->add_option("-n", count, "Number of rows");
    synth->add_option("--seed", seed);
    synth->add_option("--file", synth_out, "Output file (stdout when absent)");

    std::vector<double> deltas{0.2};
    auto* oracle = app.add_subcommand("oracle", "Print the Bayes threshold, c0 and risk");
    oracle->add_option("--problem", kind, "linear1d, sine1d, smooth-nd");
    oracle->add_option("--atoms", atoms, "Atoms CSV (columns location..., mass, eta)");
    oracle->add_option("--frequency", frequency);
    oracle->add_option("--amplitude", amplitude);
    oracle->add_option("--dim", dim);
    oracle->add_option("--delta", deltas, "One or more budgets")->expected(1, -1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return cmd_sweep(resolved_config(g), g.out, g.quiet);
        if (rates->parsed()) return cmd_rates(resolved_config(g), g.out, g.quiet);
        if (eval->parsed()) {
            LabelMap labels;
            if (label_map == "parity") labels.mode = LabelMap::Mode::Parity;
            const EvalResult r = run_eval(model_path, test_path, labels, g.seed_base.value_or(0));
            if (!g.quiet) {
                std::printf("model %s: %zu points, rejection %.6f, accuracy on accepted %.6f, risk %.6f\n",
                            r.model_type.c_str(), r.metrics.count, r.metrics.rejection_rate,
                            r.metrics.accuracy_on_accepted, r.metrics.risk);
            }
            std::printf("rejection_rate,accuracy_on_accepted,risk,count\n%.12g,%.12g,%.12g,%zu\n",
                        r.metrics.rejection_rate, r.metrics.accuracy_on_accepted, r.metrics.risk, r.metrics.count);
            return 0;
        }
        if (synth->parsed()) {
            const std::string text = synth_libsvm(make_catalog_problem(kind, frequency, amplitude, dim), count, seed);
            if (synth_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(synth_out, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write '" + synth_out + "'");
                out << text;
            }
            return 0;
        }
        if (oracle->parsed()) {
            const Problem p = cli_problem(kind, atoms, frequency, amplitude, dim);
            if (!p.has_bayes()) throw std::runtime_error("problem '" + p.name() + "' has no exact Bayes rule");
            std::printf("problem,delta,gamma,c0,delta1,delta2,abstention,risk%s\n", p.is_atoms() ? ",greedy_risk" : "");
            for (double d : deltas) {
                if (!(d > 0.0 && d < 1.0)) throw std::runtime_error("--delta must lie in (0,1)");
                const AbstainRule r = bayes_rule(p, d);
                std::printf("%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g", p.name().c_str(), d, r.gamma, r.c0,
                            r.delta1, r.delta2, r.abstention(), bayes_risk(p, d));
                if (p.is_atoms()) std::printf(",%.12g", greedy_oracle(p, d).risk);
                std::printf("\n");
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
