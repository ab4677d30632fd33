#include "abstain/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace abstain {

using nlohmann::json;

namespace {

json estimator_to_json(const HistogramEstimator& e) {
    const auto& l = e.ladder();
    json grids = json::array();
    for (const auto& g : e.grids()) {
        json cells = json::array();
        for (const auto& c : g.cells) cells.push_back({c.index, c.positives, c.total});
        grids.push_back({{"h", g.h}, {"positives", g.positives}, {"n", g.n}, {"cells", std::move(cells)}});
    }
    json j = {{"ladder", {{"N", l.N}, {"n", l.n}, {"mu_min", l.mu_min}, {"dim", l.dim}}}, {"grids", std::move(grids)}};
    j["lepski_scale"] = e.lepski_scale();
    if (const auto& s = e.smoothness()) j["smoothness"] = {{"L", s->L}, {"beta", s->beta}};
    return j;
}

HistogramEstimator estimator_from_json(const json& j) {
    const auto& jl = j.at("ladder");
    BandwidthLadder ladder{.N = jl.at("N").get<std::size_t>(), .n = jl.at("n").get<std::size_t>(),
                           .mu_min = jl.at("mu_min").get<double>(), .dim = jl.at("dim").get<std::size_t>()};
    std::vector<GridStats> grids;
    for (const auto& jg : j.at("grids")) {
        GridStats g;
        g.h = jg.at("h").get<double>();
        g.cells_per_axis = cells_per_axis(g.h);
        g.positives = jg.at("positives").get<std::size_t>();
        g.n = jg.at("n").get<std::size_t>();
        for (const auto& c : jg.at("cells")) {
            g.cells.push_back({.index = c.at(0).get<std::uint64_t>(), .positives = c.at(1).get<std::uint32_t>(),
                               .total = c.at(2).get<std::uint32_t>()});
        }
        grids.push_back(std::move(g));
    }
    std::optional<Smoothness> s;
    if (j.contains("smoothness")) s = Smoothness{j["smoothness"].at("L").get<double>(), j["smoothness"].at("beta").get<double>()};
    return HistogramEstimator(ladder, std::move(grids), s, j.value("lepski_scale", 1.0));
}

json scorer_to_json(const LinearScorer& s) { return {{"weights", s.weights}, {"bias", s.bias}}; }
LinearScorer scorer_from_json(const json& j) {
    return {j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()};
}

}  // namespace

std::string save_model(const ModelFile& file) {
    json j = {{"format", "abstain-model"}, {"version", kModelFormatVersion}};
    if (const auto* p = std::get_if<PluginClassifier>(&file.model)) {
        const auto& q = p->parameters();
        j["type"] = "plugin";
        j["estimator"] = estimator_to_json(p->estimator());
        j["parameters"] = {{"delta", q.delta}, {"a_m", q.a_m},       {"gamma_hat", q.gamma_hat},
                           {"band", q.band},   {"c_hat", q.c_hat},   {"p1_hat", q.p1_hat},
                           {"p2_hat", q.p2_hat}, {"core_enabled", q.core_enabled}};
    } else {
        const auto& m = std::get<SurrogateModel>(file.model);
        const auto& f = m.features();
        const auto& e = m.echo();
        j["type"] = "surrogate";
        j["features"] = {{"dim_in", f.dim_in()}, {"dim_out", f.dim_out()}, {"sigma", f.sigma()},
                         {"seed", f.seed()},     {"frequencies", f.frequencies()}, {"offsets", f.offsets()}};
        j["h"] = scorer_to_json(m.h());
        j["r"] = scorer_to_json(m.r());
        j["training"] = {{"learner", e.learner}, {"lambda", e.lambda},         {"l2", e.l2},    {"nu", e.nu},
                         {"budget", e.budget},   {"iterations", e.iterations}, {"step", e.step}};
    }
    if (file.normalizer) j["normalizer"] = {{"min", file.normalizer->min}, {"max", file.normalizer->max}};
    return j.dump(1) + "\n";
}

ModelFile load_model(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != "abstain-model") throw std::runtime_error("not an abstain model file");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw std::runtime_error("unsupported model file version " + std::to_string(version));
        }
        ModelFile out;
        const auto type = j.at("type").get<std::string>();
        if (type == "plugin") {
            const auto& q = j.at("parameters");
            PluginClassifier::Parameters p{
                .delta = q.at("delta").get<double>(),         .a_m = q.at("a_m").get<double>(),
                .gamma_hat = q.at("gamma_hat").get<double>(), .band = q.at("band").get<double>(),
                .c_hat = q.at("c_hat").get<double>(),         .p1_hat = q.at("p1_hat").get<double>(),
                .p2_hat = q.at("p2_hat").get<double>(),       .core_enabled = q.at("core_enabled").get<bool>()};
            out.model = PluginClassifier(estimator_from_json(j.at("estimator")), p);
        } else if (type == "surrogate") {
            const auto& f = j.at("features");
            auto features = FourierFeatures::from_parameters(
                f.at("dim_in").get<std::size_t>(), f.at("sigma").get<double>(),
                f.at("frequencies").get<std::vector<double>>(), f.at("offsets").get<std::vector<double>>(),
                f.at("seed").get<std::uint64_t>());
            const auto& t = j.at("training");
            TrainingEcho echo{.learner = t.at("learner").get<std::string>(), .lambda = t.at("lambda").get<double>(),
                              .l2 = t.at("l2").get<double>(),                 .nu = t.at("nu").get<double>(),
                              .budget = t.at("budget").get<double>(),
                              .iterations = t.at("iterations").get<std::size_t>(), .step = t.at("step").get<double>()};
            out.model = SurrogateModel(std::move(features), scorer_from_json(j.at("h")), scorer_from_json(j.at("r")),
                                       std::move(echo));
        } else {
            throw std::runtime_error("unknown model type '" + type + "'");
        }
        if (j.contains("normalizer")) {
            out.normalizer = MinMaxTransform{j["normalizer"].at("min").get<std::vector<double>>(),
                                             j["normalizer"].at("max").get<std::vector<double>>()};
        }
        return out;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed model file: ") + e.what());
    }
}

void save_model_file(const std::string& path, const ModelFile& file) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << save_model(file);
}

ModelFile load_model_file(const std::string& path) { return load_model(read_file(path)); }

}  // namespace abstain
