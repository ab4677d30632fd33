#include "abstain/common.hpp"

#include <numbers>

namespace abstain {

PointSet::PointSet(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0 && !coords_.empty()) throw std::invalid_argument("PointSet: zero dimension");
    if (dim_ != 0 && coords_.size() % dim_ != 0) {
        throw std::invalid_argument("PointSet: coordinate count is not a multiple of the dimension");
    }
}

void PointSet::push_back(std::span<const double> x) {
    if (x.size() != dim_) throw std::invalid_argument("PointSet: dimension mismatch");
    coords_.insert(coords_.end(), x.begin(), x.end());
}

Metrics tally(std::span<const Decision> decisions, std::span<const int> labels) {
    if (decisions.size() != labels.size()) throw std::invalid_argument("tally: size mismatch");
    Metrics m;
    m.count = decisions.size();
    if (m.count == 0) return m;
    std::size_t errors = 0, abstained = 0, correct = 0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (decisions[i] == Decision::Abstain) {
            ++abstained;
        } else if (static_cast<int>(decisions[i]) == labels[i]) {
            ++correct;
        } else {
            ++errors;
        }
    }
    const auto n = static_cast<double>(m.count);
    m.risk = static_cast<double>(errors) / n;
    m.rejection_rate = static_cast<double>(abstained) / n;
    const std::size_t declared = correct + errors;
    m.accuracy_on_accepted = declared == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(declared);
    return m;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
}

std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
    return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

double standard_normal(Rng& rng) {
    // Box-Muller; the second variate is discarded so each call consumes
    // exactly two draws.
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace abstain
