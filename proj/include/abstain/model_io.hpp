#pragma once

// Versioned JSON model files. Doubles are written in shortest round-trip
// form, so save -> load reproduces every parameter bit for bit.
//
//   {"format": "abstain-model", "version": 1, "type": "plugin" | "surrogate", ...}

#include "abstain/data.hpp"
#include "abstain/plugin.hpp"
#include "abstain/surrogate.hpp"

#include <optional>
#include <string>
#include <variant>

namespace abstain {

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
    std::variant<PluginClassifier, SurrogateModel> model;
    std::optional<MinMaxTransform> normalizer;  // applied to raw test features before scoring
    bool operator==(const ModelFile&) const = default;
};

std::string save_model(const ModelFile& file);
/// Throws std::runtime_error on malformed input, unknown type or version.
ModelFile load_model(std::string_view text);

void save_model_file(const std::string& path, const ModelFile& file);
ModelFile load_model_file(const std::string& path);

}  // namespace abstain
