#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tecoord/model.hpp"

namespace tecoord {

/// Parses a scenario document.  Unknown keys are rejected at every level and
/// the result is validated; failures throw Error(ScenarioInvalid).
Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Serializes with sorted keys and every floating-point value printed with
/// 17 significant digits, so equal documents are byte-identical.
std::string dump_canonical(const nlohmann::json& doc, int indent = 2);

}  // namespace tecoord
