#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "connselect/reggnn.hpp"

namespace connselect {

/// JSON checkpoint: hyperparameters plus row-major weight arrays. Doubles are
/// written in shortest round-trip form (at most 17 significant digits), so a
/// save/load cycle is bit-exact.
std::string checkpoint_to_json(const RegGnnModel& model);
/// Throws ValidationError on malformed documents or inconsistent shapes.
RegGnnModel checkpoint_from_json(const std::string& text);

void save_checkpoint(const RegGnnModel& model, const std::filesystem::path& file);
RegGnnModel load_checkpoint(const std::filesystem::path& file);

std::string_view to_string(ClampMode mode);
ClampMode parse_clamp_mode(std::string_view text);

}  // namespace connselect
