#pragma once

#include "ssaudit/classify.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssaudit {

enum class ControlId { DataValidity, PlacementLabels, DisplayConstants };
inline constexpr ControlId kAllControls[] = {ControlId::DataValidity, ControlId::PlacementLabels,
                                             ControlId::DisplayConstants};

/// "data_validity", "placement_labels", "display_constants".
std::string_view control_key(ControlId id);
std::optional<ControlId> parse_control_key(std::string_view key);
/// Sub-rule names a waiver may target for the control.
const std::vector<std::string>& control_sub_rules(ControlId id);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExemptArg {
    std::string function;   // uppercase
    std::size_t arg = 0;    // 1-based
    auto operator<=>(const ExemptArg&) const = default;
};

struct Waiver {
    std::string file_pattern;   // shell glob against the full path or the file name
    ControlId control = ControlId::DataValidity;
    std::string sub_rule;
    std::string justification;
    bool operator==(const Waiver&) const = default;
};

struct ControlConfig {
    std::vector<double> constant_whitelist{-1.0, 0.0, 1.0};
    std::vector<ExemptArg> exempt_function_args{
        {"ROUND", 2}, {"ROUNDUP", 2}, {"ROUNDDOWN", 2}, {"TRUNC", 2}, {"VLOOKUP", 3},
        {"HLOOKUP", 3}, {"MATCH", 3}, {"INDEX", 2},     {"INDEX", 3},
    };
    std::size_t max_buried_constants = 0;
    CheckOptions checks;
    double header_label_threshold = 0.8;
    double style_family_threshold = 0.9;
    std::vector<Waiver> waivers;
    bool orphan_fails_verdict = true;
    bool orphan_includes_label_only = false;

    bool whitelisted(double value) const;
    bool exempt(std::string_view function, std::size_t arg) const;
    /// First waiver covering (file, control, sub_rule), or null.
    const Waiver* waiver_for(std::string_view path, ControlId control, std::string_view sub_rule) const;

    /// Canonical JSON text (sorted keys, normalized lists); equal configs give equal text.
    std::string canonical_json() const;
    /// "sha256:<hex>" of canonical_json().
    std::string digest() const;
};

/// Parses and validates a config document. Unknown keys, wrong types,
/// non-finite whitelist values and empty justifications are errors.
ControlConfig parse_config(std::string_view json_text);
ControlConfig load_config(const std::filesystem::path& path);

}  // namespace ssaudit
