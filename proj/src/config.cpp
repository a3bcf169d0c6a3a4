#include "ssaudit/config.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fnmatch.h>
#include <fstream>
#include <set>
#include <sstream>

namespace ssaudit {

using nlohmann::json;

std::string_view control_key(ControlId id) {
    switch (id) {
        case ControlId::DataValidity: return "data_validity";
        case ControlId::PlacementLabels: return "placement_labels";
        case ControlId::DisplayConstants: return "display_constants";
    }
    return "?";
}

std::optional<ControlId> parse_control_key(std::string_view key) {
    for (ControlId id : kAllControls)
        if (control_key(id) == key) return id;
    return std::nullopt;
}

const std::vector<std::string>& control_sub_rules(ControlId id) {
    static const std::vector<std::string> data_validity{"input_check", "output_check"};
    static const std::vector<std::string> placement{"hidden_data", "header_labels", "mixed_input_calc",
                                                    "orphan_region"};
    static const std::vector<std::string> constants{"buried_constants"};
    switch (id) {
        case ControlId::DataValidity: return data_validity;
        case ControlId::PlacementLabels: return placement;
        case ControlId::DisplayConstants: return constants;
    }
    return constants;
}

bool ControlConfig::whitelisted(double value) const {
    return std::find(constant_whitelist.begin(), constant_whitelist.end(), value) != constant_whitelist.end();
}

bool ControlConfig::exempt(std::string_view function, std::size_t arg) const {
    return std::any_of(exempt_function_args.begin(), exempt_function_args.end(),
                       [&](const ExemptArg& e) { return e.arg == arg && iequals(e.function, function); });
}

const Waiver* ControlConfig::waiver_for(std::string_view path, ControlId control, std::string_view sub_rule) const {
    std::string full(path);
    std::string base = std::filesystem::path(full).filename().string();
    for (const Waiver& w : waivers) {
        if (w.control != control || w.sub_rule != sub_rule) continue;
        if (fnmatch(w.file_pattern.c_str(), full.c_str(), 0) == 0 || fnmatch(w.file_pattern.c_str(), base.c_str(), 0) == 0)
            return &w;
    }
    return nullptr;
}

namespace {

json to_json(const ControlConfig& c) {
    json j = json::object();
    j["constant_whitelist"] = c.constant_whitelist;
    json exempt = json::array();
    for (const auto& e : c.exempt_function_args) exempt.push_back({{"arg", e.arg}, {"function", e.function}});
    j["exempt_function_args"] = exempt;
    j["max_buried_constants"] = c.max_buried_constants;
    j["check_keywords"] = c.checks.keywords;
    j["label_distance"] = c.checks.label_distance;
    j["header_label_threshold"] = c.header_label_threshold;
    j["style_family_threshold"] = c.style_family_threshold;
    json waivers = json::array();
    for (const auto& w : c.waivers) {
        waivers.push_back({{"control", std::string(control_key(w.control))},
                           {"file_pattern", w.file_pattern},
                           {"justification", w.justification},
                           {"sub_rule", w.sub_rule}});
    }
    j["waivers"] = waivers;
    j["orphan_fails_verdict"] = c.orphan_fails_verdict;
    j["orphan_includes_label_only"] = c.orphan_includes_label_only;
    return j;
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

const json& require(const json& obj, const char* key, json::value_t type, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where + " is missing \"" + key + "\"");
    bool ok = it->type() == type ||
              (type == json::value_t::number_unsigned && it->is_number_integer() && it->get<long long>() >= 0);
    if (!ok) fail(where + "." + key + " has the wrong type");
    return *it;
}

double read_fraction(const json& v, const char* key) {
    if (!v.is_number()) fail(std::string(key) + " must be a number");
    double d = v.get<double>();
    if (!(d > 0.0 && d <= 1.0)) fail(std::string(key) + " must lie in (0, 1]");
    return d;
}

std::size_t read_count(const json& v, const char* key) {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(std::string(key) + " must be a non-negative integer");
    return v.get<std::size_t>();
}

}  // namespace

ControlConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("top level must be an object");

    ControlConfig c;
    for (const auto& [key, value] : doc.items()) {
        if (key == "constant_whitelist") {
            if (!value.is_array()) fail("constant_whitelist must be an array");
            c.constant_whitelist.clear();
            for (const auto& v : value) {
                if (!v.is_number() || !std::isfinite(v.get<double>())) fail("constant_whitelist entries must be finite numbers");
                c.constant_whitelist.push_back(v.get<double>());
            }
        } else if (key == "exempt_function_args") {
            if (!value.is_array()) fail("exempt_function_args must be an array");
            c.exempt_function_args.clear();
            for (const auto& v : value) {
                if (!v.is_object()) fail("exempt_function_args entries must be objects");
                for (const auto& [k, _] : v.items())
                    if (k != "function" && k != "arg") fail("unknown key exempt_function_args[]." + k);
                std::string fn = require(v, "function", json::value_t::string, "exempt_function_args[]").get<std::string>();
                std::size_t arg = read_count(require(v, "arg", json::value_t::number_unsigned, "exempt_function_args[]"), "arg");
                if (fn.empty() || arg == 0) fail("exempt_function_args entries need a function and a 1-based arg");
                c.exempt_function_args.push_back({to_upper(fn), arg});
            }
        } else if (key == "max_buried_constants") {
            c.max_buried_constants = read_count(value, "max_buried_constants");
        } else if (key == "check_keywords") {
            if (!value.is_array()) fail("check_keywords must be an array");
            c.checks.keywords.clear();
            for (const auto& v : value) {
                if (!v.is_string() || v.get<std::string>().empty()) fail("check_keywords entries must be non-empty strings");
                c.checks.keywords.push_back(to_lower(v.get<std::string>()));
            }
        } else if (key == "label_distance") {
            std::size_t d = read_count(value, "label_distance");
            if (d == 0 || d > 1000) fail("label_distance must be between 1 and 1000");
            c.checks.label_distance = static_cast<std::uint32_t>(d);
        } else if (key == "header_label_threshold") {
            c.header_label_threshold = read_fraction(value, "header_label_threshold");
        } else if (key == "style_family_threshold") {
            c.style_family_threshold = read_fraction(value, "style_family_threshold");
        } else if (key == "waivers") {
            if (!value.is_array()) fail("waivers must be an array");
            for (const auto& v : value) {
                if (!v.is_object()) fail("waivers entries must be objects");
                for (const auto& [k, _] : v.items()) {
                    if (k != "file_pattern" && k != "control" && k != "sub_rule" && k != "justification")
                        fail("unknown key waivers[]." + k);
                }
                Waiver w;
                w.file_pattern = require(v, "file_pattern", json::value_t::string, "waivers[]").get<std::string>();
                std::string control = require(v, "control", json::value_t::string, "waivers[]").get<std::string>();
                w.sub_rule = require(v, "sub_rule", json::value_t::string, "waivers[]").get<std::string>();
                w.justification = require(v, "justification", json::value_t::string, "waivers[]").get<std::string>();
                auto id = parse_control_key(control);
                if (!id) fail("unknown control \"" + control + "\" in waiver");
                w.control = *id;
                const auto& rules = control_sub_rules(w.control);
                if (std::find(rules.begin(), rules.end(), w.sub_rule) == rules.end())
                    fail("unknown sub_rule \"" + w.sub_rule + "\" for " + control);
                if (w.file_pattern.empty()) fail("waiver file_pattern must not be empty");
                if (w.justification.find_first_not_of(" \t\r\n") == std::string::npos)
                    fail("waiver justification must not be empty");
                c.waivers.push_back(std::move(w));
            }
        } else if (key == "orphan_fails_verdict" || key == "orphan_includes_label_only") {
            if (!value.is_boolean()) fail(key + " must be true or false");
            (key == "orphan_fails_verdict" ? c.orphan_fails_verdict : c.orphan_includes_label_only) = value.get<bool>();
        } else {
            fail("unknown key \"" + key + "\"");
        }
    }
    return c;
}

ControlConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string ControlConfig::canonical_json() const {
    ControlConfig norm = *this;
    std::sort(norm.constant_whitelist.begin(), norm.constant_whitelist.end());
    norm.constant_whitelist.erase(std::unique(norm.constant_whitelist.begin(), norm.constant_whitelist.end()),
                                  norm.constant_whitelist.end());
    std::sort(norm.exempt_function_args.begin(), norm.exempt_function_args.end());
    norm.exempt_function_args.erase(std::unique(norm.exempt_function_args.begin(), norm.exempt_function_args.end()),
                                    norm.exempt_function_args.end());
    std::set<std::string> keywords;
    for (const auto& k : norm.checks.keywords) keywords.insert(to_lower(k));
    norm.checks.keywords.assign(keywords.begin(), keywords.end());
    return to_json(norm).dump();
}

std::string ControlConfig::digest() const {
    std::string text = canonical_json();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out = "sha256:";
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

}  // namespace ssaudit
