#pragma once

// Structural check of a CLI JSON report, kept in step with docs/report_schema.json.

#include <nlohmann/json.hpp>

#include <string>

namespace ncps::testing {

/// Empty string when `j` is a valid report, otherwise the first problem found.
inline std::string report_problem(const nlohmann::json& j) {
    if (!j.is_object()) return "report is not an object";
    for (const char* key : {"tool", "version", "command", "config", "checks", "overall", "result"})
        if (!j.contains(key)) return std::string("missing key ") + key;
    if (j.size() != 7) return "unexpected top-level keys";
    if (!j["tool"].is_string() || j["tool"] != "ncps") return "tool must be \"ncps\"";
    if (!j["version"].is_string()) return "version must be a string";
    if (!j["command"].is_string()) return "command must be a string";
    if (!j["config"].is_object()) return "config must be an object";
    if (!j["result"].is_object()) return "result must be an object";
    if (!j["overall"].is_boolean()) return "overall must be a boolean";
    if (!j["checks"].is_array()) return "checks must be an array";

    bool all = true;
    std::string prev;
    for (const auto& c : j["checks"]) {
        if (!c.is_object() || c.size() != 5) return "check must have exactly five keys";
        if (!c.contains("name") || !c["name"].is_string()) return "check.name must be a string";
        for (const char* key : {"expected", "measured", "tol"})
            if (!c.contains(key) || !(c[key].is_number() || c[key].is_null()))
                return std::string("check.") + key + " must be a number or null";
        if (!c.contains("pass") || !c["pass"].is_boolean()) return "check.pass must be a boolean";
        const std::string name = c["name"];
        if (name < prev) return "checks are not sorted by name";
        prev = name;
        all = all && c["pass"].get<bool>();
    }
    if (j["overall"].get<bool>() != all) return "overall disagrees with the checks";
    return {};
}

}  // namespace ncps::testing
