#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace seclab::suites {

struct Check {
    std::string name;
    bool pass = false;
    double worst = 0.0;  // signed margin or worst residual, check-specific
};

struct SuiteReport {
    std::string name;
    std::vector<Check> checks;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    void add(const std::string& check_name, bool ok, double worst) {
        checks.push_back({check_name, ok, worst});
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["suite"] = name;
        j["pass"] = pass();
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& c : checks) {
            nlohmann::ordered_json cj;
            cj["name"] = c.name;
            cj["pass"] = c.pass;
            cj["worst"] = c.worst;
            arr.push_back(cj);
        }
        j["checks"] = arr;
        if (!extra.empty()) j["extra"] = extra;
        return j;
    }
};

}  // namespace seclab::suites
