#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace sbmkit {

/// One verified statement: the assumption or inequality it stands for, the
/// grid it was evaluated on, the empirical constant, and the outcome.
struct Check {
    std::string assumption;
    std::string grid;
    double constant = 0.0;
    bool pass = false;
    bool required = true;
    std::string note;
};

/// Structured record tying a numerical experiment to the statement it tests.
/// pass() depends only on the recorded checks.
struct VerificationReport {
    std::string theorem_tag;
    std::vector<Check> checks;
    std::map<std::string, double> constants;
    std::map<std::string, std::vector<double>> series;
    std::map<std::string, std::string> info;
    std::vector<std::string> warnings;
    double mc_se = 0.0;

    bool pass() const;
    Check& add(std::string assumption, std::string grid, double constant, bool pass,
               bool required = true, std::string note = {});
    const Check* find(const std::string& assumption) const;

    nlohmann::json to_json() const;
};

}  // namespace sbmkit
