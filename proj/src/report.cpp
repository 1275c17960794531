#include "sbmkit/report.hpp"

#include <cmath>

namespace sbmkit {

bool VerificationReport::pass() const {
    for (const auto& c : checks)
        if (c.required && !c.pass) return false;
    return !checks.empty();
}

Check& VerificationReport::add(std::string assumption, std::string grid, double constant, bool ok,
                               bool required, std::string note) {
    checks.push_back(Check{std::move(assumption), std::move(grid), constant, ok, required, std::move(note)});
    return checks.back();
}

const Check* VerificationReport::find(const std::string& assumption) const {
    for (const auto& c : checks)
        if (c.assumption == assumption) return &c;
    return nullptr;
}

namespace {
nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}
}  // namespace

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json j;
    j["theorem_tag"] = theorem_tag;
    j["pass"] = pass();
    j["mc_se"] = number(mc_se);
    auto arr = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json e;
        e["assumption"] = c.assumption;
        e["grid"] = c.grid;
        e["constant"] = number(c.constant);
        e["pass"] = c.pass;
        e["required"] = c.required;
        if (!c.note.empty()) e["note"] = c.note;
        arr.push_back(std::move(e));
    }
    j["checks"] = std::move(arr);
    nlohmann::json consts = nlohmann::json::object();
    for (const auto& [k, v] : constants) consts[k] = number(v);
    j["constants"] = std::move(consts);
    nlohmann::json ser = nlohmann::json::object();
    for (const auto& [k, v] : series) {
        auto a = nlohmann::json::array();
        for (double x : v) a.push_back(number(x));
        ser[k] = std::move(a);
    }
    j["series"] = std::move(ser);
    nlohmann::json inf = nlohmann::json::object();
    for (const auto& [k, v] : info) inf[k] = v;
    j["info"] = std::move(inf);
    j["warnings"] = warnings;
    return j;
}

}  // namespace sbmkit
