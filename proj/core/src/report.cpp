#include "waistlab/report.hpp"

#include <sstream>

#include <json.hpp>

#include "waistlab/rng.hpp"

namespace waistlab {

const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass:
            return "pass";
        case CheckStatus::Fail:
            return "fail";
        case CheckStatus::Indeterminate:
            return "indeterminate";
    }
    return "?";
}

bool VerificationReport::all_pass(bool strict) const {
    for (const auto& c : checks) {
        if (c.status == CheckStatus::Fail) return false;
        if (strict && c.status == CheckStatus::Indeterminate) return false;
    }
    return true;
}

bool VerificationReport::any_fail() const {
    for (const auto& c : checks)
        if (c.status == CheckStatus::Fail) return true;
    return false;
}

std::string VerificationReport::run_id() const {
    std::uint64_t h = splitmix64(seed ^ 0x77a110b1ull);
    for (char c : command) h = splitmix64(h ^ static_cast<unsigned char>(c));
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::string VerificationReport::to_json_string(int indent) const {
    nlohmann::ordered_json j;
    j["run_id"] = run_id();
    j["command"] = command;
    j["seed"] = seed;
    j["subject"] = subject;
    nlohmann::ordered_json checks_j = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        cj["tag"] = c.tag;
        cj["status"] = to_string(c.status);
        cj["tolerance"] = c.tolerance;
        nlohmann::ordered_json q;
        for (const auto& [k, v] : c.quantities) q[k] = v;
        cj["quantities"] = q;
        nlohmann::ordered_json se;
        for (const auto& [k, v] : c.std_errors) se[k] = v;
        cj["std_errors"] = se;
        if (!c.series.empty()) {
            nlohmann::ordered_json sj;
            for (const auto& [k, v] : c.series) sj[k] = v;
            cj["series"] = sj;
        }
        if (!c.note.empty()) cj["note"] = c.note;
        checks_j.push_back(cj);
    }
    j["checks"] = checks_j;
    j["wall_time_s"] = wall_time_s;
    return j.dump(indent) + "\n";
}

}  // namespace waistlab
