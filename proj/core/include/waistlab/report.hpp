#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace waistlab {

enum class CheckStatus { Pass, Fail, Indeterminate };

/// One verified statement: the compared quantities, their uncertainties, and
/// the verdict at the stated tolerance.
struct CheckRecord {
    std::string name;
    std::string tag;  // which inequality or construction the check certifies
    CheckStatus status = CheckStatus::Indeterminate;
    double tolerance = 0.0;
    std::map<std::string, double> quantities;
    std::map<std::string, double> std_errors;
    std::map<std::string, std::vector<double>> series;  // grids, schedules, traces
    std::string note;
};

struct VerificationReport {
    std::string command;
    std::uint64_t seed = 0;
    std::string subject;
    std::vector<CheckRecord> checks;
    double wall_time_s = 0.0;

    void add(CheckRecord rec) { checks.push_back(std::move(rec)); }
    bool all_pass(bool strict = false) const;
    bool any_fail() const;

    /// Deterministic id derived from (command, seed).
    std::string run_id() const;

    /// Serialized document; identical runs differ only in wall_time_s.
    std::string to_json_string(int indent = 2) const;
};

const char* to_string(CheckStatus s);

}  // namespace waistlab
