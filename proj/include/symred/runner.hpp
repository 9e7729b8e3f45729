#ifndef SYMRED_RUNNER_HPP
#define SYMRED_RUNNER_HPP

#include "symred/catalog.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace symred {

struct RunConfig {
    uint64_t seed = 42;
    double tol_pass = 1e-9;
    double tol_fail = 1e-6;
    int samples = 20;
    CheckMode mode = CheckMode::Both;
    std::string filter;      // id glob, empty = all
    std::string kind_filter; // exact kind, empty = all
    std::string format = "text";
    int jobs = 1;
    std::string catalog_path; // directory of .cat files; empty = bundled default
};

struct CaseResult {
    std::string id;
    std::string kind;
    std::string status; // verdict or outcome
    std::string stage;
    double max_residual = 0.0;
    int samples = 0;
    double seconds = 0.0;
    std::string notes;
    std::string expect;
    bool ok = false;           // expectation met
    bool engine_error = false; // exception during execution
};

/// Execute one record with per-case deterministic randomness derived from
/// (config seed, case id).
CaseResult run_case(const CaseRecord& rec, const RunConfig& cfg);

struct RunReport {
    std::vector<CaseResult> results;
    uint64_t seed = 0;
    /// 0: all expectations met; 1: some mismatch; 2: engine errors.
    int exit_code() const;
    std::string to_text() const;
    std::string to_json() const; // includes a timestamp field
};

/// Run the selected cases, in parallel when cfg.jobs > 1; the report order
/// and every verdict are independent of the schedule.
RunReport run_cases(const std::vector<CaseRecord>& records, const RunConfig& cfg);

} // namespace symred

#endif
