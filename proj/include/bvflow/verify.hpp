#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bvflow {

// Built-in verification suite.  Each criterion is pinned to a protocol and a
// tolerance here, in code; `quick` switches to a reduced protocol (shorter
// horizons, fewer seeds/paths, doubled tolerances) that is still fully
// deterministic for a given seed at any thread count.
struct VerifyOptions {
    bool quick = false;
    int threads = 1;
    std::uint64_t seed = 1;
    bool force_fail = false;      // test hook: perturbs the smooth-drift formula target
    std::string out_dir;          // empty: no report file
    bool include_determinism = true; // internal: the determinism check disables itself recursively
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string details;
};

std::vector<int> criterion_ids(); // {1..9}

CriterionResult run_criterion(int id, const VerifyOptions& opt);

// Runs all criteria, prints one PASS/FAIL line each to `log`, writes
// verify_report.json into out_dir when set.  Returns the number of failures.
int run_verification(const VerifyOptions& opt, std::ostream& log);

// The serialized report for a given option set (used by the determinism
// criterion, which compares these byte-wise across thread counts).
std::string verification_report_text(const VerifyOptions& opt);

} // namespace bvflow
