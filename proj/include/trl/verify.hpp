#pragma once

// Self-checks for `trl verify`: each suite runs its module's invariants on
// seeded random instances and reports one verdict per invariant.

#include <cstdint>
#include <string>
#include <vector>

namespace trl {

struct Verdict {
    std::string suite;
    std::string invariant;
    bool passed = true;
    std::size_t checked = 0;
    std::string counterexample;  // first failure, empty when passed
    double seconds = 0;
};

struct VerifyOptions {
    bool quick = false;
    std::uint64_t seed = 20240601;
    /// Suite whose first invariant gets a deliberately wrong comparison
    /// (harness test of the failure path). Empty for none.
    std::string inject_fault;
};

/// arith, expsum, propagator, kernel, energy, estimator.
const std::vector<std::string>& verify_suite_names();

/// `suite` is one of the names above or "all"; InvalidArgument otherwise.
std::vector<Verdict> run_verify(const std::string& suite, const VerifyOptions& opt = {});

/// {"verdicts": [...], "passed": bool}
std::string verdicts_json(const std::vector<Verdict>& verdicts);

}  // namespace trl
