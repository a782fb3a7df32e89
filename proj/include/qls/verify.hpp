// verify.hpp — built-in self-checks: golden closed forms, cross-method
// consistency, conservation properties, and deliberate fault injection.

#pragma once

#include "qls/types.hpp"

#include <string>
#include <vector>

namespace qls::verify {

struct VerifyCheck {
    std::string name;
    bool pass = false;
    double residual = 0.0;  // measured figure of merit
    double threshold = 0.0; // pass bound (direction depends on the check)
    std::string note;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass() const;
};

// Runs the full battery. Never throws: individual check failures (including
// exceptions) are recorded as failing entries.
VerifyReport run_all();

// One line per check, suitable for terminal output.
std::string format_report(const VerifyReport& report);

} // namespace qls::verify
