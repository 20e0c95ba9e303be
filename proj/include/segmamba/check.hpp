#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace segmamba {

struct CheckResult {
    bool pass = false;
    std::string detail;
};

struct PropertyCheck {
    std::string module;  // tensor, scan, arch, volio, metrics, harness
    std::string name;
    std::function<CheckResult()> run;

    std::string full_name() const { return module + "." + name; }
};

/// Setting this environment variable to a non-empty value adds a property
/// that always fails, so the harness's own failure path can be exercised.
inline constexpr const char* kInjectFaultEnv = "SEGMAMBA_CHECK_INJECT_FAULT";

/// Every invariant/oracle property, sized to finish in seconds.
std::vector<PropertyCheck> property_checks();

/// Runs checks whose module equals filter or whose full name starts with it
/// (empty filter runs everything). Prints one PASS/FAIL line per check and
/// returns the number of failures.
int run_checks(std::string_view filter, std::ostream& os);

} // namespace segmamba
