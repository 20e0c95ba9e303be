#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "segmamba/sscan.hpp"

namespace segmamba {

struct BenchOptions {
    std::vector<std::size_t> lengths{256, 512, 1024, 2048, 4096};
    std::size_t channels = 48;
    std::uint64_t budget_bytes = kDefaultAttentionBudget;
    /// Timings report the fastest of this many runs.
    int repeats = 3;
    std::uint64_t seed = 0;
    bool run_scan = true;
    bool run_attention = true;
};

struct BenchRow {
    std::string op;  // "tom_scan" or "attention"
    std::size_t length = 0;
    std::size_t channels = 0;
    double seconds = 0.0;         // NaN when the op was refused
    std::uint64_t peak_bytes = 0; // analytic estimate
    std::string status;           // "ok" or "OOM-by-policy"
};

/// Scratch estimate for three Mamba branches over a length-L sequence run
/// one after another, plus the branch inputs and the running sum.
std::uint64_t tri_branch_scratch_bytes(std::size_t L, const MambaConfig& cfg);

/// Times the tri-branch Mamba scan and naive attention at every length.
/// Attention rows whose estimate exceeds the budget are refused, not run.
std::vector<BenchRow> run_bench(const BenchOptions& opts);

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

/// Least-squares slope of log(seconds) against log(length) for one op.
double loglog_slope(const std::vector<BenchRow>& rows, const std::string& op);

} // namespace segmamba
