#include "segmamba/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "segmamba/errors.hpp"
#include "segmamba/oracle.hpp"
#include "segmamba/rng.hpp"

namespace segmamba {

std::uint64_t tri_branch_scratch_bytes(std::size_t L, const MambaConfig& cfg) {
    const std::uint64_t tokens = static_cast<std::uint64_t>(L) * cfg.d_model * sizeof(float);
    // input, reversed copy, one branch output, running sum
    return 4 * tokens + mamba_block_scratch_bytes(L, cfg);
}

namespace {

template <typename Fn>
double best_of(int repeats, Fn&& fn) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, repeats); ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

Tensor reversed_rows(const Tensor& x) {
    const std::size_t L = x.dim(0), C = x.dim(1);
    Tensor out(x.shape());
    for (std::size_t t = 0; t < L; ++t) std::copy_n(x.ptr() + (L - 1 - t) * C, C, out.ptr() + t * C);
    return out;
}

} // namespace

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
    MambaConfig cfg;
    cfg.d_model = opts.channels;
    const MambaBlockParams branch[3] = {init_mamba_params(cfg, derive_seed(opts.seed, "bench.forward")),
                                        init_mamba_params(cfg, derive_seed(opts.seed, "bench.reverse")),
                                        init_mamba_params(cfg, derive_seed(opts.seed, "bench.inter_slice"))};
    std::vector<BenchRow> rows;
    for (std::size_t L : opts.lengths) {
        const Tensor x = oracle::random_tensor({L, opts.channels}, derive_seed(opts.seed, "bench.x" + std::to_string(L)));
        if (opts.run_scan) {
            BenchRow row{"tom_scan", L, opts.channels, 0.0, tri_branch_scratch_bytes(L, cfg), "ok"};
            // Long sequences are timed once.
            const int repeats = L > 65536 ? 1 : opts.repeats;
            row.seconds = best_of(repeats, [&] {
                Tensor sum = mamba_block(x, branch[0], cfg);
                const Tensor rev = reversed_rows(mamba_block(reversed_rows(x), branch[1], cfg));
                sum = binary(sum, rev, Binary::add);
                sum = binary(sum, mamba_block(x, branch[2], cfg), Binary::add);
            });
            rows.push_back(row);
        }
        if (opts.run_attention) {
            BenchRow row{"attention", L, opts.channels, 0.0, attention_scratch_bytes(L, opts.channels), "ok"};
            if (row.peak_bytes > opts.budget_bytes) {
                try {
                    naive_attention(x, opts.budget_bytes);
                    row.status = "ok";
                } catch (const BudgetExceeded&) {
                    row.status = "OOM-by-policy";
                    row.seconds = std::numeric_limits<double>::quiet_NaN();
                }
            } else {
                row.seconds = best_of(opts.repeats, [&] { naive_attention(x, opts.budget_bytes); });
            }
            rows.push_back(row);
        }
    }
    return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
    os << "op,L,channels,seconds,peak_bytes,status\n";
    for (const auto& r : rows) {
        os << r.op << ',' << r.length << ',' << r.channels << ',';
        if (std::isnan(r.seconds)) {
            os << "NA";
        } else {
            os << r.seconds;
        }
        os << ',' << r.peak_bytes << ',' << r.status << '\n';
    }
}

double loglog_slope(const std::vector<BenchRow>& rows, const std::string& op) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.op != op || r.status != "ok" || !(r.seconds > 0.0)) continue;
        const double x = std::log(static_cast<double>(r.length)), y = std::log(r.seconds);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace segmamba
