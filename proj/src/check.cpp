#include "segmamba/check.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "segmamba/arch.hpp"
#include "segmamba/errors.hpp"
#include "segmamba/metrics.hpp"
#include "segmamba/oracle.hpp"
#include "segmamba/rng.hpp"
#include "segmamba/sscan.hpp"
#include "segmamba/volio.hpp"

#include <unistd.h>

namespace segmamba {

namespace {

namespace fs = std::filesystem;

CheckResult ok(std::string detail = {}) { return {true, std::move(detail)}; }
CheckResult fail(std::string detail) { return {false, std::move(detail)}; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin(),
                                                [](float x, float y) { return std::bit_cast<std::uint32_t>(x) ==
                                                                              std::bit_cast<std::uint32_t>(y); });
}

// Scan inputs with Δ in a realistic softplus range.
struct ScanCase {
    Tensor u, delta, A, B, C, D;
};

ScanCase random_scan_case(std::size_t L, std::size_t d, std::size_t N, std::uint64_t seed) {
    Rng rng(seed);
    ScanCase s{Tensor({L, d}), Tensor({L, d}), Tensor({d, N}), Tensor({L, N}), Tensor({L, N}), Tensor({d})};
    for (float& v : s.u.data()) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : s.delta.data()) v = static_cast<float>(rng.uniform(1e-3, 0.5));
    for (float& v : s.A.data()) v = static_cast<float>(-rng.uniform(0.05, 4.0));
    for (float& v : s.B.data()) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : s.C.data()) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : s.D.data()) v = static_cast<float>(rng.uniform(-1, 1));
    return s;
}

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.in_channels = 1;
    cfg.num_classes = 3;
    cfg.stage_channels = {8, 16};
    cfg.blocks_per_stage = {1, 1};
    cfg.d_state = 4;
    cfg.scan_chunk = 16;
    return cfg;
}

void zero(ParamStore& ps, const std::string& name) { ps.at(name) = Tensor::zeros(ps.at(name).shape()); }

// ---------------------------------------------------------------------------

std::vector<PropertyCheck> tensor_checks() {
    std::vector<PropertyCheck> out;
    out.push_back({"tensor", "conv3d_linearity", [] {
        const ConvSpec spec{2, 3, Extent3::cube(3), Extent3::cube(1), Extent3::cube(1), 1};
        const Tensor x = oracle::random_tensor({2, 6, 6, 6}, 1), y = oracle::random_tensor({2, 6, 6, 6}, 2);
        const Tensor w = oracle::random_tensor({3, 2, 3, 3, 3}, 3);
        const float a = 0.7f, b = -1.3f;
        Tensor mix(x.shape());
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
        const Tensor lhs = conv3d(mix, w, Tensor{}, spec);
        const Tensor cx = conv3d(x, w, Tensor{}, spec), cy = conv3d(y, w, Tensor{}, spec);
        Tensor rhs(cx.shape());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * cx[i] + b * cy[i];
        const double err = oracle::relative_error(lhs, rhs);
        return err < 1e-5 ? ok("rel " + fmt(err)) : fail("rel " + fmt(err));
    }});
    out.push_back({"tensor", "conv3d_matches_direct_oracle", [] {
        const ConvSpec specs[] = {
            {2, 4, Extent3::cube(3), Extent3::cube(1), Extent3::cube(1), 1},
            {2, 2, Extent3::cube(7), Extent3::cube(2), Extent3::cube(3), 2},
            {2, 6, {1, 2, 3}, {2, 1, 2}, {0, 1, 1}, 2},
            {2, 3, Extent3::cube(2), Extent3::cube(2), Extent3::cube(0), 1},
        };
        double worst = 0.0;
        std::uint64_t seed = 10;
        for (const auto& spec : specs) {
            const Tensor x = oracle::random_tensor({2, 8, 8, 8}, ++seed);
            const Tensor w = oracle::random_tensor(
                {spec.out_channels, spec.in_channels / spec.groups, spec.kernel.d, spec.kernel.h, spec.kernel.w}, ++seed);
            const Tensor b = oracle::random_tensor({spec.out_channels}, ++seed);
            worst = std::max(worst, oracle::relative_error(conv3d(x, w, b, spec), oracle::conv3d_direct(x, w, b, spec)));
        }
        return worst < 1e-5 ? ok("rel " + fmt(worst)) : fail("rel " + fmt(worst));
    }});
    out.push_back({"tensor", "transposed_conv3d_adjoint", [] {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            const std::size_t ci = 1 + seed % 3, co = 2 + seed % 2, n = 2 + 2 * (seed % 2);
            const ConvSpec fwd{ci, co, Extent3::cube(2), Extent3::cube(2), Extent3::cube(0), 1};
            const ConvSpec adj{co, ci, Extent3::cube(2), Extent3::cube(2), Extent3::cube(0), 1};
            const Tensor x = oracle::random_tensor({ci, n, n, n}, 100 + seed);
            const Tensor w = oracle::random_tensor({co, ci, 2, 2, 2}, 200 + seed);
            const Tensor cx = conv3d(x, w, Tensor{}, fwd);
            const Tensor y = oracle::random_tensor(cx.shape(), 300 + seed);
            const double lhs = oracle::inner_product(cx, y);
            const double rhs = oracle::inner_product(x, transposed_conv3d(y, w, Tensor{}, adj));
            worst = std::max(worst, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-30}));
        }
        return worst < 1e-4 ? ok("rel " + fmt(worst)) : fail("rel " + fmt(worst));
    }});
    out.push_back({"tensor", "layer_norm_moments", [] {
        const Tensor x = oracle::random_tensor({64, 48}, 7, -5.0f, 9.0f);
        const Tensor y = layer_norm(x, Tensor::ones({48}), Tensor::zeros({48}));
        double worst_mean = 0.0, worst_var = 0.0;
        for (std::size_t r = 0; r < 64; ++r) {
            double m = 0.0, v = 0.0;
            for (std::size_t c = 0; c < 48; ++c) m += y[r * 48 + c];
            m /= 48;
            for (std::size_t c = 0; c < 48; ++c) v += (y[r * 48 + c] - m) * (y[r * 48 + c] - m);
            v /= 48;
            worst_mean = std::max(worst_mean, std::abs(m));
            worst_var = std::max(worst_var, std::abs(v - 1.0));
        }
        const bool pass = worst_mean < 1e-5 && worst_var < 1e-3;
        return CheckResult{pass, "|mean| " + fmt(worst_mean) + ", |var-1| " + fmt(worst_var)};
    }});
    out.push_back({"tensor", "permute_reshape_roundtrip", [] {
        Rng rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            const Shape s{1 + rng.below(4), 1 + rng.below(4), 1 + rng.below(4), 1 + rng.below(4)};
            const Tensor x = oracle::random_tensor(s, 50 + trial);
            std::vector<std::size_t> p{0, 1, 2, 3};
            for (std::size_t i = 3; i > 0; --i) std::swap(p[i], p[rng.below(i + 1)]);
            std::vector<std::size_t> inv(4);
            for (std::size_t i = 0; i < 4; ++i) inv[p[i]] = i;
            if (!bit_equal(permute(permute(x, p), inv), x)) return fail("permute round-trip differs");
            if (!bit_equal(x.reshape({x.size()}).reshape(s), x)) return fail("reshape round-trip differs");
        }
        return ok();
    }});
    return out;
}

std::vector<PropertyCheck> scan_checks() {
    std::vector<PropertyCheck> out;
    out.push_back({"scan", "chunked_matches_reference", [] {
        const std::size_t lengths[] = {1, 2, 255, 256, 257, 4096};
        double worst = 0.0;
        int n = 0;
        for (std::size_t L : lengths)
            for (std::size_t d : {1, 8})
                for (std::size_t N : {1, 16}) {
                    const ScanCase s = random_scan_case(L, d, N, 1000 + n++);
                    const Tensor ref = selective_scan_ref(s.u, s.delta, s.A, s.B, s.C, s.D);
                    const Tensor chk = selective_scan_chunked(s.u, s.delta, s.A, s.B, s.C, s.D);
                    worst = std::max(worst, oracle::relative_error(chk, ref));
                }
        return worst < 1e-5 ? ok(std::to_string(n) + " instances, rel " + fmt(worst))
                            : fail("rel " + fmt(worst));
    }});
    out.push_back({"scan", "causality", [] {
        const std::size_t L = 96;
        const ScanCase s = random_scan_case(L, 4, 8, 77);
        MambaConfig mcfg;
        mcfg.d_model = 8;
        mcfg.d_state = 4;
        mcfg.chunk = 32;
        const MambaBlockParams p = init_mamba_params(mcfg, 9);
        const Tensor x = oracle::random_tensor({L, 8}, 78);
        const Tensor base_ref = selective_scan_ref(s.u, s.delta, s.A, s.B, s.C, s.D);
        const Tensor base_chk = selective_scan_chunked(s.u, s.delta, s.A, s.B, s.C, s.D, 32);
        const Tensor base_mb = mamba_block(x, p, mcfg);
        for (std::size_t t = 0; t < L; t += 7) {
            ScanCase q = s;
            q.u[t * 4 + 1] += 0.5f;
            Tensor xp = x;
            xp[t * 8 + 3] -= 0.75f;
            const Tensor r = selective_scan_ref(q.u, q.delta, q.A, q.B, q.C, q.D);
            const Tensor c = selective_scan_chunked(q.u, q.delta, q.A, q.B, q.C, q.D, 32);
            const Tensor m = mamba_block(xp, p, mcfg);
            for (std::size_t i = 0; i < t * 4; ++i) {
                if (r[i] != base_ref[i] || c[i] != base_chk[i]) return fail("scan output before t changed");
            }
            for (std::size_t i = 0; i < t * 8; ++i) {
                if (m[i] != base_mb[i]) return fail("mamba_block output before t changed");
            }
        }
        return ok();
    }});
    out.push_back({"scan", "fixed_parameter_linearity", [] {
        const ScanCase s = random_scan_case(300, 3, 8, 31);
        Tensor su = s.u;
        const float alpha = -2.5f;
        for (float& v : su.data()) v *= alpha;
        Tensor lhs = selective_scan_chunked(su, s.delta, s.A, s.B, s.C, s.D);
        Tensor rhs = selective_scan_chunked(s.u, s.delta, s.A, s.B, s.C, s.D);
        for (float& v : rhs.data()) v *= alpha;
        const double err = oracle::relative_error(lhs, rhs);
        return err < 1e-5 ? ok("rel " + fmt(err)) : fail("rel " + fmt(err));
    }});
    out.push_back({"scan", "impulse_decay", [] {
        const std::size_t L = 64;
        Tensor u({L, 1}), delta({L, 1}, 0.3f), B({L, 1}, 1.0f), C({L, 1}, 1.0f);
        u[0] = 1.0f;
        const Tensor y = selective_scan_ref(u, delta, Tensor::from({1, 1}, {-0.8f}), B, C, Tensor::zeros({1}));
        for (std::size_t t = 1; t < L; ++t) {
            if (std::abs(y[t]) > std::abs(y[t - 1])) return fail("impulse response grew at t=" + std::to_string(t));
        }
        return ok();
    }});
    out.push_back({"scan", "attention_rows_stochastic", [] {
        const Tensor w = attention_weights(oracle::random_tensor({50, 16}, 3, -2.0f, 2.0f));
        double worst = 0.0;
        for (std::size_t i = 0; i < 50; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 50; ++j) s += w[i * 50 + j];
            worst = std::max(worst, std::abs(s - 1.0));
        }
        return worst < 1e-6 ? ok("|sum-1| " + fmt(worst)) : fail("|sum-1| " + fmt(worst));
    }});
    return out;
}

std::vector<PropertyCheck> arch_checks() {
    std::vector<PropertyCheck> out;
    out.push_back({"arch", "residual_identities", [] {
        const ModelConfig cfg = tiny_config();
        ParamStore ps = init_weights(cfg, 4);
        const Tensor z = oracle::random_tensor({8, 4, 4, 4}, 12);
        const std::string p = "enc0.block0";
        zero(ps, p + ".gsc.fuse.conv.weight");
        zero(ps, p + ".gsc.fuse.conv.bias");
        if (!bit_equal(gsc(z, ps, p + ".gsc"), z)) return fail("gsc with zeroed fusion is not the identity");
        for (Direction d : cfg.directions) {
            std::string name(to_string(d));
            std::replace(name.begin(), name.end(), '-', '_');
            zero(ps, p + ".tom." + name + ".out_proj.weight");
            zero(ps, p + ".tom." + name + ".out_proj.bias");
        }
        zero(ps, p + ".mlp.fc2.weight");
        zero(ps, p + ".mlp.fc2.bias");
        if (!bit_equal(tsmamba_block(z, ps, p, cfg), z)) return fail("zeroed tsmamba_block is not the identity");
        return ok();
    }});
    out.push_back({"arch", "fue_multiplier_bound", [] {
        // Channel 1 is all ones, so fue's output there is the multiplier itself.
        const std::size_t n = 32768;
        Tensor z({2, 32, 32, 32});
        Rng rng(8);
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = static_cast<float>(rng.uniform(-60.0, 60.0));
            z[n + i] = 1.0f;
        }
        const Tensor y = fue(z);
        const float lo = static_cast<float>(2.0 - std::exp(-1.0)), hi = 2.0f;
        for (std::size_t i = 0; i < n; ++i) {
            const float m = y[n + i];
            if (m < std::nextafter(lo, 0.0f) || m > hi) return fail("multiplier " + std::to_string(m) + " out of range");
        }
        const double spot = fue_multiplier(0.0);
        return std::abs(spot - 1.653426) < 1e-6 ? ok() : fail("spot value " + std::to_string(spot));
    }});
    out.push_back({"arch", "flatten_roundtrip", [] {
        const Shape shapes[] = {{3, 1, 4, 5}, {2, 4, 1, 3}, {4, 2, 3, 1}, {1, 1, 1, 1}, {5, 3, 4, 2}};
        std::uint64_t seed = 60;
        for (const auto& s : shapes) {
            const Tensor z = oracle::random_tensor(s, ++seed);
            for (Direction d : kAllDirections) {
                if (!bit_equal(unflatten_oriented(flatten_oriented(z, d), d, spatial_extent(z)), z)) {
                    return fail(std::string("round-trip failed for ") + std::string(to_string(d)) + " " + to_string(s));
                }
            }
        }
        return ok();
    }});
    out.push_back({"arch", "global_receptive_field", [] {
        ModelConfig cfg = tiny_config();
        cfg.directions = {Direction::forward, Direction::reverse};
        const ParamStore ps = init_weights(cfg, 21);
        const Tensor z = oracle::random_tensor({8, 3, 4, 5}, 22);
        const std::size_t L = 60, mid = 27;
        const Tensor base = flatten_oriented(tom(z, ps, "enc0.block0.tom", cfg), Direction::forward);
        Tensor zp = flatten_oriented(z, Direction::forward);
        zp[mid * 8 + 2] += 1.0f;
        zp = unflatten_oriented(zp, Direction::forward, spatial_extent(z));
        const Tensor pert = flatten_oriented(tom(zp, ps, "enc0.block0.tom", cfg), Direction::forward);
        auto token_changed = [&](const Tensor& a, const Tensor& b, std::size_t t) {
            for (std::size_t c = 0; c < 8; ++c)
                if (a[t * 8 + c] != b[t * 8 + c]) return true;
            return false;
        };
        if (!token_changed(base, pert, 0) || !token_changed(base, pert, L - 1)) {
            return fail("bidirectional ToM did not reach both ends");
        }
        cfg.directions = {Direction::forward};
        const Tensor fb = flatten_oriented(tom(z, ps, "enc0.block0.tom", cfg), Direction::forward);
        const Tensor fp = flatten_oriented(tom(zp, ps, "enc0.block0.tom", cfg), Direction::forward);
        for (std::size_t t = 0; t < mid; ++t) {
            if (token_changed(fb, fp, t)) return fail("forward-only ToM leaked to earlier token");
        }
        return ok();
    }});
    out.push_back({"arch", "shape_pyramid", [] {
        ModelConfig cfg;
        cfg.in_channels = 4;
        cfg.num_classes = 3;
        for (std::size_t n : {16, 32, 48, 64, 128}) {
            const ShapePlan plan = plan_shapes(cfg, {4, n, n, n});
            for (std::size_t s = 0; s < 4; ++s) {
                const std::size_t e = n >> (s + 1);
                if (plan.encoder[s] != Shape{cfg.stage_channels[s], e, e, e}) {
                    return fail("encoder stage " + std::to_string(s) + " shape " + to_string(plan.encoder[s]));
                }
            }
            if (plan.output != Shape{3, n, n, n}) return fail("output shape " + to_string(plan.output));
        }
        const ModelConfig tiny = tiny_config();
        const ParamStore ps = init_weights(tiny, 1);
        ShapeTrace trace;
        const Tensor logits = model_forward(oracle::random_tensor({1, 8, 8, 8}, 2), ps, tiny, &trace);
        const ShapePlan plan = plan_shapes(tiny, {1, 8, 8, 8});
        if (logits.shape() != plan.output) return fail("forward disagrees with plan");
        return ok();
    }});
    out.push_back({"arch", "forward_determinism", [] {
        const ModelConfig cfg = tiny_config();
        const ParamStore a = init_weights(cfg, 33), b = init_weights(cfg, 33);
        if (!(a == b)) return fail("init not deterministic");
        const Tensor x = oracle::random_tensor({1, 8, 8, 8}, 34);
        return bit_equal(model_forward(x, a, cfg), model_forward(x, b, cfg)) ? ok() : fail("logits differ");
    }});
    out.push_back({"arch", "weights_roundtrip", [] {
        const ModelConfig cfg = tiny_config();
        const ParamStore ps = init_weights(cfg, 5);
        const fs::path dir = fs::temp_directory_path() / ("segmamba_check_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        save_weights(ps, dir / "w.json");
        const ParamStore back = load_weights(dir / "w.json", cfg);
        fs::remove_all(dir);
        return back == ps ? ok() : fail("weights changed across save/load");
    }});
    return out;
}

std::vector<PropertyCheck> volio_checks() {
    std::vector<PropertyCheck> out;
    out.push_back({"volio", "volume_and_mask_roundtrip", [] {
        const fs::path dir = fs::temp_directory_path() / ("segmamba_check_vol_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        Volume v = Volume::from_tensor(oracle::random_tensor({2, 3, 4, 5}, 9), {3.75, 0.826, 0.826});
        write_volume(v, dir / "v.json", dir / "v.raw");
        const Volume vb = read_volume(dir / "v.json", dir / "v.raw");
        LabelMask m = oracle::random_mask({3, 4, 5}, 4, 0.4, 4);
        m.spacing = v.spacing;
        write_mask(m, dir / "m.json", dir / "m.raw");
        const LabelMask mb = read_mask(dir / "m.json", dir / "m.raw");
        fs::remove_all(dir);
        if (!(vb == v)) return fail("volume changed across write/read");
        return mb == m ? ok() : fail("mask changed across write/read");
    }});
    out.push_back({"volio", "pad_adds_only_zeros", [] {
        const Volume v = Volume::from_tensor(oracle::random_tensor({2, 5, 7, 3}, 10, 0.5f, 1.0f));
        const PaddedVolume p = pad_to_multiple(v, 4);
        if (p.volume.dims != Dims3{8, 8, 4}) return fail("padded dims wrong");
        if (!(crop(p.volume, p.original_dims) == v)) return fail("original sub-block altered");
        const double total = std::accumulate(p.volume.data.begin(), p.volume.data.end(), 0.0);
        const double orig = std::accumulate(v.data.begin(), v.data.end(), 0.0);
        std::size_t nonzero = 0;
        for (float x : p.volume.data) nonzero += x != 0.0f;
        return nonzero == v.data.size() && std::abs(total - orig) < 1e-9 ? ok() : fail("padding is not all zeros");
    }});
    return out;
}

std::vector<PropertyCheck> metrics_checks() {
    std::vector<PropertyCheck> out;
    out.push_back({"metrics", "overlap_oracle_and_relation", [] {
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const Dims3 dims{1 + seed % 6, 2 + seed % 5, 3 + seed % 4};
            const LabelMask p = oracle::random_mask(dims, 2 * seed, 0.05 + 0.02 * seed);
            const LabelMask r = oracle::random_mask(dims, 2 * seed + 1, 0.3);
            const auto c = oracle::overlap_by_sets(p, r, 1);
            const double d = dice(p, r, 1), j = iou(p, r, 1);
            const double d_ref = c.pred + c.ref ? 2.0 * c.intersection / static_cast<double>(c.pred + c.ref) : 1.0;
            const double j_ref = c.union_ ? c.intersection / static_cast<double>(c.union_) : 1.0;
            if (d != d_ref || j != j_ref) return fail("overlap counts disagree with set oracle");
            if (d != dice(r, p, 1) || j != iou(r, p, 1)) return fail("asymmetric overlap metric");
            if (std::abs(d - 2 * j / (1 + j)) > 1e-9) return fail("dice/iou relation broken");
        }
        return ok();
    }});
    out.push_back({"metrics", "hd95_matches_brute_force", [] {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const Dims3 dims{2 + seed % 7, 3 + seed % 5, 2 + seed % 6};
            const Spacing3 sp{1.0 + (seed % 3), 0.5 + 0.25 * (seed % 2), 1.0};
            const LabelMask p = oracle::random_mask(dims, 100 + seed, 0.35);
            const LabelMask r = oracle::random_mask(dims, 200 + seed, 0.35);
            try {
                const double a = hd95(p, r, 1, sp), b = oracle::hd95_brute_force(p, r, 1, sp);
                worst = std::max(worst, std::abs(a - b));
                if (std::abs(hd95(r, p, 1, sp) - a) > 1e-12) return fail("hd95 not symmetric");
            } catch (const UndefinedMetric&) {
            }
        }
        return worst <= 1e-9 ? ok("max |diff| " + fmt(worst)) : fail("max |diff| " + fmt(worst));
    }});
    return out;
}

} // namespace

std::vector<PropertyCheck> property_checks() {
    std::vector<PropertyCheck> all;
    for (auto group : {tensor_checks(), scan_checks(), arch_checks(), volio_checks(), metrics_checks()}) {
        for (auto& c : group) all.push_back(std::move(c));
    }
    const char* fault = std::getenv(kInjectFaultEnv);
    if (fault && *fault) {
        all.push_back({"harness", "injected_fault", [] { return fail("fault injected via environment"); }});
    }
    return all;
}

int run_checks(std::string_view filter, std::ostream& os) {
    int failures = 0, ran = 0;
    for (const auto& check : property_checks()) {
        const std::string full = check.full_name();
        const bool selected = filter.empty() || check.module == filter || full.starts_with(filter) ||
                              check.module == "harness";
        if (!selected) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = check.run();
        } catch (const std::exception& e) {
            r = fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !r.pass;
        os << (r.pass ? "PASS " : "FAIL ") << full;
        if (!r.detail.empty()) os << "  (" << r.detail << ")";
        os << "  [" << std::fixed << std::setprecision(2) << secs << "s]\n";
        os.unsetf(std::ios::fixed);
    }
    os << ran - failures << "/" << ran << " properties passed\n";
    return failures;
}

} // namespace segmamba
