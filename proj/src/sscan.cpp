#include "segmamba/sscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "segmamba/errors.hpp"
#include "segmamba/parallel.hpp"
#include "segmamba/rng.hpp"

namespace segmamba {

namespace {

struct ScanDims {
    std::size_t L, d, N;
};

ScanDims check_scan_args(const Tensor& u, const Tensor& delta, const Tensor& A, const Tensor& B, const Tensor& C,
                         const Tensor& d_skip) {
    if (u.rank() != 2) {
        throw ShapeError("scan input u must be [L, d], got " + to_string(u.shape()));
    }
    const std::size_t L = u.dim(0), d = u.dim(1);
    if (A.rank() != 2 || A.dim(0) != d) {
        throw ShapeError("scan A must be [" + std::to_string(d) + ", N], got " + to_string(A.shape()));
    }
    const std::size_t N = A.dim(1);
    if (delta.shape() != u.shape()) {
        throw ShapeError("scan delta " + to_string(delta.shape()) + " must match u " + to_string(u.shape()));
    }
    if (B.shape() != Shape{L, N} || C.shape() != Shape{L, N}) {
        throw ShapeError("scan B/C must be [" + std::to_string(L) + ", " + std::to_string(N) + "], got " +
                         to_string(B.shape()) + " and " + to_string(C.shape()));
    }
    if (d_skip.shape() != Shape{d}) {
        throw ShapeError("scan D must be [" + std::to_string(d) + "], got " + to_string(d_skip.shape()));
    }
    for (std::size_t i = 0; i < delta.size(); ++i) {
        if (!(delta[i] > 0.0f)) {
            throw DomainError("scan step delta must be positive, got " + std::to_string(delta[i]) + " at index " +
                              std::to_string(i));
        }
    }
    return {L, d, N};
}

// Runs the recurrence for channel c over tokens [t0, t1) starting from state h,
// writing outputs when y != nullptr. h is updated in place.
void scan_span(const Tensor& u, const Tensor& delta, const Tensor& A, const Tensor& B, const Tensor& C,
               const Tensor& d_skip, const ScanDims& dims, std::size_t c, std::size_t t0, std::size_t t1, double* h,
               Tensor* y) {
    const std::size_t d = dims.d, N = dims.N;
    const float* a_row = A.ptr() + c * N;
    const double dc = d_skip[c];
    for (std::size_t t = t0; t < t1; ++t) {
        const double dt = delta[t * d + c];
        const double ut = u[t * d + c];
        const float* b = B.ptr() + t * N;
        const float* cm = C.ptr() + t * N;
        double acc = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            h[n] = std::exp(dt * a_row[n]) * h[n] + dt * b[n] * ut;
            acc += cm[n] * h[n];
        }
        if (y) {
            (*y)[t * d + c] = static_cast<float>(acc + dc * ut);
        }
    }
}

} // namespace

Tensor selective_scan_ref(const Tensor& u, const Tensor& delta, const Tensor& A, const Tensor& B, const Tensor& C,
                          const Tensor& d_skip) {
    const ScanDims dims = check_scan_args(u, delta, A, B, C, d_skip);
    Tensor y({dims.L, dims.d});
    std::vector<double> h(dims.N);
    for (std::size_t c = 0; c < dims.d; ++c) {
        std::fill(h.begin(), h.end(), 0.0);
        scan_span(u, delta, A, B, C, d_skip, dims, c, 0, dims.L, h.data(), &y);
    }
    return y;
}

Tensor selective_scan_chunked(const Tensor& u, const Tensor& delta, const Tensor& A, const Tensor& B, const Tensor& C,
                              const Tensor& d_skip, std::size_t chunk) {
    const ScanDims dims = check_scan_args(u, delta, A, B, C, d_skip);
    if (chunk == 0) {
        throw ShapeError("scan chunk size must be positive");
    }
    const std::size_t L = dims.L, d = dims.d, N = dims.N;
    Tensor y({L, d});
    if (L == 0) return y;
    const std::size_t n_chunks = (L + chunk - 1) / chunk;
    const std::size_t state = d * N;

    // Pass 1: each chunk's composed step (a, b) over its tokens, from a zero
    // state. a is the product of the per-token decays, b the local end state.
    std::vector<double> decay(n_chunks * state, 1.0);
    std::vector<double> local(n_chunks * state, 0.0);
    parallel_for(n_chunks, [&](std::size_t k0, std::size_t k1) {
        for (std::size_t k = k0; k < k1; ++k) {
            const std::size_t t0 = k * chunk, t1 = std::min(L, t0 + chunk);
            for (std::size_t c = 0; c < d; ++c) {
                double* a = decay.data() + k * state + c * N;
                double* b = local.data() + k * state + c * N;
                const float* a_row = A.ptr() + c * N;
                for (std::size_t t = t0; t < t1; ++t) {
                    const double dt = delta[t * d + c];
                    const double ut = u[t * d + c];
                    const float* bt = B.ptr() + t * N;
                    for (std::size_t n = 0; n < N; ++n) {
                        const double step = std::exp(dt * a_row[n]);
                        a[n] *= step;
                        b[n] = step * b[n] + dt * bt[n] * ut;
                    }
                }
            }
        }
    });

    // Pass 2: sequential carry of boundary states.
    std::vector<double> carry(n_chunks * state, 0.0);
    for (std::size_t k = 1; k < n_chunks; ++k) {
        const double* prev = carry.data() + (k - 1) * state;
        const double* a = decay.data() + (k - 1) * state;
        const double* b = local.data() + (k - 1) * state;
        double* cur = carry.data() + k * state;
        for (std::size_t i = 0; i < state; ++i) {
            cur[i] = a[i] * prev[i] + b[i];
        }
    }

    // Pass 3: replay every chunk from its carried-in state and emit outputs.
    parallel_for(n_chunks, [&](std::size_t k0, std::size_t k1) {
        std::vector<double> h(N);
        for (std::size_t k = k0; k < k1; ++k) {
            const std::size_t t0 = k * chunk, t1 = std::min(L, t0 + chunk);
            for (std::size_t c = 0; c < d; ++c) {
                std::copy_n(carry.data() + k * state + c * N, N, h.begin());
                scan_span(u, delta, A, B, C, d_skip, dims, c, t0, t1, h.data(), &y);
            }
        }
    });
    return y;
}

// ---------------------------------------------------------------------------
// Mamba block

std::vector<NamedShape> mamba_param_shapes(const MambaConfig& cfg) {
    const std::size_t E = cfg.d_inner(), C = cfg.d_model, N = cfg.d_state, R = cfg.effective_dt_rank();
    return {
        {"in_proj.weight", {2 * E, C}},
        {"in_proj.bias", {2 * E}},
        {"conv1d.weight", {E, cfg.conv_kernel}},
        {"conv1d.bias", {E}},
        {"x_proj.weight", {R + 2 * N, E}},
        {"dt_proj.weight", {E, R}},
        {"dt_proj.bias", {E}},
        {"A_log", {E, N}},
        {"D", {E}},
        {"out_proj.weight", {C, E}},
        {"out_proj.bias", {C}},
    };
}

void MambaBlockParams::validate(const MambaConfig& cfg) const {
    const auto shapes = mamba_param_shapes(cfg);
    const Tensor* fields[] = {&in_proj_w, &in_proj_b, &conv_w,  &conv_b,     &x_proj_w,  &dt_proj_w,
                              &dt_proj_b, &A_log,     &d_skip,  &out_proj_w, &out_proj_b};
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (fields[i]->shape() != shapes[i].shape) {
            throw ShapeError(std::string("mamba parameter ") + shapes[i].name + " has shape " +
                             to_string(fields[i]->shape()) + ", expected " + to_string(shapes[i].shape));
        }
    }
}

MambaBlockParams init_mamba_params(const MambaConfig& cfg, std::uint64_t seed) {
    const auto shapes = mamba_param_shapes(cfg);
    Rng rng(seed);
    auto uniform_fan_in = [&](const Shape& s) {
        Tensor t(s);
        const double bound = 1.0 / std::sqrt(static_cast<double>(element_count(s) / s[0]));
        for (float& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
        return t;
    };
    MambaBlockParams p;
    p.in_proj_w = uniform_fan_in(shapes[0].shape);
    p.in_proj_b = Tensor::zeros(shapes[1].shape);
    p.conv_w = uniform_fan_in(shapes[2].shape);
    p.conv_b = Tensor::zeros(shapes[3].shape);
    p.x_proj_w = uniform_fan_in(shapes[4].shape);
    p.dt_proj_w = uniform_fan_in(shapes[5].shape);
    p.dt_proj_b = Tensor(shapes[6].shape);
    for (float& v : p.dt_proj_b.data()) {
        const double dt = rng.uniform(1e-3, 1e-1);
        v = static_cast<float>(dt + std::log(-std::expm1(-dt)));  // softplus⁻¹
    }
    p.A_log = Tensor(shapes[7].shape);
    for (std::size_t c = 0; c < cfg.d_inner(); ++c) {
        for (std::size_t n = 0; n < cfg.d_state; ++n) {
            p.A_log[c * cfg.d_state + n] = static_cast<float>(std::log(static_cast<double>(n + 1)));
        }
    }
    p.d_skip = Tensor::ones(shapes[8].shape);
    p.out_proj_w = uniform_fan_in(shapes[9].shape);
    p.out_proj_b = Tensor::zeros(shapes[10].shape);
    return p;
}

namespace {

Tensor slice_columns(const Tensor& x, std::size_t begin, std::size_t end) {
    const std::size_t L = x.dim(0), W = x.dim(1), n = end - begin;
    Tensor out({L, n});
    for (std::size_t t = 0; t < L; ++t) {
        std::copy_n(x.ptr() + t * W + begin, n, out.ptr() + t * n);
    }
    return out;
}

} // namespace

Tensor mamba_block(const Tensor& x, const MambaBlockParams& p, const MambaConfig& cfg) {
    if (x.rank() != 2 || x.dim(1) != cfg.d_model) {
        throw ShapeError("mamba_block input must be [L, " + std::to_string(cfg.d_model) + "], got " +
                         to_string(x.shape()));
    }
    p.validate(cfg);
    const std::size_t E = cfg.d_inner(), N = cfg.d_state, R = cfg.effective_dt_rank();

    const Tensor xz = linear(x, p.in_proj_w, p.in_proj_b);
    Tensor s = slice_columns(xz, 0, E);
    Tensor gate = slice_columns(xz, E, 2 * E);

    s = permute(conv1d_depthwise_causal(permute(s, {1, 0}), p.conv_w, p.conv_b), {1, 0});
    unary_inplace(s, Unary::silu);

    const Tensor x_dbl = linear(s, p.x_proj_w, Tensor{});
    Tensor delta = linear(slice_columns(x_dbl, 0, R), p.dt_proj_w, p.dt_proj_b);
    unary_inplace(delta, Unary::softplus);
    // softplus can underflow to 0 for very negative pre-activations.
    for (float& v : delta.data()) v = std::max(v, std::numeric_limits<float>::min());
    const Tensor B = slice_columns(x_dbl, R, R + N);
    const Tensor C = slice_columns(x_dbl, R + N, R + 2 * N);

    Tensor A = p.A_log;
    for (float& v : A.data()) v = -std::exp(v);

    Tensor y = cfg.scan == ScanKind::chunked ? selective_scan_chunked(s, delta, A, B, C, p.d_skip, cfg.chunk)
                                             : selective_scan_ref(s, delta, A, B, C, p.d_skip);
    unary_inplace(gate, Unary::silu);
    y = binary(y, gate, Binary::mul);
    return linear(y, p.out_proj_w, p.out_proj_b);
}

std::uint64_t mamba_block_scratch_bytes(std::size_t L, const MambaConfig& cfg) {
    const std::uint64_t E = cfg.d_inner(), C = cfg.d_model, N = cfg.d_state, R = cfg.effective_dt_rank();
    const std::uint64_t l = L;
    // float activations live at once in the worst stage of the block
    const std::uint64_t floats = l * (2 * E)       // xz
                                 + l * E * 2       // stream + gate
                                 + l * E * 2       // conv transposes
                                 + l * (R + 2 * N) // x_dbl
                                 + l * E           // delta
                                 + l * N * 2       // B, C
                                 + l * E * 2       // scan output + gated
                                 + l * C;          // output
    const std::uint64_t chunks = (l + cfg.chunk - 1) / std::max<std::size_t>(cfg.chunk, 1);
    const std::uint64_t doubles = 3 * chunks * E * N;  // decay, local, carry
    return floats * sizeof(float) + doubles * sizeof(double);
}

// ---------------------------------------------------------------------------
// Naive attention

std::uint64_t attention_scratch_bytes(std::size_t L, std::size_t C) {
    const std::uint64_t l = L;
    return l * l * sizeof(float) + l * C * sizeof(float);
}

Tensor attention_weights(const Tensor& x, std::uint64_t budget_bytes) {
    if (x.rank() != 2 || x.dim(1) == 0) {
        throw ShapeError("attention input must be [L, C], got " + to_string(x.shape()));
    }
    const std::size_t L = x.dim(0), C = x.dim(1);
    const std::uint64_t need = attention_scratch_bytes(L, C);
    if (need > budget_bytes) {
        throw BudgetExceeded("naive_attention at L=" + std::to_string(L) + " would exceed memory budget: needs " +
                             std::to_string(need) + " bytes, budget " + std::to_string(budget_bytes));
    }
    Tensor w({L, L});
    const double scale = 1.0 / std::sqrt(static_cast<double>(C));
    parallel_for(L, [&](std::size_t i0, std::size_t i1) {
        std::vector<double> row(L);
        for (std::size_t i = i0; i < i1; ++i) {
            const float* xi = x.ptr() + i * C;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < L; ++j) {
                const float* xj = x.ptr() + j * C;
                double dot = 0.0;
                for (std::size_t k = 0; k < C; ++k) dot += static_cast<double>(xi[k]) * xj[k];
                row[j] = dot * scale;
                mx = std::max(mx, row[j]);
            }
            double sum = 0.0;
            for (std::size_t j = 0; j < L; ++j) {
                row[j] = std::exp(row[j] - mx);
                sum += row[j];
            }
            float* out = w.ptr() + i * L;
            for (std::size_t j = 0; j < L; ++j) out[j] = static_cast<float>(row[j] / sum);
        }
    });
    return w;
}

Tensor naive_attention(const Tensor& x, std::uint64_t budget_bytes) {
    const Tensor w = attention_weights(x, budget_bytes);
    const std::size_t L = x.dim(0), C = x.dim(1);
    Tensor out({L, C});
    parallel_for(L, [&](std::size_t i0, std::size_t i1) {
        std::vector<double> acc(C);
        for (std::size_t i = i0; i < i1; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            const float* wi = w.ptr() + i * L;
            for (std::size_t j = 0; j < L; ++j) {
                const double p = wi[j];
                const float* xj = x.ptr() + j * C;
                for (std::size_t k = 0; k < C; ++k) acc[k] += p * xj[k];
            }
            for (std::size_t k = 0; k < C; ++k) out[i * C + k] = static_cast<float>(acc[k]);
        }
    });
    return out;
}

} // namespace segmamba
