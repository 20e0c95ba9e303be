#pragma once

#include <cstddef>
#include <cstdint>

#include "segmamba/tensor.hpp"

namespace segmamba {

/// Selective state-space recurrence, one channel c at a time:
///
///   h_0 = 0
///   h_t = exp(Δ_tc · A_c) ⊙ h_{t-1} + Δ_tc · B_t · u_tc
///   y_tc = ⟨C_t, h_t⟩ + D_c · u_tc
///
/// Shapes: u, delta [L, d]; A [d, N]; B, C [L, N]; d_skip [d].
/// State is kept in double precision. Throws DomainError if any Δ <= 0.
Tensor selective_scan_ref(const Tensor& u, const Tensor& delta, const Tensor& A, const Tensor& B, const Tensor& C,
                          const Tensor& d_skip);

inline constexpr std::size_t kDefaultScanChunk = 256;

/// Same result as selective_scan_ref, evaluated as independent chunks whose
/// boundary states are stitched together with the associative composition
/// (a2, b2) ∘ (a1, b1) = (a2·a1, a2·b1 + b2). Chunks run in parallel when
/// threads are enabled; the carry pass is sequential.
Tensor selective_scan_chunked(const Tensor& u, const Tensor& delta, const Tensor& A, const Tensor& B, const Tensor& C,
                              const Tensor& d_skip, std::size_t chunk = kDefaultScanChunk);

enum class ScanKind { chunked, reference };

struct MambaConfig {
    std::size_t d_model = 48;
    std::size_t expand = 2;
    std::size_t d_state = 16;
    std::size_t conv_kernel = 4;
    /// Rank of the Δ projection; 0 means ceil(d_model / 16).
    std::size_t dt_rank = 0;
    std::size_t chunk = kDefaultScanChunk;
    ScanKind scan = ScanKind::chunked;

    std::size_t d_inner() const { return expand * d_model; }
    std::size_t effective_dt_rank() const { return dt_rank ? dt_rank : (d_model + 15) / 16; }
};

struct MambaBlockParams {
    Tensor in_proj_w;   // [2·d_inner, d_model]
    Tensor in_proj_b;   // [2·d_inner]
    Tensor conv_w;      // [d_inner, conv_kernel]
    Tensor conv_b;      // [d_inner]
    Tensor x_proj_w;    // [dt_rank + 2·d_state, d_inner]
    Tensor dt_proj_w;   // [d_inner, dt_rank]
    Tensor dt_proj_b;   // [d_inner]
    Tensor A_log;       // [d_inner, d_state]
    Tensor d_skip;      // [d_inner]
    Tensor out_proj_w;  // [d_model, d_inner]
    Tensor out_proj_b;  // [d_model]

    /// Throws ShapeError naming the first inconsistent field.
    void validate(const MambaConfig& cfg) const;
};

/// Shapes of every MambaBlockParams field for cfg, in declaration order.
struct NamedShape {
    const char* name;
    Shape shape;
};
std::vector<NamedShape> mamba_param_shapes(const MambaConfig& cfg);

/// Uniform fan-in projections, A_log = log [1..N] per row, D = 1,
/// Δ bias = softplus⁻¹(U[1e-3, 1e-1]). Deterministic in seed.
MambaBlockParams init_mamba_params(const MambaConfig& cfg, std::uint64_t seed);

/// x [L, d_model] -> [L, d_model]. Token-causal.
Tensor mamba_block(const Tensor& x, const MambaBlockParams& p, const MambaConfig& cfg);

/// Analytic upper bound on bytes allocated by one mamba_block call.
std::uint64_t mamba_block_scratch_bytes(std::size_t L, const MambaConfig& cfg);

inline constexpr std::uint64_t kDefaultAttentionBudget = 4ull << 30;

/// Bytes held by naive_attention: the L×L weight matrix plus output.
std::uint64_t attention_scratch_bytes(std::size_t L, std::size_t C);

/// Row-stochastic matrix softmax(x xᵀ / √C), [L, L].
Tensor attention_weights(const Tensor& x, std::uint64_t budget_bytes = kDefaultAttentionBudget);

/// softmax(x xᵀ / √C) · x, single head, no projections.
/// Throws BudgetExceeded when attention_scratch_bytes exceeds the budget.
Tensor naive_attention(const Tensor& x, std::uint64_t budget_bytes = kDefaultAttentionBudget);

} // namespace segmamba
