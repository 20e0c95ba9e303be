#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "segmamba/params.hpp"
#include "segmamba/sscan.hpp"
#include "segmamba/tensor.hpp"

namespace segmamba {

enum class Direction { forward, reverse, inter_slice };

inline constexpr Direction kAllDirections[] = {Direction::forward, Direction::reverse, Direction::inter_slice};

std::string_view to_string(Direction dir);
Direction direction_from_string(std::string_view name);

struct ModelConfig {
    std::size_t in_channels = 1;
    std::size_t num_classes = 2;
    std::vector<std::size_t> stage_channels{48, 96, 192, 384};
    std::vector<std::size_t> blocks_per_stage{2, 2, 2, 2};
    std::size_t d_state = 16;
    std::size_t expand = 2;
    std::size_t conv_kernel = 4;
    std::size_t dt_rank = 0;
    std::size_t scan_chunk = kDefaultScanChunk;
    std::vector<Direction> directions{Direction::forward, Direction::reverse, Direction::inter_slice};
    std::size_t mlp_ratio = 4;

    /// Throws ShapeError on inconsistent fields.
    void validate() const;
    std::size_t stages() const { return stage_channels.size(); }
    /// Spatial extents must be divisible by this.
    std::size_t spatial_multiple() const { return std::size_t{1} << stages(); }
    MambaConfig mamba(std::size_t channels) const;
    bool direction_enabled(Direction dir) const;
};

void to_json(nlohmann::json& j, const ModelConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ModelConfig& cfg);

// Layer specs shared by the forward pass and shape planning.
ConvSpec stem_depthwise_spec(std::size_t in_channels);
ConvSpec stem_pointwise_spec(std::size_t in_channels, std::size_t out_channels);
ConvSpec downsample_spec(std::size_t in_channels, std::size_t out_channels);
ConvSpec upsample_spec(std::size_t in_channels, std::size_t out_channels);
ConvSpec block_conv_spec(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);

// ---------------------------------------------------------------------------
// Parameters

enum class InitKind { uniform_fan_in, zeros, ones, mamba };

struct ParamSpec {
    std::string name;
    Shape shape;
    InitKind init;
};

/// Every parameter the configuration implies, in a fixed order.
std::vector<ParamSpec> param_schema(const ModelConfig& cfg);

/// Deterministic in (cfg, seed).
ParamStore init_weights(const ModelConfig& cfg, std::uint64_t seed);

/// Throws ParamError naming the first missing, unexpected or mis-shaped entry.
void validate_params(const ParamStore& store, const ModelConfig& cfg);

/// load_weights followed by validate_params.
ParamStore load_weights(const std::filesystem::path& manifest, const ModelConfig& cfg);

MambaBlockParams mamba_params_from(const ParamStore& store, const std::string& prefix, const MambaConfig& cfg);

// ---------------------------------------------------------------------------
// Network pieces. Volumes are [C, D, H, W]; prefixes name parameter groups.

/// Depth-wise 7³ stride-2 conv followed by a pointwise lift to stage_channels[0].
Tensor stem(const Tensor& x, const ParamStore& ps, const ModelConfig& cfg);

/// instance norm -> conv (same padding) -> ReLU.
Tensor conv_block(const Tensor& x, const ParamStore& ps, const std::string& prefix, std::size_t kernel);

/// z + fuse(conv3(z) · conv1(z)).
Tensor gsc(const Tensor& z, const ParamStore& ps, const std::string& prefix);

/// [C, D, H, W] -> [D·H·W, C] in the token order of dir.
Tensor flatten_oriented(const Tensor& z, Direction dir);
/// Inverse of flatten_oriented for the given spatial extent.
Tensor unflatten_oriented(const Tensor& tokens, Direction dir, const Extent3& extent);

/// Sum over enabled directions of unflatten(mamba(flatten(z))).
Tensor tom(const Tensor& z, const ParamStore& ps, const std::string& prefix, const ModelConfig& cfg);

/// Layer norm over channels, per voxel.
Tensor layer_norm_volume(const Tensor& z, const Tensor& gamma, const Tensor& beta);

Tensor tsmamba_block(const Tensor& z, const ParamStore& ps, const std::string& prefix, const ModelConfig& cfg);

/// Parameter-free skip filter: z · (2 − u), u = −p·ln p, p = σ(mean_c z).
Tensor fue(const Tensor& z);
/// The per-voxel multiplier 2 − u for a given channel mean.
double fue_multiplier(double channel_mean);

/// Optional per-stage shape log (name, shape) filled by the forward passes.
using ShapeTrace = std::vector<std::pair<std::string, Shape>>;

std::vector<Tensor> encoder_forward(const Tensor& x, const ParamStore& ps, const ModelConfig& cfg,
                                    ShapeTrace* trace = nullptr);
Tensor decoder_forward(const std::vector<Tensor>& features, const ParamStore& ps, const ModelConfig& cfg,
                       ShapeTrace* trace = nullptr);
/// Unnormalized logits [num_classes, D, H, W].
Tensor model_forward(const Tensor& x, const ParamStore& ps, const ModelConfig& cfg, ShapeTrace* trace = nullptr);

struct ShapePlan {
    std::vector<Shape> encoder;
    Shape output;
};

/// Feature and output shapes for an input shape, computed from the same
/// layer specs the forward pass uses, without running any kernels.
ShapePlan plan_shapes(const ModelConfig& cfg, const Shape& input);

/// Per-voxel argmax over the channel axis; ties go to the smallest label.
std::vector<std::uint8_t> argmax_labels(const Tensor& logits);

} // namespace segmamba
