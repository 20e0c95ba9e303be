#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace segmamba {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major float tensor. Owns its storage; copies are deep.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, float fill = 0.0f);
    Tensor(Shape shape, std::vector<float> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0f); }
    static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0f); }
    static Tensor from(Shape shape, std::initializer_list<float> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    float* ptr() noexcept { return data_.data(); }
    const float* ptr() const noexcept { return data_.data(); }

    float& operator[](std::size_t i) noexcept { return data_[i]; }
    float operator[](std::size_t i) const noexcept { return data_[i]; }

    /// Same buffer, new extents. Element order is preserved.
    Tensor reshape(Shape shape) const&;
    Tensor reshape(Shape shape) &&;

    bool operator==(const Tensor& other) const = default;

private:
    Shape shape_;
    std::vector<float> data_;
};

struct Extent3 {
    std::size_t d = 1;
    std::size_t h = 1;
    std::size_t w = 1;

    static constexpr Extent3 cube(std::size_t n) { return {n, n, n}; }
    bool operator==(const Extent3&) const = default;
};

struct ConvSpec {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    Extent3 kernel = Extent3::cube(1);
    Extent3 stride = Extent3::cube(1);
    Extent3 padding = Extent3::cube(0);
    std::size_t groups = 1;

    /// Throws ShapeError when channels are not divisible by groups or the
    /// output would be empty for the given input extents.
    Extent3 output_extent(const Extent3& in) const;
    void validate() const;
};

Extent3 spatial_extent(const Tensor& x);

// Convolutions. Inputs are [C, D, H, W]; weights [C_out, C_in/groups, kd, kh, kw].
Tensor conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec);
Shape conv3d_output_shape(const Shape& input, const ConvSpec& spec);

/// Adjoint of conv3d for kernel == stride (non-overlapping upsampling).
/// Weights [C_in, C_out, k, k, k]; out_channels/in_channels from spec are
/// read as the transposed direction (spec.in_channels == x channels).
Tensor transposed_conv3d(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec);
Shape transposed_conv3d_output_shape(const Shape& input, const ConvSpec& spec);

/// Causal depth-wise 1-d convolution over [C, L] with left padding k-1.
Tensor conv1d_depthwise_causal(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Normalization.
inline constexpr float kNormEps = 1e-5f;

/// Per-row normalization of [L, C] over the channel axis.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps = kNormEps);
/// Per-channel normalization of [C, D, H, W] over all voxels.
Tensor instance_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps = kNormEps);

enum class Unary { sigmoid, silu, relu, gelu, softplus, exp, log };
enum class Binary { add, mul };

Tensor unary(const Tensor& x, Unary kind);
void unary_inplace(Tensor& x, Unary kind);

/// Elementwise a ∘ b. b must match a's shape, or be a's shape with the
/// leading (channel) extent set to 1, in which case it is broadcast.
Tensor binary(const Tensor& a, const Tensor& b, Binary kind);

/// y = x·wᵀ + b for x [L, C_in], w [C_out, C_in], b [C_out] (b may be empty).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor permute(const Tensor& x, std::span<const std::size_t> order);
Tensor permute(const Tensor& x, std::initializer_list<std::size_t> order);
Tensor reduce_mean(const Tensor& x, std::size_t axis);

/// Concatenation along axis 0.
Tensor concat_channels(const Tensor& a, const Tensor& b);

} // namespace segmamba
