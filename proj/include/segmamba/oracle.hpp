#pragma once

// Slow, direct reference implementations used to cross-check the kernels.
// None of these share code paths with the library routines they verify.

#include <cstdint>
#include <vector>

#include "segmamba/tensor.hpp"
#include "segmamba/volio.hpp"

namespace segmamba::oracle {

/// Textbook nested-loop zero-padded cross-correlation, one output at a time.
Tensor conv3d_direct(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec);

/// Scatter form of the transposed convolution.
Tensor transposed_conv3d_scatter(const Tensor& x, const Tensor& weight, const Tensor& bias, const ConvSpec& spec);

double inner_product(const Tensor& a, const Tensor& b);

/// Largest |a−b| divided by max(max|b|, tiny).
double relative_error(const Tensor& a, const Tensor& b);

Tensor random_tensor(const Shape& shape, std::uint64_t seed, float lo = -1.0f, float hi = 1.0f);

struct OverlapCounts {
    std::size_t pred = 0, ref = 0, intersection = 0, union_ = 0;
};
/// Counts via explicit index sets.
OverlapCounts overlap_by_sets(const LabelMask& pred, const LabelMask& ref, std::uint8_t label);

/// All-pairs surface distances with the 6-neighbour surface rule, pooled in
/// both directions, 95th percentile by linear interpolation.
double hd95_brute_force(const LabelMask& pred, const LabelMask& ref, std::uint8_t label, const Spacing3& spacing);

LabelMask random_mask(const Dims3& dims, std::uint64_t seed, double density, std::uint8_t num_labels = 2);

} // namespace segmamba::oracle
