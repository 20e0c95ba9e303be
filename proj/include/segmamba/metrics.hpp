#pragma once

#include <cstdint>
#include <vector>

#include "segmamba/volio.hpp"

namespace segmamba {

/// 2|P∩R| / (|P|+|R|); 1 when both are empty, 0 when exactly one is.
double dice(const LabelMask& pred, const LabelMask& ref, std::uint8_t label);

/// |P∩R| / |P∪R|; 1 when both are empty.
double iou(const LabelMask& pred, const LabelMask& ref, std::uint8_t label);

/// Voxels carrying label with at least one 6-neighbour that does not, or that
/// touch the volume boundary.
std::vector<bool> surface_voxels(const LabelMask& mask, std::uint8_t label);

/// 95th percentile (linear interpolation, rank 0.95·(n−1)) of the pooled
/// surface-to-surface nearest distances in both directions, in the physical
/// units of spacing (z, y, x). Throws UndefinedMetric when either mask has no
/// voxel with the label.
double hd95(const LabelMask& pred, const LabelMask& ref, std::uint8_t label, const Spacing3& spacing);

/// Squared Euclidean distance (physical units) from every voxel to the nearest
/// feature voxel; +inf everywhere when there are no features.
std::vector<double> squared_distance_transform(const std::vector<bool>& features, const Dims3& dims,
                                               const Spacing3& spacing);

/// Linear-interpolation percentile of an unsorted sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

} // namespace segmamba
