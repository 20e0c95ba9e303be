#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "segmamba/tensor.hpp"

namespace segmamba {

using Dims3 = std::array<std::size_t, 3>;     // D, H, W
using Spacing3 = std::array<double, 3>;       // mm per voxel along z, y, x

/// Multi-channel scalar volume, channel-major then row-major (D, H, W).
struct Volume {
    Dims3 dims{1, 1, 1};
    Spacing3 spacing{1.0, 1.0, 1.0};
    std::size_t channels = 1;
    std::vector<float> data;

    std::size_t voxels() const { return dims[0] * dims[1] * dims[2]; }
    /// Throws ShapeError when dims/channels and data disagree.
    void validate() const;
    Tensor to_tensor() const;
    static Volume from_tensor(const Tensor& t, Spacing3 spacing = {1.0, 1.0, 1.0});

    bool operator==(const Volume&) const = default;
};

struct LabelMask {
    Dims3 dims{1, 1, 1};
    Spacing3 spacing{1.0, 1.0, 1.0};
    std::vector<std::uint8_t> labels;

    std::size_t voxels() const { return dims[0] * dims[1] * dims[2]; }
    void validate() const;

    bool operator==(const LabelMask&) const = default;
};

/// Sidecar header: {dims:[D,H,W], spacing:[sz,sy,sx], channels, dtype:"f32"|"u8",
/// byte_order:"little"}. The data file is raw and row-major, channel-major.
/// u8 payloads are widened to float.
Volume read_volume(const std::filesystem::path& header, const std::filesystem::path& data);
void write_volume(const Volume& v, const std::filesystem::path& header, const std::filesystem::path& data);

LabelMask read_mask(const std::filesystem::path& header, const std::filesystem::path& data);
void write_mask(const LabelMask& mask, const std::filesystem::path& header, const std::filesystem::path& data);

/// "case.json" -> "case.raw".
std::filesystem::path data_path_for(const std::filesystem::path& header);

/// Per-channel z-score with population std; std below 1e-8 is clamped, so
/// constant channels map to zero.
Volume normalize_intensity(const Volume& v);

struct PaddedVolume {
    Volume volume;
    Dims3 original_dims;
};

/// Zero-pads the high end of each axis up to the next multiple of m.
PaddedVolume pad_to_multiple(const Volume& v, std::size_t m);
Volume crop(const Volume& v, const Dims3& dims);
LabelMask crop(const LabelMask& mask, const Dims3& dims);

} // namespace segmamba
