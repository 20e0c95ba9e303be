#include "segmamba/volio.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "segmamba/errors.hpp"

namespace segmamba {

namespace fs = std::filesystem;
using nlohmann::json;

void Volume::validate() const {
    if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0 || channels == 0) {
        throw ShapeError("volume dims and channels must be positive");
    }
    if (data.size() != channels * voxels()) {
        throw ShapeError("volume holds " + std::to_string(data.size()) + " values, expected " +
                         std::to_string(channels * voxels()));
    }
}

Tensor Volume::to_tensor() const {
    validate();
    return Tensor({channels, dims[0], dims[1], dims[2]}, data);
}

Volume Volume::from_tensor(const Tensor& t, Spacing3 spacing) {
    if (t.rank() != 4) throw ShapeError("volume tensor must be [C,D,H,W], got " + to_string(t.shape()));
    Volume v;
    v.channels = t.dim(0);
    v.dims = {t.dim(1), t.dim(2), t.dim(3)};
    v.spacing = spacing;
    v.data.assign(t.data().begin(), t.data().end());
    return v;
}

void LabelMask::validate() const {
    if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) throw ShapeError("mask dims must be positive");
    if (labels.size() != voxels()) {
        throw ShapeError("mask holds " + std::to_string(labels.size()) + " labels, expected " +
                         std::to_string(voxels()));
    }
}

fs::path data_path_for(const fs::path& header) {
    fs::path p = header;
    p.replace_extension(".raw");
    return p;
}

namespace {

struct Header {
    Dims3 dims;
    Spacing3 spacing{1.0, 1.0, 1.0};
    std::size_t channels = 1;
    std::string dtype;
};

Header read_header(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open volume header " + path.string());
    Header h;
    try {
        const json j = json::parse(in);
        h.dims = j.at("dims").get<Dims3>();
        if (j.contains("spacing")) h.spacing = j.at("spacing").get<Spacing3>();
        if (j.contains("channels")) h.channels = j.at("channels").get<std::size_t>();
        h.dtype = j.value("dtype", std::string("f32"));
        const std::string order = j.value("byte_order", std::string("little"));
        if (order != "little") {
            throw IoError("volume header " + path.string() + ": byte_order must be \"little\", got \"" + order + "\"");
        }
    } catch (const json::exception& e) {
        throw IoError("malformed volume header " + path.string() + ": " + e.what());
    }
    if (h.dtype != "f32" && h.dtype != "u8") {
        throw IoError("volume header " + path.string() + ": unknown dtype \"" + h.dtype + "\" (expected f32 or u8)");
    }
    if (h.dims[0] == 0 || h.dims[1] == 0 || h.dims[2] == 0 || h.channels == 0) {
        throw IoError("volume header " + path.string() + ": dims and channels must be positive");
    }
    return h;
}

void write_header(const fs::path& path, const Dims3& dims, const Spacing3& spacing, std::size_t channels,
                  const char* dtype) {
    const json j{{"dims", dims},
                 {"spacing", spacing},
                 {"channels", channels},
                 {"dtype", dtype},
                 {"byte_order", "little"}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write header " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("short write on " + path.string());
}

std::vector<char> read_payload(const fs::path& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open volume data " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != expected) {
        throw IoError("volume data " + path.string() + " has " + std::to_string(bytes.size()) +
                      " bytes, header implies " + std::to_string(expected));
    }
    return bytes;
}

void write_payload(const fs::path& path, const char* bytes, std::size_t n) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write volume data " + path.string());
    out.write(bytes, static_cast<std::streamsize>(n));
    if (!out) throw IoError("short write on " + path.string());
}

std::uint32_t le32(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
    }
    return v;
}

} // namespace

Volume read_volume(const fs::path& header, const fs::path& data) {
    const Header h = read_header(header);
    Volume v;
    v.dims = h.dims;
    v.spacing = h.spacing;
    v.channels = h.channels;
    const std::size_t n = h.channels * v.voxels();
    v.data.resize(n);
    if (h.dtype == "u8") {
        const auto bytes = read_payload(data, n);
        for (std::size_t i = 0; i < n; ++i) v.data[i] = static_cast<unsigned char>(bytes[i]);
    } else {
        const auto bytes = read_payload(data, n * sizeof(float));
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t bits;
            std::memcpy(&bits, bytes.data() + i * sizeof(float), sizeof(bits));
            v.data[i] = std::bit_cast<float>(le32(bits));
        }
    }
    return v;
}

void write_volume(const Volume& v, const fs::path& header, const fs::path& data) {
    v.validate();
    std::vector<char> bytes(v.data.size() * sizeof(float));
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const std::uint32_t bits = le32(std::bit_cast<std::uint32_t>(v.data[i]));
        std::memcpy(bytes.data() + i * sizeof(float), &bits, sizeof(bits));
    }
    write_header(header, v.dims, v.spacing, v.channels, "f32");
    write_payload(data, bytes.data(), bytes.size());
}

LabelMask read_mask(const fs::path& header, const fs::path& data) {
    const Header h = read_header(header);
    if (h.dtype != "u8" || h.channels != 1) {
        throw IoError("mask header " + header.string() + " must describe one u8 channel");
    }
    LabelMask m;
    m.dims = h.dims;
    m.spacing = h.spacing;
    const auto bytes = read_payload(data, m.voxels());
    m.labels.assign(bytes.begin(), bytes.end());
    return m;
}

void write_mask(const LabelMask& mask, const fs::path& header, const fs::path& data) {
    mask.validate();
    write_header(header, mask.dims, mask.spacing, 1, "u8");
    write_payload(data, reinterpret_cast<const char*>(mask.labels.data()), mask.labels.size());
}

Volume normalize_intensity(const Volume& v) {
    v.validate();
    Volume out = v;
    const std::size_t n = v.voxels();
    for (std::size_t c = 0; c < v.channels; ++c) {
        const float* src = v.data.data() + c * n;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += src[i];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = src[i] - mean;
            var += d * d;
        }
        const double sd = std::max(std::sqrt(var / static_cast<double>(n)), 1e-8);
        float* dst = out.data.data() + c * n;
        for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>((src[i] - mean) / sd);
    }
    return out;
}

namespace {

// Copies the overlapping [0, min) sub-block of every channel from src to dst.
template <typename T>
void copy_block(const T* src, const Dims3& sd, T* dst, const Dims3& dd, std::size_t channels) {
    const std::size_t nd = std::min(sd[0], dd[0]), nh = std::min(sd[1], dd[1]), nw = std::min(sd[2], dd[2]);
    for (std::size_t c = 0; c < channels; ++c) {
        const T* s = src + c * sd[0] * sd[1] * sd[2];
        T* d = dst + c * dd[0] * dd[1] * dd[2];
        for (std::size_t z = 0; z < nd; ++z) {
            for (std::size_t y = 0; y < nh; ++y) {
                std::copy_n(s + (z * sd[1] + y) * sd[2], nw, d + (z * dd[1] + y) * dd[2]);
            }
        }
    }
}

void require_within(const Dims3& inner, const Dims3& outer) {
    for (int a = 0; a < 3; ++a) {
        if (inner[a] == 0 || inner[a] > outer[a]) {
            throw ShapeError("crop extents must be positive and within the source extents");
        }
    }
}

} // namespace

PaddedVolume pad_to_multiple(const Volume& v, std::size_t m) {
    v.validate();
    if (m == 0) throw ShapeError("pad multiple must be positive");
    Volume out;
    out.channels = v.channels;
    out.spacing = v.spacing;
    for (int a = 0; a < 3; ++a) out.dims[a] = (v.dims[a] + m - 1) / m * m;
    out.data.assign(out.channels * out.voxels(), 0.0f);
    copy_block(v.data.data(), v.dims, out.data.data(), out.dims, v.channels);
    return {std::move(out), v.dims};
}

Volume crop(const Volume& v, const Dims3& dims) {
    v.validate();
    require_within(dims, v.dims);
    Volume out;
    out.channels = v.channels;
    out.spacing = v.spacing;
    out.dims = dims;
    out.data.resize(out.channels * out.voxels());
    copy_block(v.data.data(), v.dims, out.data.data(), dims, v.channels);
    return out;
}

LabelMask crop(const LabelMask& mask, const Dims3& dims) {
    mask.validate();
    require_within(dims, mask.dims);
    LabelMask out;
    out.spacing = mask.spacing;
    out.dims = dims;
    out.labels.resize(out.voxels());
    copy_block(mask.labels.data(), mask.dims, out.labels.data(), dims, 1);
    return out;
}

} // namespace segmamba
