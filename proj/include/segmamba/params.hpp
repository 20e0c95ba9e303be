#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "segmamba/tensor.hpp"

namespace segmamba {

/// Ordered, uniquely named collection of weight tensors.
class ParamStore {
public:
    using Entry = std::pair<std::string, Tensor>;

    /// Throws ParamError on a duplicate name.
    void add(std::string name, Tensor value);

    bool contains(std::string_view name) const;
    /// Throws ParamError naming the missing parameter.
    const Tensor& at(std::string_view name) const;
    Tensor& at(std::string_view name);

    std::size_t size() const noexcept { return entries_.size(); }
    /// Total number of scalar weights.
    std::size_t scalar_count() const;

    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    bool operator==(const ParamStore& other) const { return entries_ == other.entries_; }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr std::size_t kBlobAlignment = 64;

/// The raw blob that accompanies a manifest: same path, ".bin" extension.
std::filesystem::path blob_path_for(const std::filesystem::path& manifest);

/// Writes a JSON manifest [{name, shape, dtype:"f32", byte_offset}] and a
/// little-endian float blob with 64-byte aligned, zero-padded records.
void save_weights(const ParamStore& store, const std::filesystem::path& manifest);

/// Reads a manifest + blob pair. Throws IoError on unreadable files,
/// malformed manifests, unknown dtypes, misaligned or out-of-range offsets.
ParamStore load_weights(const std::filesystem::path& manifest);

} // namespace segmamba
