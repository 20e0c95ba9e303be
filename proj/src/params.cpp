#include "segmamba/params.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "segmamba/errors.hpp"

namespace segmamba {

namespace fs = std::filesystem;
using nlohmann::json;

void ParamStore::add(std::string name, Tensor value) {
    if (index_.contains(name)) {
        throw ParamError("duplicate parameter name '" + name + "'");
    }
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), std::move(value));
}

bool ParamStore::contains(std::string_view name) const { return index_.contains(std::string(name)); }

const Tensor& ParamStore::at(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) {
        throw ParamError("missing parameter '" + std::string(name) + "'");
    }
    return entries_[it->second].second;
}

Tensor& ParamStore::at(std::string_view name) {
    return const_cast<Tensor&>(std::as_const(*this).at(name));
}

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_) n += t.size();
    return n;
}

fs::path blob_path_for(const fs::path& manifest) {
    fs::path blob = manifest;
    blob.replace_extension(".bin");
    return blob;
}

namespace {

std::uint32_t to_little(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
    }
    return v;
}

std::size_t align_up(std::size_t n) { return (n + kBlobAlignment - 1) / kBlobAlignment * kBlobAlignment; }

} // namespace

void save_weights(const ParamStore& store, const fs::path& manifest) {
    json entries = json::array();
    std::vector<char> blob;
    for (const auto& [name, t] : store) {
        const std::size_t offset = align_up(blob.size());
        blob.resize(offset + t.size() * sizeof(float), 0);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(t[i]));
            std::memcpy(blob.data() + offset + i * sizeof(float), &bits, sizeof(bits));
        }
        entries.push_back({{"name", name}, {"shape", t.shape()}, {"dtype", "f32"}, {"byte_offset", offset}});
    }
    blob.resize(align_up(blob.size()), 0);

    std::ofstream m(manifest, std::ios::binary);
    if (!m) throw IoError("cannot write weight manifest " + manifest.string());
    m << entries.dump(1) << '\n';
    const fs::path blob_path = blob_path_for(manifest);
    std::ofstream b(blob_path, std::ios::binary);
    if (!b) throw IoError("cannot write weight blob " + blob_path.string());
    b.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!m || !b) throw IoError("short write while saving weights to " + manifest.string());
}

ParamStore load_weights(const fs::path& manifest) {
    std::ifstream m(manifest, std::ios::binary);
    if (!m) throw IoError("cannot open weight manifest " + manifest.string());
    json entries;
    try {
        entries = json::parse(m);
    } catch (const json::exception& e) {
        throw IoError("malformed weight manifest " + manifest.string() + ": " + e.what());
    }
    if (!entries.is_array()) throw IoError("weight manifest " + manifest.string() + " must be a JSON array");

    const fs::path blob_path = blob_path_for(manifest);
    std::ifstream b(blob_path, std::ios::binary);
    if (!b) throw IoError("cannot open weight blob " + blob_path.string());
    const std::vector<char> blob((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());

    ParamStore store;
    for (const auto& e : entries) {
        std::string name;
        Shape shape;
        std::size_t offset = 0;
        try {
            name = e.at("name").get<std::string>();
            shape = e.at("shape").get<Shape>();
            offset = e.at("byte_offset").get<std::size_t>();
            if (e.at("dtype").get<std::string>() != "f32") {
                throw IoError("parameter '" + name + "' has unsupported dtype " + e.at("dtype").dump());
            }
        } catch (const json::exception& ex) {
            throw IoError("malformed manifest entry " + e.dump() + ": " + ex.what());
        }
        if (offset % kBlobAlignment != 0) {
            throw IoError("parameter '" + name + "' offset " + std::to_string(offset) + " is not " +
                          std::to_string(kBlobAlignment) + "-byte aligned");
        }
        const std::size_t count = element_count(shape);
        if (offset + count * sizeof(float) > blob.size()) {
            throw IoError("parameter '" + name + "' extends past the end of " + blob_path.string() + " (" +
                          std::to_string(blob.size()) + " bytes)");
        }
        Tensor t(shape);
        for (std::size_t i = 0; i < count; ++i) {
            std::uint32_t bits;
            std::memcpy(&bits, blob.data() + offset + i * sizeof(float), sizeof(bits));
            t[i] = std::bit_cast<float>(to_little(bits));
        }
        store.add(std::move(name), std::move(t));
    }
    return store;
}

} // namespace segmamba
