#pragma once

#include <filesystem>
#include <string>
#include <unistd.h>

#include "segmamba/arch.hpp"
#include "segmamba/rng.hpp"
#include "segmamba/tensor.hpp"

namespace testutil {

struct ScanCase {
    segmamba::Tensor u, delta, A, B, C, D;
};

inline ScanCase random_scan_case(std::size_t L, std::size_t d, std::size_t N, std::uint64_t seed) {
    using segmamba::Tensor;
    segmamba::Rng rng(seed);
    ScanCase s{Tensor({L, d}), Tensor({L, d}), Tensor({d, N}), Tensor({L, N}), Tensor({L, N}), Tensor({d})};
    for (float& v : s.u.data()) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : s.delta.data()) v = static_cast<float>(rng.uniform(1e-3, 0.5));
    for (float& v : s.A.data()) v = static_cast<float>(-rng.uniform(0.05, 4.0));
    for (float& v : s.B.data()) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : s.C.data()) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : s.D.data()) v = static_cast<float>(rng.uniform(-1, 1));
    return s;
}

inline segmamba::ModelConfig tiny_config() {
    segmamba::ModelConfig cfg;
    cfg.in_channels = 1;
    cfg.num_classes = 3;
    cfg.stage_channels = {8, 16};
    cfg.blocks_per_stage = {1, 1};
    cfg.d_state = 4;
    cfg.scan_chunk = 16;
    return cfg;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("segmamba_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

} // namespace testutil
