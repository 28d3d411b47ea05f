#pragma once

#include "mgcn/config.hpp"
#include "mgcn/matrix.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mgcn {

/// Trained parameters plus everything needed to rebuild the model around them.
struct Checkpoint {
    TrainConfig config;
    std::size_t n = 0;
    int class_count = 0;
    std::vector<std::size_t> view_dims;
    /// Named parameter tensors in model order.
    std::vector<std::pair<std::string, Matrix>> tensors;

    /// Throws ContractError when `name` is absent.
    const Matrix& tensor(const std::string& name) const;
};

inline constexpr std::uint32_t checkpoint_version = 1;

/// Layout (little-endian): "MGCNCKPT", u32 version, u64 header length, header
/// JSON (config, n, class_count, view_dims), u64 tensor count, then per tensor
/// u32 name length, name, u64 rows, u64 cols, rows*cols f64.
void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace mgcn
