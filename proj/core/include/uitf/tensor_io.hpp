#pragma once

#include <filesystem>

#include "uitf/errors.hpp"
#include "uitf/tensor.hpp"

namespace uitf::io {

/// On-disk layout, fixed little-endian, no padding:
///   magic "UITF" | version u16 (=1) | dtype u8 (1=f32, 2=f64) | ndim u8
///   | shape ndim x u32 | payload, row-major values.
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kMaxRank = 4;

void write_tensor(const std::filesystem::path& path, const TensorData& tensor);

TensorData read_tensor(const std::filesystem::path& path);

/// read_tensor that insists on a specific element type.
template <typename T>
Tensor<T> read_tensor_as(const std::filesystem::path& path) {
    TensorData data = read_tensor(path);
    if (auto* t = std::get_if<Tensor<T>>(&data)) {
        return std::move(*t);
    }
    throw FormatError("tensor file " + path.string() + " holds a different element type");
}

} // namespace uitf::io
