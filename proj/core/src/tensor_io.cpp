#include "uitf/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace uitf::io {

namespace {

constexpr unsigned char kMagic[4] = {'U', 'I', 'T', 'F'};

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<unsigned char>((v >> shift) & 0xff));
    }
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int shift = 0; shift < 64; shift += 8) {
        out.push_back(static_cast<unsigned char>((v >> shift) & 0xff));
    }
}

struct Cursor {
    const std::vector<unsigned char>& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) {
            throw FormatError("truncated tensor file");
        }
    }
    std::uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(buf[pos]) |
                          static_cast<std::uint16_t>(buf[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
        }
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        }
        pos += 8;
        return v;
    }
};

template <typename T>
void encode(std::vector<unsigned char>& out, const Tensor<T>& tensor, std::uint8_t dtype) {
    if (tensor.rank() > kMaxRank) {
        throw ArgumentError("tensor files carry at most rank " + std::to_string(kMaxRank));
    }
    if (tensor.values.size() != Tensor<T>::element_count(tensor.shape)) {
        throw DimensionError("tensor value count does not match its shape");
    }
    out.reserve(8 + 4 * tensor.rank() + sizeof(T) * tensor.values.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u16(out, kFormatVersion);
    out.push_back(dtype);
    out.push_back(static_cast<unsigned char>(tensor.rank()));
    for (const std::size_t extent : tensor.shape) {
        if (extent > std::numeric_limits<std::uint32_t>::max()) {
            throw ArgumentError("tensor extent does not fit the 32-bit shape field");
        }
        put_u32(out, static_cast<std::uint32_t>(extent));
    }
    for (const T x : tensor.values) {
        if constexpr (sizeof(T) == 4) {
            put_u32(out, std::bit_cast<std::uint32_t>(x));
        } else {
            put_u64(out, std::bit_cast<std::uint64_t>(x));
        }
    }
}

template <typename T>
Tensor<T> decode_payload(Cursor& c, std::vector<std::size_t> shape) {
    const std::size_t count = Tensor<T>::element_count(shape);
    std::vector<T> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        if constexpr (sizeof(T) == 4) {
            values[i] = std::bit_cast<T>(c.u32());
        } else {
            values[i] = std::bit_cast<T>(c.u64());
        }
    }
    return Tensor<T>(std::move(shape), std::move(values));
}

} // namespace

void write_tensor(const std::filesystem::path& path, const TensorData& tensor) {
    std::vector<unsigned char> bytes;
    std::visit(
        [&bytes](const auto& t) {
            using Elem = typename std::decay_t<decltype(t)>::value_type;
            encode(bytes, t, sizeof(Elem) == 4 ? 1 : 2);
        },
        tensor);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

TensorData read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    Cursor c{bytes};
    c.need(4);
    for (int i = 0; i < 4; ++i) {
        if (bytes[i] != kMagic[i]) {
            throw FormatError("bad magic in " + path.string());
        }
    }
    c.pos = 4;
    const std::uint16_t version = c.u16();
    if (version != kFormatVersion) {
        throw FormatError("unsupported tensor file version " + std::to_string(version));
    }
    const std::uint8_t dtype = c.u8();
    const std::uint8_t ndim = c.u8();
    if (ndim > kMaxRank) {
        throw FormatError("tensor rank " + std::to_string(ndim) + " exceeds the format limit");
    }
    std::vector<std::size_t> shape(ndim);
    for (std::size_t i = 0; i < ndim; ++i) {
        shape[i] = c.u32();
    }
    TensorData data;
    switch (dtype) {
    case 1:
        data = decode_payload<float>(c, std::move(shape));
        break;
    case 2:
        data = decode_payload<double>(c, std::move(shape));
        break;
    default:
        throw FormatError("unknown dtype code " + std::to_string(dtype));
    }
    if (c.pos != bytes.size()) {
        throw FormatError("trailing bytes after the tensor payload in " + path.string());
    }
    return data;
}

} // namespace uitf::io
