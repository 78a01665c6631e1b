#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "uitf/errors.hpp"
#include "uitf/tensor.hpp"
#include "uitf/tensor_io.hpp"

using namespace uitf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("uitf_io_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<unsigned char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("the on-disk layout is frozen byte for byte") {
    TempDir dir;
    const fs::path file = dir.path / "frozen.uitf";
    io::write_tensor(file, Tensor<float>({2, 2}, {1.0f, 2.0f, 3.0f, 4.0f}));

    const std::vector<unsigned char> expected{
        'U', 'I', 'T', 'F',     // magic
        0x01, 0x00,             // version 1, little-endian
        0x01,                   // dtype f32
        0x02,                   // rank
        0x02, 0x00, 0x00, 0x00, // shape[0]
        0x02, 0x00, 0x00, 0x00, // shape[1]
        0x00, 0x00, 0x80, 0x3f, // 1.0f
        0x00, 0x00, 0x00, 0x40, // 2.0f
        0x00, 0x00, 0x40, 0x40, // 3.0f
        0x00, 0x00, 0x80, 0x40, // 4.0f
    };
    CHECK(slurp(file) == expected);
}

TEST_CASE("tensors round-trip through the container") {
    TempDir dir;
    SUBCASE("rank-3 f32") {
        const Tensor<float> t(
            {2, 3, 2}, {0.5f, -1.5f, 2.5f, -3.5f, 4.5f, -5.5f, 1.f, 2.f, 3.f, 4.f, 5.f, 6.f});
        io::write_tensor(dir.path / "a.uitf", t);
        const TensorData back = io::read_tensor(dir.path / "a.uitf");
        REQUIRE(std::holds_alternative<Tensor<float>>(back));
        CHECK(std::get<Tensor<float>>(back) == t);
    }
    SUBCASE("rank-1 f64 with awkward values") {
        const Tensor<double> t({3}, {1e-300, -0.0, 3.141592653589793});
        io::write_tensor(dir.path / "b.uitf", t);
        const Tensor<double> back = io::read_tensor_as<double>(dir.path / "b.uitf");
        CHECK(back == t);
    }
    SUBCASE("rewriting a read tensor reproduces the bytes") {
        const Tensor<double> t({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
        io::write_tensor(dir.path / "c.uitf", t);
        io::write_tensor(dir.path / "d.uitf", io::read_tensor(dir.path / "c.uitf"));
        CHECK(slurp(dir.path / "c.uitf") == slurp(dir.path / "d.uitf"));
    }
}

TEST_CASE("reader rejects malformed files with precise errors") {
    TempDir dir;
    const fs::path file = dir.path / "t.uitf";
    io::write_tensor(file, Tensor<float>({2, 2}, {1.0f, 2.0f, 3.0f, 4.0f}));
    const std::vector<unsigned char> good = slurp(file);

    SUBCASE("missing file") {
        CHECK_THROWS_AS(io::read_tensor(dir.path / "nope.uitf"), IoError);
    }
    SUBCASE("bad magic") {
        auto bytes = good;
        bytes[0] = 'X';
        spit(file, bytes);
        CHECK_THROWS_AS(io::read_tensor(file), FormatError);
    }
    SUBCASE("unsupported version") {
        auto bytes = good;
        bytes[4] = 0x07;
        spit(file, bytes);
        CHECK_THROWS_AS(io::read_tensor(file), FormatError);
    }
    SUBCASE("unknown dtype code") {
        auto bytes = good;
        bytes[6] = 0x09;
        spit(file, bytes);
        CHECK_THROWS_AS(io::read_tensor(file), FormatError);
    }
    SUBCASE("rank over the cap") {
        auto bytes = good;
        bytes[7] = 0x05;
        spit(file, bytes);
        CHECK_THROWS_AS(io::read_tensor(file), FormatError);
    }
    SUBCASE("truncated payload") {
        auto bytes = good;
        bytes.resize(bytes.size() - 3);
        spit(file, bytes);
        CHECK_THROWS_AS(io::read_tensor(file), FormatError);
    }
    SUBCASE("trailing garbage") {
        auto bytes = good;
        bytes.push_back(0x00);
        spit(file, bytes);
        CHECK_THROWS_AS(io::read_tensor(file), FormatError);
    }
    SUBCASE("dtype mismatch through the typed reader") {
        spit(file, good);
        CHECK_THROWS_AS(io::read_tensor_as<double>(file), FormatError);
    }
}

TEST_CASE("writer refuses what the format cannot carry") {
    TempDir dir;
    CHECK_THROWS_AS(io::write_tensor(dir.path / "r5.uitf",
                                     Tensor<float>({1, 1, 1, 1, 1}, {1.0f})),
                    ArgumentError);
    CHECK_THROWS_AS(io::write_tensor(dir.path / "no" / "such" / "dir.uitf",
                                     Tensor<float>({1}, {1.0f})),
                    IoError);
}
