#pragma once

#include <cstddef>
#include <numeric>
#include <variant>
#include <vector>

#include "uitf/errors.hpp"

namespace uitf {

/// Dense row-major tensor. The last axis varies fastest; a [heads, N, dim]
/// tensor stores head-major blocks of N contiguous rows.
template <typename T>
struct Tensor {
    using value_type = T;

    std::vector<std::size_t> shape;
    std::vector<T> values;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
        if (values.size() != element_count(shape)) {
            throw DimensionError("tensor value count does not match shape");
        }
    }

    static std::size_t element_count(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>{});
    }

    static Tensor zeros(std::vector<std::size_t> s) {
        std::size_t n = element_count(s);
        return Tensor(std::move(s), std::vector<T>(n, T{0}));
    }

    std::size_t size() const { return values.size(); }
    std::size_t rank() const { return shape.size(); }

    T* data() { return values.data(); }
    const T* data() const { return values.data(); }

    bool operator==(const Tensor&) const = default;
};

/// The two element types the on-disk container supports.
using TensorData = std::variant<Tensor<float>, Tensor<double>>;

} // namespace uitf
