#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "road/common.hpp"

namespace road {

/// Dense row-major array. Real is float in production and double in the
/// verification suites, where finite-difference checks need the headroom.
template <typename Real>
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<Real> values;
    bool requires_grad = false;

    Tensor() = default;

    Tensor(std::vector<std::int64_t> s, std::vector<Real> v, bool rg = false)
        : shape(std::move(s)), values(std::move(v)), requires_grad(rg) {
        require(numel_of(shape) == std::int64_t(values.size()),
                "tensor value count does not match shape");
    }

    static Tensor zeros(std::vector<std::int64_t> s) {
        std::int64_t n = numel_of(s);
        return Tensor(std::move(s), std::vector<Real>(std::size_t(n), Real(0)));
    }

    static Tensor full(std::vector<std::int64_t> s, Real v) {
        std::int64_t n = numel_of(s);
        return Tensor(std::move(s), std::vector<Real>(std::size_t(n), v));
    }

    static std::int64_t numel_of(const std::vector<std::int64_t>& s) {
        std::int64_t n = 1;
        for (auto d : s) {
            require(d > 0, "tensor dims must be positive");
            n *= d;
        }
        return n;
    }

    std::int64_t numel() const { return std::int64_t(values.size()); }
    std::int64_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::int64_t cols() const {
        std::int64_t c = 1;
        for (std::size_t i = 1; i < shape.size(); ++i) c *= shape[i];
        return c;
    }

    Real& at(std::int64_t r, std::int64_t c) { return values[std::size_t(r * cols() + c)]; }
    Real at(std::int64_t r, std::int64_t c) const { return values[std::size_t(r * cols() + c)]; }

    Real* data() { return values.data(); }
    const Real* data() const { return values.data(); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(Real v) { std::fill(values.begin(), values.end(), v); }

    template <typename Other>
    Tensor<Other> cast() const {
        std::vector<Other> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = Other(values[i]);
        return Tensor<Other>(shape, std::move(out), requires_grad);
    }
};

} // namespace road
