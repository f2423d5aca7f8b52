#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fog/error.hpp"

namespace fog {

// Dense tensor of rank <= 4 in NHWC order. Rank-2 tensors (batch x features)
// are stored as (n, 1, 1, c) with rank recorded, so dense and conv layers can
// share one type.
template <typename T>
struct Tensor {
    std::array<int, 4> dims{1, 1, 1, 1};  // n, h, w, c
    int rank = 0;
    std::vector<T> v;

    Tensor() = default;

    static Tensor zeros1(int n) {
        Tensor t;
        t.dims = {n, 1, 1, 1};
        t.rank = 1;
        t.v.assign(static_cast<std::size_t>(n), T(0));
        return t;
    }

    static Tensor zeros2(int n, int c) {
        Tensor t;
        t.dims = {n, 1, 1, c};
        t.rank = 2;
        t.v.assign(static_cast<std::size_t>(n) * c, T(0));
        return t;
    }

    static Tensor zeros4(int n, int h, int w, int c) {
        Tensor t;
        t.dims = {n, h, w, c};
        t.rank = 4;
        t.v.assign(static_cast<std::size_t>(n) * h * w * c, T(0));
        return t;
    }

    int n() const { return dims[0]; }
    int h() const { return dims[1]; }
    int w() const { return dims[2]; }
    int c() const { return dims[3]; }

    std::size_t size() const { return v.size(); }

    T& at(int in, int ih, int iw, int ic) {
        return v[((static_cast<std::size_t>(in) * dims[1] + ih) * dims[2] + iw) * dims[3] + ic];
    }
    const T& at(int in, int ih, int iw, int ic) const {
        return v[((static_cast<std::size_t>(in) * dims[1] + ih) * dims[2] + iw) * dims[3] + ic];
    }
    T& at(int in, int ic) { return v[static_cast<std::size_t>(in) * dims[3] + ic]; }
    const T& at(int in, int ic) const { return v[static_cast<std::size_t>(in) * dims[3] + ic]; }

    bool same_shape(const Tensor& o) const { return dims == o.dims && rank == o.rank; }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> t;
        t.dims = dims;
        t.rank = rank;
        t.v.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) t.v[i] = static_cast<U>(v[i]);
        return t;
    }
};

inline std::string shape_string(const std::array<int, 4>& d, int rank) {
    if (rank == 1) return "(" + std::to_string(d[0]) + ")";
    if (rank == 2)  // rank-2 tensors live in dims[0] and dims[3]
        return "(" + std::to_string(d[0]) + "," + std::to_string(d[3]) + ")";
    std::string s = "(";
    for (int i = 0; i < rank; ++i) {
        if (i) s += ",";
        s += std::to_string(d[i]);
    }
    return s + ")";
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* where) {
    if (!a.same_shape(b))
        throw ShapeMismatch(std::string(where) + ": tensor shapes differ");
}

template <typename T>
bool all_finite(const Tensor<T>& t) {
    for (T x : t.v)
        if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
}

}  // namespace fog
