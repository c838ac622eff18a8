#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pedlm/common.hpp"

namespace pedlm {

// Row-major dense matrix. Vectors are 1 x n.
template <typename S>
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<S> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, S(0)) {}

    S* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const S* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
    S& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    S at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    void zero() { std::fill(data.begin(), data.end(), S(0)); }

    void fill_gaussian(Rng& rng, double sd) {
        for (auto& v : data) v = static_cast<S>(rng.normal(0.0, sd));
    }
    void fill(S v) { std::fill(data.begin(), data.end(), v); }
};

// out[m x n] = a[m x k] * b[n x k]^T   (linear layer: y = x W^T)
template <typename S>
void matmul_nt(const Mat<S>& a, const Mat<S>& b, Mat<S>& out, bool accumulate = false) {
    assert(a.cols == b.cols);
    if (out.rows != a.rows || out.cols != b.rows) out = Mat<S>(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const S* ai = a.row(i);
        S* oi = out.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const S* bj = b.row(j);
            S acc = 0;
            for (int t = 0; t < a.cols; ++t) acc += ai[t] * bj[t];
            oi[j] = accumulate ? oi[j] + acc : acc;
        }
    }
}

// out[m x n] (+)= scale * a[m x k] * b[k x n]
template <typename S>
void matmul_nn(const Mat<S>& a, const Mat<S>& b, Mat<S>& out, double scale = 1.0,
               bool accumulate = false) {
    assert(a.cols == b.rows);
    if (out.rows != a.rows || out.cols != b.cols) out = Mat<S>(a.rows, b.cols);
    if (!accumulate) out.zero();
    for (int i = 0; i < a.rows; ++i) {
        const S* ai = a.row(i);
        S* oi = out.row(i);
        for (int t = 0; t < a.cols; ++t) {
            const S s = static_cast<S>(scale) * ai[t];
            if (s == S(0)) continue;
            const S* bt = b.row(t);
            for (int j = 0; j < b.cols; ++j) oi[j] += s * bt[j];
        }
    }
}

// out[m x n] (+)= scale * a[t x m]^T * b[t x n]   (weight gradients: dW = dy^T x)
template <typename S>
void matmul_tn(const Mat<S>& a, const Mat<S>& b, Mat<S>& out, double scale = 1.0,
               bool accumulate = false) {
    assert(a.rows == b.rows);
    if (out.rows != a.cols || out.cols != b.cols) out = Mat<S>(a.cols, b.cols);
    if (!accumulate) out.zero();
    for (int t = 0; t < a.rows; ++t) {
        const S* at = a.row(t);
        const S* bt = b.row(t);
        for (int i = 0; i < a.cols; ++i) {
            const S s = static_cast<S>(scale) * at[i];
            if (s == S(0)) continue;
            S* oi = out.row(i);
            for (int j = 0; j < b.cols; ++j) oi[j] += s * bt[j];
        }
    }
}

template <typename S>
std::uint64_t tensor_bytes_hash(const Mat<S>& m, std::uint64_t h = kFnvOffset) {
    return fnv1a64_bytes(m.data.data(), m.data.size() * sizeof(S), h);
}

}  // namespace pedlm
