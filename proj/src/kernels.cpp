#include "sae/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

namespace sae::kernels {

namespace {

// Below this many multiply-adds the fork/join costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 14;

// Column block owned by one thread in the transposed product.
constexpr std::ptrdiff_t kColumnBlock = 64;

inline double row_dot(const double* row, const double* v, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        acc += row[j] * v[j];
    return acc;
}

inline double row_squared_distance(const double* row, const double* q, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = row[j] - q[j];
        acc += d * d;
    }
    return acc;
}

// Accumulates columns [lo, hi) of W^T h in row order, then applies the bias
// and the logistic function.
inline void transposed_block(ConstMatrix w, const double* h, const double* b, double* out, std::size_t lo,
                             std::size_t hi) {
    std::fill(out + lo, out + hi, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double hi_val = h[i];
        const double* row = w.row(i);
        for (std::size_t j = lo; j < hi; ++j)
            out[j] += row[j] * hi_val;
    }
    for (std::size_t j = lo; j < hi; ++j)
        out[j] = sigmoid(out[j] + b[j]);
}

inline void gradient_row(ConstMatrix hid_delta, ConstMatrix x, ConstMatrix hidden, ConstMatrix out_delta,
                         Matrix dw, std::size_t i) {
    double* dst = dw.row(i);
    std::fill(dst, dst + dw.cols, 0.0);
    for (std::size_t b = 0; b < x.rows; ++b) {
        const double dh = hid_delta.row(b)[i];
        const double h = hidden.row(b)[i];
        const double* xr = x.row(b);
        const double* dr = out_delta.row(b);
        for (std::size_t j = 0; j < dw.cols; ++j) {
            dst[j] += dh * xr[j];
            dst[j] += h * dr[j];
        }
    }
}

} // namespace

// ---------------------------------------------------------------------------

namespace serial {

void affine_sigmoid(ConstMatrix w, std::span<const double> x, std::span<const double> b,
                    std::span<double> out) {
    for (std::size_t i = 0; i < w.rows; ++i)
        out[i] = sigmoid(row_dot(w.row(i), x.data(), w.cols) + b[i]);
}

void affine_sigmoid_transposed(ConstMatrix w, std::span<const double> h, std::span<const double> b,
                               std::span<double> out) {
    transposed_block(w, h.data(), b.data(), out.data(), 0, w.cols);
}

void matvec(ConstMatrix w, std::span<const double> v, std::span<double> out) {
    for (std::size_t i = 0; i < w.rows; ++i)
        out[i] = row_dot(w.row(i), v.data(), w.cols);
}

void tied_weight_gradient(ConstMatrix hid_delta, ConstMatrix x, ConstMatrix hidden,
                          ConstMatrix out_delta, Matrix dw) {
    for (std::size_t i = 0; i < dw.rows; ++i)
        gradient_row(hid_delta, x, hidden, out_delta, dw, i);
}

void squared_distances(ConstMatrix data, std::span<const double> query, std::span<double> out) {
    for (std::size_t r = 0; r < data.rows; ++r)
        out[r] = row_squared_distance(data.row(r), query.data(), data.cols);
}

} // namespace serial

// ---------------------------------------------------------------------------

namespace parallel {

void affine_sigmoid(ConstMatrix w, std::span<const double> x, std::span<const double> b,
                    std::span<double> out) {
    const auto rows = static_cast<std::ptrdiff_t>(w.rows);
#pragma omp parallel for schedule(static) if (w.rows * w.cols >= kParallelWork)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
        out[i] = sigmoid(row_dot(w.row(i), x.data(), w.cols) + b[i]);
}

void affine_sigmoid_transposed(ConstMatrix w, std::span<const double> h, std::span<const double> b,
                               std::span<double> out) {
    const auto cols = static_cast<std::ptrdiff_t>(w.cols);
    const std::ptrdiff_t blocks = (cols + kColumnBlock - 1) / kColumnBlock;
#pragma omp parallel for schedule(static) if (w.rows * w.cols >= kParallelWork)
    for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
        const auto lo = static_cast<std::size_t>(blk * kColumnBlock);
        const auto hi = static_cast<std::size_t>(std::min(cols, (blk + 1) * kColumnBlock));
        transposed_block(w, h.data(), b.data(), out.data(), lo, hi);
    }
}

void matvec(ConstMatrix w, std::span<const double> v, std::span<double> out) {
    const auto rows = static_cast<std::ptrdiff_t>(w.rows);
#pragma omp parallel for schedule(static) if (w.rows * w.cols >= kParallelWork)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
        out[i] = row_dot(w.row(i), v.data(), w.cols);
}

void tied_weight_gradient(ConstMatrix hid_delta, ConstMatrix x, ConstMatrix hidden,
                          ConstMatrix out_delta, Matrix dw) {
    const auto rows = static_cast<std::ptrdiff_t>(dw.rows);
#pragma omp parallel for schedule(static) if (dw.rows * dw.cols * x.rows >= kParallelWork)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
        gradient_row(hid_delta, x, hidden, out_delta, dw, static_cast<std::size_t>(i));
}

void squared_distances(ConstMatrix data, std::span<const double> query, std::span<double> out) {
    const auto rows = static_cast<std::ptrdiff_t>(data.rows);
#pragma omp parallel for schedule(static) if (data.rows * data.cols >= kParallelWork)
    for (std::ptrdiff_t r = 0; r < rows; ++r)
        out[r] = row_squared_distance(data.row(r), query.data(), data.cols);
}

} // namespace parallel

} // namespace sae::kernels
