#pragma once

#include <cmath>
#include <limits>
#include <span>

// Dense kernels behind the autoencoder and the retrieval scan.
//
// Every kernel exists twice: `serial` is the reference and `parallel` splits
// the outputs across OpenMP threads. Each output element is accumulated in
// the same order in both, so the two agree bit for bit at any thread count.

namespace sae::kernels {

/// Row-major view of a rows x cols matrix.
struct ConstMatrix {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    const double* row(std::size_t i) const { return data + i * cols; }
};

struct Matrix {
    double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double* row(std::size_t i) const { return data + i * cols; }
    operator ConstMatrix() const { return {data, rows, cols}; }
};

/// Logistic function. Saturated results are pulled back inside (0, 1).
inline double sigmoid(double z) {
    constexpr double kLow = std::numeric_limits<double>::min();
    constexpr double kHigh = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    double s;
    if (z >= 0) {
        s = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        s = e / (1.0 + e);
    }
    return s < kLow ? kLow : (s > kHigh ? kHigh : s);
}

namespace serial {

/// out = sigmoid(W x + b). W is p x n, x has n entries, b and out have p.
void affine_sigmoid(ConstMatrix w, std::span<const double> x, std::span<const double> b,
                    std::span<double> out);

/// out = sigmoid(W^T h + b). h has p entries, b and out have n.
void affine_sigmoid_transposed(ConstMatrix w, std::span<const double> h, std::span<const double> b,
                               std::span<double> out);

/// out = W v.
void matvec(ConstMatrix w, std::span<const double> v, std::span<double> out);

/// dW(i,j) = sum over batch rows b, in order, of
/// hid_delta(b,i) x(b,j) + hidden(b,i) out_delta(b,j).
/// This is the tied-weight gradient: encoder plus transposed decoder term.
void tied_weight_gradient(ConstMatrix hid_delta, ConstMatrix x, ConstMatrix hidden,
                          ConstMatrix out_delta, Matrix dw);

/// out(r) = |data(r) - query|^2.
void squared_distances(ConstMatrix data, std::span<const double> query, std::span<double> out);

} // namespace serial

namespace parallel {

void affine_sigmoid(ConstMatrix w, std::span<const double> x, std::span<const double> b,
                    std::span<double> out);
void affine_sigmoid_transposed(ConstMatrix w, std::span<const double> h, std::span<const double> b,
                               std::span<double> out);
void matvec(ConstMatrix w, std::span<const double> v, std::span<double> out);
void tied_weight_gradient(ConstMatrix hid_delta, ConstMatrix x, ConstMatrix hidden,
                          ConstMatrix out_delta, Matrix dw);
void squared_distances(ConstMatrix data, std::span<const double> query, std::span<double> out);

} // namespace parallel

using namespace parallel;

} // namespace sae::kernels
