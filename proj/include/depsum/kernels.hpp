#pragma once

// Data-parallel numeric kernels used by the classifier and the summarizer.
//
// Two implementations share every signature:
//   kernels::parallel  OpenMP, used by the library;
//   kernels::serial    plain loops, kept as the reference for tests and benches.
//
// Each output element of a parallel kernel is owned by exactly one thread and
// reduced in a fixed order, so results do not depend on the thread count.

#include <cstddef>
#include <span>

#include "depsum/matrix.hpp"

namespace depsum::kernels {

// Shape of a same-padded stride-1 1D convolution over [channels x length]
// rows; weights are laid out [out][in][kernel].
struct ConvShape {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;  // odd
  std::size_t length = 1;

  std::size_t weight_size() const { return out_channels * in_channels * kernel; }
  std::size_t in_width() const { return in_channels * length; }
  std::size_t out_width() const { return out_channels * length; }
};

namespace serial {

// y[b,o] = bias[o] + sum_i x[b,i] w[o,i]
void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y);
// dx = dy w
void dense_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx);
// dw = dy^T x, db = column sums of dy
void dense_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db);
void conv1d_forward(const Matrix& x, const ConvShape& s, std::span<const double> w,
                    std::span<const double> bias, Matrix& y);
void conv1d_backward_input(const Matrix& dy, const ConvShape& s, std::span<const double> w,
                           Matrix& dx);
void conv1d_backward_params(const Matrix& x, const Matrix& dy, const ConvShape& s,
                            std::span<double> dw, std::span<double> db);
// Pairwise cosine similarity of the rows of m; throws ZeroNorm on a zero row.
Matrix cosine_matrix(const Matrix& m);

}  // namespace serial

namespace parallel {

// Same contracts as serial::.
void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y);
void dense_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx);
void dense_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db);
void conv1d_forward(const Matrix& x, const ConvShape& s, std::span<const double> w,
                    std::span<const double> bias, Matrix& y);
void conv1d_backward_input(const Matrix& dy, const ConvShape& s, std::span<const double> w,
                           Matrix& dx);
void conv1d_backward_params(const Matrix& x, const Matrix& dy, const ConvShape& s,
                            std::span<double> dw, std::span<double> db);
Matrix cosine_matrix(const Matrix& m);

}  // namespace parallel

using namespace parallel;

// Thread count the parallel kernels will use (omp_get_max_threads()).
int max_threads();
void set_threads(int n);

}  // namespace depsum::kernels
