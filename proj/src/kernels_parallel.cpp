#include <omp.h>

#include <cmath>
#include <vector>

#include "depsum/error.hpp"
#include "depsum/kernels.hpp"

namespace depsum::kernels {

int max_threads() { return omp_get_max_threads(); }
void set_threads(int n) { omp_set_num_threads(n > 0 ? n : 1); }

namespace parallel {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y) {
  y = Matrix(x.rows, w.rows);
  const auto batch = static_cast<long>(x.rows);
  const auto outs = static_cast<long>(w.rows);
#pragma omp parallel for collapse(2) schedule(static)
  for (long b = 0; b < batch; ++b)
    for (long o = 0; o < outs; ++o)
      y.data[b * outs + o] =
          bias[o] + dot(x.data.data() + b * x.cols, w.data.data() + o * w.cols, x.cols);
}

void dense_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  dx = Matrix(dy.rows, w.cols);
  const auto batch = static_cast<long>(dy.rows);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < batch; ++b) {
    double* out = dx.data.data() + b * dx.cols;
    for (std::size_t o = 0; o < w.rows; ++o) axpy(dy(b, o), w.data.data() + o * w.cols, out, w.cols);
  }
}

void dense_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db) {
  dw = Matrix(dy.cols, x.cols);
  const auto outs = static_cast<long>(dy.cols);
#pragma omp parallel for schedule(static)
  for (long o = 0; o < outs; ++o) {
    double* row = dw.data.data() + o * dw.cols;
    double bsum = 0.0;
    for (std::size_t b = 0; b < x.rows; ++b) {
      const double g = dy(b, o);
      bsum += g;
      axpy(g, x.data.data() + b * x.cols, row, x.cols);
    }
    db[o] = bsum;
  }
}

void conv1d_forward(const Matrix& x, const ConvShape& s, std::span<const double> w,
                    std::span<const double> bias, Matrix& y) {
  const auto pad = static_cast<long>(s.kernel / 2);
  const auto len = static_cast<long>(s.length);
  y = Matrix(x.rows, s.out_width());
  const auto batch = static_cast<long>(x.rows);
  const auto outs = static_cast<long>(s.out_channels);
#pragma omp parallel for collapse(2) schedule(static)
  for (long b = 0; b < batch; ++b) {
    for (long co = 0; co < outs; ++co) {
      double* out = y.data.data() + b * y.cols + co * len;
      for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
        const double* in = x.data.data() + b * x.cols + ci * s.length;
        for (std::size_t k = 0; k < s.kernel; ++k) {
          const double wk = w[(co * s.in_channels + ci) * s.kernel + k];
          const long shift = static_cast<long>(k) - pad;
          const long lo = shift < 0 ? -shift : 0;
          const long hi = shift > 0 ? len - shift : len;
#pragma omp simd
          for (long l = lo; l < hi; ++l) out[l] += wk * in[l + shift];
        }
      }
      const double bc = bias[co];
#pragma omp simd
      for (long l = 0; l < len; ++l) out[l] = bc + out[l];
    }
  }
}

void conv1d_backward_input(const Matrix& dy, const ConvShape& s, std::span<const double> w,
                           Matrix& dx) {
  const auto pad = static_cast<long>(s.kernel / 2);
  const auto len = static_cast<long>(s.length);
  dx = Matrix(dy.rows, s.in_width());
  const auto batch = static_cast<long>(dy.rows);
  const auto ins = static_cast<long>(s.in_channels);
#pragma omp parallel for collapse(2) schedule(static)
  for (long b = 0; b < batch; ++b) {
    for (long ci = 0; ci < ins; ++ci) {
      double* out = dx.data.data() + b * dx.cols + ci * len;
      for (std::size_t co = 0; co < s.out_channels; ++co) {
        const double* g = dy.data.data() + b * dy.cols + co * s.length;
        for (std::size_t k = 0; k < s.kernel; ++k) {
          const double wk = w[(co * s.in_channels + ci) * s.kernel + k];
          const long shift = static_cast<long>(k) - pad;
          // out[l + shift] += wk * g[l] for every l with 0 <= l + shift < len
          const long lo = shift < 0 ? -shift : 0;
          const long hi = shift > 0 ? len - shift : len;
#pragma omp simd
          for (long l = lo; l < hi; ++l) out[l + shift] += wk * g[l];
        }
      }
    }
  }
}

void conv1d_backward_params(const Matrix& x, const Matrix& dy, const ConvShape& s,
                            std::span<double> dw, std::span<double> db) {
  const auto pad = static_cast<long>(s.kernel / 2);
  const auto len = static_cast<long>(s.length);
  const auto outs = static_cast<long>(s.out_channels);
  const auto ins = static_cast<long>(s.in_channels);
#pragma omp parallel for collapse(2) schedule(static)
  for (long co = 0; co < outs; ++co) {
    for (long ci = 0; ci < ins; ++ci) {
      for (std::size_t k = 0; k < s.kernel; ++k) {
        const long shift = static_cast<long>(k) - pad;
        const long lo = shift < 0 ? -shift : 0;
        const long hi = shift > 0 ? len - shift : len;
        double acc = 0.0;
        for (std::size_t b = 0; b < x.rows; ++b) {
          const double* g = dy.data.data() + b * dy.cols + co * len;
          const double* in = x.data.data() + b * x.cols + ci * len;
#pragma omp simd reduction(+ : acc)
          for (long l = lo; l < hi; ++l) acc += g[l] * in[l + shift];
        }
        dw[(co * s.in_channels + ci) * s.kernel + k] = acc;
      }
    }
  }
#pragma omp parallel for schedule(static)
  for (long co = 0; co < outs; ++co) {
    double acc = 0.0;
    for (std::size_t b = 0; b < dy.rows; ++b) {
      const double* g = dy.data.data() + b * dy.cols + co * len;
#pragma omp simd reduction(+ : acc)
      for (long l = 0; l < len; ++l) acc += g[l];
    }
    db[co] = acc;
  }
}

Matrix cosine_matrix(const Matrix& m) {
  const auto n = static_cast<long>(m.rows);
  std::vector<double> norms(m.rows);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const double* r = m.data.data() + i * m.cols;
    norms[i] = std::sqrt(dot(r, r, m.cols));
  }
  for (double v : norms)
    if (v == 0.0) throw Error(ErrorCode::ZeroNorm, "cosine_matrix: zero row");
  Matrix out(m.rows, m.rows);
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    const double* ri = m.data.data() + i * m.cols;
    for (long j = i; j < n; ++j) {
      const double v = dot(ri, m.data.data() + j * m.cols, m.cols) / (norms[i] * norms[j]);
      out.data[i * n + j] = v;
      out.data[j * n + i] = v;
    }
  }
  return out;
}

}  // namespace parallel
}  // namespace depsum::kernels
