#include <cmath>
#include <vector>

#include "depsum/error.hpp"
#include "depsum/kernels.hpp"

namespace depsum::kernels::serial {

void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y) {
  y = Matrix(x.rows, w.rows);
  for (std::size_t b = 0; b < x.rows; ++b) {
    for (std::size_t o = 0; o < w.rows; ++o) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.cols; ++i) s += x(b, i) * w(o, i);
      y(b, o) = bias[o] + s;
    }
  }
}

void dense_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  dx = Matrix(dy.rows, w.cols);
  for (std::size_t b = 0; b < dy.rows; ++b)
    for (std::size_t o = 0; o < w.rows; ++o)
      for (std::size_t i = 0; i < w.cols; ++i) dx(b, i) += dy(b, o) * w(o, i);
}

void dense_backward_params(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db) {
  dw = Matrix(dy.cols, x.cols);
  for (std::size_t o = 0; o < dy.cols; ++o) db[o] = 0.0;
  for (std::size_t b = 0; b < x.rows; ++b) {
    for (std::size_t o = 0; o < dy.cols; ++o) {
      db[o] += dy(b, o);
      for (std::size_t i = 0; i < x.cols; ++i) dw(o, i) += dy(b, o) * x(b, i);
    }
  }
}

void conv1d_forward(const Matrix& x, const ConvShape& s, std::span<const double> w,
                    std::span<const double> bias, Matrix& y) {
  const auto pad = static_cast<long>(s.kernel / 2);
  const auto len = static_cast<long>(s.length);
  y = Matrix(x.rows, s.out_width());
  for (std::size_t b = 0; b < x.rows; ++b) {
    for (std::size_t co = 0; co < s.out_channels; ++co) {
      for (long l = 0; l < len; ++l) {
        double acc = 0.0;
        for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
          for (std::size_t k = 0; k < s.kernel; ++k) {
            const long src = l + static_cast<long>(k) - pad;
            if (src < 0 || src >= len) continue;
            acc += w[(co * s.in_channels + ci) * s.kernel + k] *
                   x(b, ci * s.length + static_cast<std::size_t>(src));
          }
        }
        y(b, co * s.length + static_cast<std::size_t>(l)) = bias[co] + acc;
      }
    }
  }
}

void conv1d_backward_input(const Matrix& dy, const ConvShape& s, std::span<const double> w,
                           Matrix& dx) {
  const auto pad = static_cast<long>(s.kernel / 2);
  const auto len = static_cast<long>(s.length);
  dx = Matrix(dy.rows, s.in_width());
  for (std::size_t b = 0; b < dy.rows; ++b)
    for (std::size_t co = 0; co < s.out_channels; ++co)
      for (long l = 0; l < len; ++l)
        for (std::size_t ci = 0; ci < s.in_channels; ++ci)
          for (std::size_t k = 0; k < s.kernel; ++k) {
            const long src = l + static_cast<long>(k) - pad;
            if (src < 0 || src >= len) continue;
            dx(b, ci * s.length + static_cast<std::size_t>(src)) +=
                w[(co * s.in_channels + ci) * s.kernel + k] *
                dy(b, co * s.length + static_cast<std::size_t>(l));
          }
}

void conv1d_backward_params(const Matrix& x, const Matrix& dy, const ConvShape& s,
                            std::span<double> dw, std::span<double> db) {
  const auto pad = static_cast<long>(s.kernel / 2);
  const auto len = static_cast<long>(s.length);
  for (auto& v : dw) v = 0.0;
  for (auto& v : db) v = 0.0;
  for (std::size_t b = 0; b < x.rows; ++b)
    for (std::size_t co = 0; co < s.out_channels; ++co)
      for (long l = 0; l < len; ++l) {
        const double g = dy(b, co * s.length + static_cast<std::size_t>(l));
        db[co] += g;
        for (std::size_t ci = 0; ci < s.in_channels; ++ci)
          for (std::size_t k = 0; k < s.kernel; ++k) {
            const long src = l + static_cast<long>(k) - pad;
            if (src < 0 || src >= len) continue;
            dw[(co * s.in_channels + ci) * s.kernel + k] +=
                g * x(b, ci * s.length + static_cast<std::size_t>(src));
          }
      }
}

Matrix cosine_matrix(const Matrix& m) {
  std::vector<double> norms(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < m.cols; ++d) s += m(i, d) * m(i, d);
    norms[i] = std::sqrt(s);
    if (norms[i] == 0.0) throw Error(ErrorCode::ZeroNorm, "cosine_matrix: zero row");
  }
  Matrix out(m.rows, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.rows; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < m.cols; ++d) s += m(i, d) * m(j, d);
      out(i, j) = s / (norms[i] * norms[j]);
    }
  return out;
}

}  // namespace depsum::kernels::serial
