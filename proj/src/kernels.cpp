#include "sbp/kernels.hpp"

#include <exception>
#include <stdexcept>

namespace sbp::kernels {

void tilted_recursion(const TiltedRows& rows, std::size_t start, std::span<const ScaledReal> source,
                      std::span<ScaledReal> out) {
  const std::size_t last = rows.last();
  if (source.size() != last + 1 || out.size() != last + 1 || start > last) {
    throw std::invalid_argument("tilted_recursion: size mismatch");
  }
  for (std::size_t n = 0; n < start; ++n) out[n] = ScaledReal{};
  ScaledSum acc;
  for (std::size_t n = start; n <= last; ++n) {
    acc.clear();
    acc.add(source[n]);
    const double* partial = rows.partial[n].data();
    const double c = rows.c[n];
    for (std::size_t k = start; k < n; ++k) {
      const double q = partial[k] - c;
      if (q != 0.0 && !out[k].is_zero()) acc.add(ScaledReal(q) * out[k]);
    }
    out[n] = acc.value() / ScaledReal(rows.up[n]);
  }
}

std::vector<ScaledReal> f_column(const TiltedRows& rows, std::size_t i) {
  const std::size_t last = rows.last();
  std::vector<ScaledReal> col(last - i + 1);
  col[0] = ScaledReal(1.0);
  ScaledSum acc;
  for (std::size_t n = i + 1; n <= last; ++n) {
    acc.clear();
    const double* partial = rows.partial[n].data();
    const double c = rows.c[n];
    for (std::size_t k = i; k < n; ++k) {
      const double q = partial[k] - c;
      if (q != 0.0 && !col[k - i].is_zero()) acc.add(ScaledReal(q) * col[k - i]);
    }
    col[n - i] = acc.value() / ScaledReal(rows.up[n]);
  }
  return col;
}

namespace serial {

TriangleColumns f_triangle(const TiltedRows& rows) {
  const std::size_t size = rows.last() + 1;
  TriangleColumns cols(size);
  for (std::size_t i = 0; i < size; ++i) cols[i] = f_column(rows, i);
  return cols;
}

}  // namespace serial

namespace omp {

TriangleColumns f_triangle(const TiltedRows& rows) {
  const long size = static_cast<long>(rows.last() + 1);
  TriangleColumns cols(static_cast<std::size_t>(size));
  std::exception_ptr failure;
  // Column i costs ~(N-i)^2/2, so hand out the expensive ones first.
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < size; ++i) {
    try {
      cols[static_cast<std::size_t>(i)] = f_column(rows, static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(sbp_triangle_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return cols;
}

}  // namespace omp

}  // namespace sbp::kernels
