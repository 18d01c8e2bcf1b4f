#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sbp/scaled_real.hpp"

namespace sbp {

enum class Execution { Serial, Parallel };

/// Rows 0..last of a single birth matrix in the dense form the recursions
/// need: birth rates, the c-vector, and prefix sums q_n^(k) = sum_{j<=k} q_nj.
struct TiltedRows {
  std::vector<double> up;
  std::vector<double> c;
  std::vector<std::vector<double>> partial;  // partial[n] has n entries

  std::size_t last() const { return up.size() - 1; }
  /// q~_n^(k) = q_n^(k) - c_n.
  double tilted(std::size_t n, std::size_t k) const { return partial[n][k] - c[n]; }
};

/// Column i of the F~ triangle, indexed by n - i.
using TriangleColumns = std::vector<std::vector<ScaledReal>>;

namespace kernels {

/// Forward solve of h_n = (source_n + sum_{k=start}^{n-1} q~_n^(k) h_k) / q_{n,n+1}
/// for n = start..last.  `source` and `out` are indexed by absolute state and
/// must have last+1 entries; out[n] for n < start is set to zero.
void tilted_recursion(const TiltedRows& rows, std::size_t start, std::span<const ScaledReal> source,
                      std::span<ScaledReal> out);

/// F~_n^(i) for n = i..last, indexed by n - i.
std::vector<ScaledReal> f_column(const TiltedRows& rows, std::size_t i);

namespace serial {
TriangleColumns f_triangle(const TiltedRows& rows);
}

namespace omp {
/// Same values as serial::f_triangle, bit for bit; columns are independent.
TriangleColumns f_triangle(const TiltedRows& rows);
}

inline TriangleColumns f_triangle(const TiltedRows& rows, Execution ex) {
  return ex == Execution::Parallel ? omp::f_triangle(rows) : serial::f_triangle(rows);
}

}  // namespace kernels
}  // namespace sbp
