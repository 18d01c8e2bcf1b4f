#include "oracles/dense.hpp"

#include <stdexcept>

namespace sbp::oracle {

Eigen::MatrixXd dense_omega(const SingleBirthModel& model, const Coefficients& c, std::size_t N) {
  const auto size = static_cast<Eigen::Index>(N + 1);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t i = 0; i <= N; ++i) {
    const RateRow& row = model.row(i);
    const auto r = static_cast<Eigen::Index>(i);
    double out = 0.0;
    if (i < N) {
      omega(r, r + 1) = row.up();
      out += row.up();
    }
    for (const auto& d : row.down()) {
      omega(r, static_cast<Eigen::Index>(d.to)) += d.rate;
      out += d.rate;
    }
    omega(r, r) = -out + c.at(i);
  }
  return omega;
}

Eigen::MatrixXd dense_omega(const SingleDeathModel& model) {
  const std::size_t N = model.last();
  const auto size = static_cast<Eigen::Index>(N + 1);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t i = 0; i <= N; ++i) {
    double out = 0.0;
    for (std::size_t j = 0; j <= N; ++j) {
      if (j == i) continue;
      const double q = model.rate(i, j);
      omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = q;
      out += q;
    }
    omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -out + model.killing(i);
  }
  return omega;
}

std::vector<double> dense_solve(const Eigen::MatrixXd& omega, std::span<const double> f) {
  if (static_cast<std::size_t>(omega.rows()) != f.size()) throw std::invalid_argument("dense_solve: size mismatch");
  Eigen::VectorXd rhs(omega.rows());
  for (Eigen::Index i = 0; i < omega.rows(); ++i) rhs(i) = f[static_cast<std::size_t>(i)];
  const Eigen::VectorXd g = omega.fullPivLu().solve(rhs);
  return {g.data(), g.data() + g.size()};
}

std::vector<double> stationary_distribution(const SingleBirthModel& model, std::size_t N) {
  const Eigen::MatrixXd q = dense_omega(model, Coefficients::zero(), N);
  const auto size = q.rows();
  // pi Q = 0 with one balance equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = q.transpose();
  a.row(size - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs(size - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  return {pi.data(), pi.data() + pi.size()};
}

std::vector<double> dense_hitting_means(const SingleBirthModel& model, std::size_t N) {
  const Eigen::MatrixXd q = dense_omega(model, Coefficients::zero(), N);
  // Q restricted to {1..N}: Q_B x = -1.
  const Eigen::MatrixXd qb = q.bottomRightCorner(q.rows() - 1, q.cols() - 1);
  const Eigen::VectorXd x = qb.fullPivLu().solve(-Eigen::VectorXd::Ones(qb.rows()));
  std::vector<double> out(N + 1, 0.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i) + 1] = x(i);
  return out;
}

namespace {

std::vector<long double> plain_recursion(const SingleBirthModel& model, const Coefficients& c, std::size_t N,
                                         std::size_t start, const std::vector<long double>& source) {
  std::vector<long double> h(N + 1, 0.0L);
  for (std::size_t n = start; n <= N; ++n) {
    long double acc = source[n];
    const RateRow& row = model.row(n);
    const long double cn = c.at(n);
    for (std::size_t k = start; k < n; ++k) {
      long double partial = 0.0L;
      for (const auto& d : row.down()) {
        if (d.to <= k) partial += d.rate;
      }
      acc += (partial - cn) * h[k];
    }
    h[n] = acc / row.up();
  }
  return h;
}

}  // namespace

std::vector<long double> plain_f_column(const SingleBirthModel& model, const Coefficients& c, std::size_t N,
                                        std::size_t i) {
  std::vector<long double> src(N + 1, 0.0L);
  src[i] = model.up(i);
  auto h = plain_recursion(model, c, N, i, src);
  return {h.begin() + static_cast<long>(i), h.end()};
}

std::vector<long double> plain_m(const SingleBirthModel& model, const Coefficients& c, std::size_t N) {
  return plain_recursion(model, c, N, 0, std::vector<long double>(N + 1, 1.0L));
}

std::vector<long double> plain_d(const SingleBirthModel& model, const Coefficients& c, std::size_t N) {
  std::vector<long double> src(N + 1, 1.0L);
  src[0] = 0.0L;
  return plain_recursion(model, c, N, 0, src);
}

}  // namespace sbp::oracle
