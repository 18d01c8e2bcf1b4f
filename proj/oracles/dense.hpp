#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sbp/model.hpp"
#include "sbp/sequences.hpp"

// Reference computations that share no code with the sequence recursions:
// dense linear algebra on truncated generators and plain long double loops.
namespace sbp::oracle {

/// Omega = Q + diag(c) restricted to {0..N}; row N has no birth rate.
Eigen::MatrixXd dense_omega(const SingleBirthModel& model, const Coefficients& c, std::size_t N);
Eigen::MatrixXd dense_omega(const SingleDeathModel& model);

/// Solves Omega g = f by LU with full pivoting.
std::vector<double> dense_solve(const Eigen::MatrixXd& omega, std::span<const double> f);

/// Stationary law of the chain truncated to {0..N} (births out of N removed).
std::vector<double> stationary_distribution(const SingleBirthModel& model, std::size_t N);

/// E_n tau_0 on the truncated chain, n = 0..N (E_0 tau_0 = 0).
std::vector<double> dense_hitting_means(const SingleBirthModel& model, std::size_t N);

/// F_n^(i) for n = i..N with c applied, by the defining recursion in long double.
std::vector<long double> plain_f_column(const SingleBirthModel& model, const Coefficients& c, std::size_t N,
                                        std::size_t i);

/// m_n (source 1) or d_n (source 1 except 0 at n = 0) by the defining recursion.
std::vector<long double> plain_m(const SingleBirthModel& model, const Coefficients& c, std::size_t N);
std::vector<long double> plain_d(const SingleBirthModel& model, const Coefficients& c, std::size_t N);

}  // namespace sbp::oracle
