#pragma once

// Test-only reference implementations. Each one takes a different route from
// the library code it checks (brute force, dense linear algebra, direct DFT).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace vsid::oracle {

// r[m] = sum over every pair (i, j) with i - j = m.
inline std::vector<double> BruteAutocorr(std::span<const double> x, int max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (static_cast<int>(i - j) <= max_lag) r[i - j] += x[i] * x[j];
  return r;
}

// Dense LU solve of the Toeplitz normal equations sum_k phi(j,k) a(k) = phi(j,0).
inline std::vector<double> DenseNormalSolve(std::span<const double> r) {
  const int p = static_cast<int>(r.size()) - 1;
  Eigen::MatrixXd phi(p, p);
  Eigen::VectorXd rhs(p);
  for (int j = 0; j < p; ++j) {
    rhs(j) = r[j + 1];
    for (int k = 0; k < p; ++k) phi(j, k) = r[std::abs(j - k)];
  }
  Eigen::VectorXd a = phi.partialPivLu().solve(rhs);
  return {a.data(), a.data() + p};
}

// Stable random predictor via random reflection coefficients (step-up).
inline std::vector<double> RandomStableCoeffs(int order, std::mt19937_64& rng,
                                              double max_k = 0.9) {
  std::uniform_real_distribution<double> dist(-max_k, max_k);
  std::vector<double> a;
  for (int i = 1; i <= order; ++i) {
    const double k = dist(rng);
    std::vector<double> next(i);
    next[i - 1] = k;
    for (int j = 1; j < i; ++j) next[j - 1] = a[j - 1] - k * a[i - j - 1];
    a = std::move(next);
  }
  return a;
}

// AR(p) process driven by Gaussian noise, after a burn-in.
inline std::vector<double> ArFrame(std::span<const double> coeffs, std::size_t n,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t burn = 200;
  std::vector<double> s(n + burn, 0.0);
  for (std::size_t t = 0; t < s.size(); ++t) {
    double v = noise(rng);
    for (std::size_t k = 1; k <= coeffs.size() && k <= t; ++k) v += coeffs[k - 1] * s[t - k];
    s[t] = v;
  }
  return {s.begin() + burn, s.end()};
}

// Cepstrum of 1/A(z) from the power series -log(1 - P(z)) = sum_j P(z)^j / j,
// P(z) = sum_k a(k) z^-k, truncated to degree n_cep.
inline std::vector<double> SeriesCepstrum(std::span<const double> coeffs, int n_cep) {
  std::vector<double> p(n_cep + 1, 0.0);
  for (std::size_t k = 1; k <= coeffs.size() && static_cast<int>(k) <= n_cep; ++k)
    p[k] = coeffs[k - 1];
  std::vector<double> power = p, out(n_cep + 1, 0.0);
  for (int j = 1; j <= n_cep; ++j) {
    for (int m = 0; m <= n_cep; ++m) out[m] += power[m] / j;
    std::vector<double> next(n_cep + 1, 0.0);
    for (int a = 0; a <= n_cep; ++a)
      for (int b = 0; a + b <= n_cep; ++b) next[a + b] += power[a] * p[b];
    power = std::move(next);
  }
  return {out.begin() + 1, out.end()};
}

// |X(k)|^2 by the O(N^2) DFT definition, k = 0..n/2.
inline std::vector<double> DirectPowerSpectrum(std::span<const double> frame, int n) {
  std::vector<double> out(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < frame.size(); ++t)
      acc += frame[t] * std::polar(1.0, -2.0 * std::numbers::pi * k * t / n);
    out[k] = std::norm(acc);
  }
  return out;
}

}  // namespace vsid::oracle
