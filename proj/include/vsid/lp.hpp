#pragma once

#include <span>
#include <vector>

namespace vsid {

// Predictor convention: s_hat(n) = sum_k a(k) s(n-k), so the inverse filter
// is A(z) = 1 - sum_k a(k) z^-k.
struct LevinsonResult {
  std::vector<double> coeffs;      // a(1..p)
  std::vector<double> reflection;  // k(1..p)
  double error_power = 0.0;        // G^2
};

struct LpAnalysis {
  int order = 0;
  std::vector<double> coeffs;
  std::vector<double> reflection;
  double gain = 0.0;
  std::vector<double> residual;
};

// One-sided biased autocorrelation r[m] = sum_n x[n] x[n-m], m = 0..max_lag.
std::vector<double> Autocorr(std::span<const double> x, int max_lag);

// Solves the Toeplitz normal equations of order r.size()-1.
LevinsonResult LevinsonDurbin(std::span<const double> r);

// Inverse filtering with zero history before the frame start.
std::vector<double> Residual(std::span<const double> frame,
                             std::span<const double> coeffs);

// All-pole synthesis 1/A(z) with zero initial state; inverse of Residual.
std::vector<double> Synthesize(std::span<const double> excitation,
                               std::span<const double> coeffs);

// Frames whose energy r[0] is below this multiple of the frame length are
// rejected as degenerate.
inline constexpr double kDegenerateEnergyPerSample = 1e-12;

LpAnalysis AnalyzeFrame(std::span<const double> frame, int order);

// LP-to-cepstrum recursion; returns c[1..n_cep] (c0 excluded).
std::vector<double> Lpcc(std::span<const double> coeffs, int n_cep);

// Step-down recursion. Throws kUnstableFilter when A(z) is not minimum phase.
std::vector<double> ReflectionFromCoeffs(std::span<const double> coeffs);

// Line spectral frequencies in (0, pi), strictly increasing. Even indices
// are roots of the symmetric polynomial P, odd indices of Q.
std::vector<double> Lsf(std::span<const double> coeffs);
std::vector<double> LsfToCoeffs(std::span<const double> lsf);

std::vector<double> Lar(std::span<const double> reflection);

}  // namespace vsid
