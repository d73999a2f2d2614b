#include "vsid/lp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "vsid/error.hpp"

namespace vsid {
namespace {

using Complex = std::complex<double>;

// Polynomials below are coefficient vectors in z^-1, c[0] + c[1] z^-1 + ...
std::vector<double> Multiply(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Synthetic division by (1 + sign * z^-1); the remainder is discarded.
std::vector<double> DivideLinear(const std::vector<double>& c, double sign) {
  std::vector<double> q(c.size() - 1);
  double carry = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = c[i] - sign * carry;
    carry = q[i];
  }
  return q;
}

Complex EvalMonic(const std::vector<double>& c, Complex z, Complex* deriv) {
  // c holds coefficients of z^n, z^(n-1), ..., z^0.
  Complex value = 0.0, d = 0.0;
  for (double coef : c) {
    d = d * z + value;
    value = value * z + coef;
  }
  *deriv = d;
  return value;
}

// Angles in (0, pi) of the unit-circle roots of a real palindromic
// polynomial of even degree with no roots at +-1.
std::vector<double> UnitCircleAngles(const std::vector<double>& c) {
  const int degree = static_cast<int>(c.size()) - 1;
  if (degree == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int j = 0; j < degree; ++j) companion(0, j) = -c[j + 1] / c[0];
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::kNumericalFailure, "LSF root extraction failed");

  std::vector<double> angles;
  for (int i = 0; i < degree; ++i) {
    Complex z = solver.eigenvalues()[i];
    if (z.imag() <= 0.0) continue;
    for (int it = 0; it < 20; ++it) {
      Complex deriv;
      const Complex value = EvalMonic(c, z, &deriv);
      if (std::abs(deriv) == 0.0) break;
      const Complex step = value / deriv;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    if (std::abs(std::abs(z) - 1.0) > 1e-10)
      throw Error(ErrorCode::kNumericalFailure,
                  "LSF root off the unit circle by " +
                      std::to_string(std::abs(std::abs(z) - 1.0)));
    angles.push_back(std::arg(z));
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

std::vector<double> PairProduct(const std::vector<double>& angles,
                                std::vector<double> seed) {
  for (double w : angles) seed = Multiply(seed, {1.0, -2.0 * std::cos(w), 1.0});
  return seed;
}

}  // namespace

std::vector<double> Autocorr(std::span<const double> x, int max_lag) {
  if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= x.size())
    throw Error(ErrorCode::kLagTooLarge,
                "lag " + std::to_string(max_lag) + " needs more than " +
                    std::to_string(x.size()) + " samples");
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int m = 0; m <= max_lag; ++m) {
    double acc = 0.0;
    for (std::size_t n = static_cast<std::size_t>(m); n < x.size(); ++n)
      acc += x[n] * x[n - m];
    r[m] = acc;
  }
  return r;
}

LevinsonResult LevinsonDurbin(std::span<const double> r) {
  if (r.empty()) throw Error(ErrorCode::kInvalidArgument, "empty autocorrelation");
  if (!(r[0] > 0.0))
    throw Error(ErrorCode::kDegenerateFrame, "zero-lag autocorrelation is not positive");
  const std::size_t p = r.size() - 1;
  LevinsonResult out;
  out.coeffs.assign(p, 0.0);
  out.reflection.assign(p, 0.0);
  std::vector<double> prev(p, 0.0);
  double err = r[0];
  for (std::size_t i = 1; i <= p; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc -= out.coeffs[j - 1] * r[i - j];
    const double k = acc / err;
    if (!std::isfinite(k) || std::abs(k) >= 1.0)
      throw Error(ErrorCode::kNumericalFailure,
                  "reflection coefficient " + std::to_string(k) + " at order " +
                      std::to_string(i));
    prev = out.coeffs;
    out.coeffs[i - 1] = k;
    for (std::size_t j = 1; j < i; ++j)
      out.coeffs[j - 1] = prev[j - 1] - k * prev[i - j - 1];
    out.reflection[i - 1] = k;
    err *= (1.0 - k * k);
    if (!(err > 0.0) || !std::isfinite(err))
      throw Error(ErrorCode::kNumericalFailure,
                  "prediction error power collapsed at order " + std::to_string(i));
  }
  out.error_power = err;
  return out;
}

std::vector<double> Residual(std::span<const double> frame,
                             std::span<const double> coeffs) {
  if (frame.size() <= coeffs.size())
    throw Error(ErrorCode::kInvalidArgument, "frame shorter than predictor order");
  std::vector<double> e(frame.size());
  for (std::size_t n = 0; n < frame.size(); ++n) {
    double pred = 0.0;
    const std::size_t kmax = std::min(coeffs.size(), n);
    for (std::size_t k = 1; k <= kmax; ++k) pred += coeffs[k - 1] * frame[n - k];
    e[n] = frame[n] - pred;
  }
  return e;
}

std::vector<double> Synthesize(std::span<const double> excitation,
                               std::span<const double> coeffs) {
  std::vector<double> s(excitation.size());
  for (std::size_t n = 0; n < excitation.size(); ++n) {
    double acc = excitation[n];
    const std::size_t kmax = std::min(coeffs.size(), n);
    for (std::size_t k = 1; k <= kmax; ++k) acc += coeffs[k - 1] * s[n - k];
    s[n] = acc;
  }
  return s;
}

LpAnalysis AnalyzeFrame(std::span<const double> frame, int order) {
  if (order <= 0 || static_cast<std::size_t>(order) >= frame.size())
    throw Error(ErrorCode::kInvalidArgument,
                "LP order must be in [1, frame length)");
  const auto r = Autocorr(frame, order);
  if (r[0] < kDegenerateEnergyPerSample * static_cast<double>(frame.size()))
    throw Error(ErrorCode::kDegenerateFrame, "frame energy below floor");
  auto ld = LevinsonDurbin(r);
  LpAnalysis out;
  out.order = order;
  out.residual = Residual(frame, ld.coeffs);
  out.coeffs = std::move(ld.coeffs);
  out.reflection = std::move(ld.reflection);
  out.gain = std::sqrt(ld.error_power);
  return out;
}

std::vector<double> Lpcc(std::span<const double> coeffs, int n_cep) {
  if (n_cep < 1) throw Error(ErrorCode::kInvalidArgument, "n_cep must be >= 1");
  const auto p = static_cast<int>(coeffs.size());
  auto a = [&](int m) { return m <= p ? coeffs[m - 1] : 0.0; };
  std::vector<double> c(static_cast<std::size_t>(n_cep) + 1, 0.0);
  for (int m = 1; m <= n_cep; ++m) {
    double acc = a(m);
    for (int k = 1; k < m; ++k)
      acc += (static_cast<double>(k) / m) * c[k] * a(m - k);
    c[m] = acc;
  }
  return {c.begin() + 1, c.end()};
}

std::vector<double> ReflectionFromCoeffs(std::span<const double> coeffs) {
  std::vector<double> a(coeffs.begin(), coeffs.end());
  const std::size_t p = a.size();
  std::vector<double> k(p);
  for (std::size_t i = p; i >= 1; --i) {
    k[i - 1] = a[i - 1];
    if (!(std::abs(k[i - 1]) < 1.0))
      throw Error(ErrorCode::kUnstableFilter,
                  "reflection coefficient " + std::to_string(k[i - 1]) +
                      " at order " + std::to_string(i));
    const double denom = 1.0 - k[i - 1] * k[i - 1];
    std::vector<double> lower(i - 1);
    for (std::size_t j = 1; j < i; ++j)
      lower[j - 1] = (a[j - 1] + k[i - 1] * a[i - j - 1]) / denom;
    a = std::move(lower);
  }
  return k;
}

std::vector<double> Lsf(std::span<const double> coeffs) {
  const std::size_t p = coeffs.size();
  if (p == 0) return {};
  ReflectionFromCoeffs(coeffs);  // minimum-phase check

  // A(z) padded to degree p+1, then P = A + z^-(p+1) A(1/z), Q = A - ...
  std::vector<double> a(p + 2, 0.0);
  a[0] = 1.0;
  for (std::size_t k = 1; k <= p; ++k) a[k] = -coeffs[k - 1];
  std::vector<double> pp(p + 2), qq(p + 2);
  for (std::size_t i = 0; i < p + 2; ++i) {
    pp[i] = a[i] + a[p + 1 - i];
    qq[i] = a[i] - a[p + 1 - i];
  }
  // Strip the trivial roots at z = -1 and z = +1.
  if (p % 2 == 0) {
    pp = DivideLinear(pp, 1.0);
    qq = DivideLinear(qq, -1.0);
  } else {
    qq = DivideLinear(DivideLinear(qq, -1.0), 1.0);
  }
  const auto wp = UnitCircleAngles(pp);
  const auto wq = UnitCircleAngles(qq);
  if (wp.size() + wq.size() != p || wp.size() != (p + 1) / 2)
    throw Error(ErrorCode::kNumericalFailure, "unexpected LSF root count");

  std::vector<double> out(p);
  for (std::size_t i = 0; i < p; ++i) out[i] = (i % 2 == 0) ? wp[i / 2] : wq[i / 2];
  for (std::size_t i = 1; i < p; ++i)
    if (!(out[i] > out[i - 1]))
      throw Error(ErrorCode::kNumericalFailure, "LSFs do not interlace");
  if (!(out.front() > 0.0 && out.back() < std::numbers::pi))
    throw Error(ErrorCode::kNumericalFailure, "LSF outside (0, pi)");
  return out;
}

std::vector<double> LsfToCoeffs(std::span<const double> lsf) {
  const std::size_t p = lsf.size();
  if (p == 0) return {};
  std::vector<double> wp, wq;
  for (std::size_t i = 0; i < p; ++i) (i % 2 == 0 ? wp : wq).push_back(lsf[i]);
  std::vector<double> pp, qq;
  if (p % 2 == 0) {
    pp = PairProduct(wp, {1.0, 1.0});
    qq = PairProduct(wq, {1.0, -1.0});
  } else {
    pp = PairProduct(wp, {1.0});
    qq = PairProduct(wq, {1.0, 0.0, -1.0});
  }
  std::vector<double> coeffs(p);
  for (std::size_t k = 1; k <= p; ++k) coeffs[k - 1] = -0.5 * (pp[k] + qq[k]);
  return coeffs;
}

std::vector<double> Lar(std::span<const double> reflection) {
  std::vector<double> out(reflection.size());
  for (std::size_t i = 0; i < reflection.size(); ++i) {
    const double k = reflection[i];
    if (!(std::abs(k) < 1.0))
      throw Error(ErrorCode::kUnstableFilter,
                  "|k| >= 1 at index " + std::to_string(i));
    out[i] = std::log((1.0 + k) / (1.0 - k));
  }
  return out;
}

}  // namespace vsid
