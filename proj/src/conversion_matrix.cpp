// Copyright 2026 The lptv-pn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lptv/conversion_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "lptv/errors.hpp"

namespace lptv {
namespace {

// Relative magnitude below which a polynomial value is treated as a root.
constexpr double kRootTolerance = 1e-13;

Complex horner(const std::vector<double>& c, Complex x) {
  Complex acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double coeff_scale(const std::vector<double>& c) {
  double s = 0.0;
  for (double v : c) s += std::abs(v);
  return s;
}

std::vector<double> derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return d;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

bool near_root(Complex value, double scale) {
  return std::abs(value) <= kRootTolerance * std::max(scale, 1.0);
}

// Entry (i,j) of a Toeplitz matrix depends only on d = i - j; coefficients
// are periodic in d with period `period`.
ConversionMatrix toeplitz_from_coefficients(const std::vector<Complex>& coeff, int dim) {
  const int period = static_cast<int>(coeff.size());
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      int d = (i - j) % period;
      if (d < 0) d += period;
      m(i, j) = coeff[d];
    }
  }
  return ConversionMatrix(std::move(m));
}

}  // namespace

double wrap_angle(double omega) {
  double r = std::fmod(omega, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// ConversionMatrix

ConversionMatrix::ConversionMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0)
    throw std::invalid_argument("conversion matrix must be square and non-empty");
}

ConversionMatrix ConversionMatrix::identity(int dim) {
  return ConversionMatrix(ComplexMatrix::Identity(dim, dim));
}

ConversionMatrix ConversionMatrix::zero(int dim) {
  return ConversionMatrix(ComplexMatrix::Zero(dim, dim));
}

ConversionMatrix ConversionMatrix::diagonal(const ComplexVector& d) {
  return ConversionMatrix(ComplexMatrix(d.asDiagonal()));
}

Complex ConversionMatrix::harmonic(int q, int k) const {
  return m_(harmonic_of(q, dim()), harmonic_of(k, dim()));
}

ConversionMatrix ConversionMatrix::operator*(const ConversionMatrix& rhs) const {
  if (rhs.dim() != dim()) throw std::invalid_argument("conversion matrix dimension mismatch");
  return ConversionMatrix(m_ * rhs.m_);
}

ConversionMatrix ConversionMatrix::operator+(const ConversionMatrix& rhs) const {
  if (rhs.dim() != dim()) throw std::invalid_argument("conversion matrix dimension mismatch");
  return ConversionMatrix(m_ + rhs.m_);
}

ConversionMatrix ConversionMatrix::operator-(const ConversionMatrix& rhs) const {
  if (rhs.dim() != dim()) throw std::invalid_argument("conversion matrix dimension mismatch");
  return ConversionMatrix(m_ - rhs.m_);
}

ConversionMatrix ConversionMatrix::operator*(Complex s) const { return ConversionMatrix(m_ * s); }

bool ConversionMatrix::is_diagonal() const {
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      if (i != j && m_(i, j) != Complex(0.0)) return false;
  return true;
}

bool ConversionMatrix::is_toeplitz(double tol) const {
  for (int i = 0; i + 1 < dim(); ++i)
    for (int j = 0; j + 1 < dim(); ++j)
      if (std::abs(m_(i, j) - m_(i + 1, j + 1)) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// PeriodicWindow

PeriodicWindow::PeriodicWindow(std::vector<double> one_period) : samples_(std::move(one_period)) {
  if (samples_.empty()) throw std::invalid_argument("periodic window needs at least one sample");
  for (double v : samples_)
    if (!std::isfinite(v)) throw std::invalid_argument("periodic window samples must be finite");
}

double PeriodicWindow::operator[](long long n) const {
  const long long N = period();
  long long r = n % N;
  if (r < 0) r += N;
  return samples_[static_cast<std::size_t>(r)];
}

Complex PeriodicWindow::dtft(double omega) const {
  Complex acc = 0.0;
  for (int n = 0; n < period(); ++n)
    if (samples_[n] != 0.0) acc += samples_[n] * std::polar(1.0, -omega * n);
  return acc;
}

double PeriodicWindow::mean_square() const {
  double s = 0.0;
  for (double v : samples_) s += v * v;
  return s / period();
}

// ---------------------------------------------------------------------------
// RationalTransfer

RationalTransfer::RationalTransfer(std::vector<double> numerator, std::vector<double> denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (num_.empty()) num_ = {0.0};
  if (den_.empty() || std::all_of(den_.begin(), den_.end(), [](double v) { return v == 0.0; }))
    throw std::invalid_argument("transfer function denominator is identically zero");
}

RationalTransfer RationalTransfer::constant(double gain) { return {{gain}, {1.0}}; }

RationalTransfer RationalTransfer::delay(int samples) {
  if (samples < 0) throw std::invalid_argument("delay must be non-negative");
  std::vector<double> num(static_cast<std::size_t>(samples) + 1, 0.0);
  num.back() = 1.0;
  return {std::move(num), {1.0}};
}

RationalTransfer RationalTransfer::zero_order_hold(int length) {
  if (length < 1) throw std::invalid_argument("zero-order hold length must be >= 1");
  return {std::vector<double>(static_cast<std::size_t>(length), 1.0), {1.0}};
}

RationalTransfer RationalTransfer::accumulator(double gain) { return {{gain}, {1.0, -1.0}}; }

RationalTransfer RationalTransfer::delayed_accumulator(double gain) {
  return {{0.0, gain}, {1.0, -1.0}};
}

RationalTransfer RationalTransfer::operator*(const RationalTransfer& rhs) const {
  return {poly_mul(num_, rhs.num_), poly_mul(den_, rhs.den_)};
}

Complex RationalTransfer::evaluate(double omega, int harmonic) const {
  const Complex x = std::polar(1.0, -omega);
  std::vector<double> num = num_;
  std::vector<double> den = den_;
  Complex d = horner(den, x);
  if (!near_root(d, coeff_scale(den))) return horner(num, x) / d;

  // Denominator vanishes: only a shared root with the numerator is finite.
  for (std::size_t order = 0; order < den_.size(); ++order) {
    const Complex n = horner(num, x);
    if (!near_root(n, coeff_scale(num))) throw SingularEvaluationError(harmonic, omega);
    num = derivative(num);
    den = derivative(den);
    d = horner(den, x);
    if (!near_root(d, coeff_scale(den))) return horner(num, x) / d;
  }
  throw SingularEvaluationError(harmonic, omega);
}

// ---------------------------------------------------------------------------
// Matrix builders

ComplexVector lti_diagonal(const RationalTransfer& tf, double omega, int dim) {
  if (dim < 1) throw std::invalid_argument("problem dimension must be >= 1");
  ComplexVector d(dim);
  for (int p = 0; p < dim; ++p) {
    const int k = harmonic_of(p, dim);
    d(p) = tf.evaluate(shifted_omega(omega, k, dim), k);
  }
  return d;
}

ConversionMatrix lti_conversion_matrix(const RationalTransfer& tf, double omega, int dim) {
  return ConversionMatrix::diagonal(lti_diagonal(tf, omega, dim));
}

ConversionMatrix mul_conversion_matrix(const PeriodicWindow& window, int dim) {
  if (dim < 1) throw std::invalid_argument("problem dimension must be >= 1");
  const int N = window.period();
  if (dim % N != 0)
    throw std::invalid_argument("window period must divide the problem dimension");
  std::vector<double> tiled(static_cast<std::size_t>(dim));
  for (int n = 0; n < dim; ++n) tiled[n] = window[n];
  const PeriodicWindow extended(std::move(tiled));
  std::vector<Complex> coeff(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d) coeff[d] = extended.dtft(kTwoPi * d / dim) / static_cast<double>(dim);
  return toeplitz_from_coefficients(coeff, dim);
}

ConversionMatrix mul_conversion_matrix(const PeriodicWindow& window) {
  return mul_conversion_matrix(window, window.period());
}

ConversionMatrix fractional_resample_matrix(int M, int N) {
  if (M < 1 || N < 1) throw std::invalid_argument("resampling ratios must be >= 1");
  const long long span = std::lcm(static_cast<long long>(N), static_cast<long long>(M));
  std::vector<Complex> coeff(static_cast<std::size_t>(N));
  for (int d = 0; d < N; ++d) {
    const double omega = kTwoPi * d / N;
    Complex acc = 0.0;
    for (long long n = 0; n < span; n += M) acc += std::polar(1.0, -omega * static_cast<double>(n));
    coeff[d] = acc / static_cast<double>(span);
  }
  return toeplitz_from_coefficients(coeff, N);
}

// ---------------------------------------------------------------------------
// Closed loop

ClosedLoopSolver::ClosedLoopSolver(const ComplexMatrix& loop, double omega,
                                   double condition_limit)
    : dim_(static_cast<int>(loop.rows())) {
  if (loop.rows() != loop.cols()) throw std::invalid_argument("loop gain must be square");
  ComplexMatrix a = -loop;
  a.diagonal().array() += 1.0;
  lu_.compute(a);
  // rcond() is unreliable once a pivot is exactly zero, so test pivots first.
  const double rc = lu_.matrixLU().diagonal().cwiseAbs().minCoeff() > 0.0 ? lu_.rcond() : 0.0;
  condition_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!std::isfinite(condition_) || condition_ > condition_limit || !a.allFinite())
    throw SolverError(omega, condition_);
  ComplexVector e = ComplexVector::Zero(dim_);
  e(dim_ - 1) = 1.0;
  // Row solve r * A = e^T through the factors: A^T = U^T L^T P.
  const ComplexMatrix& lu = lu_.matrixLU();
  ComplexVector y = lu.triangularView<Eigen::Upper>().transpose().solve(e);
  y = lu.triangularView<Eigen::UnitLower>().transpose().solve(y);
  baseband_ = (lu_.permutationP().transpose() * y).transpose();
  if (!baseband_.allFinite()) throw SolverError(omega, std::numeric_limits<double>::infinity());
}

ComplexMatrix ClosedLoopSolver::solve(const ComplexMatrix& path) const {
  if (path.rows() != dim_) throw std::invalid_argument("path gain dimension mismatch");
  return lu_.solve(path);
}

ConversionMatrix closed_loop_solve(const ConversionMatrix& loop, const ConversionMatrix& path,
                                   double omega, double condition_limit) {
  if (loop.dim() != path.dim()) throw std::invalid_argument("loop and path dimension mismatch");
  const ClosedLoopSolver solver(loop.matrix(), omega, condition_limit);
  return ConversionMatrix(solver.solve(path.matrix()));
}

}  // namespace lptv
