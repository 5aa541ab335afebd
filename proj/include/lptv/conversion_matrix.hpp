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

// Discrete-time conversion matrices (harmonic transfer matrices) for LPTV
// systems with period K.
//
// Index convention, shared by every module: matrix row/column position p
// corresponds to harmonic index K-1-p. The top row is harmonic K-1 and the
// bottom row is harmonic 0 (baseband output). Signals enter on the right and
// leave on the left, so a chain x -> A -> B is the product B * A.

#pragma once

#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lptv {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using ComplexRow = Eigen::RowVectorXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Harmonic index of a matrix row/column position.
constexpr int harmonic_of(int position, int dim) { return dim - 1 - position; }

// Frequency seen by harmonic k: omega - 2*pi*k/K.
inline double shifted_omega(double omega, int harmonic, int dim) {
  return omega - kTwoPi * harmonic / dim;
}

// Wraps an angle into [0, 2*pi).
double wrap_angle(double omega);

class ConversionMatrix {
 public:
  explicit ConversionMatrix(ComplexMatrix m);

  static ConversionMatrix identity(int dim);
  static ConversionMatrix zero(int dim);
  static ConversionMatrix diagonal(const ComplexVector& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }

  Complex operator()(int row, int col) const { return m_(row, col); }
  // H_{q,k}: gain from input harmonic k to output harmonic q.
  Complex harmonic(int q, int k) const;
  // Bottom row, H_{0,k} for columns ordered by position.
  ComplexRow baseband_row() const { return m_.row(m_.rows() - 1); }

  ConversionMatrix operator*(const ConversionMatrix& rhs) const;
  ConversionMatrix operator+(const ConversionMatrix& rhs) const;
  ConversionMatrix operator-(const ConversionMatrix& rhs) const;
  ConversionMatrix operator*(Complex s) const;
  friend ConversionMatrix operator*(Complex s, const ConversionMatrix& m) {
    return m * s;
  }

  bool is_diagonal() const;
  bool is_toeplitz(double tol = 0.0) const;

 private:
  ComplexMatrix m_;
};

// One period of a real N-periodic sequence.
class PeriodicWindow {
 public:
  explicit PeriodicWindow(std::vector<double> one_period);

  int period() const { return static_cast<int>(samples_.size()); }
  std::span<const double> samples() const { return samples_; }
  // Periodic extension w[n] = w0[mod(n, N)], valid for negative n too.
  double operator[](long long n) const;
  // W0(omega) = sum_{n=0}^{N-1} w0[n] exp(-j n omega).
  Complex dtft(double omega) const;
  double mean_square() const;

 private:
  std::vector<double> samples_;
};

// Rational function of z^-1: sum b_i z^-i / sum a_i z^-i.
class RationalTransfer {
 public:
  RationalTransfer(std::vector<double> numerator, std::vector<double> denominator);

  static RationalTransfer constant(double gain);
  static RationalTransfer delay(int samples);
  // (1 - z^-N)/(1 - z^-1), stored in its finite-sum form sum_{n<N} z^-n.
  static RationalTransfer zero_order_hold(int length);
  // gain / (1 - z^-1)
  static RationalTransfer accumulator(double gain);
  // gain * z^-1 / (1 - z^-1)
  static RationalTransfer delayed_accumulator(double gain);

  const std::vector<double>& numerator() const { return num_; }
  const std::vector<double>& denominator() const { return den_; }

  RationalTransfer operator*(const RationalTransfer& rhs) const;

  // Evaluates at z = exp(j omega). A removable 0/0 point is resolved by
  // differentiating numerator and denominator. Throws
  // SingularEvaluationError on a pole; `harmonic` only labels the error.
  Complex evaluate(double omega, int harmonic = 0) const;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
};

// Diagonal entries of the LTI conversion matrix, ordered by position.
ComplexVector lti_diagonal(const RationalTransfer& tf, double omega, int dim);

ConversionMatrix lti_conversion_matrix(const RationalTransfer& tf, double omega,
                                       int dim);

// Toeplitz matrix with entry (i,j) = W0(2*pi*(i-j)/K)/K. The window period
// must divide `dim`; it is tiled to length `dim` before transforming.
ConversionMatrix mul_conversion_matrix(const PeriodicWindow& window, int dim);
ConversionMatrix mul_conversion_matrix(const PeriodicWindow& window);

// Approximate N x N matrix of multiplying by an M-periodic single-pulse
// sequence inside an N-periodic system; entry (i,j) is
// W0(2*pi*(i-j)/N)/lcm(N,M) with W0 summed over one lcm(N,M) period.
ConversionMatrix fractional_resample_matrix(int M, int N);

inline constexpr double kDefaultConditionLimit = 1e12;

// Factorizes (I - loop) once; reused for every path gain at a frequency.
class ClosedLoopSolver {
 public:
  ClosedLoopSolver(const ComplexMatrix& loop, double omega = std::numeric_limits<double>::quiet_NaN(),
                   double condition_limit = kDefaultConditionLimit);

  double condition() const { return condition_; }
  int dim() const { return dim_; }

  // (I - loop)^-1 * path
  ComplexMatrix solve(const ComplexMatrix& path) const;
  // Bottom row of (I - loop)^-1, i.e. e_0^T (I - loop)^-1.
  const ComplexRow& baseband_gain() const { return baseband_; }
  // Bottom row of (I - loop)^-1 * path.
  ComplexRow baseband_row(const ComplexMatrix& path) const { return baseband_ * path; }

 private:
  int dim_;
  Eigen::PartialPivLU<ComplexMatrix> lu_;
  double condition_;
  ComplexRow baseband_;
};

// (I - loop)^-1 * path via LU. Throws SolverError when the condition
// estimate exceeds `condition_limit` or is not finite.
ConversionMatrix closed_loop_solve(const ConversionMatrix& loop, const ConversionMatrix& path,
                                   double omega = std::numeric_limits<double>::quiet_NaN(),
                                   double condition_limit = kDefaultConditionLimit);

}  // namespace lptv
