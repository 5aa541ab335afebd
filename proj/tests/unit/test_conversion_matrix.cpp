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

#include <doctest.h>

#include <random>

#include "lptv/conversion_matrix.hpp"
#include "lptv/errors.hpp"
#include "lptv/spectra.hpp"
#include "test_support.hpp"

using namespace lptv;
using lptv::testing::db;

namespace {

constexpr double kPi = std::numbers::pi;

ComplexMatrix random_matrix(int k, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = Complex(u(rng), u(rng));
  return m;
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("lti") {
  TEST_CASE("unity transfer gives the identity") {
    const auto h = lti_conversion_matrix(RationalTransfer::constant(1.0), 0.37, 4);
    CHECK(max_abs(h.matrix() - ComplexMatrix::Identity(4, 4)) == 0.0);
  }

  TEST_CASE("unit delay at omega 0 for K=2") {
    const auto h = lti_conversion_matrix(RationalTransfer::delay(1), 0.0, 2);
    // Bottom row is baseband: exp(0) = 1; top row is harmonic 1: exp(j*pi) = -1.
    CHECK(std::abs(h(1, 1) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(h(0, 0) - Complex(-1.0, 0.0)) < 1e-15);
    CHECK(h(0, 1) == Complex(0.0));
    CHECK(h(1, 0) == Complex(0.0));
  }

  TEST_CASE("zero-order hold uses the finite sum at removable points") {
    for (int n : {1, 4, 18}) {
      const auto zoh = RationalTransfer::zero_order_hold(n);
      CHECK(std::abs(zoh.evaluate(0.0) - Complex(n)) < 1e-12);
      if (n > 1) CHECK(std::abs(zoh.evaluate(kTwoPi / n)) < 1e-12);
    }
    // Quotient form (1 - z^-N)/(1 - z^-1) resolved by the limit rule.
    const RationalTransfer quotient({1, 0, 0, 0, -1}, {1, -1});
    CHECK(std::abs(quotient.evaluate(0.0) - Complex(4.0)) < 1e-9);
    const auto d = lti_diagonal(quotient, 0.0, 4);
    CHECK(std::abs(d(3) - Complex(4.0)) < 1e-9);
    CHECK(std::abs(d(0)) < 1e-12);
  }

  TEST_CASE("pole evaluation names the harmonic") {
    const auto acc = RationalTransfer::accumulator(1.0);
    CHECK_THROWS_AS(acc.evaluate(0.0), SingularEvaluationError);
    try {
      lti_conversion_matrix(acc, kPi / 2.0, 4);
      FAIL("expected a singular evaluation");
    } catch (const SingularEvaluationError& e) {
      CHECK(e.harmonic() == 1);
    }
  }

  TEST_CASE("output is exactly diagonal") {
    const RationalTransfer tf({0.3, -0.2, 0.05}, {1.0, -0.7, 0.1});
    for (int k : {1, 3, 6, 17})
      for (double w : {0.01, 1.3, 4.0}) CHECK(lti_conversion_matrix(tf, w, k).is_diagonal());
  }

  TEST_CASE("composition of LTI blocks matches the product transfer") {
    const RationalTransfer g({0.5, 0.25}, {1.0, -0.4});
    const RationalTransfer h({1.0, 0.0, -0.3}, {1.0, 0.2, 0.05});
    for (double w : {0.05, 0.9, 2.2, 5.9}) {
      const auto lhs = lti_conversion_matrix(g, w, 5) * lti_conversion_matrix(h, w, 5);
      const auto rhs = lti_conversion_matrix(g * h, w, 5);
      for (int i = 0; i < 5; ++i)
        CHECK(std::abs(lhs(i, i) - rhs(i, i)) <= 1e-12 * std::abs(rhs(i, i)));
    }
  }
}

TEST_SUITE("mul") {
  TEST_CASE("all-ones window is the identity") {
    const auto m = mul_conversion_matrix(PeriodicWindow(std::vector<double>(6, 1.0)));
    CHECK(max_abs(m.matrix() - ComplexMatrix::Identity(6, 6)) < 1e-15);
  }

  TEST_CASE("single-pulse window gives a constant 1/K matrix") {
    const auto m = mul_conversion_matrix(PeriodicWindow({1, 0, 0, 0}));
    CHECK(max_abs(m.matrix() - ComplexMatrix::Constant(4, 4, 0.25)) < 1e-15);
  }

  TEST_CASE("two-sample window entries follow the finite DTFT") {
    const auto m = mul_conversion_matrix(PeriodicWindow({1, 1, 0, 0}));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double w = kTwoPi * (i - j) / 4.0;
        const Complex expect = (1.0 + std::exp(Complex(0, -w))) / 4.0;
        CHECK(std::abs(m(i, j) - expect) < 1e-15);
      }
    CHECK(std::abs(m(3, 3) - Complex(0.5)) < 1e-15);
  }

  TEST_CASE("Toeplitz structure for random windows") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int n : {1, 2, 5, 8, 18}) {
      std::vector<double> w(n);
      for (auto& v : w) v = u(rng);
      const auto m = mul_conversion_matrix(PeriodicWindow(w));
      CHECK(m.is_toeplitz(1e-14));
    }
  }

  TEST_CASE("a shorter period is tiled to the problem dimension") {
    const PeriodicWindow w({0.7, -0.2});
    const auto tiled = mul_conversion_matrix(PeriodicWindow({0.7, -0.2, 0.7, -0.2, 0.7, -0.2}));
    CHECK(max_abs(mul_conversion_matrix(w, 6).matrix() - tiled.matrix()) < 1e-15);
    CHECK_THROWS(mul_conversion_matrix(PeriodicWindow({1, 0, 0}), 4));
  }

  TEST_CASE("window validation") {
    CHECK_THROWS(PeriodicWindow(std::vector<double>{}));
    CHECK_THROWS(PeriodicWindow({1.0, std::numeric_limits<double>::infinity()}));
    const PeriodicWindow w({1, 2, 3});
    CHECK(w[-1] == 3.0);
    CHECK(w[7] == 2.0);
  }
}

TEST_SUITE("fractional resampling") {
  TEST_CASE("M equal to N reduces to the single-pulse multiplication") {
    for (int n : {4, 7}) {
      std::vector<double> pulse(n, 0.0);
      pulse[0] = 1.0;
      const auto ref = mul_conversion_matrix(PeriodicWindow(pulse));
      const auto m = fractional_resample_matrix(n, n);
      CHECK(max_abs(m.matrix() - ref.matrix()) < 1e-14);
      CHECK(std::abs(m(n - 1, n - 1) - Complex(1.0 / n)) < 1e-14);
    }
  }

  TEST_CASE("M = 1 is the identity") {
    CHECK(max_abs(fractional_resample_matrix(1, 9).matrix() - ComplexMatrix::Identity(9, 9)) < 1e-13);
  }

  TEST_CASE("N=28, M=5 entries match the direct lcm sum") {
    const auto m = fractional_resample_matrix(5, 28);
    CHECK(m.dim() == 28);
    CHECK(m.is_toeplitz(1e-13));
    const int lcm = 140;
    for (int d : {0, 1, 3, 27}) {
      Complex sum = 0.0;
      for (int n = 0; n < lcm; n += 5) sum += std::exp(Complex(0, -kTwoPi * d * n / 28.0));
      CHECK(std::abs(m(d, 0) - sum / double(lcm)) < 1e-13);
    }
  }
}

TEST_SUITE("closed loop") {
  TEST_CASE("zero loop returns the path exactly") {
    const ConversionMatrix path(random_matrix(5, 1));
    const auto out = closed_loop_solve(ConversionMatrix::zero(5), path);
    CHECK(max_abs(out.matrix() - path.matrix()) == 0.0);
  }

  TEST_CASE("scalar case matches the LTI closed-loop formula") {
    const Complex l(0.3, -0.8), p(1.7, 0.4);
    const auto out = closed_loop_solve(ConversionMatrix(ComplexMatrix::Constant(1, 1, l)),
                                       ConversionMatrix(ComplexMatrix::Constant(1, 1, p)));
    CHECK(std::abs(out(0, 0) - p / (1.0 - l)) < 1e-15);
  }

  TEST_CASE("agrees with the truncated Neumann series") {
    ComplexMatrix loop = random_matrix(3, 11);
    const double rho = loop.eigenvalues().cwiseAbs().maxCoeff();
    loop *= 0.6 / rho;
    const ComplexMatrix path = random_matrix(3, 12);
    ComplexMatrix term = path, sum = path;
    for (int i = 0; i < 400; ++i) {
      term = loop * term;
      sum += term;
    }
    const auto out = closed_loop_solve(ConversionMatrix(loop), ConversionMatrix(path));
    CHECK(max_abs(out.matrix() - sum) < 1e-9);
  }

  TEST_CASE("baseband gain is the bottom row of the inverse") {
    const ComplexMatrix loop = 0.2 * random_matrix(6, 3);
    const ClosedLoopSolver solver(loop);
    const ComplexMatrix inv = solver.solve(ComplexMatrix::Identity(6, 6));
    CHECK((solver.baseband_gain() - inv.row(5)).cwiseAbs().maxCoeff() < 1e-13);
    const ComplexMatrix path = random_matrix(6, 4);
    CHECK((solver.baseband_row(path) - (inv * path).row(5)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("singular and ill-conditioned systems are rejected") {
    CHECK_THROWS_AS(ClosedLoopSolver(ComplexMatrix::Identity(3, 3), 0.5), SolverError);
    ComplexMatrix near = ComplexMatrix::Zero(2, 2);
    near(0, 0) = 1.0 - 1e-14;
    try {
      ClosedLoopSolver s(near, 0.25);
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK(e.omega() == 0.25);
      CHECK(e.condition() > 1e12);
    }
  }
}

TEST_SUITE("brute force") {
  // Chains of periodic multiplications and LTI filters, driven by white
  // noise, against an averaged periodogram of the same chain in time.
  struct Chain {
    int k;
    RationalTransfer g, h;
    PeriodicWindow w1, w2;
  };

  void check_chain(const Chain& c, unsigned seed) {
    WelchConfig wc;
    wc.segment_length = 256;
    wc.averages = 20000;
    const auto x = lptv::testing::white(wc.required_samples() + 1024, seed);
    auto y = lptv::testing::filter(c.g, x);
    y = lptv::testing::multiply(c.w1, y);
    y = lptv::testing::filter(c.h, y);
    y = lptv::testing::multiply(c.w2, y);
    y.erase(y.begin(), y.begin() + 1024);  // filter transient
    const auto est = lptv::testing::two_sided(y, wc);

    const auto m1 = mul_conversion_matrix(c.w1, c.k);
    const auto m2 = mul_conversion_matrix(c.w2, c.k);
    const PsdFunction unit = [](double) { return 1.0; };
    double worst = 0.0;
    for (std::size_t i = 0; i < est.omega.size(); ++i) {
      const double w = est.omega[i];
      const auto h = m2 * lti_conversion_matrix(c.h, w, c.k) * m1 * lti_conversion_matrix(c.g, w, c.k);
      worst = std::max(worst, std::abs(db(est.psd[i]) - db(output_psd(h, unit, w))));
    }
    CHECK(worst < 0.3);
  }

  TEST_CASE("K=4 chain") {
    check_chain({4, RationalTransfer({1.0}, {1.0, -0.6}), RationalTransfer({1.0, 0.5}, {1.0}),
                 PeriodicWindow({1.0, -0.3, 0.7, 0.2}), PeriodicWindow({0.5, 1.0, 1.0, 0.8})},
                21);
  }

  TEST_CASE("K=6 chain with a 3-periodic window") {
    check_chain({6, RationalTransfer({0.4, 0.4}, {1.0, -0.3}), RationalTransfer({1.0}, {1.0, 0.5}),
                 PeriodicWindow({1.0, 0.4, -0.6}), PeriodicWindow({1.2, 0.3, 0.9, 1.0, -0.4, 0.6})},
                22);
  }

  TEST_CASE("K=2 divider-like pulse chain") {
    check_chain({2, RationalTransfer({1.0}, {1.0, -0.5}), RationalTransfer({1.0, 1.0}, {1.0}),
                 PeriodicWindow({1.0, 0.0}), PeriodicWindow({1.0, 0.6})},
                23);
  }
}
