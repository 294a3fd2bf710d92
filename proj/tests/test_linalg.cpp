#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lqt/linalg.hpp"

using lqt::Mat;
using lqt::Vec;

TEST_CASE("pinv inverts full-rank matrices") {
  Mat a(2, 2);
  a << 4, 7, 2, 6;
  Mat p = lqt::pinv(a);
  REQUIRE((p - a.inverse()).norm() < 1e-12);
}

TEST_CASE("pinv of a rank-deficient matrix satisfies the Penrose identities") {
  Mat a(2, 2);
  a << 1, 2, 2, 4;  // rank 1
  Mat p = lqt::pinv(a);
  // closed form for this fixture: a' / 25
  REQUIRE((p - a.transpose() / 25.0).norm() < 1e-12);
  REQUIRE((a * p * a - a).norm() < 1e-12);
  REQUIRE((p * a * p - p).norm() < 1e-12);
  REQUIRE((a * p - (a * p).transpose()).norm() < 1e-12);
  REQUIRE((p * a - (p * a).transpose()).norm() < 1e-12);
}

TEST_CASE("pinv of a zero matrix is zero with transposed shape") {
  Mat z = Mat::Zero(3, 2);
  Mat p = lqt::pinv(z);
  REQUIRE(p.rows() == 2);
  REQUIRE(p.cols() == 3);
  REQUIRE(p.norm() == 0.0);
}

TEST_CASE("numeric_rank detects near dependence") {
  Mat a(3, 3);
  a << 1, 0, 0, 0, 1, 0, 1, 1, 0;
  REQUIRE(lqt::numeric_rank(a) == 2);
  a(2, 2) = 1e-18;  // far below the relative threshold
  REQUIRE(lqt::numeric_rank(a) == 2);
  a(2, 2) = 1.0;
  REQUIRE(lqt::numeric_rank(a) == 3);
}

TEST_CASE("sqrt_psd squares back and clamps tiny negatives") {
  Mat q(2, 2);
  q << 2, 1, 1, 2;
  Mat s = lqt::sqrt_psd(q);
  REQUIRE((s * s - q).norm() < 1e-12);
  // a slightly indefinite input (roundoff scale) is treated as PSD
  Mat q2(2, 2);
  q2 << 1, 0, 0, -1e-14;
  Mat s2 = lqt::sqrt_psd(q2);
  REQUIRE(s2.allFinite());
  REQUIRE(lqt::min_symmetric_eigenvalue(s2) >= 0.0);
}

TEST_CASE("expm of a nilpotent block matches the series exactly") {
  Mat a(2, 2);
  a << 0, 1, 0, 0;
  Mat e = lqt::expm(a);
  Mat want(2, 2);
  want << 1, 1, 0, 1;
  REQUIRE((e - want).norm() < 1e-15);
}

TEST_CASE("expm of a rotation generator gives sine and cosine") {
  const double th = 0.7;
  Mat a(2, 2);
  a << 0, -th, th, 0;
  Mat e = lqt::expm(a);
  REQUIRE(e(0, 0) == Catch::Approx(std::cos(th)).epsilon(1e-13));
  REQUIRE(e(1, 0) == Catch::Approx(std::sin(th)).epsilon(1e-13));
}

TEST_CASE("expm handles large norms via scaling and squaring") {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = -100.0;
  a(1, 1) = -1.0;
  Mat e = lqt::expm(a);
  REQUIRE(e(0, 0) == Catch::Approx(std::exp(-100.0)).epsilon(1e-10));
  REQUIRE(e(1, 1) == Catch::Approx(std::exp(-1.0)).epsilon(1e-13));
  REQUIRE(e(0, 1) == 0.0);
}

TEST_CASE("expm reproduces the semigroup property") {
  Mat a(3, 3);
  a << -1, 2, 0, 0.5, -3, 1, 0, 0.2, -2;
  Mat e1 = lqt::expm(a);
  Mat e2 = lqt::expm(2.0 * a);
  REQUIRE((e1 * e1 - e2).norm() < 1e-12 * e2.norm());
}

TEST_CASE("is_hurwitz checks the spectral abscissa") {
  Mat stable(2, 2);
  stable << -1, 5, 0, -2;
  REQUIRE(lqt::is_hurwitz(stable));
  Mat marginal(2, 2);
  marginal << 0, 1, -1, 0;  // purely imaginary pair
  REQUIRE_FALSE(lqt::is_hurwitz(marginal));
  Mat unstable(1, 1);
  unstable << 1e-6;
  REQUIRE_FALSE(lqt::is_hurwitz(unstable));
}

TEST_CASE("eigenvalues returns the full spectrum") {
  Mat a(2, 2);
  a << 0, 1, -2, -3;  // eigenvalues -1, -2
  auto evs = lqt::eigenvalues(a);
  REQUIRE(evs.size() == 2);
  double sum = evs[0].real() + evs[1].real();
  double prod = (evs[0] * evs[1]).real();
  REQUIRE(sum == Catch::Approx(-3.0).margin(1e-12));
  REQUIRE(prod == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("symmetrize averages the off-diagonal parts") {
  Mat a(2, 2);
  a << 1, 2, 4, 3;
  Mat s = lqt::symmetrize(a);
  REQUIRE(s(0, 1) == 3.0);
  REQUIRE(s(1, 0) == 3.0);
  REQUIRE((s - s.transpose()).norm() == 0.0);
}
