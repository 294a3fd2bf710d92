#include <catch2/catch_amalgamated.hpp>

#include "lqt/model.hpp"
#include "lqt/scenario.hpp"

using lqt::Mat;
using lqt::Vec;

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("signal holds the last sample and applies the tail") {
  lqt::Signal s({0.0, 0.5, 1.0}, {v1(1), v1(2), v1(3)}, v1(9));
  REQUIRE(s(-1.0)(0) == 1.0);  // before first sample: first value held backward
  REQUIRE(s(0.0)(0) == 1.0);
  REQUIRE(s(0.49)(0) == 1.0);
  REQUIRE(s(0.5)(0) == 2.0);  // at a sample time the new value applies
  REQUIRE(s(0.75)(0) == 2.0);
  REQUIRE(s(1.0)(0) == 9.0);  // from the last sample time on, the tail value
  REQUIRE(s(100.0)(0) == 9.0);
}

TEST_CASE("signal step factory") {
  lqt::Signal d = lqt::Signal::step(0.5, v1(0), v1(3));
  REQUIRE(d(0.0)(0) == 0.0);
  REQUIRE(d(0.4999)(0) == 0.0);
  REQUIRE(d(0.5)(0) == 3.0);
  REQUIRE(d(2.0)(0) == 3.0);
  REQUIRE(d.tail()(0) == 3.0);
}

TEST_CASE("signal constant factory") {
  lqt::Signal c = lqt::Signal::constant(v1(7));
  REQUIRE(c(-5.0)(0) == 7.0);
  REQUIRE(c(5.0)(0) == 7.0);
  REQUIRE(c.dim() == 1);
}

TEST_CASE("signal rejects non-increasing sample times") {
  REQUIRE_THROWS_AS(lqt::Signal({0.0, 0.0}, {v1(1), v1(2)}), lqt::Error);
  REQUIRE_THROWS_AS(lqt::Signal({1.0, 0.5}, {v1(1), v1(2)}), lqt::Error);
}

TEST_CASE("validate_system flags each structural defect") {
  lqt::Scenario s = lqt::scenario_example_a();

  SECTION("accepts the reference fixture") {
    REQUIRE_NOTHROW(lqt::validate_system(s.plant, s.cost));
  }
  SECTION("B row mismatch") {
    s.plant.B = Mat::Zero(2, 1);
    try {
      lqt::validate_system(s.plant, s.cost);
      FAIL("expected throw");
    } catch (const lqt::Error& e) {
      REQUIRE(e.code() == lqt::ErrorCode::DimensionMismatch);
    }
  }
  SECTION("Qbar size must match the regulated output") {
    s.cost.Qbar = Mat::Identity(2, 2);
    REQUIRE_THROWS_AS(lqt::validate_system(s.plant, s.cost), lqt::Error);
  }
  SECTION("R must weight Bu+Ed, i.e. be n x n") {
    s.cost.R = Mat::Identity(1, 1);
    REQUIRE_THROWS_AS(lqt::validate_system(s.plant, s.cost), lqt::Error);
  }
  SECTION("indefinite weight is rejected as NotPSD") {
    s.cost.Qbar(0, 0) = -1.0;
    try {
      lqt::validate_system(s.plant, s.cost);
      FAIL("expected throw");
    } catch (const lqt::Error& e) {
      REQUIRE(e.code() == lqt::ErrorCode::NotPSD);
    }
  }
  SECTION("asymmetric weight is rejected") {
    lqt::Scenario b = lqt::scenario_example_b();
    b.cost.R(0, 1) = 0.5;  // leave (1,0) alone
    REQUIRE_THROWS_AS(lqt::validate_system(b.plant, b.cost), lqt::Error);
  }
  SECTION("nonpositive horizon") {
    s.cost.T = 0.0;
    try {
      lqt::validate_system(s.plant, s.cost);
      FAIL("expected throw");
    } catch (const lqt::Error& e) {
      REQUIRE(e.code() == lqt::ErrorCode::NonpositiveHorizon);
    }
  }
}

TEST_CASE("matched disturbances are recognized with their gain") {
  lqt::PlantModel p;
  p.A = Mat::Identity(2, 2) * -1.0;
  p.B = (Mat(2, 1) << 1, 1).finished();
  p.E = (Mat(2, 1) << 2, 2).finished();  // E = B * 2
  p.c_o = (Mat(1, 2) << 1, 0).finished();
  auto cls = lqt::classify_disturbance(p);
  REQUIRE(cls.kind == lqt::DisturbanceKind::Matched);
  REQUIRE(cls.gamma.has_value());
  REQUIRE((*cls.gamma)(0, 0) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(cls.rank_B == cls.rank_BE);
}

TEST_CASE("the catalogued examples carry mismatched disturbances") {
  auto a = lqt::scenario_example_a();
  auto ca = lqt::classify_disturbance(a.plant);
  REQUIRE(ca.kind == lqt::DisturbanceKind::Mismatched);
  REQUIRE(ca.rank_B == 1);
  REQUIRE(ca.rank_BE == 2);

  auto b = lqt::scenario_example_b();
  auto cb = lqt::classify_disturbance(b.plant);
  REQUIRE(cb.kind == lqt::DisturbanceKind::Mismatched);
}

TEST_CASE("assemble_Q forms c_o' Qbar c_o") {
  auto s = lqt::scenario_example_a();
  Mat Q = lqt::assemble_Q(s.plant, s.cost);
  Mat want = Mat::Zero(3, 3);
  want(2, 2) = 1e4;
  REQUIRE((Q - want).norm() == 0.0);
}

TEST_CASE("lift_reference maps targets through the output pseudo-inverse") {
  auto s = lqt::scenario_example_b();
  Vec r = lqt::lift_reference(s.plant, v1(60.0));
  REQUIRE(r(0) == Catch::Approx(60.0).margin(1e-12));
  REQUIRE(r(1) == Catch::Approx(0.0).margin(1e-12));
  // the lift only matters through c_o r
  REQUIRE((s.plant.c_o * r)(0) == Catch::Approx(60.0).margin(1e-12));
}
