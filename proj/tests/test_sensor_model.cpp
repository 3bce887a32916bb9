#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mcmplan/sensor_model.hpp"

using namespace mcmplan;

namespace {

SensorParams default_params() { return SensorParams{}; }

// Uniform helper with explicit mapping so draws are reproducible.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

}  // namespace

TEST_CASE("transmission loss") {
  SensorParams p = default_params();

  // 20*log10(1000) + 5.2 = 65.2
  REQUIRE(transmission_loss(1000.0, p) == Catch::Approx(65.2).margin(1e-12));
  // 20*log10(100) + 0.52 = 40.52
  REQUIRE(transmission_loss(100.0, p) == Catch::Approx(40.52).margin(1e-12));

  p.atten_a = 0.0;
  REQUIRE(transmission_loss(1.0, p) == Catch::Approx(0.0).margin(1e-15));

  SECTION("monotone increasing in range") {
    p.atten_a = 5.2;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      const double r1 = uniform(rng, 0.1, 5000.0);
      const double r2 = r1 + uniform(rng, 1e-3, 500.0);
      REQUIRE(transmission_loss(r2, p) > transmission_loss(r1, p));
    }
  }

  SECTION("paper-literal form") {
    p.atten_a = 5.2;
    p.tl_form = TlForm::paper_literal;
    REQUIRE(transmission_loss(1000.0, p) ==
            Catch::Approx(75.847833789965077).margin(1e-9));
  }

  SECTION("nonpositive range rejected") {
    REQUIRE_THROWS_AS(transmission_loss(0.0, p), std::domain_error);
    REQUIRE_THROWS_AS(transmission_loss(-3.0, p), std::domain_error);
  }
}

TEST_CASE("detection probability") {
  SensorParams p = default_params();
  const VehicleState origin{};

  // Phi((72 - 65.2)/9)
  REQUIRE(detect_prob_p(origin, Target{1000.0, 0.0}, p) ==
          Catch::Approx(0.77504214422715047).margin(1e-12));
  REQUIRE(detect_prob_p(origin, Target{100.0, 0.0}, p) ==
          Catch::Approx(0.99976542406639912).margin(1e-12));

  SECTION("FOM equal to TL gives exactly one half") {
    p.fom = transmission_loss(250.0, p);
    REQUIRE(detect_prob_p(origin, Target{250.0, 0.0}, p) ==
            Catch::Approx(0.5).margin(1e-15));
  }

  SECTION("range at the floor saturates") {
    // Coincident target is clamped to kRangeFloor, TL ~ -20 dB.
    REQUIRE(detect_prob_p(origin, Target{0.0, 0.0}, p) ==
            Catch::Approx(1.0).margin(1e-6));
  }

  SECTION("nonincreasing in range") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
      const double r1 = uniform(rng, 0.2, 4000.0);
      const double r2 = r1 + uniform(rng, 0.0, 1000.0);
      REQUIRE(detect_prob_p(origin, Target{r2, 0.0}, p) <=
              detect_prob_p(origin, Target{r1, 0.0}, p) + 1e-15);
    }
  }

  SECTION("L1 range metric") {
    p.range_metric = RangeMetric::l1;
    // |dx| + |dy| = 600 + 800 = 1400 vs Euclidean 1000
    const double got = detect_prob_p(origin, Target{600.0, 800.0}, p);
    const double tl = transmission_loss(1400.0, p);
    REQUIRE(got == Catch::Approx(normal_cdf((p.fom - tl) / p.sigma)).margin(1e-15));
  }
}

TEST_CASE("body-frame bearing") {
  // Dead ahead is zero.
  REQUIRE(bearing_alpha_b(VehicleState{0, 0, 0, 0}, Target{1, 0}) ==
          Catch::Approx(0.0).margin(1e-15));
  // Port-side target maps to +pi/2.
  REQUIRE(bearing_alpha_b(VehicleState{0, 0, 0, 0}, Target{0, 1}) ==
          Catch::Approx(kPi / 2).margin(1e-15));
  // Heading rotated onto the target.
  REQUIRE(bearing_alpha_b(VehicleState{0, 0, kPi / 2, 0}, Target{0, 1}) ==
          Catch::Approx(0.0).margin(1e-15));
  // Coincident target convention.
  REQUIRE(bearing_alpha_b(VehicleState{3, 4, 1.2, 0}, Target{3, 4}) == 0.0);

  SECTION("always in (-pi, pi]") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 500; ++i) {
      const VehicleState s{uniform(rng, -50, 50), uniform(rng, -50, 50),
                           uniform(rng, -10, 10), 0};
      const Target w{uniform(rng, -50, 50), uniform(rng, -50, 50)};
      const double b = bearing_alpha_b(s, w);
      REQUIRE(b > -kPi - 1e-15);
      REQUIRE(b <= kPi + 1e-15);
    }
  }
}

TEST_CASE("horizontal FOV gate") {
  SensorParams p = default_params();
  const double half = 0.5 * p.alpha_fov;

  const VehicleState s{0, 0, 0, 0};
  REQUIRE(f_alpha(s, Target{100, 0}, p) ==
          Catch::Approx(0.99999999999146454).margin(1e-12));
  // On the FOV edge the boundary logistic contributes exactly 0.5.
  REQUIRE(f_alpha(s, Target{100 * std::cos(half), 100 * std::sin(half)}, p) ==
          Catch::Approx(0.5).margin(1e-9));
  // Directly behind.
  REQUIRE(f_alpha(s, Target{-100, 0}, p) == Catch::Approx(0.0).margin(1e-9));

  SECTION("even in the bearing") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
      const double ab = uniform(rng, -kPi, kPi);
      const Target left{100 * std::cos(ab), 100 * std::sin(ab)};
      const Target right{100 * std::cos(-ab), 100 * std::sin(-ab)};
      REQUIRE(f_alpha(s, left, p) == Catch::Approx(f_alpha(s, right, p)).margin(1e-12));
    }
  }

  SECTION("sharp gates stay near the ideal indicator") {
    // The worst case at slope*fov = 10 is 2/(1 + e^5); the 1e-4 bound
    // needs slope*fov >= 20.
    std::mt19937_64 rng(19);
    for (int i = 0; i < 100; ++i) {
      SensorParams q = p;
      q.alpha_fov = uniform(rng, 0.5, 2.5);
      q.p_alpha = std::max(10.0 / q.alpha_fov, uniform(rng, 5.0, 60.0));
      const double center = f_alpha(s, Target{100, 0}, q);
      const double behind = f_alpha(s, Target{-100, 0}, q);
      REQUIRE(std::abs(center - 1.0) <= 1.4e-2);
      REQUIRE(behind <= 1.4e-2);
      REQUIRE(behind >= -1e-6);
      if (q.p_alpha * q.alpha_fov >= 20.0) {
        REQUIRE(std::abs(center - 1.0) <= 1e-4);
        REQUIRE(behind <= 1e-4);
      }
    }
  }
}

TEST_CASE("elevation angle and vertical gate") {
  SensorParams p = default_params();
  const VehicleState s{0, 0, 0, 0};

  // h = 20, range = 20 -> arctan(-1)
  REQUIRE(elevation_eps_b(s, Target{20, 0}, p) ==
          Catch::Approx(-kPi / 4).margin(1e-15));
  // Far targets approach zero from below.
  const double far = elevation_eps_b(s, Target{1e7, 0}, p);
  REQUIRE(far < 0.0);
  REQUIRE(far > -1e-5);
  // Inner edge of the default detection band (-8.5 deg).
  REQUIRE(elevation_eps_b(s, Target{133.82312476634819, 0}, p) ==
          Catch::Approx(-0.14835298641951801).margin(1e-12));

  SECTION("gate values") {
    // Band center: eps_b == eps_de at range h/tan(6 deg).
    const double r_center = p.height_h / std::tan(-p.eps_de);
    REQUIRE(f_eps(s, Target{r_center, 0}, p) ==
            Catch::Approx(0.99999994737872681).margin(1e-10));
    // Band edge (-8.5 deg).
    REQUIRE(f_eps(s, Target{133.82312476634819, 0}, p) ==
            Catch::Approx(0.5).margin(1e-9));
    // Inside the band at range 10h.
    REQUIRE(f_eps(s, Target{200, 0}, p) ==
            Catch::Approx(0.99999979808569891).margin(1e-10));
    REQUIRE(f_eps(s, Target{200, 0}, p) >= 0.9);
  }

  SECTION("depends on the target only through range") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
      const double r = uniform(rng, 1.0, 500.0);
      const double a1 = uniform(rng, -kPi, kPi);
      const double a2 = uniform(rng, -kPi, kPi);
      const Target w1{r * std::cos(a1), r * std::sin(a1)};
      const Target w2{r * std::cos(a2), r * std::sin(a2)};
      REQUIRE(f_eps(s, w1, p) == Catch::Approx(f_eps(s, w2, p)).margin(1e-12));
    }
  }
}

TEST_CASE("detection rate gamma") {
  SensorParams p = default_params();
  const VehicleState s{0, 0, 0, 0};

  // Dead ahead at 200 m with the default constants (full-formula value).
  REQUIRE(gamma_rate(s, Target{200, 0}, p) ==
          Catch::Approx(19.944119175099437).margin(1e-8));
  // Directly behind: the horizontal gate kills it.
  REQUIRE(gamma_rate(s, Target{-200, 0}, p) <= 1e-9 * p.scan_rate_lambda);
  // At the range floor the elevation is far below the band.
  REQUIRE(gamma_rate(s, Target{0.05, 0}, p) <= 1e-12 * p.scan_rate_lambda);

  SECTION("clamped to [0, lambda]") {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 500; ++i) {
      const VehicleState st{uniform(rng, -400, 400), uniform(rng, -400, 400),
                            uniform(rng, -kPi, kPi), 0};
      const Target w{uniform(rng, -400, 400), uniform(rng, -400, 400)};
      const double g = gamma_rate(st, w, p);
      REQUIRE(g >= 0.0);
      REQUIRE(g <= p.scan_rate_lambda);
    }
  }

  SECTION("frame invariance under rigid rotation") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 200; ++i) {
      const VehicleState st{uniform(rng, -300, 300), uniform(rng, -300, 300),
                            uniform(rng, -kPi, kPi), 0};
      const Target w{uniform(rng, -300, 300), uniform(rng, -300, 300)};
      const double cx = uniform(rng, -100, 100);
      const double cy = uniform(rng, -100, 100);
      const double rot = uniform(rng, -kPi, kPi);
      const double c = std::cos(rot), sn = std::sin(rot);
      auto rotate = [&](double x, double y) {
        return std::pair{cx + c * (x - cx) - sn * (y - cy),
                         cy + sn * (x - cx) + c * (y - cy)};
      };
      const auto [sx, sy] = rotate(st.x, st.y);
      const auto [wx, wy] = rotate(w.omega_x, w.omega_y);
      const VehicleState st2{sx, sy, st.psi + rot, 0};
      const double g1 = gamma_rate(st, w, p);
      const double g2 = gamma_rate(st2, Target{wx, wy}, p);
      REQUIRE(g2 == Catch::Approx(g1).margin(1e-9));
    }
  }
}
