#include <doctest.h>

#include <cmath>

#include <cstdio>

#include "oracles.hpp"
#include "ttomo/geodesic.hpp"
#include "ttomo/metric.hpp"

using namespace ttomo;

namespace {

const MetricSpec kEuclid = MetricSpec::euclidean();
const MetricSpec kConf = MetricSpec::conformal({{0.05, 4.0, {0.0, 0.0}}});

}  // namespace

TEST_CASE("euclidean chord") {
  PhasePoint p0{{-1.0, 0.0}, {1.0, 0.0}};
  const GeodesicPath path = flow(kEuclid, p0);
  CHECK(path.exited);
  CHECK(path.exit_time == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(path.exit.x.x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(path.exit.x.y) < 1e-9);
}

TEST_CASE("energy conservation along conformal rays") {
  Rng rng(21);
  for (int trial = 0; trial < 4; ++trial) {
    const double beta = rng.uniform(0.0, 2 * M_PI);
    const Vec2 z = kConf.disk().boundaryPoint(beta);
    const Vec2 nu = kConf.outwardNormalVector(beta);
    const double a_in = kConf.fiberAngle(z, kConf.metric(z).apply(nu * -1.0));
    PhasePoint p0{z, kConf.unitCovector(z, a_in + rng.uniform(-1.0, 1.0))};
    const double h0 = hamiltonian(kConf, p0);
    CHECK(h0 == doctest::Approx(0.5).epsilon(1e-12));
    FlowOptions opts;
    const GeodesicPath path = flow(kConf, p0, opts);
    REQUIRE(path.exited);
    double max_drift = 0.0;
    for (const auto& s : path.samples)
      max_drift = std::max(max_drift, std::abs(hamiltonian(kConf, {s.x, s.xi}) - 0.5));
    CHECK(max_drift / std::max(1.0, path.exit_time) < 1e-6 * 0.5);
  }
}

TEST_CASE("time reversal returns to the start") {
  const Vec2 z = kConf.disk().boundaryPoint(0.7);
  const Vec2 nu = kConf.outwardNormalVector(0.7);
  PhasePoint p0{z, kConf.metric(z).apply(nu * -1.0)};
  const GeodesicPath fwd = flow(kConf, p0);
  REQUIRE(fwd.exited);
  PhasePoint back{fwd.exit.x, fwd.exit.xi * -1.0};
  PhasePoint q = back;
  const int n = int(fwd.exit_time / 1e-3);
  const double h = fwd.exit_time / n;
  for (int i = 0; i < n; ++i) q = rk4Step(kConf, q, h);
  CHECK(norm(q.x - p0.x) < 1e-6);
}

TEST_CASE("flow matches half-step refinement on a diameter ray") {
  PhasePoint p0{{-1.0, 0.0}, kConf.unitCovector({-1.0, 0.0}, 0.0)};
  FlowOptions coarse;
  coarse.step = 1e-3;
  FlowOptions fine;
  fine.step = 5e-4;
  const GeodesicPath a = flow(kConf, p0, coarse);
  const GeodesicPath b = flow(kConf, p0, fine);
  REQUIRE(a.exited);
  REQUIRE(b.exited);
  CHECK(norm(a.exit.x - b.exit.x) < 1e-5);
  CHECK(std::abs(a.exit_time - b.exit_time) < 1e-5);
}

TEST_CASE("exp map identities") {
  CHECK(norm(expMap(kEuclid, {0.2, 0.1}, {0.3, -0.4}) - Vec2{0.5, -0.3}) < 1e-10);
  CHECK(norm(expMap(kConf, {0.2, 0.1}, {0.0, 0.0}) - Vec2{0.2, 0.1}) < 1e-15);
}

TEST_CASE("exp then log round-trips through the two-point solver") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec2 x{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
    const Vec2 v{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    if (norm(v) < 0.05) continue;
    const Vec2 y = expMap(kConf, x, v);
    const TwoPointResult r = twoPointSolve(kConf, x, y);
    REQUIRE(r.converged);
    CHECK(r.rho == doctest::Approx(kConf.gNorm(x, v)).epsilon(1e-5));
  }
}

TEST_CASE("euclidean boundary distance reproduces chords") {
  Rng rng(13);
  for (int trial = 0; trial < 8; ++trial) {
    const double b1 = rng.uniform(0.0, 2 * M_PI);
    const double b2 = rng.uniform(0.0, 2 * M_PI);
    if (std::abs(b1 - b2) < 0.05) continue;
    const TwoPointResult r = boundaryDistance(kEuclid, b1, b2);
    const double chord = norm(kEuclid.disk().boundaryPoint(b1) - kEuclid.disk().boundaryPoint(b2));
    CHECK(r.rho == doctest::Approx(chord).epsilon(1e-8));
    CHECK(kEuclid.coNorm(kEuclid.disk().boundaryPoint(b1), r.xi_init) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("boundary distance is symmetric and triangle-consistent") {
  for (auto [b1, b2] : {std::pair{0.3, 2.0}, std::pair{1.1, 4.9}, std::pair{5.9, 2.8}}) {
    const TwoPointResult ab = boundaryDistance(kConf, b1, b2);
    const TwoPointResult ba = boundaryDistance(kConf, b2, b1);
    CHECK(std::abs(ab.rho - ba.rho) < 1e-6);
    const double mid = 0.5 * (b1 + b2);
    const TwoPointResult am = boundaryDistance(kConf, b1, mid);
    const TwoPointResult mb = boundaryDistance(kConf, mid, b2);
    CHECK(ab.rho <= am.rho + mb.rho + 1e-9);
  }
}

TEST_CASE("conformal boundary distances against frozen lattice oracle") {
  // values computed once by a dense shortest-path lattice oracle
  // (tests/oracles.cpp, oracleConformalDistance) on a 400x400 grid with an
  // order-16 move neighborhood; regenerate with the [.oracle] test below
  struct Case { double b1, b2, expect; };
  const Case cases[] = {
      {0.0, M_PI, 2.045022},
      {0.0, 2.0943951023931953, 1.747750},
      {0.7853981633974483, 3.9269908169872414, 2.044898},
  };
  for (const Case& c : cases) {
    const TwoPointResult r = boundaryDistance(kConf, c.b1, c.b2);
    CHECK(std::abs(r.rho - c.expect) < 1e-3);
  }
}

// slow regeneration of the frozen oracle values above; run explicitly with
//   ttomo_tests -tc="regenerate lattice oracle values" -nv
TEST_CASE("regenerate lattice oracle values" * doctest::skip()) {
  const auto phi = oracles::phiOf(kConf);
  const double pairs[][2] = {
      {0.0, M_PI}, {0.0, 2.0943951023931953}, {0.7853981633974483, 3.9269908169872414}};
  for (const auto& p : pairs) {
    const Vec2 a = kConf.disk().boundaryPoint(p[0]);
    const Vec2 b = kConf.disk().boundaryPoint(p[1]);
    const double d = oracles::conformalDistance(phi, a, b);
    std::printf("oracle rho(%.10f, %.10f) = %.6f\n", p[0], p[1], d);
  }
}

TEST_CASE("distance table on the euclidean disk") {
  const BoundaryDistanceTable tab = distanceTable(kEuclid, 16);
  for (int i = 0; i < 16; ++i) {
    CHECK(tab.rhoAt(i, i) == 0.0);
    for (int j = 0; j < 16; ++j) {
      const double expect = 2.0 * std::abs(std::sin(0.5 * (tab.angles[i] - tab.angles[j])));
      CHECK(std::abs(tab.rhoAt(i, j) - expect) < 1e-7);
      CHECK(std::abs(tab.rhoAt(i, j) - tab.rhoAt(j, i)) < 1e-6);
    }
  }
}

TEST_CASE("unit initial covectors across the table") {
  const BoundaryDistanceTable tab = distanceTable(kConf, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      if (i == j) continue;
      const Vec2 z = kConf.disk().boundaryPoint(tab.angles[i]);
      CHECK(kConf.coNorm(z, tab.xi_init[std::size_t(i) * 8 + j]) ==
            doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("jacobi determinant is t for straight lines") {
  PhasePoint p0{{-1.0, 0.0}, {1.0, 0.0}};
  const auto jac = jacobiDeterminant(kEuclid, p0);
  for (std::size_t i = 0; i < jac.size(); i += 97)
    CHECK(jac[i].second == doctest::Approx(jac[i].first).epsilon(1e-9));
}

TEST_CASE("jacobi determinant stays positive on a simple metric") {
  PhasePoint p0{{-1.0, 0.0}, kConf.unitCovector({-1.0, 0.0}, 0.3)};
  const auto jac = jacobiDeterminant(kConf, p0);
  for (const auto& [t, w] : jac)
    if (t > 0.01) CHECK(w > 0.0);
}

TEST_CASE("simplicity verdicts") {
  const SimplicityReport flat = checkSimplicity(MetricSpec::euclidean(), 32, 2e-3);
  CHECK(flat.simple());
  CHECK(flat.convexity_margin == doctest::Approx(1.0).epsilon(1e-9));

  const SimplicityReport conf = checkSimplicity(kConf, 32, 2e-3);
  CHECK(conf.simple());

  // strong interior lens focuses rays into a conjugate point
  const MetricSpec lens = MetricSpec::conformal({{0.85, 6.0, {0.0, 0.0}}});
  const SimplicityReport rep = checkSimplicity(lens, 32, 2e-3);
  CHECK(rep.conjugate_points);
  CHECK(!rep.simple());
}

TEST_CASE("polar fan inverts the exponential map") {
  const Vec2 o{0.2, -0.1};
  PolarFan fan(kConf, o, 256, -M_PI, M_PI, 4e-3, 1.0);
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = rng.uniform(-M_PI, M_PI);
    const double t = rng.uniform(0.15, 0.9);
    PhasePoint p{o, kConf.unitCovector(o, a)};
    const int n = int(t / 1e-3);
    for (int i = 0; i < n; ++i) p = rk4Step(kConf, p, 1e-3);
    if (!kConf.disk().insideOmega(p.x, -0.02)) continue;
    const PolarFan::Lookup lk = fan.invert(p.x);
    REQUIRE(lk.ok);
    CHECK(lk.t == doctest::Approx(n * 1e-3).epsilon(2e-4));
    CHECK(norm(lk.xi_t - p.xi) < 2e-3);
  }
}
