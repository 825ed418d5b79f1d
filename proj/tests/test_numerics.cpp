#include <doctest.h>

#include <cmath>

#include "ttomo/numerics.hpp"

using namespace ttomo;

namespace {

// finite-difference cross-check for jets
template <typename F>
void checkJetAgainstFd(F f, double x, double y, double tol = 2e-6) {
  const Jet2 j = f(Jet2::var(x, 0), Jet2::var(y, 1));
  const double h = 1e-5;
  auto val = [&](double a, double b) { return f(Jet2(a), Jet2(b)).v; };
  const double gx = (val(x + h, y) - val(x - h, y)) / (2 * h);
  const double gy = (val(x, y + h) - val(x, y - h)) / (2 * h);
  const double hxx = (val(x + h, y) - 2 * val(x, y) + val(x - h, y)) / (h * h);
  const double hyy = (val(x, y + h) - 2 * val(x, y) + val(x, y - h)) / (h * h);
  const double hxy = (val(x + h, y + h) - val(x + h, y - h) - val(x - h, y + h) +
                      val(x - h, y - h)) / (4 * h * h);
  CHECK(j.g0 == doctest::Approx(gx).epsilon(tol));
  CHECK(j.g1 == doctest::Approx(gy).epsilon(tol));
  CHECK(j.h00 == doctest::Approx(hxx).epsilon(5e-4));
  CHECK(j.h11 == doctest::Approx(hyy).epsilon(5e-4));
  CHECK(j.h01 == doctest::Approx(hxy).epsilon(5e-4));
}

}  // namespace

TEST_CASE("jet arithmetic matches finite differences") {
  checkJetAgainstFd([](Jet2 x, Jet2 y) { return x * x * y + 3.0 * y; }, 0.7, -0.4);
  checkJetAgainstFd([](Jet2 x, Jet2 y) { return exp(-2.0 * (x * x + y * y)); }, 0.3, 0.2);
  checkJetAgainstFd([](Jet2 x, Jet2 y) { return sqrt(1.0 + x * x + 0.5 * y * y); }, -0.6, 0.9);
  checkJetAgainstFd([](Jet2 x, Jet2 y) { return sin(x) * cos(2.0 * y) / (2.0 + x); }, 0.4, 1.1);
  checkJetAgainstFd([](Jet2 x, Jet2 y) { return atan2(y, x); }, 0.8, 0.5);
  checkJetAgainstFd([](Jet2 x, Jet2 y) { return atan2(y, x); }, -0.6, 0.4);
}

TEST_CASE("symmetric matrix helpers") {
  const Sym2 g{2.0, 0.3, 1.5};
  const Sym2 gi = g.inverse();
  const Mat2 prod = g.mat() * gi.mat();
  CHECK(prod(0, 0) == doctest::Approx(1.0));
  CHECK(prod(0, 1) == doctest::Approx(0.0).epsilon(1e-14));

  const Sym2 h = g.sqrtSpd();
  const Mat2 hh = h.mat() * h.mat();
  CHECK(hh(0, 0) == doctest::Approx(g.s00));
  CHECK(hh(0, 1) == doctest::Approx(g.s01));
  CHECK(hh(1, 1) == doctest::Approx(g.s11));

  const auto ev = g.eigenvalues();
  CHECK(ev[0] > 0.0);
  CHECK(ev[0] * ev[1] == doctest::Approx(g.det()));
}

TEST_CASE("rng is deterministic and uniform-ish") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.nextU64() == b.nextU64());
  Rng r(7);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += r.uniform();
  mean /= n;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("smooth transition endpoints") {
  CHECK(smoothStep01<double>(-0.5) == 0.0);
  CHECK(smoothStep01<double>(1.5) == 1.0);
  CHECK(smoothStep01<double>(0.5) == doctest::Approx(0.5));
  const double a = smoothStep01<double>(0.2), b = smoothStep01<double>(0.8);
  CHECK(a + b == doctest::Approx(1.0));
}
