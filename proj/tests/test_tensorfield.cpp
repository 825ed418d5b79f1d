#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ttomo/fields_random.hpp"
#include "ttomo/tensorfield.hpp"

using namespace ttomo;

namespace {

const MetricSpec kEuclid = MetricSpec::euclidean();
const MetricSpec kConf = MetricSpec::conformal({{0.05, 4.0, {0.0, 0.0}}});

Grid gridN(int n) { return Grid::cover(kEuclid.disk(), n); }

}  // namespace

TEST_CASE("zero fields map to zero") {
  const Grid g = gridN(33);
  const OneFormField v = OneFormField::zeros(g, 1.0);
  const SymTensor2Field dv = symDiff(kConf, v);
  CHECK(maxAbs(dv) == 0.0);
  const SymTensor2Field f = SymTensor2Field::zeros(g, 1.0);
  CHECK(maxAbs(divergence(kConf, f)) == 0.0);
}

TEST_CASE("flat symmetric differential of v = (x^2, 0)") {
  const Grid g = gridN(65);
  const OneFormField v = OneFormField::sample(g, 1.0, [](Vec2 x) { return Vec2{x.x * x.x, 0.0}; });
  const SymTensor2Field dv = symDiff(kEuclid, v);
  // interior check away from the rim
  for (int i = 20; i < 45; ++i)
    for (int j = 20; j < 45; ++j) {
      const Vec2 x = g.node(i, j);
      const Sym2 s = dv.at(i, j);
      CHECK(s.s00 == doctest::Approx(2.0 * x.x).epsilon(1e-9));
      CHECK(std::abs(s.s01) < 1e-10);
      CHECK(std::abs(s.s11) < 1e-10);
    }
}

TEST_CASE("flat divergence of f = [[x,0],[0,0]]") {
  const Grid g = gridN(65);
  const SymTensor2Field f =
      SymTensor2Field::sample(g, 1.0, [](Vec2 x) { return Sym2{x.x, 0.0, 0.0}; });
  const OneFormField d = divergence(kEuclid, f);
  for (int i = 20; i < 45; ++i)
    for (int j = 20; j < 45; ++j) {
      CHECK(d.at(i, j).x == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::abs(d.at(i, j).y) < 1e-10);
    }
}

TEST_CASE("symmetric differential converges to the exact covariant rule") {
  const SmoothOneForm v = randomOneForm(71, 0.8);
  double errs[2];
  int idx = 0;
  for (int n : {65, 129}) {
    const Grid g = gridN(n);
    const OneFormField vf = sampleForm(g, 1.0, v);
    const SymTensor2Field dv_grid = symDiff(kConf, vf);
    const SymTensor2Field dv_exact = exactSymDiff(kConf, v, g, 1.0);
    double max_err = 0.0;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        if (!dv_grid.maskedAt(i, j)) continue;
        const Sym2 d = dv_grid.at(i, j) - dv_exact.at(i, j);
        max_err = std::max({max_err, std::abs(d.s00), std::abs(d.s01), std::abs(d.s11)});
      }
    errs[idx++] = max_err;
  }
  // second-order convergence toward the symbolic values
  CHECK(errs[1] < errs[0] / 3.0);
  CHECK(errs[1] < 0.25);
}

TEST_CASE("adjointness of the differential pair decays with the grid") {
  const SmoothOneForm v = randomOneForm(5, 0.75);
  const SmoothSym2 fsmooth = randomSym2(6, 0.75);
  double errs[2];
  int idx = 0;
  for (int n : {33, 65}) {
    const Grid g = gridN(n);
    const OneFormField vf = sampleForm(g, 1.0, v);
    const SymTensor2Field ff = sampleTensor(g, 1.0, fsmooth);
    const double lhs = l2Inner(kConf, symDiff(kConf, vf), ff);
    const double rhs = -l2Inner(kConf, vf, divergence(kConf, ff));
    const double scale = l2Norm(kConf, ff) * l2Norm(kConf, vf) + 1e-30;
    errs[idx++] = std::abs(lhs - rhs) / scale;
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[1] < 0.05);
}

TEST_CASE("inner product positivity and the flat identity tensor") {
  const Grid g = gridN(65);
  const SymTensor2Field id =
      SymTensor2Field::sample(g, 1.0, [](Vec2) { return Sym2::identity(); });
  const double val = l2Inner(kEuclid, id, id);
  CHECK(val == doctest::Approx(2.0 * M_PI).epsilon(5e-3));
  CHECK(l2Inner(kEuclid, id, id) >= 0.0);
  const SymTensor2Field z = SymTensor2Field::zeros(g, 1.0);
  CHECK(l2Inner(kEuclid, z, z) == 0.0);
}

TEST_CASE("conformal inner product against a refined-grid value") {
  const SmoothSym2 fsmooth = randomSym2(12, 0.8);
  const Grid coarse = gridN(65);
  const Grid fine = gridN(193);
  const SymTensor2Field fc = sampleTensor(coarse, 1.0, fsmooth);
  const SymTensor2Field ff = sampleTensor(fine, 1.0, fsmooth);
  const double a = l2Inner(kConf, fc, fc);
  const double b = l2Inner(kConf, ff, ff);
  CHECK(std::abs(a - b) <= 0.005 * std::abs(b));
}

TEST_CASE("raising indices") {
  const Grid g = gridN(33);
  const SmoothSym2 fsmooth = randomSym2(3, 0.8);
  const SymTensor2Field f = sampleTensor(g, 1.0, fsmooth);

  SUBCASE("euclidean raising is the identity") {
    const SymTensor2Field r = raiseIndices(kEuclid, f);
    CHECK(maxAbs(r - f) < 1e-14);
  }
  SUBCASE("lower after raise round-trips") {
    const SymTensor2Field r = raiseIndices(kConf, f);
    SymTensor2Field back = SymTensor2Field::zeros(g, 1.0);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        if (!f.maskedAt(i, j)) continue;
        const Sym2 gg = kConf.metric(g.node(i, j));
        const Mat2 low = gg.mat() * r.at(i, j).mat() * gg.mat();
        back.set(i, j, Sym2{low(0, 0), 0.5 * (low(0, 1) + low(1, 0)), low(1, 1)});
      }
    CHECK(maxAbs(back - f) < 1e-12);
  }
  SUBCASE("conformal raising scales by e^{-4 phi}") {
    const SymTensor2Field r = raiseIndices(kConf, f);
    for (int k = 0; k < 5; ++k) {
      const int i = 8 + 3 * k, j = 10 + 2 * k;
      if (!f.maskedAt(i, j)) continue;
      const Vec2 x = g.node(i, j);
      const double phi = 0.05 * std::exp(-4.0 * dot(x, x));
      const double scale = std::exp(-4.0 * phi);
      CHECK(r.at(i, j).s00 == doctest::Approx(f.at(i, j).s00 * scale).epsilon(1e-12));
      CHECK(r.at(i, j).s01 == doctest::Approx(f.at(i, j).s01 * scale).epsilon(1e-12));
    }
  }
}

TEST_CASE("operators are linear") {
  const Grid g = gridN(33);
  const OneFormField v1 = sampleForm(g, 1.0, randomOneForm(31, 0.8));
  const OneFormField v2 = sampleForm(g, 1.0, randomOneForm(32, 0.8));
  const OneFormField combo = 2.5 * v1 - (-1.0) * v2;
  const SymTensor2Field lhs = symDiff(kConf, combo);
  const SymTensor2Field rhs = 2.5 * symDiff(kConf, v1) + symDiff(kConf, v2);
  CHECK(maxAbs(lhs - rhs) < 1e-12);
}

TEST_CASE("binary round trip") {
  const Grid g = gridN(17);
  const SymTensor2Field f = sampleTensor(g, 1.0, randomSym2(8, 0.8));
  const std::string path = (std::filesystem::temp_directory_path() / "ttomo_field.t2f").string();
  writeFieldBinary(f, path);
  const SymTensor2Field back = readFieldBinary(path);
  CHECK(back.grid.n == f.grid.n);
  CHECK(maxAbs(back - f) == 0.0);
  std::filesystem::remove(path);
}
