// ttomo - band-limited random fields built on the jet scalar
#include "ttomo/fields_random.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace ttomo {

namespace {

struct Wave {
  double kx, ky, phase, amp;
};

struct ScalarRecipe {
  std::vector<Wave> waves;
  double on2, off2;  // radial window in r^2

  template <typename T>
  T eval(const T& x, const T& y) const {
    using std::cos;
    using std::exp;
    const T r2 = x * x + y * y;
    const T win = 1.0 - smoothStep01<T>((r2 - on2) / (off2 - on2));
    T sum(0.0);
    for (const Wave& w : waves) sum = sum + w.amp * cos(w.kx * x + w.ky * y + w.phase);
    return win * sum;
  }
};

ScalarRecipe makeRecipe(Rng& rng, double support, int max_mode, double amp) {
  ScalarRecipe r;
  const double on = 0.65 * support, off = support;
  r.on2 = on * on;
  r.off2 = off * off;
  const int n_waves = 6;
  for (int i = 0; i < n_waves; ++i) {
    Wave w;
    const int kx = rng.uniformInt(2 * max_mode + 1) - max_mode;
    const int ky = rng.uniformInt(2 * max_mode + 1) - max_mode;
    w.kx = M_PI * kx;
    w.ky = M_PI * ky;
    w.phase = rng.uniform(0.0, 2.0 * M_PI);
    w.amp = rng.uniform(-1.0, 1.0) * amp / n_waves * 2.0;
    r.waves.push_back(w);
  }
  return r;
}

SmoothScalar wrapRecipe(std::shared_ptr<ScalarRecipe> rec) {
  SmoothScalar s;
  s.value = [rec](Vec2 x) { return rec->eval<double>(x.x, x.y); };
  s.grad = [rec](Vec2 x) {
    const Jet2 j = rec->eval<Jet2>(Jet2::var(x.x, 0), Jet2::var(x.y, 1));
    return Vec2{j.g0, j.g1};
  };
  return s;
}

}  // namespace

SmoothScalar randomScalar(std::uint64_t seed, double support_radius, int max_mode, double amp) {
  Rng rng(seed);
  return wrapRecipe(std::make_shared<ScalarRecipe>(makeRecipe(rng, support_radius, max_mode, amp)));
}

SmoothOneForm randomOneForm(std::uint64_t seed, double support_radius, int max_mode, double amp) {
  Rng rng(seed);
  auto r0 = std::make_shared<ScalarRecipe>(makeRecipe(rng, support_radius, max_mode, amp));
  auto r1 = std::make_shared<ScalarRecipe>(makeRecipe(rng, support_radius, max_mode, amp));
  SmoothOneForm v;
  v.value = [r0, r1](Vec2 x) {
    return Vec2{r0->eval<double>(x.x, x.y), r1->eval<double>(x.x, x.y)};
  };
  v.deriv = [r0, r1](Vec2 x) {
    const Jet2 a = r0->eval<Jet2>(Jet2::var(x.x, 0), Jet2::var(x.y, 1));
    const Jet2 b = r1->eval<Jet2>(Jet2::var(x.x, 0), Jet2::var(x.y, 1));
    Mat2 d;
    d(0, 0) = a.g0;
    d(1, 0) = a.g1;
    d(0, 1) = b.g0;
    d(1, 1) = b.g1;
    return d;
  };
  return v;
}

SmoothSym2 randomSym2(std::uint64_t seed, double support_radius, int max_mode, double amp) {
  Rng rng(seed);
  auto r00 = std::make_shared<ScalarRecipe>(makeRecipe(rng, support_radius, max_mode, amp));
  auto r01 = std::make_shared<ScalarRecipe>(makeRecipe(rng, support_radius, max_mode, amp));
  auto r11 = std::make_shared<ScalarRecipe>(makeRecipe(rng, support_radius, max_mode, amp));
  SmoothSym2 f;
  f.value = [r00, r01, r11](Vec2 x) {
    return Sym2{r00->eval<double>(x.x, x.y), r01->eval<double>(x.x, x.y),
                r11->eval<double>(x.x, x.y)};
  };
  f.deriv = [r00, r01, r11](Vec2 x) {
    const Jet2 a = r00->eval<Jet2>(Jet2::var(x.x, 0), Jet2::var(x.y, 1));
    const Jet2 b = r01->eval<Jet2>(Jet2::var(x.x, 0), Jet2::var(x.y, 1));
    const Jet2 c = r11->eval<Jet2>(Jet2::var(x.x, 0), Jet2::var(x.y, 1));
    std::array<Sym2, 2> d;
    d[0] = {a.g0, b.g0, c.g0};
    d[1] = {a.g1, b.g1, c.g1};
    return d;
  };
  return f;
}

OneFormField sampleForm(const Grid& grid, double mask_radius, const SmoothOneForm& v) {
  return OneFormField::sample(grid, mask_radius, v.value);
}

SymTensor2Field sampleTensor(const Grid& grid, double mask_radius, const SmoothSym2& f) {
  return SymTensor2Field::sample(grid, mask_radius, f.value);
}

SymTensor2Field exactSymDiff(const MetricSpec& spec, const SmoothOneForm& v, const Grid& grid,
                             double mask_radius) {
  const MetricSpec spec_copy = spec;
  auto value = v.value;
  auto deriv = v.deriv;
  auto rule = [spec_copy, value, deriv](Vec2 x) {
    const Mat2 d = deriv(x);
    const Vec2 vx = value(x);
    const auto gamma = spec_copy.christoffel(x);
    Sym2 dv;
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b)
        dv.set(a, b, 0.5 * (d(a, b) + d(b, a)) - gamma[0](a, b) * vx.x - gamma[1](a, b) * vx.y);
    return dv;
  };
  return SymTensor2Field::sample(grid, mask_radius, rule);
}

double c1Norm(const SmoothOneForm& v, const Disk& disk, int samples) {
  double m = 0.0;
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < samples; ++j) {
      const Vec2 x{disk.center.x + disk.radius * (2.0 * i / (samples - 1) - 1.0),
                   disk.center.y + disk.radius * (2.0 * j / (samples - 1) - 1.0)};
      if (norm(x - disk.center) >= disk.radius) continue;
      const Vec2 val = v.value(x);
      const Mat2 d = v.deriv(x);
      m = std::max({m, std::abs(val.x), std::abs(val.y), std::abs(d(0, 0)), std::abs(d(0, 1)),
                    std::abs(d(1, 0)), std::abs(d(1, 1))});
    }
  return m;
}

double c1Norm(const SmoothSym2& f, const Disk& disk, int samples) {
  double m = 0.0;
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < samples; ++j) {
      const Vec2 x{disk.center.x + disk.radius * (2.0 * i / (samples - 1) - 1.0),
                   disk.center.y + disk.radius * (2.0 * j / (samples - 1) - 1.0)};
      if (norm(x - disk.center) >= disk.radius) continue;
      const Sym2 val = f.value(x);
      const auto d = f.deriv(x);
      m = std::max({m, std::abs(val.s00), std::abs(val.s01), std::abs(val.s11)});
      for (const Sym2& s : d)
        m = std::max({m, std::abs(s.s00), std::abs(s.s01), std::abs(s.s11)});
    }
  return m;
}

}  // namespace ttomo
