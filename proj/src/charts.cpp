// ttomo - collar and semi-geodesic chart construction
#include "ttomo/charts.hpp"

#include <algorithm>
#include <cmath>

namespace ttomo {

namespace {

// g-unit outward normal of the circle |x - c| = r at angle beta
Vec2 gUnitOutwardNormal(const MetricSpec& spec, Vec2 c, double r, double beta) {
  const Vec2 x{c.x + r * std::cos(beta), c.y + r * std::sin(beta)};
  const Vec2 n{std::cos(beta), std::sin(beta)};
  const Vec2 t{-std::sin(beta), std::cos(beta)};
  const Sym2 g = spec.metric(x);
  const Vec2 tg = g.apply(t);
  Vec2 nu = n - t * (dot(tg, n) / dot(tg, t));
  return nu / std::sqrt(g.quad(nu));
}

}  // namespace

CollarChart::CollarChart(const MetricSpec& spec, int n_beta, int n_s, double s_max)
    : spec_(spec), n_beta_(n_beta), n_s_(n_s), s_max_(s_max) {
  pos_.resize(std::size_t(n_beta) * n_s);
  jac_.resize(pos_.size());
  g_.resize(pos_.size());

  const Disk& disk = spec.disk();
  const double ds = dS();
  const double db = 1e-6;

  auto inwardCovector = [&](double beta) {
    const Vec2 z = disk.boundaryPoint(beta);
    const Vec2 nu = spec.outwardNormalVector(beta);
    return spec.metric(z).apply(nu * -1.0);
  };

  for (int ib = 0; ib < n_beta_; ++ib) {
    const double beta = 2.0 * M_PI * ib / n_beta_;
    const Vec2 z = disk.boundaryPoint(beta);
    PhasePoint p{z, inwardCovector(beta)};
    // joint variation: moving the foot point along the boundary
    Vec2 dx{-disk.radius * std::sin(beta), disk.radius * std::cos(beta)};
    Vec2 dxi = (inwardCovector(beta + db) - inwardCovector(beta - db)) / (2.0 * db);

    for (int is = 0; is < n_s_; ++is) {
      const std::size_t k = idx(ib, is);
      pos_[k] = p.x;
      const Vec2 xdot = spec.metricInverse(p.x).apply(p.xi);
      Mat2 J;
      J(0, 0) = dx.x;
      J(1, 0) = dx.y;
      J(0, 1) = xdot.x;
      J(1, 1) = xdot.y;
      jac_[k] = J;
      const Sym2 gx = spec.metric(p.x);
      g_[k] = Sym2{gx.quad(dx), dot(gx.apply(dx), xdot), gx.quad(xdot)};
      if (is + 1 < n_s_) rk4StepVar(spec_, p, dx, dxi, ds);
    }
  }
}

std::array<Sym2, 2> CollarChart::chartChristoffelAt(int ib, int is) const {
  // chart-coordinate derivatives of the tabulated metric
  const double db = dBeta(), ds = dS();
  auto gAt = [&](int b, int s) {
    b = (b % n_beta_ + n_beta_) % n_beta_;
    s = std::clamp(s, 0, n_s_ - 1);
    return g_[idx(b, s)];
  };
  Sym2 d1 = (gAt(ib + 1, is) - gAt(ib - 1, is)) * (0.5 / db);
  Sym2 d2;
  if (is == 0)
    d2 = (gAt(ib, 1) * 2.0 - gAt(ib, 0) * 1.5 - gAt(ib, 2) * 0.5) * (1.0 / ds);
  else if (is == n_s_ - 1)
    d2 = (gAt(ib, is) * 1.5 - gAt(ib, is - 1) * 2.0 + gAt(ib, is - 2) * 0.5) * (1.0 / ds);
  else
    d2 = (gAt(ib, is + 1) - gAt(ib, is - 1)) * (0.5 / ds);

  const Sym2 gi = g_[idx(ib, is)].inverse();
  const std::array<Sym2, 2> dg{d1, d2};
  std::array<Sym2, 2> gamma;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        double sum = 0.0;
        for (int l = 0; l < 2; ++l)
          sum += gi(k, l) * (dg[i](l, j) + dg[j](i, l) - dg[l](i, j));
        gamma[k].set(i, j, 0.5 * sum);
      }
  return gamma;
}

Vec2 CollarChart::position(double beta, double s) const {
  const double db = dBeta(), ds = dS();
  double ub = beta / db;
  ub -= std::floor(ub / n_beta_) * n_beta_;
  int ib = int(ub);
  if (ib >= n_beta_) ib = n_beta_ - 1;
  const double fb = ub - ib;
  const int ib1 = (ib + 1) % n_beta_;
  double us = std::clamp(s / ds, 0.0, double(n_s_ - 1));
  const int is = std::min(int(us), n_s_ - 2);
  const double fs = us - is;
  return pos_[idx(ib, is)] * ((1 - fb) * (1 - fs)) + pos_[idx(ib1, is)] * (fb * (1 - fs)) +
         pos_[idx(ib, is + 1)] * ((1 - fb) * fs) + pos_[idx(ib1, is + 1)] * (fb * fs);
}

Mat2 CollarChart::jacobian(double beta, double s) const {
  const double db = dBeta(), ds = dS();
  double ub = beta / db;
  ub -= std::floor(ub / n_beta_) * n_beta_;
  int ib = int(ub);
  if (ib >= n_beta_) ib = n_beta_ - 1;
  const double fb = ub - ib;
  const int ib1 = (ib + 1) % n_beta_;
  double us = std::clamp(s / ds, 0.0, double(n_s_ - 1));
  const int is = std::min(int(us), n_s_ - 2);
  const double fs = us - is;
  Mat2 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out(a, b) = jac_[idx(ib, is)](a, b) * ((1 - fb) * (1 - fs)) +
                  jac_[idx(ib1, is)](a, b) * (fb * (1 - fs)) +
                  jac_[idx(ib, is + 1)](a, b) * ((1 - fb) * fs) +
                  jac_[idx(ib1, is + 1)](a, b) * (fb * fs);
  return out;
}

bool CollarChart::invert(Vec2 x, double& beta, double& s) const {
  const Vec2 c = spec_.disk().center;
  double b = std::atan2(x.y - c.y, x.x - c.x);
  double t = spec_.disk().radius - norm(x - c);
  if (t < -2.0 * dS() || t > s_max_ + 2.0 * dS()) return false;
  t = std::clamp(t, 0.0, s_max_);
  for (int it = 0; it < 8; ++it) {
    const Vec2 F = position(b, t) - x;
    if (norm(F) < 1e-10) break;
    const Mat2 J = jacobian(b, t);
    if (std::abs(J.det()) < 1e-14) return false;
    const Vec2 upd = J.inverse() * F;
    b -= upd.x;
    t -= upd.y;
    if (t < -dS() || t > s_max_ + dS()) return false;
    t = std::clamp(t, 0.0, s_max_);
  }
  if (norm(position(b, t) - x) > 1e-7) return false;
  beta = b;
  s = t;
  return true;
}

double CollarChart::normalFormDeviation() const {
  double dev = 0.0;
  for (const Sym2& g : g_)
    dev = std::max({dev, std::abs(g.s01), std::abs(g.s11 - 1.0)});
  return dev;
}

// ---------------------------------------------------------------------------

SemiGeodesicChart::SemiGeodesicChart(const MetricSpec& spec, const Options& opts)
    : spec_(spec) {
  const Disk& disk = spec.disk();
  x0_ = disk.center + Vec2{0.0, -disk.radius1};

  // inward fiber fan at the base point
  const Vec2 nu1 = gUnitOutwardNormal(spec_, disk.center, disk.radius1, -0.5 * M_PI);
  const double a_in = spec_.fiberAngle(x0_, spec_.metric(x0_).apply(nu1 * -1.0));
  const double cut = 0.03;
  fan_ = std::make_shared<PolarFan>(spec_, x0_, opts.fan_rays, a_in - 0.5 * M_PI + cut,
                                    a_in + 0.5 * M_PI - cut, opts.fan_step, disk.radius1, 0.02);

  // map the working boundary to chart space
  const int n_poly = 720;
  std::vector<Vec2> poly(n_poly);
  theta_min_ = 1e300;
  for (int i = 0; i < n_poly; ++i) {
    const double beta = 2.0 * M_PI * i / n_poly;
    const Vec2 z = disk.boundaryPoint(beta);
    poly[i] = forward(z);
    const PolarFan::Lookup lk = fan_->invert(z);
    if (lk.ok) {
      const Vec2 theta = spec_.metricInverse(x0_).apply(lk.xi0);
      theta_min_ = std::min(theta_min_, theta.y);
    }
  }

  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const Vec2& p : poly) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  lo = lo - Vec2{opts.margin, opts.margin};
  hi = hi + Vec2{opts.margin, opts.margin};
  const double side = std::max(hi.x - lo.x, hi.y - lo.y);
  dst_.nx = dst_.ny = opts.dst_n;
  dst_.lo = lo;
  dst_.h = side / (opts.dst_n - 1);

  // column intervals from the boundary polygon
  columns_.assign(dst_.nx, {});
  const double tangent_sin = std::sin(5.0 * M_PI / 180.0);
  for (int i = 0; i < dst_.nx; ++i) {
    const double x = dst_.node(i, 0).x;
    double y_lo = 1e300, y_hi = -1e300;
    bool tangent = false;
    int crossings = 0;
    for (int e = 0; e < n_poly; ++e) {
      const Vec2 a = poly[e], b = poly[(e + 1) % n_poly];
      if ((a.x <= x) == (b.x <= x)) continue;
      const double f = (x - a.x) / (b.x - a.x);
      const double y = a.y + f * (b.y - a.y);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
      ++crossings;
      const Vec2 edge = b - a;
      if (std::abs(edge.x) < tangent_sin * norm(edge)) tangent = true;
    }
    Column& col = columns_[i];
    if (crossings >= 2 && y_hi > y_lo) {
      col.valid = true;
      col.y_lo = y_lo;
      col.y_hi = y_hi;
      col.tangent = tangent;
      col.j_lo = std::max(0, int(std::ceil((y_lo - dst_.lo.y) / dst_.h - 1e-9)));
      col.j_hi = std::min(dst_.ny - 1, int(std::floor((y_hi - dst_.lo.y) / dst_.h + 1e-9)));
      if (col.j_hi < col.j_lo) col.valid = false;
    }
  }

  // pushed metric and inverse map at the chart nodes
  const std::size_t nn = std::size_t(dst_.nx) * dst_.ny;
  mask_.assign(nn, 0);
  gpush_.assign(nn, Sym2::identity());
  inv_pos_.assign(nn, Vec2{});
  inv_jac_.assign(nn, Mat2::identity());
  gin_dev_ = 0.0;

  const Sym2 g0 = spec_.metric(x0_);
  for (int i = 0; i < dst_.nx; ++i) {
    const Column& col = columns_[i];
    if (!col.valid) continue;
    const double y1 = dst_.node(i, 0).x;
    const Vec2 w{y1, 1.0};
    const double wn = std::sqrt(g0.quad(w));
    const Vec2 theta = w / wn;
    const Vec2 gw = g0.apply(w);
    const Vec2 dtheta = Vec2{1.0, 0.0} / wn - w * (gw.x / (wn * wn * wn));
    const Vec2 xi0 = g0.apply(theta);
    const Vec2 dxi0 = g0.apply(dtheta);

    PhasePoint p{x0_, xi0};
    VarBlocks v{Mat2{}, Mat2::identity()};
    double t = 0.0;
    const double hstep = opts.fan_step;
    for (int j = col.j_lo; j <= col.j_hi; ++j) {
      const double target = dst_.node(i, j).y;
      while (t + hstep <= target) {
        rk4StepVar(spec_, p, v, hstep);
        t += hstep;
      }
      PhasePoint pj = p;
      VarBlocks vj = v;
      if (target - t > 1e-14) rk4StepVar(spec_, pj, vj, target - t);

      const std::size_t k = dst_.index(i, j);
      mask_[k] = 1;
      inv_pos_[k] = pj.x;
      const Vec2 xdot = spec_.metricInverse(pj.x).apply(pj.xi);
      const Vec2 dcol = vj.A * dxi0;
      Mat2 J;
      J(0, 0) = dcol.x;
      J(1, 0) = dcol.y;
      J(0, 1) = xdot.x;
      J(1, 1) = xdot.y;
      inv_jac_[k] = J;
      const Sym2 gx = spec_.metric(pj.x);
      const Sym2 gp{gx.quad(dcol), dot(gx.apply(dcol), xdot), gx.quad(xdot)};
      gpush_[k] = gp;
      if (!col.tangent)
        gin_dev_ = std::max({gin_dev_, std::abs(gp.s01), std::abs(gp.s11 - 1.0)});
    }
  }
}

PhasePoint SemiGeodesicChart::chartRay(double y1) const {
  const Sym2 g0 = spec_.metric(x0_);
  const Vec2 w{y1, 1.0};
  const Vec2 theta = w / std::sqrt(g0.quad(w));
  return {x0_, g0.apply(theta)};
}

Vec2 SemiGeodesicChart::forward(Vec2 x) const {
  const PolarFan::Lookup lk = fan_->invert(x);
  if (!lk.ok) throw DomainError("point is outside the chart fan");
  const Vec2 theta = spec_.metricInverse(x0_).apply(lk.xi0);
  if (theta.y <= 1e-9) throw DomainError("chart direction became horizontal");
  return {theta.x / theta.y, lk.t};
}

Vec2 SemiGeodesicChart::inverse(Vec2 y) const {
  PhasePoint p = chartRay(y.x);
  const double step = 2e-3;
  const int n = int(y.y / step);
  for (int i = 0; i < n; ++i) p = rk4Step(spec_, p, step);
  const double rem = y.y - n * step;
  if (rem > 1e-14) p = rk4Step(spec_, p, rem);
  return p.x;
}

std::array<Sym2, 2> SemiGeodesicChart::pushedChristoffelAt(int i, int j) const {
  auto gAt = [&](int a, int b) {
    a = std::clamp(a, 0, dst_.nx - 1);
    b = std::clamp(b, 0, dst_.ny - 1);
    if (!mask_[dst_.index(a, b)]) return gpush_[dst_.index(std::clamp(i, 0, dst_.nx - 1),
                                                           std::clamp(j, 0, dst_.ny - 1))];
    return gpush_[dst_.index(a, b)];
  };
  auto deriv = [&](int dir) {
    const int di = dir == 0 ? 1 : 0, dj = dir == 0 ? 0 : 1;
    const bool plus = i + di < dst_.nx && j + dj < dst_.ny && mask_[dst_.index(i + di, j + dj)];
    const bool minus = i - di >= 0 && j - dj >= 0 && mask_[dst_.index(i - di, j - dj)];
    if (plus && minus) return (gAt(i + di, j + dj) - gAt(i - di, j - dj)) * (0.5 / dst_.h);
    if (plus) return (gAt(i + di, j + dj) - gAt(i, j)) * (1.0 / dst_.h);
    if (minus) return (gAt(i, j) - gAt(i - di, j - dj)) * (1.0 / dst_.h);
    return Sym2{};
  };
  const std::array<Sym2, 2> dg{deriv(0), deriv(1)};
  const Sym2 gi = gpush_[dst_.index(i, j)].inverse();
  std::array<Sym2, 2> gamma;
  for (int k = 0; k < 2; ++k)
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        double sum = 0.0;
        for (int l = 0; l < 2; ++l)
          sum += gi(k, l) * (dg[a](l, b) + dg[b](a, l) - dg[l](a, b));
        gamma[k].set(a, b, 0.5 * sum);
      }
  return gamma;
}

SymTensor2Field SemiGeodesicChart::pushTensor(const SymTensor2Field& f) const {
  Disk fake;
  fake.center = dst_.node(dst_.nx / 2, dst_.ny / 2);
  fake.radius = fake.radius1 = 0.5 * dst_.h * (dst_.nx - 1);
  Grid g;
  g.n = dst_.nx;
  g.lo = dst_.lo;
  g.h = dst_.h;
  g.disk = fake;
  SymTensor2Field out = SymTensor2Field::zeros(g, fake.radius1 * 2.0);
  out.mask = mask_;
  for (int i = 0; i < dst_.nx; ++i)
    for (int j = 0; j < dst_.ny; ++j) {
      const std::size_t k = dst_.index(i, j);
      if (!mask_[k]) {
        out.set(i, j, Sym2{});
        continue;
      }
      const Mat2& J = inv_jac_[k];
      const Sym2 fx = f.read(inv_pos_[k]);
      const Mat2 m = J.transposed() * fx.mat() * J;
      out.set(i, j, Sym2{m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)});
    }
  return out;
}

}  // namespace ttomo
