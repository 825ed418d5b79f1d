// ttomo - geodesic flow integration and two-point solvers
#include "ttomo/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "ttomo/io.hpp"

namespace ttomo {

double hamiltonian(const MetricSpec& spec, const PhasePoint& p) {
  return 0.5 * spec.metricInverse(p.x).quad(p.xi);
}

namespace {

// Hamiltonian vector field and, on demand, the blocks of its linearization
struct Deriv {
  Vec2 xdot, xidot;
  Mat2 H_xixi;  // g^{ij}
  Mat2 H_xix;   // (i,k) = d^2 H / d xi_i d x^k
  Mat2 H_xx;    // symmetric
};

Deriv hamiltonDeriv(const MetricSpec& spec, const PhasePoint& p, bool variational) {
  Deriv d;
  const MetricJet mj = spec.metricJet(p.x);
  const Sym2 gi = mj.g.inverse();
  const Vec2 v = gi.apply(p.xi);  // velocity = xi raised
  d.xdot = v;
  d.xidot = {0.5 * mj.dg[0].quad(v), 0.5 * mj.dg[1].quad(v)};
  if (!variational) return d;

  d.H_xixi = gi.mat();
  for (int k = 0; k < kDim; ++k) {
    const Vec2 col = gi.apply(mj.dg[k].apply(v)) * -1.0;  // -G^-1 dG_k v
    d.H_xix(0, k) = col.x;
    d.H_xix(1, k) = col.y;
  }
  const Vec2 w0 = mj.dg[0].apply(v), w1 = mj.dg[1].apply(v);
  d.H_xx(0, 0) = gi.quad(w0) - 0.5 * mj.d2g[0].quad(v);
  d.H_xx(1, 1) = gi.quad(w1) - 0.5 * mj.d2g[2].quad(v);
  const double off = dot(w0, gi.apply(w1)) - 0.5 * mj.d2g[1].quad(v);
  d.H_xx(0, 1) = off;
  d.H_xx(1, 0) = off;
  return d;
}

struct VarRhs {
  Vec2 xdot, xidot;
  Mat2 Adot, Bdot;
};

VarRhs varRhs(const MetricSpec& spec, const PhasePoint& p, const Mat2& A, const Mat2& B) {
  const Deriv d = hamiltonDeriv(spec, p, true);
  VarRhs r;
  r.xdot = d.xdot;
  r.xidot = d.xidot;
  r.Adot = d.H_xix * A + d.H_xixi * B;
  r.Bdot = (d.H_xx * A + d.H_xix.transposed() * B) * -1.0;
  return r;
}

double signedLevel(const Disk& disk, Vec2 x, double stop_radius) {
  return norm(x - disk.center) - stop_radius;
}

}  // namespace

PhasePoint rk4Step(const MetricSpec& spec, const PhasePoint& p, double h) {
  auto f = [&](const PhasePoint& q) { return hamiltonDeriv(spec, q, false); };
  const Deriv k1 = f(p);
  const Deriv k2 = f({p.x + k1.xdot * (0.5 * h), p.xi + k1.xidot * (0.5 * h)});
  const Deriv k3 = f({p.x + k2.xdot * (0.5 * h), p.xi + k2.xidot * (0.5 * h)});
  const Deriv k4 = f({p.x + k3.xdot * h, p.xi + k3.xidot * h});
  PhasePoint out;
  out.x = p.x + (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot) * (h / 6.0);
  out.xi = p.xi + (k1.xidot + 2.0 * k2.xidot + 2.0 * k3.xidot + k4.xidot) * (h / 6.0);
  return out;
}

void rk4StepVar(const MetricSpec& spec, PhasePoint& p, VarBlocks& v, double h) {
  auto f = [&](const PhasePoint& q, const Mat2& A, const Mat2& B) {
    return varRhs(spec, q, A, B);
  };
  const VarRhs k1 = f(p, v.A, v.B);
  const VarRhs k2 = f({p.x + k1.xdot * (0.5 * h), p.xi + k1.xidot * (0.5 * h)},
                      v.A + k1.Adot * (0.5 * h), v.B + k1.Bdot * (0.5 * h));
  const VarRhs k3 = f({p.x + k2.xdot * (0.5 * h), p.xi + k2.xidot * (0.5 * h)},
                      v.A + k2.Adot * (0.5 * h), v.B + k2.Bdot * (0.5 * h));
  const VarRhs k4 = f({p.x + k3.xdot * h, p.xi + k3.xidot * h},
                      v.A + k3.Adot * h, v.B + k3.Bdot * h);
  p.x = p.x + (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot) * (h / 6.0);
  p.xi = p.xi + (k1.xidot + 2.0 * k2.xidot + 2.0 * k3.xidot + k4.xidot) * (h / 6.0);
  v.A = v.A + (k1.Adot + 2.0 * k2.Adot + 2.0 * k3.Adot + k4.Adot) * (h / 6.0);
  v.B = v.B + (k1.Bdot + 2.0 * k2.Bdot + 2.0 * k3.Bdot + k4.Bdot) * (h / 6.0);
}

void rk4StepVar(const MetricSpec& spec, PhasePoint& p, Vec2& dx, Vec2& dxi, double h) {
  VarBlocks v;
  v.A = {dx.x, 0, dx.y, 0};
  v.B = {dxi.x, 0, dxi.y, 0};
  rk4StepVar(spec, p, v, h);
  dx = {v.A(0, 0), v.A(1, 0)};
  dxi = {v.B(0, 0), v.B(1, 0)};
}

GeodesicPath flow(const MetricSpec& spec, const PhasePoint& p0, const FlowOptions& opts) {
  GeodesicPath path;
  PhasePoint p = p0;
  double t = 0.0;
  if (opts.store_path) path.samples.push_back({t, p.x, p.xi});

  const double h = opts.step;
  while (t < opts.t_max) {
    const PhasePoint prev = p;
    p = rk4Step(spec, p, h);
    t += h;
    if (signedLevel(spec.disk(), p.x, opts.stop_radius) > 0.0) {
      // bisection-refined crossing within the last step
      double lo = 0.0, hi = h;
      PhasePoint at_hi = p;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const PhasePoint pm = rk4Step(spec, prev, mid);
        if (signedLevel(spec.disk(), pm.x, opts.stop_radius) > 0.0) {
          hi = mid;
          at_hi = pm;
        } else {
          lo = mid;
        }
      }
      path.exit_time = t - h + hi;
      path.exit = at_hi;
      path.exited = true;
      if (opts.store_path) path.samples.push_back({path.exit_time, at_hi.x, at_hi.xi});
      return path;
    }
    if (opts.store_path) path.samples.push_back({t, p.x, p.xi});
  }
  path.exit_time = t;
  path.exit = p;
  path.exited = false;
  return path;
}

Vec2 expMap(const MetricSpec& spec, Vec2 x, Vec2 v, double step) {
  const double len = spec.gNorm(x, v);
  if (len == 0.0) return x;
  PhasePoint p{x, spec.lower(x, v / len)};
  const int n = std::max(1, int(std::ceil(len / step)));
  const double h = len / n;
  for (int i = 0; i < n; ++i) p = rk4Step(spec, p, h);
  return p.x;
}

namespace {

// integrate to a fixed time with the variational blocks riding along
void flowToTime(const MetricSpec& spec, PhasePoint& p, VarBlocks& v, double T, double step) {
  if (T <= 0.0) return;
  const int n = int(T / step);
  for (int i = 0; i < n; ++i) rk4StepVar(spec, p, v, step);
  const double rem = T - n * step;
  if (rem > 1e-15) rk4StepVar(spec, p, v, rem);
}

}  // namespace

TwoPointResult twoPointSolve(const MetricSpec& spec, Vec2 x, Vec2 y,
                             const TwoPointOptions& opts) {
  TwoPointResult res;
  const Vec2 d = y - x;
  if (norm(d) < 1e-14) {
    res.converged = true;
    return res;
  }
  // euclidean initial guess for (fiber angle, time)
  double alpha = spec.fiberAngle(x, spec.metric(x).apply(d));
  const Vec2 mid = (x + y) * 0.5;
  double tau = std::sqrt(spec.metric(mid).quad(d));

  double best_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iter; ++it) {
    PhasePoint p{x, spec.unitCovector(x, alpha)};
    VarBlocks v{Mat2{}, Mat2::identity()};
    flowToTime(spec, p, v, tau, opts.step);
    const Vec2 F = p.x - y;
    const double rn = norm(F);
    if (rn < best_res) {
      best_res = rn;
      res.rho = tau;
      res.xi_init = spec.unitCovector(x, alpha);
      res.xi_exit = p.xi;
      res.dexp = v.A;
      res.iterations = it + 1;
    }
    if (rn <= opts.tol) {
      res.converged = true;
      res.residual = rn;
      return res;
    }
    const Vec2 dxi_da = spec.unitCovectorDeriv(x, alpha);
    const Vec2 col_a = v.A * dxi_da;
    const Vec2 col_t = spec.metricInverse(p.x).apply(p.xi);
    Mat2 J{col_a.x, col_t.x, col_a.y, col_t.y};
    const double detJ = J.det();
    if (std::abs(detJ) < 1e-18) break;
    Vec2 upd = J.inverse() * F;
    // damped update keeps the shot inside the basin for strongly bent rays
    upd.x = std::clamp(upd.x, -0.6, 0.6);
    upd.y = std::clamp(upd.y, -std::max(0.5 * tau, 0.1), std::max(0.5 * tau, 0.1));
    alpha -= upd.x;
    tau -= upd.y;
    if (tau < 1e-9) tau = 1e-9;
  }
  res.residual = best_res;
  res.converged = best_res <= opts.tol;
  return res;
}

TwoPointResult boundaryDistance(const MetricSpec& spec, double beta_x, double beta_y,
                                const TwoPointOptions& opts) {
  const Vec2 x = spec.disk().boundaryPoint(beta_x);
  const Vec2 y = spec.disk().boundaryPoint(beta_y);
  if (norm(x - y) < 1e-14) {
    TwoPointResult res;
    res.converged = true;
    return res;
  }
  TwoPointResult res = twoPointSolve(spec, x, y, opts);
  if (!res.converged)
    throw SolverError("boundary distance shooting did not converge", res.residual);
  return res;
}

BoundaryDistanceTable distanceTable(const MetricSpec& spec, int m,
                                    const TwoPointOptions& opts) {
  if (m < 8) throw Error("distance table needs at least 8 boundary samples");
  BoundaryDistanceTable tab;
  tab.m = m;
  tab.angles.resize(m);
  for (int i = 0; i < m; ++i) tab.angles[i] = 2.0 * M_PI * i / m;
  const std::size_t nn = std::size_t(m) * m;
  tab.rho.assign(nn, 0.0);
  tab.rho2.assign(nn, 0.0);
  tab.xi_init.assign(nn, Vec2{});
  tab.xi_exit.assign(nn, Vec2{});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const TwoPointResult r = boundaryDistance(spec, tab.angles[i], tab.angles[j], opts);
      const std::size_t k = std::size_t(i) * m + j;
      tab.rho[k] = r.rho;
      tab.rho2[k] = r.rho * r.rho;
      tab.xi_init[k] = r.xi_init;
      tab.xi_exit[k] = r.xi_exit;
    }
  return tab;
}

void writeDistanceTableCsv(const BoundaryDistanceTable& tab, const std::string& path,
                           const std::string& covector_path) {
  std::string s;
  s += "beta";
  for (int j = 0; j < tab.m; ++j) {
    s += ',';
    appendNumber(s, tab.angles[j]);
  }
  s += '\n';
  for (int i = 0; i < tab.m; ++i) {
    appendNumber(s, tab.angles[i]);
    for (int j = 0; j < tab.m; ++j) {
      s += ',';
      appendNumber(s, tab.rho2At(i, j));
    }
    s += '\n';
  }
  atomicWrite(path, s);

  std::string c = "i,j,xi_init_x,xi_init_y,xi_exit_x,xi_exit_y\n";
  for (int i = 0; i < tab.m; ++i)
    for (int j = 0; j < tab.m; ++j) {
      const std::size_t k = std::size_t(i) * tab.m + j;
      appendNumber(c, double(i));
      c += ',';
      appendNumber(c, double(j));
      c += ',';
      appendNumber(c, tab.xi_init[k].x);
      c += ',';
      appendNumber(c, tab.xi_init[k].y);
      c += ',';
      appendNumber(c, tab.xi_exit[k].x);
      c += ',';
      appendNumber(c, tab.xi_exit[k].y);
      c += '\n';
    }
  atomicWrite(covector_path, c);
}

std::vector<std::pair<double, double>> jacobiDeterminant(const MetricSpec& spec,
                                                         const PhasePoint& p0,
                                                         const FlowOptions& opts) {
  std::vector<std::pair<double, double>> out;
  PhasePoint p = p0;
  const double alpha = spec.fiberAngle(p0.x, p0.xi);
  const Vec2 dxi_da = spec.unitCovectorDeriv(p0.x, alpha);
  VarBlocks v{Mat2{}, Mat2::identity()};
  double t = 0.0;
  out.emplace_back(0.0, 0.0);
  const double h = opts.step;
  while (t < opts.t_max) {
    rk4StepVar(spec, p, v, h);
    t += h;
    const Vec2 xdot = spec.metricInverse(p.x).apply(p.xi);
    const Vec2 ja = v.A * dxi_da;
    out.emplace_back(t, cross(xdot, ja));
    if (signedLevel(spec.disk(), p.x, opts.stop_radius) > 0.0) return out;
  }
  throw DomainError("geodesic failed to exit the stop circle within the time bound");
}

// ---------------------------------------------------------------------------
// PolarFan

PolarFan::PolarFan(const MetricSpec& spec, Vec2 origin, int n_alpha, double alpha_lo,
                   double alpha_hi, double step, double stop_radius, double t_margin)
    : spec_(spec), origin_(origin), n_alpha_(n_alpha), alpha_lo_(alpha_lo), dt_(step) {
  periodic_ = std::abs((alpha_hi - alpha_lo) - 2.0 * M_PI) < 1e-12;
  dalpha_ = periodic_ ? (alpha_hi - alpha_lo) / n_alpha
                      : (alpha_hi - alpha_lo) / (n_alpha - 1);
  const double diam = 2.0 * stop_radius + 0.5;
  max_steps_ = int(diam / step) + int(t_margin / step) + 8;
  data_.resize(std::size_t(n_alpha_) * max_steps_);
  ray_len_.assign(n_alpha_, 0);

  for (int ia = 0; ia < n_alpha_; ++ia) {
    const double a = alpha_lo_ + dalpha_ * ia;
    PhasePoint p{origin_, spec.unitCovector(origin_, a)};
    const Vec2 dxi_da = spec.unitCovectorDeriv(origin_, a);
    VarBlocks v{Mat2{}, Mat2::identity()};
    int n = 0;
    bool outside_prev = false;
    double extra = t_margin;
    while (n < max_steps_) {
      Sample& s = data_[std::size_t(ia) * max_steps_ + n];
      s.x = p.x;
      s.xi = p.xi;
      s.dx_dalpha = v.A * dxi_da;
      s.detA = v.A.det();
      ++n;
      const bool outside = signedLevel(spec.disk(), p.x, stop_radius) > 0.0;
      if (outside && outside_prev) {
        if (extra <= 0.0) break;
        extra -= dt_;
      }
      outside_prev = outside;
      rk4StepVar(spec_, p, v, dt_);
    }
    ray_len_[ia] = n;
  }
}

bool PolarFan::sampleAt(double alpha, double t, Vec2& x, Vec2& xi, Vec2& dxa,
                        double& detA) const {
  double rel = (alpha - alpha_lo_) / dalpha_;
  if (periodic_) {
    rel -= std::floor(rel / n_alpha_) * n_alpha_;
  } else if (rel < 0.0 || rel > n_alpha_ - 1) {
    return false;
  }
  int ia = int(rel);
  if (ia >= n_alpha_ - (periodic_ ? 0 : 1)) ia = periodic_ ? n_alpha_ - 1 : n_alpha_ - 2;
  const double fa = rel - ia;
  const int ia1 = periodic_ ? (ia + 1) % n_alpha_ : ia + 1;

  if (t < 0.0) return false;
  int it = int(t / dt_);
  const int len = std::min(ray_len_[ia], ray_len_[ia1]);
  if (it + 1 >= len) {
    if (len < 2) return false;
    it = len - 2;
  }
  const double ft = t / dt_ - it;

  auto blend = [&](auto proj) {
    const auto& s00 = at(ia, it);
    const auto& s01 = at(ia, it + 1);
    const auto& s10 = at(ia1, it);
    const auto& s11 = at(ia1, it + 1);
    return proj(s00) * ((1 - fa) * (1 - ft)) + proj(s01) * ((1 - fa) * ft) +
           proj(s10) * (fa * (1 - ft)) + proj(s11) * (fa * ft);
  };
  x = blend([](const Sample& s) { return s.x; });
  xi = blend([](const Sample& s) { return s.xi; });
  dxa = blend([](const Sample& s) { return s.dx_dalpha; });
  detA = blend([](const Sample& s) { return s.detA; });
  return true;
}

PolarFan::Lookup PolarFan::invert(Vec2 y) const {
  Lookup lk;
  const Vec2 d = y - origin_;
  const Sym2 g0 = spec_.metric(origin_);
  double alpha = spec_.fiberAngle(origin_, g0.apply(d));
  double t = std::sqrt(g0.quad(d));
  if (t < 2.0 * dt_) {
    // local linear chart at the origin
    lk.ok = true;
    lk.alpha = alpha;
    lk.t = t;
    lk.xi0 = spec_.unitCovector(origin_, alpha);
    lk.xi_t = lk.xi0;
    lk.detA = t * t / g0.det();
    return lk;
  }
  Vec2 x, xi, dxa;
  double detA = 0.0;
  for (int it = 0; it < 12; ++it) {
    if (!sampleAt(alpha, t, x, xi, dxa, detA)) return lk;
    const Vec2 F = x - y;
    if (norm(F) <= 1e-9) break;
    const Vec2 xdot = spec_.metricInverse(x).apply(xi);
    Mat2 J{dxa.x, xdot.x, dxa.y, xdot.y};
    if (std::abs(J.det()) < 1e-18) return lk;
    const Vec2 upd = J.inverse() * F;
    alpha -= std::clamp(upd.x, -0.5, 0.5);
    t -= std::clamp(upd.y, -0.3, 0.3);
    if (t < 0.0) t = 0.0;
  }
  if (!sampleAt(alpha, t, x, xi, dxa, detA)) return lk;
  if (norm(x - y) > 1e-6 * std::max(1.0, norm(y))) return lk;
  lk.ok = true;
  lk.alpha = alpha;
  lk.t = t;
  lk.xi0 = spec_.unitCovector(origin_, alpha);
  lk.xi_t = xi;
  lk.detA = detA;
  return lk;
}

}  // namespace ttomo
