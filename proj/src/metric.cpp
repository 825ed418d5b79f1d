// ttomo - metric family evaluation, curvature, simplicity probing
#include "ttomo/metric.hpp"

#include <algorithm>
#include <cmath>

#include "ttomo/geodesic.hpp"

namespace ttomo {

namespace {

inline double valueOf(double v) { return v; }
inline double valueOf(const Jet2& v) { return v.v; }

template <typename T>
struct SymT {
  T s00, s01, s11;
};

// ring window in terms of r^2 (smooth at the origin): 1 inside, 0 outside
template <typename T>
T ringWindow(const T& r2, double on, double off) {
  const double on2 = on * on, off2 = off * off;
  return 1.0 - smoothStep01<T>((r2 - on2) / (off2 - on2));
}

template <typename T>
T square(const T& a) { return a * a; }

// family rule evaluated on an arbitrary scalar type; this is the single
// source of truth for every metric family
template <typename T>
SymT<T> evalMetric(const MetricSpec& spec, const T& x, const T& y) {
  using std::atan2;
  using std::cos;
  using std::exp;
  using std::sin;
  using std::sqrt;
  const Vec2 c = spec.disk().center;
  SymT<T> g{T(1.0), T(0.0), T(1.0)};

  if (!spec.phiBumps().empty()) {
    T phi(0.0);
    for (const PhiBump& b : spec.phiBumps()) {
      const T dx = x - b.center.x, dy = y - b.center.y;
      phi = phi + b.amp * exp(-b.width * (square(dx) + square(dy)));
    }
    const T conf = exp(2.0 * phi);
    g.s00 = conf;
    g.s11 = conf;
  }

  if (!spec.tensorBumps().empty()) {
    const T r2 = square(x - c.x) + square(y - c.y);
    const T win = ringWindow(r2, spec.bumpWindowOn(), spec.bumpWindowOff());
    for (const TensorBump& b : spec.tensorBumps()) {
      const T dx = x - b.center.x, dy = y - b.center.y;
      const T val = spec.bumpScale() * b.amp * exp(-b.width * (square(dx) + square(dy))) * win;
      if (b.comp == 0) g.s00 = g.s00 + val;
      else if (b.comp == 1) g.s01 = g.s01 + val;
      else g.s11 = g.s11 + val;
    }
  }

  if (!spec.collarTerms().empty()) {
    // polar collar graft around the unit circle; pure euclidean deep inside
    const T dx = x - c.x, dy = y - c.y;
    const T r2 = square(dx) + square(dy);
    if (valueOf(r2) > square(1.0 - spec.collarOff()) * 0.999) {
      const T r = sqrt(r2);
      const T s = 1.0 - r;
      const T cutoff = 1.0 - smoothStep01<T>((s - spec.collarOn()) /
                                             (spec.collarOff() - spec.collarOn()));
      const T beta = atan2(dy, dx);
      T add(0.0);
      for (const CollarProfileTerm& term : spec.collarTerms()) {
        T prof(term.fourier.empty() ? 0.0 : term.fourier[0]);
        for (std::size_t m = 1; 2 * m - 1 < term.fourier.size(); ++m) {
          prof = prof + term.fourier[2 * m - 1] * cos(double(m) * beta);
          if (2 * m < term.fourier.size())
            prof = prof + term.fourier[2 * m] * sin(double(m) * beta);
        }
        T sp(1.0);
        for (int k = 0; k < term.order; ++k) sp = sp * s;
        add = add + prof * sp;
      }
      const T h = r2 + add * cutoff;
      // g = h dbeta x dbeta + dr x dr with dbeta = (-dy, dx)/r^2, dr = (dx, dy)/r
      const T ir2 = 1.0 / r2;
      const T b0 = (0.0 - dy) * ir2, b1 = dx * ir2;  // dbeta components
      const T ir = 1.0 / r;
      const T r0 = dx * ir, r1 = dy * ir;  // dr components
      g.s00 = h * b0 * b0 + r0 * r0;
      g.s01 = h * b0 * b1 + r0 * r1;
      g.s11 = h * b1 * b1 + r1 * r1;
    }
  }
  return g;
}

}  // namespace

MetricSpec MetricSpec::euclidean(Disk disk) {
  MetricSpec s;
  s.family_ = MetricFamily::Euclidean;
  s.disk_ = disk;
  return s;
}

MetricSpec MetricSpec::conformal(std::vector<PhiBump> phi, Disk disk) {
  MetricSpec s;
  s.family_ = MetricFamily::Conformal;
  s.disk_ = disk;
  s.phi_ = std::move(phi);
  return s;
}

MetricSpec MetricSpec::perturbed(const MetricSpec& base, std::vector<TensorBump> bumps,
                                 double scale, double window_on, double window_off) {
  MetricSpec s = base;
  s.family_ = MetricFamily::General;
  s.bumps_ = std::move(bumps);
  s.bump_scale_ = scale;
  s.window_on_ = window_on;
  s.window_off_ = window_off;
  return s;
}

MetricSpec MetricSpec::collarGraft(std::vector<CollarProfileTerm> terms, double s_on,
                                   double s_off, Disk disk) {
  MetricSpec s;
  s.family_ = MetricFamily::General;
  s.disk_ = disk;
  s.collar_ = std::move(terms);
  s.collar_on_ = s_on;
  s.collar_off_ = s_off;
  return s;
}

std::string MetricSpec::familyName() const {
  switch (family_) {
    case MetricFamily::Euclidean: return "euclidean";
    case MetricFamily::Conformal: return "conformal";
    default: return "general";
  }
}

void MetricSpec::checkDomain(Vec2 x) const {
  // small margin past the enlarged disk for integrator stages near the rim
  const double limit = disk_.radius1 + 0.05;
  if (norm(x - disk_.center) > limit)
    throw DomainError("metric evaluated outside the enlarged disk");
}

Sym2 MetricSpec::metric(Vec2 x) const {
  checkDomain(x);
  if (family_ == MetricFamily::Euclidean) return Sym2::identity();
  SymT<double> g = evalMetric<double>(*this, x.x, x.y);
  return {g.s00, g.s01, g.s11};
}

Sym2 MetricSpec::metricInverse(Vec2 x) const {
  const Sym2 g = metric(x);
  const double d = g.det();
  if (d <= 1e-14)
    throw NumericalError("singular metric matrix", g.trace() * g.trace() / std::max(d, 1e-300));
  return g.inverse();
}

MetricJet MetricSpec::metricJet(Vec2 x) const {
  checkDomain(x);
  MetricJet out;
  if (family_ == MetricFamily::Euclidean) {
    out.g = Sym2::identity();
    return out;
  }
  const Jet2 X = Jet2::var(x.x, 0), Y = Jet2::var(x.y, 1);
  SymT<Jet2> g = evalMetric<Jet2>(*this, X, Y);
  out.g = {g.s00.v, g.s01.v, g.s11.v};
  out.dg[0] = {g.s00.g0, g.s01.g0, g.s11.g0};
  out.dg[1] = {g.s00.g1, g.s01.g1, g.s11.g1};
  out.d2g[0] = {g.s00.h00, g.s01.h00, g.s11.h00};
  out.d2g[1] = {g.s00.h01, g.s01.h01, g.s11.h01};
  out.d2g[2] = {g.s00.h11, g.s01.h11, g.s11.h11};
  return out;
}

std::array<Sym2, 2> MetricSpec::christoffel(Vec2 x) const {
  if (family_ == MetricFamily::Euclidean) return {Sym2{}, Sym2{}};
  const MetricJet j = metricJet(x);
  const double d = j.g.det();
  if (d <= 1e-14)
    throw NumericalError("singular metric matrix", j.g.trace() * j.g.trace() / std::max(d, 1e-300));
  const Sym2 gi = j.g.inverse();
  std::array<Sym2, 2> gamma;
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int jj = i; jj < kDim; ++jj) {
        double sum = 0.0;
        for (int l = 0; l < kDim; ++l)
          sum += gi(k, l) * (j.dg[i](l, jj) + j.dg[jj](i, l) - j.dg[l](i, jj));
        gamma[k].set(i, jj, 0.5 * sum);
      }
  return gamma;
}

void MetricSpec::christoffelWithDeriv(Vec2 x, std::array<Sym2, 2>& gamma,
                                      std::array<std::array<Sym2, 2>, 2>& dgamma) const {
  if (family_ == MetricFamily::Euclidean) {
    gamma = {Sym2{}, Sym2{}};
    dgamma = {std::array<Sym2, 2>{Sym2{}, Sym2{}}, std::array<Sym2, 2>{Sym2{}, Sym2{}}};
    return;
  }
  const MetricJet j = metricJet(x);
  const Sym2 gi = j.g.inverse();
  auto d2 = [&](int m, int l) -> const Sym2& {  // d_m d_l g
    return j.d2g[m + l];                        // (0,0)->0 (0,1)/(1,0)->1 (1,1)->2
  };
  // d_m g^{kl} = -(gi dg[m] gi)_{kl}
  std::array<Mat2, 2> dgi;
  for (int m = 0; m < kDim; ++m) {
    const Mat2 t = gi.mat() * j.dg[m].mat() * gi.mat();
    dgi[m] = t * -1.0;
  }
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int jj = i; jj < kDim; ++jj) {
        double sum = 0.0;
        for (int l = 0; l < kDim; ++l)
          sum += gi(k, l) * (j.dg[i](l, jj) + j.dg[jj](i, l) - j.dg[l](i, jj));
        gamma[k].set(i, jj, 0.5 * sum);
      }
  for (int m = 0; m < kDim; ++m)
    for (int k = 0; k < kDim; ++k)
      for (int i = 0; i < kDim; ++i)
        for (int jj = i; jj < kDim; ++jj) {
          double sum = 0.0;
          for (int l = 0; l < kDim; ++l) {
            sum += dgi[m](k, l) * (j.dg[i](l, jj) + j.dg[jj](i, l) - j.dg[l](i, jj));
            sum += gi(k, l) * (d2(m, i)(l, jj) + d2(m, jj)(i, l) - d2(m, l)(i, jj));
          }
          dgamma[k][m].set(i, jj, 0.5 * sum);
        }
}

double MetricSpec::gaussCurvature(Vec2 x) const {
  if (family_ == MetricFamily::Euclidean) return 0.0;
  std::array<Sym2, 2> gamma;
  std::array<std::array<Sym2, 2>, 2> dgamma;
  christoffelWithDeriv(x, gamma, dgamma);
  const Sym2 g = metric(x);
  // R^l_{k i j} = d_i Gamma^l_{j k} - d_j Gamma^l_{i k} + G^l_{i m} G^m_{j k} - G^l_{j m} G^m_{i k}
  // K = g_{0 l} R^l_{1 0 1} / det g
  double r = 0.0;
  for (int l = 0; l < kDim; ++l) {
    double rl = dgamma[l][0](1, 1) - dgamma[l][1](0, 1);
    for (int m = 0; m < kDim; ++m)
      rl += gamma[l](0, m) * gamma[m](1, 1) - gamma[l](1, m) * gamma[m](0, 1);
    r += g(0, l) * rl;
  }
  return r / g.det();
}

Vec2 MetricSpec::unitCovector(Vec2 x, double alpha) const {
  const Sym2 half = metric(x).sqrtSpd();
  return half.apply({std::cos(alpha), std::sin(alpha)});
}

Vec2 MetricSpec::unitCovectorDeriv(Vec2 x, double alpha) const {
  const Sym2 half = metric(x).sqrtSpd();
  return half.apply({-std::sin(alpha), std::cos(alpha)});
}

double MetricSpec::fiberAngle(Vec2 x, Vec2 xi) const {
  const Sym2 halfInv = metricInverse(x).sqrtSpd();
  const Vec2 e = halfInv.apply(xi);
  return std::atan2(e.y, e.x);
}

Vec2 MetricSpec::outwardNormalVector(double beta) const {
  const Vec2 z = disk_.boundaryPoint(beta);
  const Vec2 t{-std::sin(beta), std::cos(beta)};
  const Vec2 n{std::cos(beta), std::sin(beta)};
  const Sym2 g = metric(z);
  // g-orthogonalize the euclidean normal against the boundary tangent
  const Vec2 tg = g.apply(t);
  Vec2 nu = n - t * (dot(tg, n) / dot(tg, t));
  return nu / std::sqrt(g.quad(nu));
}

Vec2 MetricSpec::boundaryTangentVector(double beta) const {
  const Vec2 z = disk_.boundaryPoint(beta);
  const Vec2 t{-std::sin(beta), std::cos(beta)};
  return t / std::sqrt(metric(z).quad(t));
}

double MetricSpec::boundaryConvexity(double beta) const {
  const Vec2 z = disk_.boundaryPoint(beta);
  const double R = disk_.radius;
  const Vec2 cp = Vec2{-std::sin(beta), std::cos(beta)} * R;   // d z / d beta
  const Vec2 cpp = Vec2{-std::cos(beta), -std::sin(beta)} * R; // d^2 z / d beta^2
  const auto gamma = christoffel(z);
  Vec2 acc = cpp;
  acc.x += gamma[0].quad(cp);
  acc.y += gamma[1].quad(cp);
  const Sym2 g = metric(z);
  const Vec2 nu_in = outwardNormalVector(beta) * -1.0;
  return dot(g.apply(acc), nu_in) / g.quad(cp);
}

SimplicityReport checkSimplicity(const MetricSpec& spec, int ray_count, double step) {
  SimplicityReport rep;
  rep.boundary_samples = std::max(64, ray_count);
  rep.ray_samples = ray_count;

  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rep.boundary_samples; ++i) {
    const double beta = 2.0 * M_PI * i / rep.boundary_samples;
    margin = std::min(margin, spec.boundaryConvexity(beta));
  }
  rep.convexity_margin = margin;

  // inflow fan: a few interior directions per boundary site
  const int n_sites = std::max(4, ray_count / 4);
  const int n_dirs = std::max(3, ray_count / n_sites);
  double min_j = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_sites; ++i) {
    const double beta = 2.0 * M_PI * i / n_sites;
    const Vec2 z = spec.disk().boundaryPoint(beta);
    const Vec2 nu = spec.outwardNormalVector(beta);
    const double a_in = spec.fiberAngle(z, spec.metric(z).apply(nu * -1.0));
    for (int d = 0; d < n_dirs; ++d) {
      const double a = a_in - M_PI * 0.35 + 0.7 * M_PI * (d + 0.5) / n_dirs;
      PhasePoint p0{z, spec.unitCovector(z, a)};
      FlowOptions opts;
      opts.step = step;
      opts.stop_radius = spec.disk().radius1;
      opts.t_max = 8.0 * spec.disk().radius1;
      opts.store_path = false;
      try {
        const auto jac = jacobiDeterminant(spec, p0, opts);
        const double t_min = 10.0 * step;
        for (const auto& [t, w] : jac) {
          if (t < t_min) continue;
          min_j = std::min(min_j, w / t);
          if (w <= 0.0) rep.conjugate_points = true;
        }
      } catch (const DomainError&) {
        rep.exit_failure = true;
        rep.diagnostic = "ray escaped the enlarged disk without boundary detection";
      }
    }
  }
  if (std::isfinite(min_j)) rep.min_jacobi = min_j;
  if (rep.conjugate_points && rep.diagnostic.empty())
    rep.diagnostic = "Jacobi field zero detected along a sampled geodesic";
  return rep;
}

}  // namespace ttomo
