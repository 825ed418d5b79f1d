// ttomo - closed-form metric families on a planar disk
#pragma once

#include <string>
#include <vector>

#include "ttomo/errors.hpp"
#include "ttomo/numerics.hpp"

namespace ttomo {

// Disk domain: the working domain (radius) sits strictly inside the enlarged
// disk (radius1) on which every metric family is defined in closed form.
struct Disk {
  Vec2 center{0.0, 0.0};
  double radius = 1.0;
  double radius1 = 1.1;

  Vec2 boundaryPoint(double beta) const {
    return {center.x + radius * std::cos(beta), center.y + radius * std::sin(beta)};
  }
  bool insideOmega(Vec2 x, double slack = 0.0) const {
    return norm(x - center) < radius + slack;
  }
  bool insideOmega1(Vec2 x, double slack = 0.0) const {
    return norm(x - center) < radius1 + slack;
  }
};

// conformal factor bump: phi += amp * exp(-width * |x - center|^2)
struct PhiBump {
  double amp = 0.0;
  double width = 1.0;
  Vec2 center{0.0, 0.0};
};

// additive perturbation of one metric component,
// amp * exp(-width * |x - center|^2) * ringWindow(|x|),
// where the window is identically 1 for |x| <= window_on and 0 past window_off
// so that perturbations vanish near the working boundary.
struct TensorBump {
  int comp = 0;  // 0 -> g_00, 1 -> g_01, 2 -> g_11
  double amp = 0.0;
  double width = 1.0;
  Vec2 center{0.0, 0.0};
};

// collar graft on the euclidean disk, written in polar form:
//   g = h(beta, s) dbeta^2 + dr^2,  h = r^2 + sum_j c_j(beta) * s^j * cutoff(s)
// with s = 1 - r the depth below the unit circle and c_j a truncated Fourier
// profile. The cutoff is identically 1 for s <= s_on, so the depth-Taylor
// coefficients of h - r^2 at s = 0 are exactly the c_j.
struct CollarProfileTerm {
  int order = 0;                   // power of s carried by this term
  std::vector<double> fourier;     // a0, a1, b1, a2, b2, ...
};

// first and second spatial derivatives of g alongside its value
struct MetricJet {
  Sym2 g;
  std::array<Sym2, 2> dg;    // dg[k](i,j) = d g_ij / d x^k
  std::array<Sym2, 3> d2g;   // second derivatives, index m over (0,0),(0,1),(1,1)
};

enum class MetricFamily { Euclidean, Conformal, General };

class MetricSpec {
 public:
  static MetricSpec euclidean(Disk disk = {});
  static MetricSpec conformal(std::vector<PhiBump> phi, Disk disk = {});
  // base metric plus compactly supported tensor perturbations (scaled by `scale`)
  static MetricSpec perturbed(const MetricSpec& base, std::vector<TensorBump> bumps,
                              double scale = 1.0, double window_on = 0.75,
                              double window_off = 0.92);
  // euclidean disk with a boundary-collar graft (used for synthetic jet data)
  static MetricSpec collarGraft(std::vector<CollarProfileTerm> terms, double s_on = 0.22,
                                double s_off = 0.42, Disk disk = {});

  MetricFamily family() const { return family_; }
  std::string familyName() const;
  const Disk& disk() const { return disk_; }
  const std::vector<PhiBump>& phiBumps() const { return phi_; }
  const std::vector<TensorBump>& tensorBumps() const { return bumps_; }
  const std::vector<CollarProfileTerm>& collarTerms() const { return collar_; }
  double bumpScale() const { return bump_scale_; }
  double bumpWindowOn() const { return window_on_; }
  double bumpWindowOff() const { return window_off_; }
  double collarOn() const { return collar_on_; }
  double collarOff() const { return collar_off_; }

  // g_ij(x); throws DomainError outside the enlarged disk (plus a small
  // integration margin used by the ray tracer near the outer rim)
  Sym2 metric(Vec2 x) const;
  Sym2 metricInverse(Vec2 x) const;
  MetricJet metricJet(Vec2 x) const;
  double sqrtDetG(Vec2 x) const { return std::sqrt(metric(x).det()); }

  // Christoffel symbols Gamma^k_ij, one symmetric block per upper index k
  std::array<Sym2, 2> christoffel(Vec2 x) const;
  // also d_l Gamma^k_ij, indexed [k][l]
  void christoffelWithDeriv(Vec2 x, std::array<Sym2, 2>& gamma,
                            std::array<std::array<Sym2, 2>, 2>& dgamma) const;

  double gaussCurvature(Vec2 x) const;

  // index gymnastics at a point
  Vec2 lower(Vec2 x, Vec2 v) const { return metric(x).apply(v); }
  Vec2 raise(Vec2 x, Vec2 xi) const { return metricInverse(x).apply(xi); }
  double gNorm(Vec2 x, Vec2 v) const { return std::sqrt(metric(x).quad(v)); }
  double coNorm(Vec2 x, Vec2 xi) const { return std::sqrt(metricInverse(x).quad(xi)); }

  // unit covector at fiber angle alpha: g^{1/2}(x) (cos a, sin a); this
  // parameterization has unit speed w.r.t. the cometric, so the fiber measure
  // is d alpha
  Vec2 unitCovector(Vec2 x, double alpha) const;
  Vec2 unitCovectorDeriv(Vec2 x, double alpha) const;  // d/d alpha
  double fiberAngle(Vec2 x, Vec2 xi) const;            // inverse of the above

  // g-unit outward normal vector and g-unit tangent of the working boundary
  Vec2 outwardNormalVector(double beta) const;
  Vec2 boundaryTangentVector(double beta) const;
  // second fundamental form of the working boundary w.r.t. the inward normal,
  // evaluated on the g-unit tangent (positive = strictly convex)
  double boundaryConvexity(double beta) const;

 private:
  MetricFamily family_ = MetricFamily::Euclidean;
  Disk disk_;
  std::vector<PhiBump> phi_;
  std::vector<TensorBump> bumps_;
  double bump_scale_ = 1.0;
  double window_on_ = 0.75, window_off_ = 0.92;
  std::vector<CollarProfileTerm> collar_;
  double collar_on_ = 0.22, collar_off_ = 0.42;

  void checkDomain(Vec2 x) const;
};

struct SimplicityReport {
  double convexity_margin = 0.0;  // min boundary convexity over samples
  bool conjugate_points = false;  // Jacobi-field zero detected on some ray
  double min_jacobi = 0.0;        // min over rays/time of J(t)/t (euclidean: 1)
  int boundary_samples = 0;
  int ray_samples = 0;
  bool exit_failure = false;      // some ray failed to leave within the time bound
  std::string diagnostic;

  bool simple() const { return convexity_margin > 0.0 && !conjugate_points && !exit_failure; }
};

// Probabilistic simplicity check: boundary convexity on a sample ring plus
// Jacobi fields integrated along an inflow fan of geodesics.
SimplicityReport checkSimplicity(const MetricSpec& spec, int ray_count = 64, double step = 1e-3);

}  // namespace ttomo
