// ttomo - Hamiltonian geodesic flow, two-point solves, boundary distances
#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "ttomo/metric.hpp"

namespace ttomo {

// cotangent point evolved by the geodesic flow of H = 1/2 g^{ij} xi_i xi_j
struct PhasePoint {
  Vec2 x;
  Vec2 xi;
};

double hamiltonian(const MetricSpec& spec, const PhasePoint& p);

struct PathSample {
  double t;
  Vec2 x;
  Vec2 xi;
};

struct GeodesicPath {
  std::vector<PathSample> samples;  // start, per-step states, and the exit state
  double exit_time = 0.0;
  PhasePoint exit;
  bool exited = false;  // crossed the stop circle (otherwise ran to t_max)
};

struct FlowOptions {
  double step = 1e-3;
  double stop_radius = 1.0;  // trace ends on |x - center| = stop_radius
  double t_max = 10.0;
  bool store_path = true;
};

// single classical RK4 step of Hamilton's equations
PhasePoint rk4Step(const MetricSpec& spec, const PhasePoint& p, double h);

// variational (linearized-flow) state: derivatives w.r.t. the initial covector
struct VarBlocks {
  Mat2 A;  // d x(t) / d xi_0
  Mat2 B;  // d xi(t) / d xi_0
};

// joint RK4 step of the phase point and one linearized perturbation
void rk4StepVar(const MetricSpec& spec, PhasePoint& p, Vec2& dx, Vec2& dxi, double h);
void rk4StepVar(const MetricSpec& spec, PhasePoint& p, VarBlocks& v, double h);

// Fixed-step trace with bisection-refined boundary crossing. Throws
// DomainError if the trajectory leaves the enlarged disk without crossing
// the stop circle.
GeodesicPath flow(const MetricSpec& spec, const PhasePoint& p0, const FlowOptions& opts = {});

// exp_x(v): unit-speed geodesic from x in direction v/|v|_g, time |v|_g
Vec2 expMap(const MetricSpec& spec, Vec2 x, Vec2 v, double step = 1e-3);

struct TwoPointOptions {
  double step = 1e-3;
  double tol = 1e-10;    // euclidean mismatch of the endpoint
  int max_iter = 40;
};

// unique-geodesic two-point solve by Newton shooting over (fiber angle, time)
struct TwoPointResult {
  double rho = 0.0;   // geodesic length
  Vec2 xi_init;       // unit covector at x toward y; equals -grad_x rho
  Vec2 xi_exit;       // unit covector at y; equals +grad_y rho
  Mat2 dexp;          // d(endpoint)/d(initial covector) at t = rho
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
};

TwoPointResult twoPointSolve(const MetricSpec& spec, Vec2 x, Vec2 y,
                             const TwoPointOptions& opts = {});

// distance between boundary points given by their boundary angles; the
// degenerate diagonal returns rho = 0 with unset covectors
TwoPointResult boundaryDistance(const MetricSpec& spec, double beta_x, double beta_y,
                                const TwoPointOptions& opts = {});

struct BoundaryDistanceTable {
  int m = 0;
  std::vector<double> angles;   // boundary parameters
  std::vector<double> rho;      // m*m row-major
  std::vector<double> rho2;     // squared distances (smooth across the diagonal)
  std::vector<Vec2> xi_init;    // initial covector of the (i -> j) geodesic
  std::vector<Vec2> xi_exit;

  double rhoAt(int i, int j) const { return rho[std::size_t(i) * m + j]; }
  double rho2At(int i, int j) const { return rho2[std::size_t(i) * m + j]; }
};

BoundaryDistanceTable distanceTable(const MetricSpec& spec, int m,
                                    const TwoPointOptions& opts = {});

// squared-distance CSV (header row of boundary angles) plus a companion
// covector file
void writeDistanceTableCsv(const BoundaryDistanceTable& table, const std::string& path,
                           const std::string& covector_path);

// Jacobian determinant of (t, direction angle) -> exp_x, sampled along the ray;
// identically t on the euclidean family, zero at a conjugate point
std::vector<std::pair<double, double>> jacobiDeterminant(const MetricSpec& spec,
                                                         const PhasePoint& p0,
                                                         const FlowOptions& opts = {});

// ---------------------------------------------------------------------------
// Geodesic polar fan from one point: forward map (alpha, t) -> x with enough
// stored data to invert it by interpolation. Backbone of the explicit normal-
// operator kernel and of the semi-geodesic chart.

class PolarFan {
 public:
  struct Sample {
    Vec2 x;
    Vec2 xi;
    Vec2 dx_dalpha;  // A(t) * d xi_0/d alpha
    double detA;     // det d x(t)/d xi_0
  };

  struct Lookup {
    bool ok = false;
    double alpha = 0.0, t = 0.0;
    Vec2 xi0;        // unit covector at the origin toward y
    Vec2 xi_t;       // covector at y
    double detA = 0.0;
  };

  // alpha_lo/alpha_hi: fiber-angle range (full circle when hi - lo = 2 pi)
  PolarFan(const MetricSpec& spec, Vec2 origin, int n_alpha, double alpha_lo, double alpha_hi,
           double step, double stop_radius, double t_margin = 0.0);

  // invert the fan map near y by Newton on the interpolated position
  Lookup invert(Vec2 y) const;

  Vec2 origin() const { return origin_; }
  double step() const { return dt_; }

 private:
  const MetricSpec& spec_;
  Vec2 origin_;
  int n_alpha_;
  double alpha_lo_, dalpha_;
  bool periodic_;
  double dt_;
  int max_steps_ = 0;
  std::vector<int> ray_len_;         // samples per ray
  std::vector<Sample> data_;         // ray-major [ia * max_steps_ + it]
  const Sample& at(int ia, int it) const { return data_[std::size_t(ia) * max_steps_ + it]; }
  bool sampleAt(double alpha, double t, Vec2& x, Vec2& xi, Vec2& dxa, double& detA) const;
};

}  // namespace ttomo
