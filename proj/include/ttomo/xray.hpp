// ttomo - inflow-boundary transform, adjoint, normal operator, collar norms
#pragma once

#include <string>
#include <vector>

#include "ttomo/geodesic.hpp"
#include "ttomo/tensorfield.hpp"

namespace ttomo {

// product sampling of the inflow boundary: boundary angle x inward fiber angle,
// with quadrature weights |omega . nu| dS_z dS_omega
struct InflowGrid {
  int n_z = 0, n_dir = 0;
  std::vector<double> betas;       // boundary parameters
  std::vector<double> alpha_in;    // fiber angle of the inward normal covector per site
  std::vector<Vec2> z;             // boundary points
  std::vector<Vec2> omega;         // unit covectors, flattened (iz * n_dir + id)
  std::vector<double> alpha;       // absolute fiber angles of the samples
  std::vector<double> weight;      // full measure weight per sample
  std::vector<double> omega_dot_nu;
  double total_mass = 0.0;

  std::size_t index(int iz, int id) const { return std::size_t(iz) * n_dir + id; }
  std::size_t size() const { return omega.size(); }
};

InflowGrid buildInflowGrid(const MetricSpec& spec, int z_count, int dir_count);

// sinogram values aligned with an InflowGrid
struct Sinogram {
  int n_z = 0, n_dir = 0;
  std::vector<double> values;
};

// weighted inner product on the inflow boundary
double muInner(const InflowGrid& grid, const Sinogram& a, const Sinogram& b);
double muNorm(const InflowGrid& grid, const Sinogram& a);

// bilinear read of a sinogram at (boundary angle, absolute fiber angle),
// interpolating in the fiber coordinate relative to the inward normal
double sinogramRead(const InflowGrid& grid, const Sinogram& u, double beta, double alpha_abs);

struct ForwardOptions {
  double step = 1e-3;
};

// geodesic transform of a symmetric tensor over the inflow grid
Sinogram xrayForward(const MetricSpec& spec, const SymTensor2Field& f, const InflowGrid& grid,
                     const ForwardOptions& opts = {});

// entry lookups for the angular adjoint integral at the requested nodes,
// reusable across sinograms on the same metric
struct AdjointMap {
  int K = 0;
  Grid grid;
  double mask_radius = 0.0;
  struct Entry {
    double beta = 0.0, alpha = 0.0;
    Sym2 omega_outer;
    bool ok = false;
  };
  std::vector<std::uint8_t> mask;
  std::vector<Entry> entries;  // node-major, K per masked node
  int excluded_nodes = 0;      // nodes with failed back-traces recorded
};

struct AdjointOptions {
  int directions = 64;
  double step = 2e-3;
};

AdjointMap buildAdjointMap(const MetricSpec& spec, const Grid& grid, double mask_radius,
                           const AdjointOptions& opts = {});

// angular-integral adjoint evaluated through a prebuilt map
SymTensor2Field xrayAdjoint(const MetricSpec& spec, const InflowGrid& grid, const Sinogram& u,
                            const AdjointMap& map);

// single-point adjoint evaluation without a map
Sym2 xrayAdjointAt(const MetricSpec& spec, const InflowGrid& grid, const Sinogram& u, Vec2 y,
                   const AdjointOptions& opts = {});

// adjoint-of-forward composition; the output lives on the enlarged disk
SymTensor2Field normalComposed(const MetricSpec& spec, const SymTensor2Field& f,
                               const InflowGrid& grid, const AdjointMap& map,
                               const ForwardOptions& fwd = {});

// ---------------------------------------------------------------------------
// explicit weakly singular kernel of the normal operator

struct KernelOptions {
  int fan_angles = 512;
  double fan_step = 4e-3;
  double cut_factor = 2.0;   // near-diagonal radius in grid spacings
  int patch_angles = 16;     // polar quadrature of the near-diagonal disk
  int patch_radial = 4;
};

// reusable per-point quadrature: weights of the kernel integral at x against
// the contravariant tensor samples
struct KernelWeights {
  Vec2 x;
  struct Term {
    Vec2 pos;      // evaluation point of f^{ij}
    Vec2 gy;       // covector contracted twice with f^{ij}
    Sym2 gx_outer; // output tensor direction
    double c;      // scalar weight
  };
  std::vector<Term> terms;
  int skipped_cells = 0;  // fan inversion failures, dropped from the sum
};

KernelWeights kernelWeightsAt(const MetricSpec& spec, const Grid& grid, double mask_radius,
                              Vec2 x, const KernelOptions& opts = {});

// applies precomputed weights to a raised (contravariant) tensor field
Sym2 kernelApply(const KernelWeights& w, const SymTensor2Field& f_contra);

// one-point evaluation of the normal operator through the explicit kernel
Sym2 normalKernelAt(const MetricSpec& spec, const SymTensor2Field& f, Vec2 x,
                    const KernelOptions& opts = {});

// ---------------------------------------------------------------------------
// boundary-collar Sobolev surrogates: first derivatives weighted by the
// distance to the working boundary, tangential derivatives unweighted

double htildeNorm(const MetricSpec& spec, const SymTensor2Field& F, int order);

// sinogram CSV: boundary angle, direction angle, measure weight, value
void writeSinogramCsv(const InflowGrid& grid, const Sinogram& s, const std::string& path);

}  // namespace ttomo
