// ttomo - solenoidal/potential split, gauge normalization, potential recovery
#pragma once

#include <functional>

#include "ttomo/charts.hpp"
#include "ttomo/tensorfield.hpp"

namespace ttomo {

struct CGOptions {
  double tol = 1e-8;       // relative residual
  int max_iter = 6000;
  bool throw_on_fail = true;
};

// Discrete symmetric differential on the working-disk nodes assembled as a
// sparse matrix, together with the quadrature Gram blocks; the elliptic
// system used everywhere below is the energy form D^T M D.
class SymDiffOperator {
 public:
  SymDiffOperator(const MetricSpec& spec, const Grid& grid);

  const Grid& grid() const { return grid_; }
  int unknowns() const { return 2 * n_masked_; }
  int maskedNodes() const { return n_masked_; }

  // v given as interleaved (v_x, v_y) per masked node
  std::vector<double> applyD(const std::vector<double>& v) const;       // 3 per node
  std::vector<double> applyDT(const std::vector<double>& f) const;      // 2 per node
  std::vector<double> applyMass(const std::vector<double>& f) const;    // tensor Gram
  std::vector<double> applyEnergy(const std::vector<double>& v) const;  // D^T M D

  std::vector<double> packTensor(const SymTensor2Field& f) const;
  SymTensor2Field unpackTensor(const std::vector<double>& f) const;
  std::vector<double> packForm(const OneFormField& v) const;
  OneFormField unpackForm(const std::vector<double>& v) const;
  // 1-form Gram blocks (for right-hand sides of the elliptic solve)
  std::vector<double> applyFormMass(const std::vector<double>& v) const;

 private:
  MetricSpec spec_;
  Grid grid_;
  std::vector<std::uint8_t> mask_;
  std::vector<int> node_id_;  // grid index -> masked ordinal, -1 outside
  int n_masked_ = 0;
  // CSR of D and of its transpose
  std::vector<int> row_ptr_, col_;
  std::vector<double> val_;
  std::vector<int> trow_ptr_, tcol_;
  std::vector<double> tval_;
  std::vector<std::array<double, 6>> mass_;       // per-node symmetric 3x3 blocks
  std::vector<std::array<double, 3>> form_mass_;  // per-node symmetric 2x2 blocks

  friend struct DecompAccess;
};

struct EllipticResult {
  OneFormField u;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
};

// Dirichlet solve of the elliptic system div-grad-type system d^T d u = -h
// (weak form, energy inner product); the boundary rule pins nodes within a
// two-cell band of the working boundary
EllipticResult laplacianSolve(const MetricSpec& spec, const OneFormField& h,
                              const std::function<Vec2(Vec2)>& boundary,
                              const CGOptions& opts = {});

struct Decomposition {
  SymTensor2Field fs;  // solenoidal part
  OneFormField v;      // potential, vanishing outside the working disk
  double residual = 0.0;
  int iterations = 0;
};

// orthogonal split f = fs + dv by least squares over potentials
Decomposition decompose(const MetricSpec& spec, const SymTensor2Field& f,
                        const CGOptions& opts = {});

// same split through a prebuilt operator (cheaper inside iterative loops)
Decomposition decompose(const SymDiffOperator& op, const MetricSpec& spec,
                        const SymTensor2Field& f, const CGOptions& opts = {});

// ---------------------------------------------------------------------------
// gauge normalization

struct BoundaryGauge {
  SymTensor2Field f_tilde;  // rule-backed: collar-corrected field
  OneFormField v;           // rule-backed: the cut 1-form, zero on the boundary
  double max_fin = 0.0;     // worst |in-component| on the inner collar
  double collar_width = 0.0;
  double inner_fraction = 0.0;  // portion of the collar where the cutoff is 1
};

// removes the in-components of f near the working boundary via transport
// along inward normal geodesics, then cuts the 1-form before the collar ends
BoundaryGauge gaugeNormalizeBoundary(const MetricSpec& spec, const SymTensor2Field& f,
                                     double collar_width = 0.15, int n_beta = 512,
                                     int n_s = 64);

struct GlobalGauge {
  SymTensor2Field f_sharp;  // chart-space field with vanishing in-components
  OneFormField v_sharp;     // chart-space 1-form, zero on the inflow face
  double max_fin = 0.0;     // worst |in-component| over non-tangent columns
  int tangent_columns = 0;
};

// transport along the vertical chart lines from the inflow face; expects the
// tensor in chart components on the chart grid (see SemiGeodesicChart)
GlobalGauge gaugeNormalizeGlobal(const SemiGeodesicChart& chart, const SymTensor2Field& f_chart);

// solves dv = f - fs by the same vertical-line transport; exact when f - fs
// is potential
OneFormField recoverPotential(const SemiGeodesicChart& chart, const SymTensor2Field& f_chart,
                              const SymTensor2Field& fs_chart);

}  // namespace ttomo
