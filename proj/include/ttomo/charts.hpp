// ttomo - boundary normal collar charts and the global semi-geodesic chart
#pragma once

#include <memory>
#include <vector>

#include "ttomo/geodesic.hpp"
#include "ttomo/tensorfield.hpp"

namespace ttomo {

// Boundary normal chart of the full working boundary: (beta, s) with s the
// metric distance to the boundary along inward normal geodesics. The chart
// metric satisfies g_{1 2} = 0, g_{2 2} = 1 up to integration error.
class CollarChart {
 public:
  CollarChart(const MetricSpec& spec, int n_beta, int n_s, double s_max);

  const MetricSpec& spec() const { return spec_; }
  int nBeta() const { return n_beta_; }
  int nS() const { return n_s_; }
  double sMax() const { return s_max_; }
  double dBeta() const { return 2.0 * M_PI / n_beta_; }
  double dS() const { return s_max_ / (n_s_ - 1); }

  Vec2 positionAt(int ib, int is) const { return pos_[idx(ib, is)]; }
  Mat2 jacobianAt(int ib, int is) const { return jac_[idx(ib, is)]; }
  Sym2 chartMetricAt(int ib, int is) const { return g_[idx(ib, is)]; }
  // Christoffel symbols of the chart metric, upper index k
  std::array<Sym2, 2> chartChristoffelAt(int ib, int is) const;

  Vec2 position(double beta, double s) const;   // bilinear, periodic in beta
  Mat2 jacobian(double beta, double s) const;

  // Newton inversion of the chart map; false outside the collar
  bool invert(Vec2 x, double& beta, double& s) const;

  // worst deviation from the normal form (|g_12| and |g_22 - 1|)
  double normalFormDeviation() const;

 private:
  std::size_t idx(int ib, int is) const { return std::size_t(ib) * n_s_ + is; }

  MetricSpec spec_;
  int n_beta_, n_s_;
  double s_max_;
  std::vector<Vec2> pos_;
  std::vector<Mat2> jac_;
  std::vector<Sym2> g_;
};

// Rectangular chart-space grid with an arbitrary inside mask and a tabulated
// (pushed-forward) metric; the target of the semi-geodesic chart.
struct RectDomain {
  int nx = 0, ny = 0;
  Vec2 lo;
  double h = 0.0;

  std::size_t index(int i, int j) const { return std::size_t(i) * ny + j; }
  Vec2 node(int i, int j) const { return {lo.x + i * h, lo.y + j * h}; }
};

// Semi-geodesic coordinates built from normal coordinates at a point of the
// enlarged boundary: vertical chart lines are unit-speed geodesics, so the
// pushed metric has g_{i 2} = delta_{i 2}.
class SemiGeodesicChart {
 public:
  struct Options {
    int fan_rays = 1024;
    double fan_step = 2.5e-3;
    int dst_n = 96;          // chart-space nodes across the larger box side
    double margin = 0.03;    // chart-space margin around the mapped domain
  };

  SemiGeodesicChart(const MetricSpec& spec, const Options& opts = {});

  const MetricSpec& spec() const { return spec_; }
  Vec2 basePoint() const { return x0_; }
  double thetaVerticalMin() const { return theta_min_; }  // positive for valid charts
  double normalFormDeviation() const { return gin_dev_; }

  const RectDomain& domain() const { return dst_; }
  bool insideAt(int i, int j) const { return mask_[dst_.index(i, j)] != 0; }
  Sym2 pushedMetricAt(int i, int j) const { return gpush_[dst_.index(i, j)]; }
  Vec2 inverseAt(int i, int j) const { return inv_pos_[dst_.index(i, j)]; }
  Mat2 inverseJacobianAt(int i, int j) const { return inv_jac_[dst_.index(i, j)]; }
  std::array<Sym2, 2> pushedChristoffelAt(int i, int j) const;

  // forward map and chart-space image of a source point
  Vec2 forward(Vec2 x) const;
  // round trip helper: chart point -> source point (direct flow)
  Vec2 inverse(Vec2 y) const;

  // per-column integration intervals of the mapped working domain
  struct Column {
    bool valid = false;
    double y_lo = 0.0, y_hi = 0.0;
    int j_lo = 0, j_hi = -1;
    bool tangent = false;  // entry/exit grazing: excluded from strict checks
  };
  const Column& column(int i) const { return columns_[i]; }

  // pull a source-domain tensor into chart components on the chart grid
  SymTensor2Field pushTensor(const SymTensor2Field& f) const;

 private:
  MetricSpec spec_;
  Vec2 x0_;
  double theta_min_ = 0.0, gin_dev_ = 0.0;
  RectDomain dst_;
  std::vector<std::uint8_t> mask_;
  std::vector<Sym2> gpush_;
  std::vector<Vec2> inv_pos_;
  std::vector<Mat2> inv_jac_;
  std::vector<Column> columns_;
  std::shared_ptr<PolarFan> fan_;

  PhasePoint chartRay(double y1) const;  // initial phase point of the column geodesic
};

}  // namespace ttomo
