// ttomo - grid-sampled scalar/1-form/symmetric-tensor fields and their calculus
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ttomo/metric.hpp"

namespace ttomo {

// uniform node grid over the bounding square of the enlarged disk
struct Grid {
  int n = 0;
  Vec2 lo;
  double h = 0.0;
  Disk disk;

  static Grid cover(const Disk& disk, int n) {
    Grid g;
    g.n = n;
    g.disk = disk;
    g.lo = disk.center - Vec2{disk.radius1, disk.radius1};
    g.h = 2.0 * disk.radius1 / (n - 1);
    return g;
  }

  std::size_t index(int i, int j) const { return std::size_t(i) * n + j; }
  Vec2 node(int i, int j) const { return {lo.x + i * h, lo.y + j * h}; }
  bool sameAs(const Grid& o) const {
    return n == o.n && std::abs(h - o.h) < 1e-15 && norm(lo - o.lo) < 1e-15;
  }
};

std::vector<std::uint8_t> diskMask(const Grid& grid, double mask_radius);

// node quadrature weights: h^2 scaled by the fraction of each node cell
// inside the mask disk (subsampled near the rim)
std::vector<double> quadWeights(const Grid& grid, double mask_radius);

namespace detail {

template <int NC>
struct FieldData {
  Grid grid;
  double mask_radius = 0.0;
  std::vector<std::uint8_t> mask;
  std::array<std::vector<double>, NC> comp;

  void allocate() {
    mask = diskMask(grid, mask_radius);
    for (auto& c : comp) c.assign(std::size_t(grid.n) * grid.n, 0.0);
  }
  bool maskedAt(int i, int j) const { return mask[grid.index(i, j)] != 0; }
  // bilinear read of one component, zero outside the grid
  double bilinear(int c, Vec2 x) const;
};

}  // namespace detail

struct ScalarField : detail::FieldData<1> {
  std::function<double(Vec2)> rule;  // optional closed form (pre-mask)

  static ScalarField zeros(const Grid& grid, double mask_radius);
  static ScalarField sample(const Grid& grid, double mask_radius,
                            const std::function<double(Vec2)>& rule, bool keep_rule = true);
  double& at(int i, int j) { return comp[0][grid.index(i, j)]; }
  double at(int i, int j) const { return comp[0][grid.index(i, j)]; }
  double read(Vec2 x) const;
};

struct OneFormField : detail::FieldData<2> {
  std::function<Vec2(Vec2)> rule;

  static OneFormField zeros(const Grid& grid, double mask_radius);
  static OneFormField sample(const Grid& grid, double mask_radius,
                             const std::function<Vec2(Vec2)>& rule, bool keep_rule = true);
  Vec2 at(int i, int j) const {
    return {comp[0][grid.index(i, j)], comp[1][grid.index(i, j)]};
  }
  void set(int i, int j, Vec2 v) {
    comp[0][grid.index(i, j)] = v.x;
    comp[1][grid.index(i, j)] = v.y;
  }
  Vec2 read(Vec2 x) const;
};

// symmetric 2-tensor field; only the upper triangle (00, 01, 11) is stored
struct SymTensor2Field : detail::FieldData<3> {
  std::function<Sym2(Vec2)> rule;

  static SymTensor2Field zeros(const Grid& grid, double mask_radius);
  static SymTensor2Field sample(const Grid& grid, double mask_radius,
                                const std::function<Sym2(Vec2)>& rule, bool keep_rule = true);
  Sym2 at(int i, int j) const {
    const std::size_t k = grid.index(i, j);
    return {comp[0][k], comp[1][k], comp[2][k]};
  }
  void set(int i, int j, Sym2 s) {
    const std::size_t k = grid.index(i, j);
    comp[0][k] = s.s00;
    comp[1][k] = s.s01;
    comp[2][k] = s.s11;
  }
  Sym2 read(Vec2 x) const;          // rule when present, else bilinear
  Sym2 readGridOnly(Vec2 x) const;  // always bilinear
};

SymTensor2Field operator+(const SymTensor2Field& a, const SymTensor2Field& b);
SymTensor2Field operator-(const SymTensor2Field& a, const SymTensor2Field& b);
SymTensor2Field operator*(double c, const SymTensor2Field& a);
OneFormField operator+(const OneFormField& a, const OneFormField& b);
OneFormField operator-(const OneFormField& a, const OneFormField& b);
OneFormField operator*(double c, const OneFormField& a);

// symmetrized covariant derivative of a 1-form (central differences inside
// the mask, one-sided second order at mask edges)
SymTensor2Field symDiff(const MetricSpec& spec, const OneFormField& v);

// covariant divergence of a symmetric tensor
OneFormField divergence(const MetricSpec& spec, const SymTensor2Field& f);

// weighted inner products over the mask disk
double l2Inner(const MetricSpec& spec, const SymTensor2Field& f, const SymTensor2Field& h);
double l2Inner(const MetricSpec& spec, const OneFormField& v, const OneFormField& w);
double l2Inner(const MetricSpec& spec, const ScalarField& a, const ScalarField& b);
double l2Norm(const MetricSpec& spec, const SymTensor2Field& f);
double l2Norm(const MetricSpec& spec, const OneFormField& v);

// pointwise index raising f^{ij} = g^{ik} g^{jl} f_kl
SymTensor2Field raiseIndices(const MetricSpec& spec, const SymTensor2Field& f);

// plain componentwise max-abs over masked nodes
double maxAbs(const SymTensor2Field& f);
double maxAbs(const OneFormField& v);

// serialization: flat CSV and a little-endian binary format (magic "TT2F")
void writeFieldCsv(const SymTensor2Field& f, const std::string& path);
void writeFieldBinary(const SymTensor2Field& f, const std::string& path);
SymTensor2Field readFieldBinary(const std::string& path);

}  // namespace ttomo
