// ttomo - seeded band-limited smooth test fields with analytic derivatives
#pragma once

#include <cstdint>
#include <functional>

#include "ttomo/tensorfield.hpp"

namespace ttomo {

// smooth closed-form objects carrying exact first derivatives
struct SmoothScalar {
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> grad;
};

struct SmoothOneForm {
  std::function<Vec2(Vec2)> value;
  std::function<Mat2(Vec2)> deriv;  // deriv(i, j) = d_i v_j
};

struct SmoothSym2 {
  std::function<Sym2(Vec2)> value;
  std::function<std::array<Sym2, 2>(Vec2)> deriv;  // per derivative direction
};

// Low-order trigonometric polynomials times a radial window that vanishes
// identically past support_radius, so zero extension stays smooth.
// Deterministic in the seed.
SmoothScalar randomScalar(std::uint64_t seed, double support_radius = 0.9, int max_mode = 2,
                          double amp = 1.0);
SmoothOneForm randomOneForm(std::uint64_t seed, double support_radius = 0.9, int max_mode = 2,
                            double amp = 1.0);
SmoothSym2 randomSym2(std::uint64_t seed, double support_radius = 0.9, int max_mode = 2,
                      double amp = 1.0);

OneFormField sampleForm(const Grid& grid, double mask_radius, const SmoothOneForm& v);
SymTensor2Field sampleTensor(const Grid& grid, double mask_radius, const SmoothSym2& f);

// exact covariant symmetric differential of a smooth 1-form, as a rule-backed
// field (no grid stencils involved)
SymTensor2Field exactSymDiff(const MetricSpec& spec, const SmoothOneForm& v, const Grid& grid,
                             double mask_radius);

// sup of |components| + |first derivatives| over a fine sampling of the disk
double c1Norm(const SmoothOneForm& v, const Disk& disk, int samples = 160);
double c1Norm(const SmoothSym2& f, const Disk& disk, int samples = 160);

}  // namespace ttomo
