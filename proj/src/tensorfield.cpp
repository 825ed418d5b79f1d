// ttomo - field storage, covariant difference operators, quadrature
#include "ttomo/tensorfield.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "ttomo/io.hpp"

namespace ttomo {

std::vector<std::uint8_t> diskMask(const Grid& grid, double mask_radius) {
  std::vector<std::uint8_t> mask(std::size_t(grid.n) * grid.n, 0);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j)
      mask[grid.index(i, j)] = norm(grid.node(i, j) - grid.disk.center) < mask_radius ? 1 : 0;
  return mask;
}

std::vector<double> quadWeights(const Grid& grid, double mask_radius) {
  const auto mask = diskMask(grid, mask_radius);
  std::vector<double> w(std::size_t(grid.n) * grid.n, 0.0);
  const double cell = grid.h * grid.h;
  const double half_diag = grid.h * 0.7071067811865476;
  auto fraction = [&](Vec2 x) {
    int in = 0;
    const int s = 8;
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b) {
        const Vec2 p{x.x + ((a + 0.5) / s - 0.5) * grid.h,
                     x.y + ((b + 0.5) / s - 0.5) * grid.h};
        if (norm(p - grid.disk.center) < mask_radius) ++in;
      }
    return in / double(s * s);
  };
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      const Vec2 x = grid.node(i, j);
      const double d = norm(x - grid.disk.center) - mask_radius;
      if (d < -half_diag)
        w[grid.index(i, j)] = cell;
      else if (d < half_diag)
        w[grid.index(i, j)] = cell * fraction(x);
    }
  // partial cells of unmasked nodes carry field value zero; hand their area
  // to the closest masked neighbor so constant fields integrate exactly
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j) {
      const std::size_t k = grid.index(i, j);
      if (mask[k] || w[k] == 0.0) continue;
      const Vec2 x = grid.node(i, j);
      int bi = -1, bj = -1;
      double best = 1e300;
      for (int a = std::max(0, i - 1); a <= std::min(grid.n - 1, i + 1); ++a)
        for (int b = std::max(0, j - 1); b <= std::min(grid.n - 1, j + 1); ++b) {
          if (!mask[grid.index(a, b)]) continue;
          const double dist = norm(grid.node(a, b) - x);
          if (dist < best) {
            best = dist;
            bi = a;
            bj = b;
          }
        }
      if (bi >= 0) w[grid.index(bi, bj)] += w[k];
      w[k] = 0.0;
    }
  return w;
}

namespace detail {

template <int NC>
double FieldData<NC>::bilinear(int c, Vec2 x) const {
  const double u = (x.x - grid.lo.x) / grid.h;
  const double v = (x.y - grid.lo.y) / grid.h;
  const int i = int(std::floor(u)), j = int(std::floor(v));
  if (i < 0 || j < 0 || i + 1 >= grid.n || j + 1 >= grid.n) return 0.0;
  const double fu = u - i, fv = v - j;
  const auto& a = comp[c];
  return a[grid.index(i, j)] * (1 - fu) * (1 - fv) +
         a[grid.index(i + 1, j)] * fu * (1 - fv) +
         a[grid.index(i, j + 1)] * (1 - fu) * fv +
         a[grid.index(i + 1, j + 1)] * fu * fv;
}

template struct FieldData<1>;
template struct FieldData<2>;
template struct FieldData<3>;

}  // namespace detail

ScalarField ScalarField::zeros(const Grid& grid, double mask_radius) {
  ScalarField f;
  f.grid = grid;
  f.mask_radius = mask_radius;
  f.allocate();
  return f;
}

ScalarField ScalarField::sample(const Grid& grid, double mask_radius,
                                const std::function<double(Vec2)>& rule, bool keep_rule) {
  ScalarField f = zeros(grid, mask_radius);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j)
      if (f.maskedAt(i, j)) f.at(i, j) = rule(grid.node(i, j));
  if (keep_rule) f.rule = rule;
  return f;
}

double ScalarField::read(Vec2 x) const {
  if (rule) return norm(x - grid.disk.center) < mask_radius ? rule(x) : 0.0;
  return bilinear(0, x);
}

OneFormField OneFormField::zeros(const Grid& grid, double mask_radius) {
  OneFormField f;
  f.grid = grid;
  f.mask_radius = mask_radius;
  f.allocate();
  return f;
}

OneFormField OneFormField::sample(const Grid& grid, double mask_radius,
                                  const std::function<Vec2(Vec2)>& rule, bool keep_rule) {
  OneFormField f = zeros(grid, mask_radius);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j)
      if (f.maskedAt(i, j)) f.set(i, j, rule(grid.node(i, j)));
  if (keep_rule) f.rule = rule;
  return f;
}

Vec2 OneFormField::read(Vec2 x) const {
  if (rule) return norm(x - grid.disk.center) < mask_radius ? rule(x) : Vec2{};
  return {bilinear(0, x), bilinear(1, x)};
}

SymTensor2Field SymTensor2Field::zeros(const Grid& grid, double mask_radius) {
  SymTensor2Field f;
  f.grid = grid;
  f.mask_radius = mask_radius;
  f.allocate();
  return f;
}

SymTensor2Field SymTensor2Field::sample(const Grid& grid, double mask_radius,
                                        const std::function<Sym2(Vec2)>& rule, bool keep_rule) {
  SymTensor2Field f = zeros(grid, mask_radius);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j)
      if (f.maskedAt(i, j)) f.set(i, j, rule(grid.node(i, j)));
  if (keep_rule) f.rule = rule;
  return f;
}

Sym2 SymTensor2Field::read(Vec2 x) const {
  if (rule) return norm(x - grid.disk.center) < mask_radius ? rule(x) : Sym2{};
  return readGridOnly(x);
}

Sym2 SymTensor2Field::readGridOnly(Vec2 x) const {
  return {bilinear(0, x), bilinear(1, x), bilinear(2, x)};
}

namespace {

template <typename FieldT, typename Op>
FieldT combine(const FieldT& a, const FieldT& b, Op op) {
  if (!a.grid.sameAs(b.grid)) throw Error("field grid mismatch");
  FieldT out = a;
  out.rule = nullptr;
  for (std::size_t c = 0; c < a.comp.size(); ++c)
    for (std::size_t k = 0; k < a.comp[c].size(); ++k)
      out.comp[c][k] = op(a.comp[c][k], b.comp[c][k]);
  return out;
}

}  // namespace

SymTensor2Field operator+(const SymTensor2Field& a, const SymTensor2Field& b) {
  return combine(a, b, [](double x, double y) { return x + y; });
}
SymTensor2Field operator-(const SymTensor2Field& a, const SymTensor2Field& b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}
SymTensor2Field operator*(double c, const SymTensor2Field& a) {
  SymTensor2Field out = a;
  out.rule = nullptr;
  for (auto& arr : out.comp)
    for (double& v : arr) v *= c;
  return out;
}
OneFormField operator+(const OneFormField& a, const OneFormField& b) {
  return combine(a, b, [](double x, double y) { return x + y; });
}
OneFormField operator-(const OneFormField& a, const OneFormField& b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}
OneFormField operator*(double c, const OneFormField& a) {
  OneFormField out = a;
  out.rule = nullptr;
  for (auto& arr : out.comp)
    for (double& v : arr) v *= c;
  return out;
}

namespace {

// directional node derivative honoring the mask: central inside, one-sided
// second order at edges, first order on thin slivers
template <int NC>
double nodeDeriv(const detail::FieldData<NC>& f, int c, int i, int j, int dir) {
  const Grid& g = f.grid;
  const int di = dir == 0 ? 1 : 0, dj = dir == 0 ? 0 : 1;
  auto ok = [&](int a, int b) {
    return a >= 0 && b >= 0 && a < g.n && b < g.n && f.mask[g.index(a, b)] != 0;
  };
  auto val = [&](int a, int b) { return f.comp[c][g.index(a, b)]; };
  const bool plus = ok(i + di, j + dj), minus = ok(i - di, j - dj);
  if (plus && minus) return (val(i + di, j + dj) - val(i - di, j - dj)) / (2 * g.h);
  if (plus) {
    if (ok(i + 2 * di, j + 2 * dj))
      return (-1.5 * val(i, j) + 2.0 * val(i + di, j + dj) -
              0.5 * val(i + 2 * di, j + 2 * dj)) / g.h;
    return (val(i + di, j + dj) - val(i, j)) / g.h;
  }
  if (minus) {
    if (ok(i - 2 * di, j - 2 * dj))
      return (1.5 * val(i, j) - 2.0 * val(i - di, j - dj) +
              0.5 * val(i - 2 * di, j - 2 * dj)) / g.h;
    return (val(i, j) - val(i - di, j - dj)) / g.h;
  }
  return 0.0;
}

int symIndex(int i, int j) { return (i == 0 && j == 0) ? 0 : ((i == 1 && j == 1) ? 2 : 1); }

void requireSameGrid(const Grid& a, const Grid& b) {
  if (!a.sameAs(b)) throw Error("field grid mismatch");
}

}  // namespace

SymTensor2Field symDiff(const MetricSpec& spec, const OneFormField& v) {
  SymTensor2Field out = SymTensor2Field::zeros(v.grid, v.mask_radius);
  for (int i = 0; i < v.grid.n; ++i)
    for (int j = 0; j < v.grid.n; ++j) {
      if (!v.maskedAt(i, j)) continue;
      const Vec2 x = v.grid.node(i, j);
      const auto gamma = spec.christoffel(x);
      const Vec2 vx = v.at(i, j);
      Sym2 dv;
      for (int a = 0; a < 2; ++a)
        for (int b = a; b < 2; ++b) {
          const double sym = 0.5 * (nodeDeriv(v, b, i, j, a) + nodeDeriv(v, a, i, j, b));
          const double chris = gamma[0](a, b) * vx.x + gamma[1](a, b) * vx.y;
          dv.set(a, b, sym - chris);
        }
      out.set(i, j, dv);
    }
  return out;
}

OneFormField divergence(const MetricSpec& spec, const SymTensor2Field& f) {
  OneFormField out = OneFormField::zeros(f.grid, f.mask_radius);
  for (int i = 0; i < f.grid.n; ++i)
    for (int j = 0; j < f.grid.n; ++j) {
      if (!f.maskedAt(i, j)) continue;
      const Vec2 x = f.grid.node(i, j);
      const Sym2 gi = spec.metricInverse(x);
      const auto gamma = spec.christoffel(x);
      const Sym2 fx = f.at(i, j);
      Vec2 div;
      for (int ii = 0; ii < 2; ++ii) {
        double sum = 0.0;
        for (int jj = 0; jj < 2; ++jj)
          for (int k = 0; k < 2; ++k) {
            double nab = nodeDeriv(f, symIndex(ii, jj), i, j, k);
            for (int l = 0; l < 2; ++l)
              nab -= gamma[l](k, ii) * fx(l, jj) + gamma[l](k, jj) * fx(ii, l);
            sum += gi(jj, k) * nab;
          }
        div[ii] = sum;
      }
      out.set(i, j, div);
    }
  return out;
}

double l2Inner(const MetricSpec& spec, const SymTensor2Field& f, const SymTensor2Field& h) {
  requireSameGrid(f.grid, h.grid);
  const auto w = quadWeights(f.grid, std::min(f.mask_radius, h.mask_radius));
  double sum = 0.0;
  for (int i = 0; i < f.grid.n; ++i)
    for (int j = 0; j < f.grid.n; ++j) {
      const double wij = w[f.grid.index(i, j)];
      if (wij == 0.0) continue;
      const Vec2 x = f.grid.node(i, j);
      const Sym2 gi = spec.metricInverse(x);
      const Mat2 a = gi.mat() * f.at(i, j).mat() * gi.mat();  // contravariant f
      const Mat2 b = h.at(i, j).mat();
      const double contract = a(0, 0) * b(0, 0) + a(0, 1) * b(0, 1) +
                              a(1, 0) * b(1, 0) + a(1, 1) * b(1, 1);
      sum += wij * contract * spec.sqrtDetG(x);
    }
  return sum;
}

double l2Inner(const MetricSpec& spec, const OneFormField& v, const OneFormField& w) {
  requireSameGrid(v.grid, w.grid);
  const auto q = quadWeights(v.grid, std::min(v.mask_radius, w.mask_radius));
  double sum = 0.0;
  for (int i = 0; i < v.grid.n; ++i)
    for (int j = 0; j < v.grid.n; ++j) {
      const double wij = q[v.grid.index(i, j)];
      if (wij == 0.0) continue;
      const Vec2 x = v.grid.node(i, j);
      const Sym2 gi = spec.metricInverse(x);
      sum += wij * dot(gi.apply(v.at(i, j)), w.at(i, j)) * spec.sqrtDetG(x);
    }
  return sum;
}

double l2Inner(const MetricSpec& spec, const ScalarField& a, const ScalarField& b) {
  requireSameGrid(a.grid, b.grid);
  const auto q = quadWeights(a.grid, std::min(a.mask_radius, b.mask_radius));
  double sum = 0.0;
  for (int i = 0; i < a.grid.n; ++i)
    for (int j = 0; j < a.grid.n; ++j) {
      const double wij = q[a.grid.index(i, j)];
      if (wij == 0.0) continue;
      sum += wij * a.at(i, j) * b.at(i, j) * spec.sqrtDetG(a.grid.node(i, j));
    }
  return sum;
}

double l2Norm(const MetricSpec& spec, const SymTensor2Field& f) {
  return std::sqrt(std::max(0.0, l2Inner(spec, f, f)));
}

double l2Norm(const MetricSpec& spec, const OneFormField& v) {
  return std::sqrt(std::max(0.0, l2Inner(spec, v, v)));
}

SymTensor2Field raiseIndices(const MetricSpec& spec, const SymTensor2Field& f) {
  SymTensor2Field out = SymTensor2Field::zeros(f.grid, f.mask_radius);
  for (int i = 0; i < f.grid.n; ++i)
    for (int j = 0; j < f.grid.n; ++j) {
      if (!f.maskedAt(i, j)) continue;
      const Sym2 gi = spec.metricInverse(f.grid.node(i, j));
      const Mat2 r = gi.mat() * f.at(i, j).mat() * gi.mat();
      out.set(i, j, Sym2{r(0, 0), 0.5 * (r(0, 1) + r(1, 0)), r(1, 1)});
    }
  return out;
}

double maxAbs(const SymTensor2Field& f) {
  double m = 0.0;
  for (const auto& arr : f.comp)
    for (std::size_t k = 0; k < arr.size(); ++k)
      if (f.mask[k]) m = std::max(m, std::abs(arr[k]));
  return m;
}

double maxAbs(const OneFormField& v) {
  double m = 0.0;
  for (const auto& arr : v.comp)
    for (std::size_t k = 0; k < arr.size(); ++k)
      if (v.mask[k]) m = std::max(m, std::abs(arr[k]));
  return m;
}

void writeFieldCsv(const SymTensor2Field& f, const std::string& path) {
  std::string s = "i,j,x,y,f00,f01,f11\n";
  for (int i = 0; i < f.grid.n; ++i)
    for (int j = 0; j < f.grid.n; ++j) {
      const Vec2 x = f.grid.node(i, j);
      const Sym2 v = f.at(i, j);
      appendNumber(s, double(i));
      s += ',';
      appendNumber(s, double(j));
      s += ',';
      appendNumber(s, x.x);
      s += ',';
      appendNumber(s, x.y);
      s += ',';
      appendNumber(s, v.s00);
      s += ',';
      appendNumber(s, v.s01);
      s += ',';
      appendNumber(s, v.s11);
      s += '\n';
    }
  atomicWrite(path, s);
}

namespace {

constexpr char kMagic[4] = {'T', 'T', '2', 'F'};

template <typename T>
void put(std::string& s, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  s.append(buf, sizeof(T));
}

template <typename T>
T take(std::ifstream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void writeFieldBinary(const SymTensor2Field& f, const std::string& path) {
  std::string s(kMagic, 4);
  put<std::uint32_t>(s, 1);
  put<std::uint32_t>(s, std::uint32_t(f.grid.n));
  put<std::uint32_t>(s, 3);
  put<double>(s, f.grid.disk.center.x);
  put<double>(s, f.grid.disk.center.y);
  put<double>(s, f.grid.disk.radius);
  put<double>(s, f.grid.disk.radius1);
  put<double>(s, f.mask_radius);
  for (const auto& arr : f.comp)
    for (double v : arr) put<double>(s, v);
  atomicWrite(path, s);
}

SymTensor2Field readFieldBinary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error("bad field file magic in " + path);
  const auto version = take<std::uint32_t>(in);
  if (version != 1) throw Error("unsupported field file version");
  const int n = int(take<std::uint32_t>(in));
  const auto ncomp = take<std::uint32_t>(in);
  if (ncomp != 3) throw Error("unexpected component count");
  Disk disk;
  disk.center.x = take<double>(in);
  disk.center.y = take<double>(in);
  disk.radius = take<double>(in);
  disk.radius1 = take<double>(in);
  const double mask_radius = take<double>(in);
  SymTensor2Field f = SymTensor2Field::zeros(Grid::cover(disk, n), mask_radius);
  for (auto& arr : f.comp)
    for (double& v : arr) v = take<double>(in);
  if (!in) throw Error("truncated field file " + path);
  return f;
}

}  // namespace ttomo
