#include "ckn/grids.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "ckn/io.hpp"

namespace ckn {

namespace {

std::int64_t box_cells(const std::array<int, 4>& lo, const std::array<int, 4>& hi, int d) {
  std::int64_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= static_cast<std::int64_t>(hi[k] - lo[k] + 1);
  return cells;
}

}  // namespace

AnnulusGrid AnnulusGrid::make(int d, double r_min, double r_max, double h) {
  if (d != 3 && d != 4) throw DomainError("AnnulusGrid: d must be 3 or 4");
  if (!(h > 0.0)) throw DomainError("AnnulusGrid: h must be positive");
  if (!(r_min > 0.0) || !(r_max > r_min)) {
    throw DomainError("AnnulusGrid: need 0 < r_min < r_max");
  }
  if (r_min < 4.0 * h) throw DomainError("AnnulusGrid: r_min must be at least 4h");

  AnnulusGrid g;
  g.d = d;
  g.r_min = r_min;
  g.r_max = r_max;
  g.h = h;
  const int m = static_cast<int>(std::ceil(r_max / h)) + 1;
  for (int k = 0; k < 4; ++k) {
    g.lo[k] = (k < d) ? -m : 0;
    g.hi[k] = (k < d) ? m : 0;
  }
  const std::int64_t cells = box_cells(g.lo, g.hi, d);
  if (cells > 40000000) throw DomainError("AnnulusGrid: lattice too large");
  g.stride[0] = 1;
  for (int k = 1; k < 4; ++k) {
    g.stride[k] = g.stride[k - 1] * (g.hi[k - 1] - g.lo[k - 1] + 1);
  }
  g.box.assign(static_cast<std::size_t>(cells), -1);

  const double lo2 = r_min * r_min, hi2 = r_max * r_max;
  std::array<int, 4> c{};
  for (int i0 = g.lo[0]; i0 <= g.hi[0]; ++i0) {
    c[0] = i0;
    for (int i1 = g.lo[1]; i1 <= g.hi[1]; ++i1) {
      c[1] = i1;
      for (int i2 = g.lo[2]; i2 <= g.hi[2]; ++i2) {
        c[2] = i2;
        if (d == 3) {
          const double r2 = h * h * (double(i0) * i0 + double(i1) * i1 + double(i2) * i2);
          if (r2 >= lo2 && r2 <= hi2) {
            c[3] = 0;
            g.coords.push_back(c);
          }
        } else {
          for (int i3 = g.lo[3]; i3 <= g.hi[3]; ++i3) {
            const double r2 = h * h * (double(i0) * i0 + double(i1) * i1 +
                                       double(i2) * i2 + double(i3) * i3);
            if (r2 >= lo2 && r2 <= hi2) {
              c[3] = i3;
              g.coords.push_back(c);
            }
          }
        }
      }
    }
  }
  for (int node = 0; node < g.size(); ++node) {
    std::int64_t flat = 0;
    for (int k = 0; k < d; ++k) {
      flat += (g.coords[node][k] - g.lo[k]) * g.stride[k];
    }
    g.box[static_cast<std::size_t>(flat)] = node;
  }
  return g;
}

Vec AnnulusGrid::position(int node) const {
  Vec x(d);
  for (int k = 0; k < d; ++k) x[k] = h * coords[node][k];
  return x;
}

double AnnulusGrid::radius(int node) const {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += sq(h * coords[node][k]);
  return std::sqrt(s);
}

int AnnulusGrid::find(const std::array<int, 4>& c) const {
  std::int64_t flat = 0;
  for (int k = 0; k < d; ++k) {
    if (c[k] < lo[k] || c[k] > hi[k]) return -1;
    flat += (c[k] - lo[k]) * stride[k];
  }
  return box[static_cast<std::size_t>(flat)];
}

int AnnulusGrid::neighbor(int node, int axis, int offset) const {
  std::array<int, 4> c = coords[node];
  c[axis] += offset;
  const int j = find(c);
  if (j < 0) throw StencilOutOfRange("AnnulusGrid: stencil leaves the annulus");
  return j;
}

int AnnulusGrid::shift(int node, const std::array<int, 4>& offset) const {
  std::array<int, 4> c = coords[node];
  for (int k = 0; k < d; ++k) c[k] += offset[k];
  const int j = find(c);
  if (j < 0) throw StencilOutOfRange("AnnulusGrid: stencil leaves the annulus");
  return j;
}

bool AnnulusGrid::box_inside(int node, int reach) const {
  // Exact corner test: the farthest box corner from the origin has every
  // coordinate pushed outward, the nearest one has every coordinate pulled
  // toward zero (clamped at zero when the box straddles a coordinate plane).
  const double m = reach * h;
  double far2 = 0.0, near2 = 0.0;
  for (int k = 0; k < d; ++k) {
    const double a = std::abs(h * coords[node][k]);
    far2 += sq(a + m);
    near2 += sq(std::max(0.0, a - m));
  }
  return near2 >= r_min * r_min && far2 <= r_max * r_max;
}

std::vector<int> AnnulusGrid::interior_nodes(int reach) const {
  std::vector<int> out;
  for (int node = 0; node < size(); ++node) {
    if (box_inside(node, reach)) out.push_back(node);
  }
  return out;
}

AxiPolarGrid AxiPolarGrid::make(double r0, double R, int nr, int nt) {
  if (!(r0 >= 0.0) || !(R > r0)) throw DomainError("AxiPolarGrid: need 0 <= r0 < R");
  if (nr < 6 || nt < 5) throw DomainError("AxiPolarGrid: grid too small");
  AxiPolarGrid g;
  g.r0 = r0;
  g.R = R;
  g.nr = nr;
  g.nt = nt;
  g.hr = (R - r0) / (nr - 1);
  g.ht = M_PI / (nt - 1);
  return g;
}

int AxiPolarGrid::reflect_theta(int j) const {
  if (j < 0) j = -j;
  const int last = nt - 1;
  if (j > last) j = 2 * last - j;
  if (j < 0 || j > last) throw StencilOutOfRange("AxiPolarGrid: theta offset too large");
  return j;
}

ScalarField sample_annulus(const AnnulusGrid& grid,
                           const std::function<double(const Vec&)>& f,
                           bool positivity) {
  ScalarField v;
  v.annulus = &grid;
  v.positive = positivity;
  v.values.resize(grid.size());
  for (int node = 0; node < grid.size(); ++node) {
    v.values[node] = f(grid.position(node));
    if (positivity && !(v.values[node] > 0.0)) {
      throw PositivityError("sample_annulus: field flagged positive has a non-positive value");
    }
  }
  return v;
}

ScalarField sample_polar(const AxiPolarGrid& grid,
                         const std::function<double(double, double)>& f,
                         bool positivity) {
  ScalarField v;
  v.polar = &grid;
  v.positive = positivity;
  v.values.resize(grid.size());
  for (int i = 0; i < grid.nr; ++i) {
    for (int j = 0; j < grid.nt; ++j) {
      double& val = v.values[grid.idx(i, j)];
      val = f(grid.r(i), grid.theta(j));
      if (positivity && !(val > 0.0)) {
        throw PositivityError("sample_polar: field flagged positive has a non-positive value");
      }
    }
  }
  return v;
}

ScalarField pow_field(const ScalarField& v, double exponent) {
  const bool integral = exponent == std::floor(exponent);
  if ((exponent < 0.0 || !integral) && !v.positive) {
    throw PositivityError("pow_field: exponent requires a field with the positivity flag");
  }
  ScalarField out = v;
  for (double& x : out.values) x = std::pow(x, exponent);
  out.positive = v.positive;
  return out;
}

void field_to_csv(const ScalarField& v, const std::string& path) {
  std::string text;
  if (v.annulus) {
    const AnnulusGrid& g = *v.annulus;
    text = (g.d == 3) ? "x,y,z,value\n" : "x,y,z,w,value\n";
    for (int node = 0; node < g.size(); ++node) {
      const Vec x = g.position(node);
      for (int k = 0; k < g.d; ++k) {
        text += format_g17(x[k]);
        text += ',';
      }
      text += format_g17(v.values[node]);
      text += '\n';
    }
  } else if (v.polar) {
    const AxiPolarGrid& g = *v.polar;
    text = "r,theta,value\n";
    for (int i = 0; i < g.nr; ++i) {
      for (int j = 0; j < g.nt; ++j) {
        text += format_g17(g.r(i));
        text += ',';
        text += format_g17(g.theta(j));
        text += ',';
        text += format_g17(v.values[g.idx(i, j)]);
        text += '\n';
      }
    }
  } else {
    throw DomainError("field_to_csv: field has no grid");
  }
  atomic_write_text(path, text);
}

void field_to_binary(const ScalarField& v, const std::string& path) {
  static_assert(sizeof(double) == 8);
  std::string bytes(v.values.size() * 8, '\0');
  std::memcpy(bytes.data(), v.values.data(), bytes.size());
  atomic_write_text(path, bytes);
}

std::vector<double> values_from_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("values_from_binary: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) throw ConfigError("values_from_binary: truncated file " + path);
  std::vector<double> out(bytes.size() / 8);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace ckn
