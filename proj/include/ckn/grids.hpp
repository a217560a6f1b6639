#pragma once

// Lattice containers for sampled scalar fields: a Cartesian annulus grid in
// dimension 3 or 4, and an axisymmetric polar grid on [r0, R] x [0, pi].

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ckn/common.hpp"

namespace ckn {

using Vec = Eigen::VectorXd;

// Cartesian lattice of spacing h restricted to r_min <= |x| <= r_max.
// Stencil evaluation keeps an interior margin instead of extrapolated ghosts:
// a node qualifies for reach-m stencils when the whole Chebyshev box of radius
// m*h around it lies inside the annulus (exact corner test).
struct AnnulusGrid {
  int d = 3;
  double r_min = 0.0;
  double r_max = 0.0;
  double h = 0.0;
  std::array<int, 4> lo{};
  std::array<int, 4> hi{};
  std::array<std::int64_t, 4> stride{};
  std::vector<std::array<int, 4>> coords;
  std::vector<std::int32_t> box;

  static AnnulusGrid make(int d, double r_min, double r_max, double h);

  int size() const { return static_cast<int>(coords.size()); }
  Vec position(int node) const;
  double radius(int node) const;
  int find(const std::array<int, 4>& c) const;
  int neighbor(int node, int axis, int offset) const;
  int shift(int node, const std::array<int, 4>& offset) const;
  bool box_inside(int node, int reach) const;
  std::vector<int> interior_nodes(int reach) const;
};

// Axisymmetric polar grid, d = 3: nodes (r_i, theta_j) with
// r_i = r0 + i*hr (i = 0..nr-1) and theta_j = j*ht (j = 0..nt-1, ht = pi/(nt-1)).
// The theta endpoints are symmetry-axis rows; derivative stencils use even
// reflection across them. Node storage is row-major with i outer.
struct AxiPolarGrid {
  double r0 = 0.0;
  double R = 0.0;
  int nr = 0;
  int nt = 0;
  double hr = 0.0;
  double ht = 0.0;

  static AxiPolarGrid make(double r0, double R, int nr, int nt);

  int size() const { return nr * nt; }
  int idx(int i, int j) const { return i * nt + j; }
  double r(int i) const { return r0 + hr * i; }
  double theta(int j) const { return ht * j; }
  int reflect_theta(int j) const;
};

// Sampled scalar function on one of the two grids. If the positivity flag is
// set, every value is > 0 (checked at construction); forming negative powers
// such as v^{1-n} requires the flag.
struct ScalarField {
  const AnnulusGrid* annulus = nullptr;
  const AxiPolarGrid* polar = nullptr;
  std::vector<double> values;
  bool positive = false;

  int size() const { return static_cast<int>(values.size()); }
};

ScalarField sample_annulus(const AnnulusGrid& grid,
                           const std::function<double(const Vec&)>& f,
                           bool positivity);
ScalarField sample_polar(const AxiPolarGrid& grid,
                         const std::function<double(double, double)>& f,
                         bool positivity);

// Nodewise power v^p. Negative or fractional exponents require the positivity
// flag; throws PositivityError otherwise.
ScalarField pow_field(const ScalarField& v, double exponent);

// Snapshot export: CSV with node coordinates and value, and a raw binary
// layout of little-endian 64-bit floats in row-major node order.
void field_to_csv(const ScalarField& v, const std::string& path);
void field_to_binary(const ScalarField& v, const std::string& path);
std::vector<double> values_from_binary(const std::string& path);

}  // namespace ckn
