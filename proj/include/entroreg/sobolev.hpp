#pragma once

// Fractional Sobolev penalty realized spectrally: interior nodal values are
// expanded in the Dirichlet sine basis, the quadratic form is diagonal with
// symbol (1 + |xi|^2)^(1+sigma), and the transform is normalized so that the
// coefficient l2 norm equals the L2 norm of the sine interpolant.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <entroreg/error.hpp>
#include <entroreg/grid.hpp>

namespace entroreg {
namespace detail {

struct SineBlock {
  int dim = 0;
  std::size_t m[kMaxDim] = {1, 1, 1};       // interior extents
  std::size_t stride[kMaxDim] = {1, 1, 1};  // interior block strides
  std::size_t total = 0;
};

inline SineBlock interior_block(const Grid& g) {
  SineBlock b;
  b.dim = g.dim();
  b.total = 1;
  for (int a = 0; a < b.dim; ++a) {
    if (g.extent(a) < 3) {
      b.total = 0;
      return b;
    }
    b.m[a] = g.extent(a) - 2;
    b.total *= b.m[a];
  }
  b.stride[b.dim - 1] = 1;
  for (int a = b.dim - 2; a >= 0; --a) b.stride[a] = b.stride[a + 1] * b.m[a + 1];
  return b;
}

inline std::vector<double> gather_interior(const ScalarField& f, const SineBlock& b) {
  std::vector<double> out(b.total);
  const Grid& g = f.grid;
  std::size_t mi[kMaxDim] = {0, 0, 0};
  for (std::size_t lin = 0; lin < b.total; ++lin) {
    std::size_t idx[kMaxDim] = {0, 0, 0};
    for (int a = 0; a < b.dim; ++a) idx[a] = mi[a] + 1;
    out[lin] = f.values[g.linear(idx)];
    for (int a = b.dim - 1; a >= 0; --a) {
      if (++mi[a] < b.m[a]) break;
      mi[a] = 0;
    }
  }
  return out;
}

inline void scatter_interior(const std::vector<double>& in, const SineBlock& b,
                             ScalarField& f) {
  const Grid& g = f.grid;
  std::size_t mi[kMaxDim] = {0, 0, 0};
  for (std::size_t lin = 0; lin < b.total; ++lin) {
    std::size_t idx[kMaxDim] = {0, 0, 0};
    for (int a = 0; a < b.dim; ++a) idx[a] = mi[a] + 1;
    f.values[g.linear(idx)] = in[lin];
    for (int a = b.dim - 1; a >= 0; --a) {
      if (++mi[a] < b.m[a]) break;
      mi[a] = 0;
    }
  }
}

// Unnormalized DST-I along one axis: out[k] = sum_j in[j] sin((j+1)(k+1)pi/(m+1)).
// The matrix is symmetric and satisfies S^2 = ((m+1)/2) I.
inline void dst_pass(std::vector<double>& data, const SineBlock& b, int axis) {
  const std::size_t m = b.m[axis];
  const std::size_t stride = b.stride[axis];
  std::vector<double> table(m * m);
  const double step = std::numbers::pi / (double)(m + 1);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < m; ++j)
      table[k * m + j] = std::sin((double)((j + 1) * (k + 1)) * step);
  std::vector<double> line(m), res(m);
  for (std::size_t base = 0; base < b.total; ++base) {
    if ((base / stride) % m != 0) continue;
    for (std::size_t j = 0; j < m; ++j) line[j] = data[base + j * stride];
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      const double* row = table.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) s += row[j] * line[j];
      res[k] = s;
    }
    for (std::size_t k = 0; k < m; ++k) data[base + k * stride] = res[k];
  }
}

inline void check_hs_args(const ScalarField& f, double sigma) {
  if (!(sigma >= 0.0) || !(sigma < 0.5))
    throw InputError("hs: sigma must lie in [0, 1/2)");
  const double tol = 1e-10 * std::max(1.0, max_abs(f));
  bool ok = true;
  for_each_node(f.grid, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    if (f.grid.on_boundary(mi) && std::abs(f.values[lin]) > tol) ok = false;
  });
  if (!ok) throw InputError("hs: field must vanish on the boundary");
}

// Multiplier (1 + |xi|^2)^(1+sigma) at interior mode index `mi` (0-based).
inline double hs_symbol(const Grid& g, const std::size_t mi[kMaxDim], double sigma) {
  double xi2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double xi = (double)(mi[a] + 1) * std::numbers::pi / g.length(a);
    xi2 += xi * xi;
  }
  return std::pow(1.0 + xi2, 1.0 + sigma);
}

}  // namespace detail

inline double hs_norm_sq(const ScalarField& f, double sigma) {
  detail::check_hs_args(f, sigma);
  const detail::SineBlock b = detail::interior_block(f.grid);
  if (b.total == 0) return 0.0;
  std::vector<double> c = detail::gather_interior(f, b);
  double norm = 1.0, plane = 1.0;
  for (int a = 0; a < b.dim; ++a) {
    detail::dst_pass(c, b, a);
    norm *= 2.0 / (double)(b.m[a] + 1);
    plane *= 0.5 * f.grid.length(a);
  }
  for (double& x : c) x *= norm;
  double acc = 0.0;
  std::size_t mi[kMaxDim] = {0, 0, 0};
  for (std::size_t lin = 0; lin < b.total; ++lin) {
    acc += detail::hs_symbol(f.grid, mi, sigma) * c[lin] * c[lin];
    for (int a = b.dim - 1; a >= 0; --a) {
      if (++mi[a] < b.m[a]) break;
      mi[a] = 0;
    }
  }
  return plane * acc;
}

// Gradient of hs_norm_sq with respect to nodal values (zero on the boundary):
// forward transform, multiply by 2 * plane * symbol, transform back.
inline ScalarField hs_grad(const ScalarField& f, double sigma) {
  detail::check_hs_args(f, sigma);
  const detail::SineBlock b = detail::interior_block(f.grid);
  ScalarField g = ScalarField::zeros(f.grid);
  if (b.total == 0) return g;
  std::vector<double> c = detail::gather_interior(f, b);
  double norm = 1.0, plane = 1.0;
  for (int a = 0; a < b.dim; ++a) {
    detail::dst_pass(c, b, a);
    norm *= 2.0 / (double)(b.m[a] + 1);
    plane *= 0.5 * f.grid.length(a);
  }
  for (double& x : c) x *= norm;
  std::size_t mi[kMaxDim] = {0, 0, 0};
  for (std::size_t lin = 0; lin < b.total; ++lin) {
    c[lin] *= 2.0 * plane * detail::hs_symbol(f.grid, mi, sigma);
    for (int a = b.dim - 1; a >= 0; --a) {
      if (++mi[a] < b.m[a]) break;
      mi[a] = 0;
    }
  }
  for (int a = 0; a < b.dim; ++a) detail::dst_pass(c, b, a);
  for (double& x : c) x *= norm;
  detail::scatter_interior(c, b, g);
  return g;
}

inline double hs_norm_sq(const VectorField& v, double sigma) {
  double acc = 0.0;
  for (const ScalarField& c : v.comp) acc += hs_norm_sq(c, sigma);
  return acc;
}

inline VectorField hs_grad(const VectorField& v, double sigma) {
  VectorField g;
  g.grid = v.grid;
  g.comp.reserve(v.comp.size());
  for (const ScalarField& c : v.comp) g.comp.push_back(hs_grad(c, sigma));
  return g;
}

}  // namespace entroreg
