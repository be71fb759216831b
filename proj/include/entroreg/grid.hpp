#pragma once

// Regular tensor-product grids in 1 to 3 dimensions with nodal fields,
// trapezoid quadrature, clamped multilinear interpolation, per-cell forward
// differences, and nested coarse/fine transfer. Node storage is row major
// with the last axis fastest.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <entroreg/error.hpp>

namespace entroreg {

inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;

namespace detail {

// Blend written as a + t (b - a): monotone in floating point, so the result
// never leaves [min(a,b), max(a,b)], t = 0 reproduces a bit-exactly and the
// explicit t = 1 branch reproduces b bit-exactly.
inline double lerp(double a, double b, double t) {
  return t == 1.0 ? b : a + t * (b - a);
}

}  // namespace detail

class Grid {
 public:
  Grid() = default;

  static Grid make(const std::vector<std::size_t>& extents,
                   const std::vector<double>& lengths,
                   const Point& origin = {0.0, 0.0, 0.0}) {
    if (extents.empty() || extents.size() > (std::size_t)kMaxDim)
      throw InputError("grid: dimension must be 1, 2, or 3");
    if (lengths.size() != extents.size())
      throw InputError("grid: one length per axis required");
    Grid g;
    g.dim_ = (int)extents.size();
    for (int a = 0; a < g.dim_; ++a) {
      if (extents[a] < 2)
        throw InputError("grid: every axis needs at least 2 nodes");
      if (!std::isfinite(lengths[a]) || lengths[a] <= 0.0)
        throw InputError("grid: axis lengths must be positive and finite");
      if (!std::isfinite(origin[a]))
        throw InputError("grid: origin must be finite");
      g.n_[a] = extents[a];
      g.len_[a] = lengths[a];
      g.h_[a] = lengths[a] / (double)(extents[a] - 1);
      g.origin_[a] = origin[a];
    }
    g.stride_[g.dim_ - 1] = 1;
    for (int a = g.dim_ - 2; a >= 0; --a)
      g.stride_[a] = g.stride_[a + 1] * g.n_[a + 1];
    return g;
  }

  int dim() const { return dim_; }
  std::size_t extent(int axis) const { return n_[axis]; }
  double length(int axis) const { return len_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  double origin(int axis) const { return origin_[axis]; }
  std::size_t stride(int axis) const { return stride_[axis]; }

  std::size_t node_count() const {
    std::size_t c = 1;
    for (int a = 0; a < dim_; ++a) c *= n_[a];
    return c;
  }
  std::size_t cell_count() const {
    std::size_t c = 1;
    for (int a = 0; a < dim_; ++a) c *= n_[a] - 1;
    return c;
  }

  double domain_measure() const {
    double m = 1.0;
    for (int a = 0; a < dim_; ++a) m *= len_[a];
    return m;
  }
  double cell_measure() const {
    double m = 1.0;
    for (int a = 0; a < dim_; ++a) m *= h_[a];
    return m;
  }
  double min_spacing() const {
    double m = h_[0];
    for (int a = 1; a < dim_; ++a) m = std::min(m, h_[a]);
    return m;
  }

  std::size_t linear(const std::size_t mi[kMaxDim]) const {
    std::size_t lin = 0;
    for (int a = 0; a < dim_; ++a) lin += mi[a] * stride_[a];
    return lin;
  }
  void unravel(std::size_t lin, std::size_t mi[kMaxDim]) const {
    for (int a = 0; a < dim_; ++a) {
      mi[a] = lin / stride_[a];
      lin %= stride_[a];
    }
  }

  double coordinate(int axis, std::size_t i) const {
    return origin_[axis] + h_[axis] * (double)i;
  }
  Point node_point(const std::size_t mi[kMaxDim]) const {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) p[a] = coordinate(a, mi[a]);
    return p;
  }

  bool on_boundary(const std::size_t mi[kMaxDim]) const {
    for (int a = 0; a < dim_; ++a)
      if (mi[a] == 0 || mi[a] + 1 == n_[a]) return true;
    return false;
  }

  // Trapezoid weight: product over axes of h (interior) or h/2 (axis ends).
  double weight(const std::size_t mi[kMaxDim]) const {
    double w = 1.0;
    for (int a = 0; a < dim_; ++a)
      w *= (mi[a] == 0 || mi[a] + 1 == n_[a]) ? 0.5 * h_[a] : h_[a];
    return w;
  }

  bool same_geometry(const Grid& o) const {
    if (dim_ != o.dim_) return false;
    for (int a = 0; a < dim_; ++a)
      if (n_[a] != o.n_[a] || len_[a] != o.len_[a] || origin_[a] != o.origin_[a])
        return false;
    return true;
  }

 private:
  int dim_ = 0;
  std::size_t n_[kMaxDim] = {1, 1, 1};
  std::size_t stride_[kMaxDim] = {1, 1, 1};
  double len_[kMaxDim] = {0.0, 0.0, 0.0};
  double h_[kMaxDim] = {0.0, 0.0, 0.0};
  double origin_[kMaxDim] = {0.0, 0.0, 0.0};
};

// fn(linear_index, multi_index) over all nodes in storage order.
template <class F>
void for_each_node(const Grid& g, F&& fn) {
  std::size_t mi[kMaxDim] = {0, 0, 0};
  const std::size_t count = g.node_count();
  for (std::size_t lin = 0; lin < count; ++lin) {
    fn(lin, mi);
    for (int a = g.dim() - 1; a >= 0; --a) {
      if (++mi[a] < g.extent(a)) break;
      mi[a] = 0;
    }
  }
}

// fn(cell_linear_index, cell_multi_index) over all cells, last axis fastest.
template <class F>
void for_each_cell(const Grid& g, F&& fn) {
  std::size_t mi[kMaxDim] = {0, 0, 0};
  const std::size_t count = g.cell_count();
  for (std::size_t lin = 0; lin < count; ++lin) {
    fn(lin, mi);
    for (int a = g.dim() - 1; a >= 0; --a) {
      if (++mi[a] < g.extent(a) - 1) break;
      mi[a] = 0;
    }
  }
}

struct ScalarField {
  Grid grid;
  std::vector<double> values;

  static ScalarField zeros(const Grid& g) {
    return ScalarField{g, std::vector<double>(g.node_count(), 0.0)};
  }

  void check_finite(const char* what = "field") const {
    if (values.size() != grid.node_count())
      throw InputError(std::string(what) + ": value count does not match node count");
    for (double x : values)
      if (!std::isfinite(x))
        throw InputError(std::string(what) + ": non-finite value");
  }
};

// One value per cell (piecewise-constant data such as forward differences).
// All cells share the same measure, so cell quadrature weights are uniform.
struct CellField {
  Grid grid;
  std::vector<double> values;

  static CellField zeros(const Grid& g) {
    return CellField{g, std::vector<double>(g.cell_count(), 0.0)};
  }
};

struct VectorField {
  Grid grid;
  std::vector<ScalarField> comp;

  static VectorField zeros(const Grid& g) {
    VectorField v;
    v.grid = g;
    v.comp.assign((std::size_t)g.dim(), ScalarField::zeros(g));
    return v;
  }

  int dim() const { return (int)comp.size(); }

  double max_speed() const {
    double best = 0.0;
    const std::size_t count = grid.node_count();
    for (std::size_t i = 0; i < count; ++i) {
      double s = 0.0;
      for (const auto& c : comp) s += c.values[i] * c.values[i];
      best = std::max(best, s);
    }
    return std::sqrt(best);
  }

  void project_boundary() {
    for_each_node(grid, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
      if (grid.on_boundary(mi))
        for (auto& c : comp) c.values[lin] = 0.0;
    });
  }

  bool boundary_is_zero() const {
    bool ok = true;
    for_each_node(grid, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
      if (grid.on_boundary(mi))
        for (const auto& c : comp)
          if (c.values[lin] != 0.0) ok = false;
    });
    return ok;
  }
};

template <class F>
ScalarField sample(const Grid& g, F&& fn) {
  ScalarField f = ScalarField::zeros(g);
  for_each_node(g, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    f.values[lin] = fn(g.node_point(mi));
  });
  return f;
}

// fn(point, out[dim]) fills the velocity components at a node.
template <class F>
VectorField sample_vector(const Grid& g, F&& fn) {
  VectorField v = VectorField::zeros(g);
  for_each_node(g, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    double out[kMaxDim] = {0.0, 0.0, 0.0};
    fn(g.node_point(mi), out);
    for (int a = 0; a < g.dim(); ++a) v.comp[(std::size_t)a].values[lin] = out[a];
  });
  return v;
}

// ---- quadrature -----------------------------------------------------------

inline double integral(const ScalarField& f) {
  double s = 0.0;
  for_each_node(f.grid, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    s += f.grid.weight(mi) * f.values[lin];
  });
  return s;
}

inline double quadrature_mean(const ScalarField& f) {
  return integral(f) / f.grid.domain_measure();
}

inline double l2_norm_sq(const ScalarField& f) {
  double s = 0.0;
  for_each_node(f.grid, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    s += f.grid.weight(mi) * f.values[lin] * f.values[lin];
  });
  return s;
}

inline double l2_distance(const ScalarField& a, const ScalarField& b) {
  if (!a.grid.same_geometry(b.grid))
    throw InputError("l2_distance: fields live on different grids");
  double s = 0.0;
  for_each_node(a.grid, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    const double d = a.values[lin] - b.values[lin];
    s += a.grid.weight(mi) * d * d;
  });
  return std::sqrt(s);
}

inline double max_value(const ScalarField& f) {
  double m = f.values[0];
  for (double x : f.values) m = std::max(m, x);
  return m;
}
inline double min_value(const ScalarField& f) {
  double m = f.values[0];
  for (double x : f.values) m = std::min(m, x);
  return m;
}
inline double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  if (!a.grid.same_geometry(b.grid))
    throw InputError("max_abs_diff: fields live on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

// ---- interpolation --------------------------------------------------------

inline Point clamp_point(const Grid& g, const Point& p) {
  Point q = p;
  for (int a = 0; a < g.dim(); ++a) {
    const double lo = g.origin(a);
    const double hi = lo + g.length(a);
    if (!(q[a] > lo)) q[a] = lo;
    if (!(q[a] < hi)) q[a] = hi;
  }
  return q;
}

struct CellLocation {
  std::size_t base = 0;                  // linear index of the low corner
  double t[kMaxDim] = {0.0, 0.0, 0.0};   // fractional coordinates in [0, 1]
};

inline CellLocation locate(const Grid& g, const Point& p) {
  CellLocation loc;
  std::size_t mi[kMaxDim] = {0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    if (!std::isfinite(p[a])) throw InputError("invalid point");
    const double lo = g.origin(a);
    const double hi = lo + g.length(a);
    double x = p[a];
    if (!(x > lo)) x = lo;
    if (!(x < hi)) x = hi;
    double s = (x - lo) / g.spacing(a);
    double cf = std::floor(s);
    std::size_t c = (std::size_t)std::max(0.0, cf);
    const std::size_t last_cell = g.extent(a) - 2;
    if (c > last_cell) c = last_cell;
    mi[a] = c;
    double t = s - (double)c;
    loc.t[a] = std::clamp(t, 0.0, 1.0);
  }
  loc.base = g.linear(mi);
  return loc;
}

namespace detail {

inline void gather_corners(const Grid& g, const std::vector<double>& values,
                           std::size_t base, double out[1 << kMaxDim]) {
  const int corners = 1 << g.dim();
  for (int m = 0; m < corners; ++m) {
    std::size_t idx = base;
    for (int a = 0; a < g.dim(); ++a)
      if (m & (1 << a)) idx += g.stride(a);
    out[m] = values[idx];
  }
}

inline double reduce_lerp(int dim, double c[1 << kMaxDim], const double t[kMaxDim]) {
  for (int a = dim - 1; a >= 0; --a) {
    const int half = 1 << a;
    for (int j = 0; j < half; ++j) c[j] = lerp(c[j], c[j + half], t[a]);
  }
  return c[0];
}

}  // namespace detail

inline double interpolate(const ScalarField& f, const Point& p) {
  const CellLocation loc = locate(f.grid, p);
  double c[1 << kMaxDim];
  detail::gather_corners(f.grid, f.values, loc.base, c);
  return detail::reduce_lerp(f.grid.dim(), c, loc.t);
}

// Value plus the in-cell derivative of the interpolant with respect to the
// query point (the one-sided cell derivative on faces).
inline double interpolate_with_gradient(const ScalarField& f, const Point& p,
                                        double grad[kMaxDim]) {
  const Grid& g = f.grid;
  const int d = g.dim();
  const CellLocation loc = locate(g, p);
  double val[1 << kMaxDim];
  double dv[kMaxDim][1 << kMaxDim];
  detail::gather_corners(g, f.values, loc.base, val);
  for (int a = 0; a < d; ++a)
    for (int m = 0; m < (1 << d); ++m) dv[a][m] = 0.0;
  for (int a = d - 1; a >= 0; --a) {
    const int half = 1 << a;
    for (int j = 0; j < half; ++j) {
      for (int b = 0; b < d; ++b)
        if (b != a) dv[b][j] = detail::lerp(dv[b][j], dv[b][j + half], loc.t[a]);
      dv[a][j] = (val[j + half] - val[j]) / g.spacing(a);
      val[j] = detail::lerp(val[j], val[j + half], loc.t[a]);
    }
  }
  for (int a = 0; a < d; ++a) grad[a] = dv[a][0];
  for (int a = d; a < kMaxDim; ++a) grad[a] = 0.0;
  return val[0];
}

// All components share one cell location.
inline void interpolate_vector(const VectorField& v, const Point& p,
                               double out[kMaxDim]) {
  const Grid& g = v.grid;
  const CellLocation loc = locate(g, p);
  double c[1 << kMaxDim];
  for (int j = 0; j < v.dim(); ++j) {
    detail::gather_corners(g, v.comp[(std::size_t)j].values, loc.base, c);
    out[j] = detail::reduce_lerp(g.dim(), c, loc.t);
  }
  for (int j = v.dim(); j < kMaxDim; ++j) out[j] = 0.0;
}

// Corner indices, multilinear weights, and weight derivatives at a point;
// the reverse-mode building block for everything that differentiates an
// interpolated evaluation.
struct InterpStencil {
  int corners = 0;
  std::size_t idx[1 << kMaxDim] = {};
  double w[1 << kMaxDim] = {};               // >= 0, sum 1
  double dw[kMaxDim][1 << kMaxDim] = {};     // d w / d p_axis
};

inline void build_stencil(const Grid& g, const Point& p, InterpStencil& st) {
  const int d = g.dim();
  const CellLocation loc = locate(g, p);
  st.corners = 1 << d;
  for (int m = 0; m < st.corners; ++m) {
    std::size_t idx = loc.base;
    for (int a = 0; a < d; ++a)
      if (m & (1 << a)) idx += g.stride(a);
    st.idx[m] = idx;
    double w = 1.0;
    for (int a = 0; a < d; ++a)
      w *= (m & (1 << a)) ? loc.t[a] : 1.0 - loc.t[a];
    st.w[m] = w;
    for (int a = 0; a < d; ++a) {
      double dw = 1.0;
      for (int b = 0; b < d; ++b) {
        if (b == a) continue;
        dw *= (m & (1 << b)) ? loc.t[b] : 1.0 - loc.t[b];
      }
      dw /= g.spacing(a);
      st.dw[a][m] = (m & (1 << a)) ? dw : -dw;
    }
  }
}

// ---- per-cell forward differences ------------------------------------------

// Component a of a cell's gradient: average over the cell's 2^(d-1) edges
// along axis a of (high - low)/h_a.
inline std::vector<CellField> gradient_fd(const ScalarField& f) {
  const Grid& g = f.grid;
  const int d = g.dim();
  std::vector<CellField> out;
  out.reserve((std::size_t)d);
  for (int a = 0; a < d; ++a) out.push_back(CellField::zeros(g));
  const double pair_scale = 1.0 / (double)(1 << (d - 1));
  double corner[1 << kMaxDim];
  for_each_cell(g, [&](std::size_t cl, const std::size_t mi[kMaxDim]) {
    detail::gather_corners(g, f.values, g.linear(mi), corner);
    for (int a = 0; a < d; ++a) {
      double s = 0.0;
      for (int m = 0; m < (1 << d); ++m)
        s += (m & (1 << a)) ? corner[m] : -corner[m];
      out[(std::size_t)a].values[cl] = s * pair_scale / g.spacing(a);
    }
  });
  return out;
}

// Transpose of the axis-a forward-difference map: scatters per-cell
// coefficients back onto the cell corners. Used by chain rules.
inline void accumulate_gradient_fd_transpose(const CellField& coeff, int axis,
                                             ScalarField& into) {
  const Grid& g = into.grid;
  const int d = g.dim();
  const double pair_scale = 1.0 / ((double)(1 << (d - 1)) * g.spacing(axis));
  for_each_cell(g, [&](std::size_t cl, const std::size_t mi[kMaxDim]) {
    const double c = coeff.values[cl] * pair_scale;
    const std::size_t base = g.linear(mi);
    for (int m = 0; m < (1 << d); ++m) {
      std::size_t idx = base;
      for (int a = 0; a < d; ++a)
        if (m & (1 << a)) idx += g.stride(a);
      into.values[idx] += (m & (1 << axis)) ? c : -c;
    }
  });
}

// ---- nested transfer --------------------------------------------------------

inline bool nesting_ratio(const Grid& coarse, const Grid& fine,
                          std::size_t ratio[kMaxDim]) {
  if (coarse.dim() != fine.dim()) return false;
  for (int a = 0; a < coarse.dim(); ++a) {
    if (coarse.length(a) != fine.length(a) || coarse.origin(a) != fine.origin(a))
      return false;
    const std::size_t cf = fine.extent(a) - 1;
    const std::size_t cc = coarse.extent(a) - 1;
    if (cf % cc != 0) return false;
    ratio[a] = cf / cc;
  }
  return true;
}

inline ScalarField restrict_field(const ScalarField& fine, const Grid& coarse) {
  std::size_t r[kMaxDim] = {1, 1, 1};
  if (!nesting_ratio(coarse, fine.grid, r))
    throw InputError("restrict: grids are not nested");
  ScalarField out = ScalarField::zeros(coarse);
  for_each_node(coarse, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    std::size_t fmi[kMaxDim] = {0, 0, 0};
    for (int a = 0; a < coarse.dim(); ++a) fmi[a] = mi[a] * r[a];
    out.values[lin] = fine.values[fine.grid.linear(fmi)];
  });
  return out;
}

inline ScalarField prolong_field(const ScalarField& coarse, const Grid& fine) {
  std::size_t r[kMaxDim] = {1, 1, 1};
  if (!nesting_ratio(coarse.grid, fine, r))
    throw InputError("prolong: grids are not nested");
  const Grid& cg = coarse.grid;
  const int d = fine.dim();
  ScalarField out = ScalarField::zeros(fine);
  double c[1 << kMaxDim];
  // Rational in-cell coordinates (remainder/ratio) keep shared nodes exact.
  for_each_node(fine, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    std::size_t cmi[kMaxDim] = {0, 0, 0};
    double t[kMaxDim] = {0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      std::size_t q = mi[a] / r[a];
      const std::size_t last_cell = cg.extent(a) - 2;
      if (q > last_cell) q = last_cell;
      cmi[a] = q;
      t[a] = (double)(mi[a] - q * r[a]) / (double)r[a];
    }
    detail::gather_corners(cg, coarse.values, cg.linear(cmi), c);
    out.values[lin] = detail::reduce_lerp(d, c, t);
  });
  return out;
}

inline VectorField restrict_field(const VectorField& fine, const Grid& coarse) {
  VectorField out;
  out.grid = coarse;
  out.comp.reserve(fine.comp.size());
  for (const auto& c : fine.comp) out.comp.push_back(restrict_field(c, coarse));
  return out;
}

inline VectorField prolong_field(const VectorField& coarse, const Grid& fine) {
  VectorField out;
  out.grid = fine;
  out.comp.reserve(coarse.comp.size());
  for (const auto& c : coarse.comp) out.comp.push_back(prolong_field(c, fine));
  return out;
}

}  // namespace entroreg
