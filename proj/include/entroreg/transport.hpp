#pragma once

// Semi-Lagrangian solver for d phi/dt + v . grad phi = 0 with a stationary
// velocity: backward RK4 characteristics from every node, one terminal
// interpolation through the flow map (which makes the discrete maximum
// principle exact), and the exact adjoint of the whole discrete pipeline.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <entroreg/error.hpp>
#include <entroreg/grid.hpp>
#include <entroreg/parallel.hpp>

namespace entroreg {

struct TransportSetup {
  double time = 1.0;
  int substeps = 8;
};

struct FlowMap {
  Grid grid;
  std::vector<Point> foot;  // backward characteristic end point per node
};

// Keeps the per-step characteristic displacement around a quarter cell.
inline int default_substeps(const VectorField& v, double time, int floor_steps = 8) {
  if (!(time > 0.0) || !std::isfinite(time))
    throw InputError("transport: time must be positive and finite");
  const double travel = 4.0 * time * v.max_speed() / v.grid.min_spacing();
  int n = floor_steps;
  if (std::isfinite(travel) && travel > (double)n) n = (int)std::ceil(travel);
  return std::max(n, 1);
}

namespace detail {

inline void check_transport_args(const VectorField& v, const TransportSetup& ts) {
  if (v.dim() != v.grid.dim())
    throw InputError("transport: velocity component count must match dimension");
  if (!(ts.time > 0.0) || !std::isfinite(ts.time))
    throw InputError("transport: time must be positive and finite");
  if (ts.substeps < 1) throw InputError("transport: substeps must be >= 1");
  if (!v.boundary_is_zero())
    throw InputError("transport: velocity must vanish on the boundary");
}

// pass bit a set: axis a stayed inside (clamp is the identity there, so the
// derivative passes through).
inline Point clamp_masked(const Grid& g, const Point& p, unsigned char& pass) {
  Point q = p;
  pass = 0;
  for (int a = 0; a < g.dim(); ++a) {
    const double lo = g.origin(a);
    const double hi = lo + g.length(a);
    if (p[a] < lo) {
      q[a] = lo;
    } else if (p[a] > hi) {
      q[a] = hi;
    } else {
      pass |= (unsigned char)(1 << a);
    }
  }
  return q;
}

struct StageRecord {
  Point p[4];              // clamped stage query points
  unsigned char pass[4];   // clamp masks of the stage points
  unsigned char xpass;     // clamp mask of the end-of-step state
};

// One backward RK4 step (dX/ds = -v); the /6.0 form keeps constant-velocity
// steps exact for dyadic data.
inline void rk4_step(const VectorField& v, double dt, Point& x, StageRecord* rec) {
  const Grid& g = v.grid;
  const int d = g.dim();
  Point p;
  double k[4][kMaxDim];
  unsigned char pass[4];

  p = clamp_masked(g, x, pass[0]);
  if (rec) rec->p[0] = p;
  interpolate_vector(v, p, k[0]);

  Point y = x;
  for (int a = 0; a < d; ++a) y[a] = x[a] - 0.5 * dt * k[0][a];
  p = clamp_masked(g, y, pass[1]);
  if (rec) rec->p[1] = p;
  interpolate_vector(v, p, k[1]);

  for (int a = 0; a < d; ++a) y[a] = x[a] - 0.5 * dt * k[1][a];
  p = clamp_masked(g, y, pass[2]);
  if (rec) rec->p[2] = p;
  interpolate_vector(v, p, k[2]);

  for (int a = 0; a < d; ++a) y[a] = x[a] - dt * k[2][a];
  p = clamp_masked(g, y, pass[3]);
  if (rec) rec->p[3] = p;
  interpolate_vector(v, p, k[3]);

  for (int a = 0; a < d; ++a)
    y[a] = x[a] - dt * ((k[0][a] + 2.0 * k[1][a] + 2.0 * k[2][a] + k[3][a]) / 6.0);
  unsigned char xpass;
  x = clamp_masked(g, y, xpass);
  if (rec) {
    rec->xpass = xpass;
    for (int s = 0; s < 4; ++s) rec->pass[s] = pass[s];
  }
}

}  // namespace detail

inline FlowMap trace_characteristics(const VectorField& v, const TransportSetup& ts) {
  detail::check_transport_args(v, ts);
  const Grid& g = v.grid;
  const double dt = ts.time / (double)ts.substeps;
  FlowMap fm{g, std::vector<Point>(g.node_count())};
  std::atomic<bool> blew_up{false};
  parallel_for(g.node_count(), [&](std::size_t lin) {
    std::size_t mi[kMaxDim];
    g.unravel(lin, mi);
    Point x = g.node_point(mi);
    for (int m = 0; m < ts.substeps; ++m) detail::rk4_step(v, dt, x, nullptr);
    for (int a = 0; a < g.dim(); ++a)
      if (!std::isfinite(x[a])) blew_up.store(true);
    fm.foot[lin] = x;
  });
  if (blew_up.load()) throw InternalError("characteristic blow-up");
  return fm;
}

inline ScalarField solve_forward(const VectorField& v, const ScalarField& phi0,
                                 const TransportSetup& ts) {
  if (!phi0.grid.same_geometry(v.grid))
    throw InputError("transport: field and velocity grids differ");
  const FlowMap fm = trace_characteristics(v, ts);
  ScalarField out = ScalarField::zeros(phi0.grid);
  parallel_for(out.values.size(), [&](std::size_t i) {
    out.values[i] = interpolate(phi0, fm.foot[i]);
  });
  return out;
}

namespace detail {

// Reverse one RK4 step. On entry barX holds d j / d X_{m+1}; on exit it holds
// d j / d X_m, and the contributions of the four v-evaluations have been
// accumulated into grad. Stage numbering matches rk4_step.
inline void reverse_step(const VectorField& v, double dt,
                         const StageRecord& rec, double barX[kMaxDim],
                         VectorField& grad) {
  const Grid& g = v.grid;
  const int d = g.dim();
  const int dim = v.dim();

  double barX1[kMaxDim] = {0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a)
    barX1[a] = (rec.xpass >> a & 1) ? barX[a] : 0.0;

  double bark[kMaxDim];
  double barp[4][kMaxDim];

  auto process_stage = [&](int s, const double bark_s[kMaxDim]) {
    InterpStencil st;
    build_stencil(g, rec.p[s], st);
    for (int j = 0; j < dim; ++j) {
      const double c = -bark_s[j];  // k_j = -v_j(p)
      if (c != 0.0) {
        auto& gv = grad.comp[(std::size_t)j].values;
        for (int m = 0; m < st.corners; ++m) gv[st.idx[m]] += c * st.w[m];
      }
    }
    for (int a = 0; a < d; ++a) {
      double s_a = 0.0;
      if (rec.pass[s] >> a & 1) {
        for (int j = 0; j < dim; ++j) {
          double dv = 0.0;
          const auto& vals = v.comp[(std::size_t)j].values;
          for (int m = 0; m < st.corners; ++m) dv += st.dw[a][m] * vals[st.idx[m]];
          s_a -= bark_s[j] * dv;
        }
      }
      barp[s][a] = s_a;
    }
  };

  for (int a = 0; a < d; ++a) bark[a] = dt / 6.0 * barX1[a];
  process_stage(3, bark);
  for (int a = 0; a < d; ++a) bark[a] = dt / 3.0 * barX1[a] + dt * barp[3][a];
  process_stage(2, bark);
  for (int a = 0; a < d; ++a) bark[a] = dt / 3.0 * barX1[a] + 0.5 * dt * barp[2][a];
  process_stage(1, bark);
  for (int a = 0; a < d; ++a) bark[a] = dt / 6.0 * barX1[a] + 0.5 * dt * barp[1][a];
  process_stage(0, bark);

  for (int a = 0; a < d; ++a)
    barX[a] = barX1[a] + barp[0][a] + barp[1][a] + barp[2][a] + barp[3][a];
}

}  // namespace detail

// Exact gradient of j(v) = 1/2 sum_i w_i (phiT_i - target_i)^2 with respect to
// the nodal values of v: reverse-mode traversal of [trace; interpolate; SSD].
// Sequential accumulation keeps the result bit-reproducible; boundary rows are
// zeroed because boundary velocities are fixed.
inline VectorField terminal_sensitivity_adjoint(const VectorField& v,
                                                const ScalarField& phi0,
                                                const ScalarField& target,
                                                const TransportSetup& ts) {
  detail::check_transport_args(v, ts);
  if (!phi0.grid.same_geometry(v.grid) || !target.grid.same_geometry(v.grid))
    throw InputError("transport: field and velocity grids differ");
  const Grid& g = v.grid;
  const double dt = ts.time / (double)ts.substeps;
  VectorField grad = VectorField::zeros(g);
  std::vector<detail::StageRecord> tape((std::size_t)ts.substeps);

  for_each_node(g, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    Point x = g.node_point(mi);
    for (int m = 0; m < ts.substeps; ++m)
      detail::rk4_step(v, dt, x, &tape[(std::size_t)m]);
    double gphi[kMaxDim];
    const double phiT = interpolate_with_gradient(phi0, x, gphi);
    const double r = g.weight(mi) * (phiT - target.values[lin]);
    if (r == 0.0) return;
    double barX[kMaxDim] = {0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) barX[a] = r * gphi[a];
    for (int m = ts.substeps - 1; m >= 0; --m)
      detail::reverse_step(v, dt, tape[(std::size_t)m], barX, grad);
  });

  grad.project_boundary();
  return grad;
}

// Both sides of the renormalization identity through one shared flow map:
// lhs = beta(solve_forward(v, phi0)), rhs = solve_forward(v, beta(phi0)).
template <class B>
std::pair<ScalarField, ScalarField> renormalization_check(
    const VectorField& v, const ScalarField& phi0, const TransportSetup& ts,
    B&& beta) {
  if (!phi0.grid.same_geometry(v.grid))
    throw InputError("transport: field and velocity grids differ");
  const FlowMap fm = trace_characteristics(v, ts);
  ScalarField beta0 = ScalarField::zeros(phi0.grid);
  for (std::size_t i = 0; i < beta0.values.size(); ++i)
    beta0.values[i] = beta(phi0.values[i]);
  ScalarField lhs = ScalarField::zeros(phi0.grid);
  ScalarField rhs = ScalarField::zeros(phi0.grid);
  parallel_for(lhs.values.size(), [&](std::size_t i) {
    lhs.values[i] = beta(interpolate(phi0, fm.foot[i]));
    rhs.values[i] = interpolate(beta0, fm.foot[i]);
  });
  return {std::move(lhs), std::move(rhs)};
}

}  // namespace entroreg
