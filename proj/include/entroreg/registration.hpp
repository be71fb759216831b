#pragma once

// Reduced objective f(v) = j(v) + beta*Psi_gamma(v) + (alpha/2)*|v|_{H^{1+sigma}}^2
// over boundary-zero velocities, its exact gradient, an L-BFGS/Armijo
// minimizer, and the gamma-continuation across nested mesh levels.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include <entroreg/error.hpp>
#include <entroreg/grid.hpp>
#include <entroreg/smoothmax.hpp>
#include <entroreg/sobolev.hpp>
#include <entroreg/transport.hpp>

namespace entroreg {

struct RegistrationConfig {
  double alpha = 1e-2;
  double beta = 1e-3;
  double sigma = 0.25;
  double time = 1.0;
  double gamma0 = 1.0;
  double rho = 0.5;
  std::vector<std::size_t> levels;  // nodes per axis, coarse -> fine
  int max_iters = 100;
  double grad_tol = 1e-6;
  double armijo_c1 = 1e-4;
  double backtrack_tau = 0.5;
  int nsub_min = 8;

  // Throws InputError naming the offending key. beta = 0 is allowed so the
  // smoothness penalty can be studied in isolation.
  void validate() const {
    auto bad = [](const char* key, const char* what) {
      throw InputError(std::string("config: ") + key + " " + what);
    };
    if (!(alpha > 0.0) || !std::isfinite(alpha)) bad("alpha", "must be > 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) bad("beta", "must be >= 0");
    if (!(sigma > 0.0 && sigma < 0.5)) bad("sigma", "must lie in (0, 1/2)");
    if (!(time > 0.0) || !std::isfinite(time)) bad("time", "must be > 0");
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) bad("gamma0", "must be > 0");
    if (!(rho > 0.0 && rho < 1.0)) bad("rho", "must lie in (0, 1)");
    if (levels.empty()) bad("levels", "must list at least one grid size");
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (levels[k] < 3) bad("levels", "entries must be >= 3");
      if (k > 0) {
        if (levels[k] <= levels[k - 1]) bad("levels", "must be strictly increasing");
        if ((levels[k] - 1) % (levels[k - 1] - 1) != 0)
          bad("levels", "must be nested (each cell count divides the next)");
      }
    }
    if (max_iters < 0) bad("max_iters", "must be >= 0");
    if (!(grad_tol > 0.0)) bad("grad_tol", "must be > 0");
    if (!(armijo_c1 > 0.0 && armijo_c1 < 0.5)) bad("armijo_c1", "must lie in (0, 1/2)");
    if (!(backtrack_tau > 0.0 && backtrack_tau < 1.0)) bad("backtrack_tau", "must lie in (0, 1)");
    if (nsub_min < 1) bad("nsub_min", "must be >= 1");
  }
};

struct RegistrationData {
  ScalarField phi0;
  ScalarField target;
};

struct ObjectiveParts {
  double j = 0.0;       // 1/2 * weighted SSD at the terminal time
  double reg_psi = 0.0; // beta * Psi_gamma(v)
  double reg_hs = 0.0;  // alpha/2 * squared H^{1+sigma} norm
  double total() const { return j + reg_psi + reg_hs; }
};

inline double ssd_half(const ScalarField& a, const ScalarField& b) {
  const double d = l2_distance(a, b);
  return 0.5 * d * d;
}

inline double reduced_objective(const VectorField& v, const RegistrationData& data,
                                double gamma, const RegistrationConfig& cfg,
                                const TransportSetup& ts, ObjectiveParts& parts) {
  const ScalarField phiT = solve_forward(v, data.phi0, ts);
  parts.j = ssd_half(phiT, data.target);
  parts.reg_psi = cfg.beta == 0.0 ? 0.0 : cfg.beta * psi_gamma(v, gamma);
  parts.reg_hs = 0.5 * cfg.alpha * hs_norm_sq(v, cfg.sigma);
  return parts.total();
}

inline double reduced_objective(const VectorField& v, const RegistrationData& data,
                                double gamma, const RegistrationConfig& cfg,
                                const TransportSetup& ts) {
  ObjectiveParts parts;
  return reduced_objective(v, data, gamma, cfg, ts, parts);
}

inline VectorField reduced_gradient(const VectorField& v, const RegistrationData& data,
                                    double gamma, const RegistrationConfig& cfg,
                                    const TransportSetup& ts) {
  VectorField g = terminal_sensitivity_adjoint(v, data.phi0, data.target, ts);
  const VectorField gh = hs_grad(v, cfg.sigma);
  if (cfg.beta != 0.0) {
    const VectorField gp = grad_psi_gamma(v, gamma);
    for (int j = 0; j < g.dim(); ++j)
      for (std::size_t i = 0; i < g.comp[(std::size_t)j].values.size(); ++i)
        g.comp[(std::size_t)j].values[i] += cfg.beta * gp.comp[(std::size_t)j].values[i] +
                                            0.5 * cfg.alpha * gh.comp[(std::size_t)j].values[i];
  } else {
    for (int j = 0; j < g.dim(); ++j)
      for (std::size_t i = 0; i < g.comp[(std::size_t)j].values.size(); ++i)
        g.comp[(std::size_t)j].values[i] += 0.5 * cfg.alpha * gh.comp[(std::size_t)j].values[i];
  }
  g.project_boundary();
  return g;
}

namespace detail {

inline double vf_dot(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (int j = 0; j < a.dim(); ++j) {
    const auto& x = a.comp[(std::size_t)j].values;
    const auto& y = b.comp[(std::size_t)j].values;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  }
  return s;
}

inline double vf_norm(const VectorField& a) { return std::sqrt(vf_dot(a, a)); }

// out = a + t * b
inline VectorField vf_add_scaled(const VectorField& a, double t, const VectorField& b) {
  VectorField out = a;
  for (int j = 0; j < out.dim(); ++j) {
    auto& x = out.comp[(std::size_t)j].values;
    const auto& y = b.comp[(std::size_t)j].values;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += t * y[i];
  }
  return out;
}

inline VectorField vf_scale(const VectorField& a, double t) {
  VectorField out = a;
  for (auto& c : out.comp)
    for (auto& x : c.values) x *= t;
  return out;
}

}  // namespace detail

struct StageResult {
  VectorField v;
  int iterations = 0;
  ObjectiveParts parts;
  double f = 0.0;
  double grad_norm = 0.0;
  std::string status;              // "converged", "max_iters", or "stalled"
  std::vector<double> f_history;   // f at v0 followed by every accepted iterate
};

// L-BFGS (memory 10) with Armijo backtracking. The transport substep count is
// frozen for the whole call so the objective is one fixed function of v and
// the accepted-value history is strictly decreasing by construction.
inline StageResult lbfgs_minimize(const VectorField& v0, const RegistrationData& data,
                                  double gamma, const RegistrationConfig& cfg,
                                  const TransportSetup& ts) {
  constexpr int kMemory = 10;
  constexpr int kMaxBacktracks = 50;

  StageResult out;
  out.v = v0;
  out.v.project_boundary();

  double f = reduced_objective(out.v, data, gamma, cfg, ts, out.parts);
  VectorField g = reduced_gradient(out.v, data, gamma, cfg, ts);
  double gnorm = detail::vf_norm(g);
  const double tol = cfg.grad_tol * std::max(1.0, gnorm);
  out.f_history.push_back(f);

  std::deque<VectorField> svecs, yvecs;
  std::deque<double> rhos;

  auto search_direction = [&]() {
    VectorField q = g;
    const std::size_t m = svecs.size();
    std::vector<double> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = rhos[i] * detail::vf_dot(svecs[i], q);
      q = detail::vf_add_scaled(q, -alpha[i], yvecs[i]);
    }
    if (m > 0) {
      const double yy = detail::vf_dot(yvecs[m - 1], yvecs[m - 1]);
      if (yy > 0.0) q = detail::vf_scale(q, 1.0 / (rhos[m - 1] * yy));
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double b = rhos[i] * detail::vf_dot(yvecs[i], q);
      q = detail::vf_add_scaled(q, alpha[i] - b, svecs[i]);
    }
    return detail::vf_scale(q, -1.0);
  };

  // Backtrack along p; returns accepted step or 0. The extra f_new < f guard
  // rejects null steps: near the numerical floor the Armijo margin underflows
  // and f_new == f would otherwise be accepted forever.
  auto line_search = [&](const VectorField& p, double slope, double& f_new,
                         VectorField& v_new) {
    double t = 1.0;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
      v_new = detail::vf_add_scaled(out.v, t, p);
      f_new = reduced_objective(v_new, data, gamma, cfg, ts);
      if (f_new <= f + cfg.armijo_c1 * t * slope && f_new < f) return t;
      t *= cfg.backtrack_tau;
    }
    return 0.0;
  };

  out.status = "max_iters";
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (gnorm <= tol) {
      out.status = "converged";
      break;
    }

    VectorField p = search_direction();
    double slope = detail::vf_dot(g, p);
    if (!(slope < 0.0)) {
      p = detail::vf_scale(g, -1.0);
      slope = -gnorm * gnorm;
    }

    double f_new = f;
    VectorField v_new = out.v;
    double t = line_search(p, slope, f_new, v_new);
    if (t == 0.0) {
      p = detail::vf_scale(g, -1.0);
      slope = -gnorm * gnorm;
      t = line_search(p, slope, f_new, v_new);
      if (t == 0.0) {
        out.status = "stalled";
        break;
      }
      svecs.clear();
      yvecs.clear();
      rhos.clear();
    }

    const VectorField s = detail::vf_add_scaled(v_new, -1.0, out.v);
    out.v = std::move(v_new);
    f = f_new;
    VectorField g_new = reduced_gradient(out.v, data, gamma, cfg, ts);
    const VectorField y = detail::vf_add_scaled(g_new, -1.0, g);
    g = std::move(g_new);
    gnorm = detail::vf_norm(g);

    const double sy = detail::vf_dot(s, y);
    if (sy > 1e-12 * detail::vf_norm(s) * detail::vf_norm(y)) {
      svecs.push_back(s);
      yvecs.push_back(y);
      rhos.push_back(1.0 / sy);
      if (svecs.size() > (std::size_t)kMemory) {
        svecs.pop_front();
        yvecs.pop_front();
        rhos.pop_front();
      }
    }

    out.f_history.push_back(f);
    ++out.iterations;
  }
  if (out.iterations == cfg.max_iters && gnorm <= tol) out.status = "converged";

  out.f = reduced_objective(out.v, data, gamma, cfg, ts, out.parts);
  out.grad_norm = gnorm;
  return out;
}

struct ContinuationStage {
  int level = 0;                      // index into cfg.levels
  std::vector<std::size_t> extents;   // grid nodes per axis at this level
  double gamma = 0.0;
  int iterations = 0;
  double j = 0.0, reg_psi = 0.0, reg_hs = 0.0, f = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
  std::string status;
  std::vector<double> f_history;
};

using ContinuationTrace = std::vector<ContinuationStage>;

struct ContinuationResult {
  VectorField v;
  ContinuationTrace trace;
  double psi0 = 0.0;    // Psi_0 of the final velocity
  double f_limit = 0.0; // finest-level f with Psi_gamma replaced by Psi_0
};

namespace detail {

// Node counts of level k, scaling every axis of the data grid by the level's
// share of the finest level. Cell counts must divide exactly.
inline std::vector<std::size_t> level_extents(const Grid& data_grid,
                                              const std::vector<std::size_t>& levels,
                                              std::size_t k) {
  const std::size_t num = levels[k] - 1;
  const std::size_t den = levels.back() - 1;
  std::vector<std::size_t> ext((std::size_t)data_grid.dim());
  for (int a = 0; a < data_grid.dim(); ++a) {
    const std::size_t cells = data_grid.extent(a) - 1;
    if ((cells * num) % den != 0)
      throw InputError("levels: grid extents are not divisible across levels");
    ext[(std::size_t)a] = cells * num / den + 1;
  }
  return ext;
}

inline Grid level_grid(const Grid& data_grid, const std::vector<std::size_t>& levels,
                       std::size_t k) {
  std::vector<double> len((std::size_t)data_grid.dim());
  for (int a = 0; a < data_grid.dim(); ++a) len[(std::size_t)a] = data_grid.length(a);
  return Grid::make(level_extents(data_grid, levels, k), len);
}

}  // namespace detail

inline ContinuationResult continuation_solve(const RegistrationData& data,
                                             const RegistrationConfig& cfg) {
  cfg.validate();
  if (!data.phi0.grid.same_geometry(data.target.grid))
    throw InputError("registration: image and target grids differ");

  ContinuationResult out;
  VectorField v;  // empty until the first stage

  for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid gk = detail::level_grid(data.phi0.grid, cfg.levels, k);
    RegistrationData dk{restrict_field(data.phi0, gk), restrict_field(data.target, gk)};
    v = (k == 0) ? VectorField::zeros(gk) : prolong_field(v, gk);

    const double gamma_k = cfg.gamma0 * std::pow(cfg.rho, (double)k);
    TransportSetup ts{cfg.time, default_substeps(v, cfg.time, cfg.nsub_min)};
    StageResult stage = lbfgs_minimize(v, dk, gamma_k, cfg, ts);
    v = std::move(stage.v);

    ContinuationStage rec;
    rec.level = (int)k;
    for (int a = 0; a < gk.dim(); ++a) rec.extents.push_back(gk.extent(a));
    rec.gamma = gamma_k;
    rec.iterations = stage.iterations;
    rec.j = stage.parts.j;
    rec.reg_psi = stage.parts.reg_psi;
    rec.reg_hs = stage.parts.reg_hs;
    rec.f = stage.f;
    rec.grad_norm = stage.grad_norm;
    rec.status = stage.status;
    rec.f_history = std::move(stage.f_history);
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.trace.push_back(std::move(rec));
  }

  out.psi0 = psi_zero(v);
  const ContinuationStage& last = out.trace.back();
  out.f_limit = last.j + cfg.beta * out.psi0 + last.reg_hs;
  out.v = std::move(v);
  return out;
}

}  // namespace entroreg
