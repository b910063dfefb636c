// Probability-flow ODE machinery: the deterministic right-hand side sharing
// the reverse SDE's marginals, one-step Euler/Heun updates, the noise-injected
// robust update used during distillation, the multi-step teacher sampler and
// one-step enhancement through the consistency wrapper.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "onestep/numerics.hpp"
#include "onestep/precond.hpp"
#include "onestep/sde.hpp"

namespace onestep {

enum class SolverKind { euler, heun };

inline const char* to_string(SolverKind k) {
  return k == SolverKind::euler ? "euler" : "heun";
}
inline SolverKind solver_kind_from_string(const std::string& s) {
  if (s == "euler") return SolverKind::euler;
  if (s == "heun") return SolverKind::heun;
  throw std::invalid_argument("unknown solver kind: " + s);
}

// RHS evaluations per step: euler 1, heun 2.
inline int rhs_evals_per_step(SolverKind k) {
  return k == SolverKind::euler ? 1 : 2;
}

using ScoreFn = std::function<ComplexMatrix(
    const ComplexMatrix& x, const ComplexMatrix& y, double t)>;

// N strictly increasing nodes with t_1 = delta and t_N = T exactly.
struct TimeGrid {
  std::vector<double> nodes;

  int size() const { return static_cast<int>(nodes.size()); }

  static TimeGrid uniform(int n, const SdeParams& p) {
    if (n < 2) throw std::invalid_argument("TimeGrid: need N >= 2");
    TimeGrid g;
    g.nodes.resize(n);
    for (int i = 0; i < n; ++i)
      g.nodes[i] = p.t_min + (p.t_max - p.t_min) * i / (n - 1);
    g.nodes.front() = p.t_min;
    g.nodes.back() = p.t_max;
    return g;
  }

  // Spacing-strategy hook: accepts any strictly increasing nodes with the
  // exact endpoints.
  static TimeGrid from_nodes(std::vector<double> nodes, const SdeParams& p) {
    if (nodes.size() < 2) throw std::invalid_argument("TimeGrid: need N >= 2");
    if (nodes.front() != p.t_min || nodes.back() != p.t_max)
      throw std::invalid_argument("TimeGrid: endpoints must be delta and T");
    for (size_t i = 1; i < nodes.size(); ++i)
      if (!(nodes[i] > nodes[i - 1]))
        throw std::invalid_argument("TimeGrid: nodes must strictly increase");
    return TimeGrid{std::move(nodes)};
  }
};

// f(x, y) - 1/2 g(t)^2 score(x, y, t)
inline ComplexMatrix pf_ode_rhs(const ComplexMatrix& x, const ComplexMatrix& y,
                                double t, const ScoreFn& score_fn,
                                const SdeParams& p) {
  if (!(t >= p.t_min && t <= p.t_max))
    throw std::invalid_argument("pf_ode_rhs: t outside [delta, T]");
  const double g2 = diffusion_coeff(t, p) * diffusion_coeff(t, p);
  ComplexMatrix score = score_fn(x, y, t);
  require_same_shape(score, x, "pf_ode_rhs score");
  ComplexMatrix out(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i)
    out.data[i] =
        p.gamma * (y.data[i] - x.data[i]) - 0.5 * g2 * score.data[i];
  return out;
}

// x_{t_to} = x + (t_to - t_from) * Phi(x, t_from); Heun re-evaluates the RHS
// at the predicted point and t_to (trapezoid).
inline ComplexMatrix ode_step(const ComplexMatrix& x, const ComplexMatrix& y,
                              double t_from, double t_to,
                              const ScoreFn& score_fn, SolverKind kind,
                              const SdeParams& p) {
  if (!(t_to < t_from))
    throw std::invalid_argument("ode_step: need t_to < t_from");
  if (!(t_to >= p.t_min && t_from <= p.t_max))
    throw std::invalid_argument("ode_step: times outside [delta, T]");
  const double dt = t_to - t_from;
  ComplexMatrix k1 = pf_ode_rhs(x, y, t_from, score_fn, p);
  ComplexMatrix out(x.rows, x.cols);
  if (kind == SolverKind::euler) {
    for (size_t i = 0; i < x.size(); ++i)
      out.data[i] = x.data[i] + dt * k1.data[i];
    return out;
  }
  ComplexMatrix pred(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i)
    pred.data[i] = x.data[i] + dt * k1.data[i];
  ComplexMatrix k2 = pf_ode_rhs(pred, y, t_to, score_fn, p);
  for (size_t i = 0; i < x.size(); ++i)
    out.data[i] = x.data[i] + 0.5 * dt * (k1.data[i] + k2.data[i]);
  return out;
}

// ode_step plus g(t_from) sqrt(t_from - t_to) eps with fresh circularly
// symmetric eps; the randomized-trajectory update used by distillation.
inline ComplexMatrix robust_ode_step(const ComplexMatrix& x,
                                     const ComplexMatrix& y, double t_from,
                                     double t_to, const ScoreFn& score_fn,
                                     SolverKind kind, const SdeParams& p,
                                     Rng& rng) {
  ComplexMatrix out = ode_step(x, y, t_from, t_to, score_fn, kind, p);
  const double amp =
      diffusion_coeff(t_from, p) * std::sqrt(t_from - t_to);
  ComplexMatrix eps = sample_complex_gaussian(rng, x.rows, x.cols, 1.0);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] += amp * eps.data[i];
  return out;
}

// Draw x_T ~ N_C(y, sigma(T)^2 I).
inline ComplexMatrix sample_prior(const ComplexMatrix& y, const SdeParams& p,
                                  Rng& rng) {
  const double sd = kernel_std(p.t_max, p);
  ComplexMatrix z = sample_complex_gaussian(rng, y.rows, y.cols, 1.0);
  ComplexMatrix x(y.rows, y.cols);
  for (size_t i = 0; i < x.size(); ++i) x.data[i] = y.data[i] + sd * z.data[i];
  return x;
}

// Multi-step reverse integration from t_N = T down to t_1 = delta.
inline ComplexMatrix teacher_sample(const ComplexMatrix& y,
                                    const TimeGrid& grid,
                                    const ScoreFn& score_fn, SolverKind kind,
                                    const SdeParams& p, Rng& rng) {
  ComplexMatrix x = sample_prior(y, p, rng);
  for (int n = grid.size() - 1; n >= 1; --n)
    x = ode_step(x, y, grid.nodes[n], grid.nodes[n - 1], score_fn, kind, p);
  return x;
}

// Single reverse step through the consistency model: f(x_T, y, T).
inline ComplexMatrix one_step_enhance(const Network& net,
                                      const ScalingFns& fns,
                                      const ComplexMatrix& y, Rng& rng) {
  const SdeParams& p = fns.sde;
  ComplexMatrix xt = sample_prior(y, p, rng);
  return consistency_forward(net, xt, y, p.t_max, fns);
}

}  // namespace onestep
