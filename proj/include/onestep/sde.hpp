// Conditional forward SDE dx = gamma*(y - x) dt + g(t) dw with
// g(t) = sqrt(c) * k^t, its closed-form Gaussian perturbation kernel, the
// analytic kernel score (test oracle for solvers), and an Euler-Maruyama
// simulator used for Monte-Carlo verification.
//
// Complex-gradient convention: scores are Wirtinger derivatives with respect
// to conj(x) of log N_C(x; mu, sigma^2 I), which gives -(x - mu)/sigma^2.
#pragma once

#include <cmath>
#include <stdexcept>

#include "onestep/numerics.hpp"

namespace onestep {

struct SdeParams {
  double gamma = 1.5;  // stiffness of the mean interpolation toward y
  double c = 0.51;     // diffusion magnitude, g(t) = sqrt(c) * k^t
  double k = 10.0;     // diffusion growth base, k > 1
  double t_min = 0.03; // delta, lower time bound used by solvers/training
  double t_max = 1.0;  // T

  void validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("SdeParams: gamma > 0");
    if (!(c > 0.0)) throw std::invalid_argument("SdeParams: c > 0");
    if (!(k > 1.0)) throw std::invalid_argument("SdeParams: k > 1");
    if (!(t_min > 0.0 && t_min < t_max && t_max <= 1.0))
      throw std::invalid_argument("SdeParams: need 0 < t_min < t_max <= 1");
  }
};

inline void check_time_range(double t, const SdeParams& p, const char* where) {
  if (!(t >= 0.0 && t <= p.t_max))
    throw std::invalid_argument(std::string(where) + ": t outside [0, t_max]");
}

// f(x, y) = gamma * (y - x), elementwise.
inline ComplexMatrix drift(const ComplexMatrix& x, const ComplexMatrix& y,
                           const SdeParams& p) {
  require_same_shape(x, y, "drift");
  ComplexMatrix out(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i)
    out.data[i] = p.gamma * (y.data[i] - x.data[i]);
  return out;
}

// g(t) = sqrt(c) * k^t; strictly increasing for k > 1.
inline double diffusion_coeff(double t, const SdeParams& p) {
  check_time_range(t, p, "diffusion_coeff");
  return std::sqrt(p.c) * std::pow(p.k, t);
}

// mu(x0, y, t) = e^{-gamma t} x0 + (1 - e^{-gamma t}) y.
inline ComplexMatrix kernel_mean(const ComplexMatrix& x0,
                                 const ComplexMatrix& y, double t,
                                 const SdeParams& p) {
  require_same_shape(x0, y, "kernel_mean");
  check_time_range(t, p, "kernel_mean");
  if (t == 0.0) return x0;
  const double w = std::exp(-p.gamma * t);
  ComplexMatrix out(x0.rows, x0.cols);
  for (size_t i = 0; i < x0.size(); ++i)
    out.data[i] = w * x0.data[i] + (1.0 - w) * y.data[i];
  return out;
}

// sigma(t)^2 = c (k^{2t} - e^{-2 gamma t}) / (2 (gamma + log k)).
inline double kernel_variance(double t, const SdeParams& p) {
  check_time_range(t, p, "kernel_variance");
  const double num = p.c * (std::pow(p.k, 2.0 * t) - std::exp(-2.0 * p.gamma * t));
  const double var = num / (2.0 * (p.gamma + std::log(p.k)));
  return var > 0.0 ? var : 0.0;  // clamp rounding residue at t ~ 0
}

inline double kernel_std(double t, const SdeParams& p) {
  return std::sqrt(kernel_variance(t, p));
}

// Draw x_t ~ N_C(mu(x0, y, t), sigma(t)^2 I). Exactly x0 at t = 0.
inline ComplexMatrix sample_perturbed(const ComplexMatrix& x0,
                                      const ComplexMatrix& y, double t,
                                      const SdeParams& p, Rng& rng) {
  ComplexMatrix mean = kernel_mean(x0, y, t, p);
  const double sd = kernel_std(t, p);
  if (sd == 0.0) return mean;
  ComplexMatrix z = sample_complex_gaussian(rng, x0.rows, x0.cols, 1.0);
  for (size_t i = 0; i < mean.size(); ++i) mean.data[i] += sd * z.data[i];
  return mean;
}

// Exact score of the perturbation kernel: -(x - mu)/sigma^2. Stands in for
// the learned score when testing solvers against closed forms.
inline ComplexMatrix analytic_score(const ComplexMatrix& x,
                                    const ComplexMatrix& x0,
                                    const ComplexMatrix& y, double t,
                                    const SdeParams& p) {
  require_same_shape(x, x0, "analytic_score");
  const double var = t > 0.0 ? kernel_variance(t, p) : 0.0;
  if (!(var > 0.0))
    throw std::domain_error("analytic_score: sigma(t) = 0, score singular");
  ComplexMatrix mean = kernel_mean(x0, y, t, p);
  ComplexMatrix out(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i)
    out.data[i] = -(x.data[i] - mean.data[i]) / var;
  return out;
}

// Simulate the forward SDE from t = 0 to t_end (default t_max) with n_steps
// Euler-Maruyama steps: x <- x + f dt + g(t) sqrt(dt) z. Verification oracle
// for the closed-form kernel moments.
inline ComplexMatrix euler_maruyama_forward(const ComplexMatrix& x0,
                                            const ComplexMatrix& y,
                                            const SdeParams& p, int n_steps,
                                            Rng& rng, double t_end = -1.0) {
  require_same_shape(x0, y, "euler_maruyama_forward");
  if (n_steps < 1)
    throw std::invalid_argument("euler_maruyama_forward: n_steps >= 1");
  if (t_end < 0.0) t_end = p.t_max;
  check_time_range(t_end, p, "euler_maruyama_forward");
  const double dt = t_end / n_steps;
  const double sqrt_dt = std::sqrt(dt);
  ComplexMatrix x = x0;
  for (int s = 0; s < n_steps; ++s) {
    const double t = s * dt;
    const double g = diffusion_coeff(t, p);
    ComplexMatrix z = sample_complex_gaussian(rng, x.rows, x.cols, 1.0);
    for (size_t i = 0; i < x.size(); ++i) {
      x.data[i] += p.gamma * (y.data[i] - x.data[i]) * dt +
                   g * sqrt_dt * z.data[i];
    }
  }
  return x;
}

}  // namespace onestep
