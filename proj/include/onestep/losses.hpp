// Training objectives with exact gradients: denoising score matching, the
// denoiser regression loss, the consistency-distillation distance, SI-SDR,
// a multi-resolution log-magnitude spectral distance (the differentiable
// stand-in for the perceptual loss term), and their joint combination.
#pragma once

#include <cmath>
#include <functional>

#include "onestep/numerics.hpp"
#include "onestep/precond.hpp"
#include "onestep/sde.hpp"
#include "onestep/signal.hpp"

namespace onestep {

struct LossWeights {
  double lambda1 = 5e-4;  // perceptual-proxy term
  double lambda2 = 5e-5;  // SI-SDR term

  void validate() const {
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) ||
        !std::isfinite(lambda2))
      throw std::invalid_argument("LossWeights: need finite lambda1, lambda2 >= 0");
  }
};

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;  // with respect to theta unless stated otherwise
};

using TimeWeightFn = std::function<double(double)>;  // lambda(t); default 1

namespace detail {
inline double time_weight(const TimeWeightFn& fn, double t) {
  return fn ? fn(t) : 1.0;
}
}  // namespace detail

// lambda(t) || s_theta(x_t, y, t) + z/sigma ||^2 with x_t = mu + sigma z and
// s_theta derived from the denoiser wrapper. Draws z from rng.
inline LossResult score_matching_loss(const Network& net,
                                      const ComplexMatrix& x0,
                                      const ComplexMatrix& y, double t,
                                      Rng& rng, const ScalingFns& fns,
                                      const TimeWeightFn& lambda_t = {}) {
  const double var = t > 0.0 ? kernel_variance(t, fns.sde) : 0.0;
  if (!(var > 0.0))
    throw std::domain_error("score_matching_loss: sigma(t) = 0 at t <= 0");
  const double sigma = std::sqrt(var);
  const double w = detail::time_weight(lambda_t, t);

  ComplexMatrix z = sample_complex_gaussian(rng, x0.rows, x0.cols, 1.0);
  ComplexMatrix mu = kernel_mean(x0, y, t, fns.sde);
  ComplexMatrix xt(x0.rows, x0.cols);
  for (size_t i = 0; i < xt.size(); ++i)
    xt.data[i] = mu.data[i] + sigma * z.data[i];

  WrapperEval ev = denoiser_forward_cached(net, xt, y, t, fns);
  // residual s_theta + z/sigma = (D - x_t)/sigma^2 + z/sigma
  ComplexMatrix resid(x0.rows, x0.cols);
  double value = 0.0;
  for (size_t i = 0; i < resid.size(); ++i) {
    resid.data[i] = (ev.out.data[i] - xt.data[i]) / var + z.data[i] / sigma;
    value += std::norm(resid.data[i]);
  }
  ComplexMatrix upstream(x0.rows, x0.cols);
  for (size_t i = 0; i < upstream.size(); ++i)
    upstream.data[i] = 2.0 * w * resid.data[i] / var;
  return {w * value, wrapper_backward(net, ev, upstream)};
}

// lambda(t) || D_theta(x_t, y, t) - mu_t(x0, y) ||^2, same z-draw order as
// score_matching_loss so the two are comparable under a shared rng state.
inline LossResult denoising_loss(const Network& net, const ComplexMatrix& x0,
                                 const ComplexMatrix& y, double t, Rng& rng,
                                 const ScalingFns& fns,
                                 const TimeWeightFn& lambda_t = {}) {
  check_time_range(t, fns.sde, "denoising_loss");
  const double sigma = kernel_std(t, fns.sde);
  const double w = detail::time_weight(lambda_t, t);
  ComplexMatrix mu = kernel_mean(x0, y, t, fns.sde);
  ComplexMatrix xt = mu;
  if (sigma > 0.0) {
    ComplexMatrix z = sample_complex_gaussian(rng, x0.rows, x0.cols, 1.0);
    for (size_t i = 0; i < xt.size(); ++i) xt.data[i] += sigma * z.data[i];
  }
  WrapperEval ev = denoiser_forward_cached(net, xt, y, t, fns);
  ComplexMatrix diff(x0.rows, x0.cols);
  double value = 0.0;
  for (size_t i = 0; i < diff.size(); ++i) {
    diff.data[i] = ev.out.data[i] - mu.data[i];
    value += std::norm(diff.data[i]);
  }
  ComplexMatrix upstream(x0.rows, x0.cols);
  for (size_t i = 0; i < upstream.size(); ++i)
    upstream.data[i] = 2.0 * w * diff.data[i];
  return {w * value, wrapper_backward(net, ev, upstream)};
}

// Squared L2 over real+imaginary parts; the d(.,.) of the distillation loss.
inline double cd_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "cd_distance");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::norm(a.data[i] - b.data[i]);
  return s;
}

// ---------------------------------------------------------------------------
// SI-SDR

constexpr double kSiSdrCapDb = 100.0;

inline double si_sdr(const std::vector<double>& estimate,
                     const std::vector<double>& reference) {
  if (estimate.size() != reference.size() || estimate.size() < 2)
    throw std::invalid_argument("si_sdr: need equal lengths >= 2");
  double dot = 0.0, ref_energy = 0.0;
  for (size_t i = 0; i < estimate.size(); ++i) {
    dot += estimate[i] * reference[i];
    ref_energy += reference[i] * reference[i];
  }
  if (ref_energy == 0.0)
    throw std::invalid_argument("si_sdr: reference is all-zero");
  const double alpha = dot / ref_energy;
  double target_energy = alpha * alpha * ref_energy;
  double resid_energy = 0.0;
  for (size_t i = 0; i < estimate.size(); ++i) {
    const double r = alpha * reference[i] - estimate[i];
    resid_energy += r * r;
  }
  if (resid_energy == 0.0) return kSiSdrCapDb;
  double v = 10.0 * std::log10(target_energy / resid_energy);
  if (!std::isfinite(v)) return v > 0 ? kSiSdrCapDb : -kSiSdrCapDb;
  return std::clamp(v, -kSiSdrCapDb, kSiSdrCapDb);
}

// Negative SI-SDR and its exact gradient with respect to the estimate.
inline LossResult si_sdr_loss_grad(const std::vector<double>& estimate,
                                   const std::vector<double>& reference) {
  LossResult r;
  r.value = -si_sdr(estimate, reference);
  r.grad.assign(estimate.size(), 0.0);
  double dot = 0.0, ref_energy = 0.0;
  for (size_t i = 0; i < estimate.size(); ++i) {
    dot += estimate[i] * reference[i];
    ref_energy += reference[i] * reference[i];
  }
  const double alpha = dot / ref_energy;
  double resid_energy = 0.0;
  std::vector<double> resid(estimate.size());
  for (size_t i = 0; i < estimate.size(); ++i) {
    resid[i] = alpha * reference[i] - estimate[i];
    resid_energy += resid[i] * resid[i];
  }
  if (dot == 0.0 || resid_energy == 0.0) return r;  // degenerate: flat
  const double k = 10.0 / std::log(10.0);
  for (size_t i = 0; i < estimate.size(); ++i)
    r.grad[i] = -k * (2.0 * reference[i] / dot + 2.0 * resid[i] / resid_energy);
  return r;
}

// ---------------------------------------------------------------------------
// Perceptual proxy: multi-resolution log-magnitude spectral L1 distance.
// Stands in for the perceptual term of the joint objective; tolerant to small
// time shifts where SI-SDR is not.

struct ProxyConfig {
  // (window, hop) per resolution; hann window, forward transform only
  std::vector<std::pair<int, int>> resolutions = {{512, 128}, {128, 32}};
  double eps = 1e-5;

  void validate() const {
    if (resolutions.size() < 2)
      throw std::invalid_argument("ProxyConfig: need >= 2 resolutions");
  }
};

inline LossResult perceptual_proxy_loss(const std::vector<double>& estimate,
                                        const std::vector<double>& reference,
                                        const ProxyConfig& cfg) {
  cfg.validate();
  if (estimate.size() != reference.size())
    throw std::invalid_argument("perceptual_proxy_loss: length mismatch");
  LossResult out;
  out.grad.assign(estimate.size(), 0.0);
  const int n = static_cast<int>(estimate.size());
  Waveform we{estimate, 16000.0}, wr{reference, 16000.0};
  for (auto [win, hop] : cfg.resolutions) {
    StftConfig sc;
    sc.window_size = win;
    sc.hop = hop;
    sc.window = WindowKind::hann;
    Stft plan(sc);
    ComplexMatrix se = plan.forward(we);
    ComplexMatrix sr = plan.forward(wr);
    const double norm = 1.0 / (static_cast<double>(se.size()) *
                               static_cast<double>(cfg.resolutions.size()));
    ComplexMatrix gspec(se.rows, se.cols);
    for (size_t i = 0; i < se.size(); ++i) {
      const double me = std::abs(se.data[i]);
      const double mr = std::abs(sr.data[i]);
      const double d = std::log(me + cfg.eps) - std::log(mr + cfg.eps);
      out.value += std::abs(d) * norm;
      const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      const double dmag = sgn * norm / (me + cfg.eps);
      gspec.data[i] = me > 0.0
                          ? cdouble(dmag * se.data[i].real() / me,
                                    dmag * se.data[i].imag() / me)
                          : cdouble(0.0, 0.0);
    }
    std::vector<double> g = plan.forward_adjoint(gspec, n);
    for (int i = 0; i < n; ++i) out.grad[i] += g[i];
  }
  return out;
}

// L = L_RCD + lambda1 * L_proxy + lambda2 * L_SI-SDR; gradients combine with
// the same coefficients.
inline double joint_loss(double rcd_term, double proxy_term, double sisdr_term,
                         const LossWeights& w) {
  w.validate();
  return rcd_term + w.lambda1 * proxy_term + w.lambda2 * sisdr_term;
}

}  // namespace onestep
