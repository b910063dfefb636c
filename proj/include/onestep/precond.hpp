// Skip-connection parameterizations around F_theta: the denoiser wrapper
//   D(x, y, t) = c_skip(t) x + c_out(t) F(c_in(t) x, c_in(t) y, t)
// and the consistency wrapper
//   f(x, y, t) = d_skip(t) x + d_out(t) F(x, y, t)        (no input scaling)
// with exact boundary conditions skip = 1, out = 0 at the boundary time.
//
// Both use the same functional family
//   skip = sd^2 / (s^2 + sd^2),  out = sd * s / sqrt(s^2 + sd^2)
// where s = sigma(t) for the denoiser and s = max(sigma(t) - sigma_shift, 0)
// for the consistency model. sigma_shift = sigma(t_boundary) is the single
// constant that moves the exact boundary onto the time grid (t_boundary =
// delta); the clamp keeps skip = 1, out = 0 bit-exact on all of
// [0, t_boundary].
#pragma once

#include <cmath>

#include "onestep/network.hpp"
#include "onestep/numerics.hpp"
#include "onestep/sde.hpp"

namespace onestep {

enum class ScalingMode { denoiser, consistency };

struct ScalingFns {
  SdeParams sde;
  double sigma_data = 0.5;
  ScalingMode mode = ScalingMode::denoiser;
  double t_boundary = 0.0;
  double sigma_shift = 0.0;  // kernel_std(t_boundary)

  static ScalingFns denoiser(const SdeParams& sde, double sigma_data = 0.5) {
    sde.validate();
    return {sde, sigma_data, ScalingMode::denoiser, 0.0, 0.0};
  }

  // t_boundary < 0 selects the grid boundary delta (= sde.t_min).
  static ScalingFns consistency(const SdeParams& sde, double sigma_data = 0.5,
                                double t_boundary = -1.0) {
    sde.validate();
    if (t_boundary < 0.0) t_boundary = sde.t_min;
    return {sde, sigma_data, ScalingMode::consistency, t_boundary,
            kernel_std(t_boundary, sde)};
  }
};

struct Scalings {
  double skip = 1.0;
  double out = 0.0;
  double inp = 1.0;
};

inline Scalings scalings(double t, const ScalingFns& fns) {
  check_time_range(t, fns.sde, "scalings");
  const double sd2 = fns.sigma_data * fns.sigma_data;
  double s = kernel_std(t, fns.sde);
  Scalings r;
  if (fns.mode == ScalingMode::consistency) {
    s = std::max(s - fns.sigma_shift, 0.0);
    r.inp = 1.0;
  } else {
    r.inp = 1.0 / std::sqrt(s * s + sd2);
  }
  if (s == 0.0) {  // boundary: exact by construction
    r.skip = 1.0;
    r.out = 0.0;
    return r;
  }
  r.skip = sd2 / (s * s + sd2);
  r.out = s * fns.sigma_data / std::sqrt(s * s + sd2);
  return r;
}

// Forward value plus what the backward pass needs.
struct WrapperEval {
  ComplexMatrix out;
  Network::Cache cache;
  Scalings s;
};

namespace detail {

inline ComplexMatrix scaled(const ComplexMatrix& m, double a) {
  ComplexMatrix out(m.rows, m.cols);
  for (size_t i = 0; i < m.size(); ++i) out.data[i] = a * m.data[i];
  return out;
}

inline WrapperEval wrapper_forward(const Network& net, const ComplexMatrix& x,
                                   const ComplexMatrix& y, double t,
                                   const ScalingFns& fns) {
  require_same_shape(x, y, "wrapper_forward");
  WrapperEval ev;
  ev.s = scalings(t, fns);
  if (ev.s.out == 0.0 && ev.s.skip == 1.0) {
    ev.out = x;  // boundary: identity regardless of the network
    return ev;
  }
  ComplexMatrix f =
      ev.s.inp == 1.0
          ? net.forward(x, y, t, ev.cache)
          : net.forward(scaled(x, ev.s.inp), scaled(y, ev.s.inp), t, ev.cache);
  ev.out = ComplexMatrix(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i)
    ev.out.data[i] = ev.s.skip * x.data[i] + ev.s.out * f.data[i];
  return ev;
}

}  // namespace detail

// Eq-style denoiser evaluation; at the boundary returns x bit-exactly.
inline ComplexMatrix denoiser_forward(const Network& net,
                                      const ComplexMatrix& x,
                                      const ComplexMatrix& y, double t,
                                      const ScalingFns& fns) {
  return detail::wrapper_forward(net, x, y, t, fns).out;
}

inline WrapperEval denoiser_forward_cached(const Network& net,
                                           const ComplexMatrix& x,
                                           const ComplexMatrix& y, double t,
                                           const ScalingFns& fns) {
  return detail::wrapper_forward(net, x, y, t, fns);
}

inline ComplexMatrix consistency_forward(const Network& net,
                                         const ComplexMatrix& x,
                                         const ComplexMatrix& y, double t,
                                         const ScalingFns& fns) {
  return detail::wrapper_forward(net, x, y, t, fns).out;
}

inline WrapperEval consistency_forward_cached(const Network& net,
                                              const ComplexMatrix& x,
                                              const ComplexMatrix& y, double t,
                                              const ScalingFns& fns) {
  return detail::wrapper_forward(net, x, y, t, fns);
}

// dLoss/dtheta given dLoss/dWrapperOutput; inputs are constants, so the
// network sees upstream scaled by the out-coefficient.
inline std::vector<double> wrapper_backward(const Network& net,
                                            const WrapperEval& ev,
                                            const ComplexMatrix& upstream) {
  if (!ev.cache.valid)  // boundary evaluation never touched the network
    return std::vector<double>(net.param_count(), 0.0);
  return net.backward(ev.cache, detail::scaled(upstream, ev.s.out));
}

inline void wrapper_accumulate_backward(const Network& net,
                                        const WrapperEval& ev,
                                        const ComplexMatrix& upstream,
                                        std::vector<double>& grad) {
  if (!ev.cache.valid) return;
  net.accumulate_backward(ev.cache, detail::scaled(upstream, ev.s.out), grad);
}

// Score implied by the denoiser through D = x + sigma^2 s  =>
// s = (D - x)/sigma^2. The learned counterpart of sde::analytic_score.
inline ComplexMatrix score_from_denoiser(const Network& net,
                                         const ComplexMatrix& x,
                                         const ComplexMatrix& y, double t,
                                         const ScalingFns& fns) {
  const double var = t > 0.0 ? kernel_variance(t, fns.sde) : 0.0;
  if (!(var > 0.0))
    throw std::domain_error("score_from_denoiser: sigma(t) = 0");
  ComplexMatrix d = denoiser_forward(net, x, y, t, fns);
  ComplexMatrix out(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i)
    out.data[i] = (d.data[i] - x.data[i]) / var;
  return out;
}

}  // namespace onestep
