#include "onestep/losses.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace onestep;
namespace tu = onestep::testutil;

namespace {

const SdeParams kSde{};

NetworkSpec spec_1x2() {
  NetworkSpec s;
  s.input_dim = 8;
  s.hidden_dim = 6;
  s.n_layers = 2;
  s.time_embed_dim = 4;
  return s;
}

Network random_net(uint64_t seed) {
  Rng rng(seed);
  Network net = Network::init_random(spec_1x2(), rng);
  for (size_t i = net.param_count() - 15; i < net.param_count(); ++i)
    net.theta()[i] = 0.2 * rng.next_gaussian();
  return net;
}

// straightforward reimplementation, used as the brute-force reference
double si_sdr_direct(const std::vector<double>& e,
                     const std::vector<double>& s) {
  double dot = 0, es = 0;
  for (size_t i = 0; i < e.size(); ++i) {
    dot += e[i] * s[i];
    es += s[i] * s[i];
  }
  double a = dot / es;
  double num = 0, den = 0;
  for (size_t i = 0; i < e.size(); ++i) {
    num += a * s[i] * a * s[i];
    double r = a * s[i] - e[i];
    den += r * r;
  }
  return 10.0 * std::log10(num / den);
}

std::vector<double> harmonic(int n, double f0, double fs,
                             const std::vector<double>& amps) {
  std::vector<double> s(n, 0.0);
  for (size_t h = 0; h < amps.size(); ++h)
    for (int i = 0; i < n; ++i)
      s[i] += amps[h] * std::sin(2.0 * M_PI * f0 * (h + 1) * i / fs + 0.4 * h);
  return s;
}

ProxyConfig small_proxy() {
  ProxyConfig cfg;
  cfg.resolutions = {{64, 16}, {32, 8}};
  return cfg;
}

}  // namespace

TEST(ScoreMatching, ZeroResidualForPerfectScore) {
  // Eq-level identity: plugging the analytic kernel score into the score
  // residual makes the loss vanish for the matched noise draw.
  Rng rng(3);
  ComplexMatrix x0 = tu::random_matrix(rng, 1, 2);
  ComplexMatrix y = tu::random_matrix(rng, 1, 2);
  const double t = 0.6;
  const double sigma = kernel_std(t, kSde);
  ComplexMatrix z = sample_complex_gaussian(rng, 1, 2, 1.0);
  ComplexMatrix mu = kernel_mean(x0, y, t, kSde);
  ComplexMatrix xt(1, 2);
  for (size_t i = 0; i < xt.size(); ++i) xt.data[i] = mu.data[i] + sigma * z.data[i];
  ComplexMatrix s = analytic_score(xt, x0, y, t, kSde);
  double loss = 0.0;
  for (size_t i = 0; i < s.size(); ++i)
    loss += std::norm(s.data[i] + z.data[i] / sigma);
  EXPECT_LT(loss, 1e-18);
}

TEST(ScoreMatching, ZeroNetworkMatchesSymbolicExpansion) {
  Network zero(spec_1x2());
  Rng rng(5);
  ComplexMatrix x0 = tu::random_matrix(rng, 1, 2);
  ComplexMatrix y = tu::random_matrix(rng, 1, 2);
  const double t = 0.45;
  ScalingFns fns = ScalingFns::denoiser(kSde);

  Rng op_rng(77);
  LossResult got = score_matching_loss(zero, x0, y, t, op_rng, fns);

  // replicate the internal draw and expand D = c_skip * x_t by hand
  Rng rep(77);
  ComplexMatrix z = sample_complex_gaussian(rep, 1, 2, 1.0);
  const double sigma = kernel_std(t, kSde);
  const double var = sigma * sigma;
  const double cskip = scalings(t, fns).skip;
  ComplexMatrix mu = kernel_mean(x0, y, t, kSde);
  double want = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    cdouble xt = mu.data[i] + sigma * z.data[i];
    cdouble resid = (cskip - 1.0) * xt / var + z.data[i] / sigma;
    want += std::norm(resid);
  }
  EXPECT_LT(tu::rel_err(got.value, want), 1e-12);
  EXPECT_THROW(score_matching_loss(zero, x0, y, 0.0, op_rng, fns),
               std::domain_error);
}

TEST(DenoisingLoss, ZeroAtBoundary) {
  Network net = random_net(7);
  Rng rng(8);
  ComplexMatrix x0 = tu::random_matrix(rng, 1, 2);
  ComplexMatrix y = tu::random_matrix(rng, 1, 2);
  ScalingFns fns = ScalingFns::denoiser(kSde);
  Rng op_rng(9);
  LossResult r = denoising_loss(net, x0, y, 0.0, op_rng, fns);
  EXPECT_EQ(r.value, 0.0);
  for (double g : r.grad) EXPECT_EQ(g, 0.0);
}

TEST(DenoisingLoss, DualityWithScoreMatching) {
  // same rng seed => same z => L_denoise = sigma^4 * L_score
  Network net = random_net(11);
  Rng rng(12);
  ComplexMatrix x0 = tu::random_matrix(rng, 1, 2);
  ComplexMatrix y = tu::random_matrix(rng, 1, 2);
  ScalingFns fns = ScalingFns::denoiser(kSde);
  for (double t : {0.1, 0.5, 0.9}) {
    Rng r1(55), r2(55);
    LossResult ls = score_matching_loss(net, x0, y, t, r1, fns);
    LossResult ld = denoising_loss(net, x0, y, t, r2, fns);
    const double var = kernel_variance(t, kSde);
    EXPECT_LT(tu::rel_err(ld.value, var * var * ls.value), 1e-10) << t;
  }
}

TEST(DenoisingLoss, GradientMatchesFiniteDifferences) {
  Network net = random_net(13);
  Rng rng(14);
  ComplexMatrix x0 = tu::random_matrix(rng, 1, 2);
  ComplexMatrix y = tu::random_matrix(rng, 1, 2);
  ScalingFns fns = ScalingFns::denoiser(kSde);
  const double t = 0.35;

  Rng op_rng(15);
  LossResult r = denoising_loss(net, x0, y, t, op_rng, fns);
  std::vector<double> theta0 = net.theta();
  auto f = [&](const std::vector<double>& th) {
    net.theta() = th;
    Rng fr(15);
    return denoising_loss(net, x0, y, t, fr, fns).value;
  };
  std::vector<double> fd = finite_diff_gradient(f, theta0, 1e-6);
  net.theta() = theta0;
  EXPECT_LT(tu::vec_rel_err(r.grad, fd), 1e-4);
}

TEST(ScoreMatching, GradientMatchesFiniteDifferences) {
  Network net = random_net(17);
  Rng rng(18);
  ComplexMatrix x0 = tu::random_matrix(rng, 1, 2);
  ComplexMatrix y = tu::random_matrix(rng, 1, 2);
  ScalingFns fns = ScalingFns::denoiser(kSde);
  const double t = 0.62;
  Rng op_rng(19);
  LossResult r = score_matching_loss(net, x0, y, t, op_rng, fns);
  std::vector<double> theta0 = net.theta();
  auto f = [&](const std::vector<double>& th) {
    net.theta() = th;
    Rng fr(19);
    return score_matching_loss(net, x0, y, t, fr, fns).value;
  };
  std::vector<double> fd = finite_diff_gradient(f, theta0, 1e-6);
  net.theta() = theta0;
  EXPECT_LT(tu::vec_rel_err(r.grad, fd), 1e-4);
}

TEST(CdDistance, BasicProperties) {
  Rng rng(21);
  ComplexMatrix a = tu::random_matrix(rng, 2, 3);
  ComplexMatrix b = tu::random_matrix(rng, 2, 3);
  EXPECT_EQ(cd_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(cd_distance(a, b), cd_distance(b, a));
  ComplexMatrix one(1, 1), zero(1, 1);
  one.at(0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(cd_distance(one, zero), 1.0);
}

TEST(SiSdr, MatchesDirectFormula) {
  Rng rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> e(64), s(64);
    for (auto& v : e) v = rng.next_gaussian();
    for (auto& v : s) v = rng.next_gaussian();
    EXPECT_LT(tu::rel_err(si_sdr(e, s), si_sdr_direct(e, s)), 1e-9);
  }
}

TEST(SiSdr, CapsOnPerfectAndScaledEstimates) {
  std::vector<double> s = {0.3, -0.8, 0.5, 0.1, -0.2};
  EXPECT_EQ(si_sdr(s, s), kSiSdrCapDb);
  std::vector<double> e3(s);
  for (double& v : e3) v *= 3.0;
  EXPECT_EQ(si_sdr(e3, s), kSiSdrCapDb);
}

TEST(SiSdr, ScaleInvariance) {
  Rng rng(25);
  std::vector<double> e(40), s(40);
  for (auto& v : e) v = rng.next_gaussian();
  for (auto& v : s) v = rng.next_gaussian();
  const double base = si_sdr(e, s);
  for (double beta : {2.0, 0.5, 4.0}) {  // exact under power-of-two scaling
    std::vector<double> eb(e);
    for (double& v : eb) v *= beta;
    EXPECT_EQ(si_sdr(eb, s), base);
  }
  std::vector<double> e3(e);
  for (double& v : e3) v *= 3.0;
  EXPECT_LT(tu::rel_err(si_sdr(e3, s), base), 1e-12);
}

TEST(SiSdr, OrthogonalDecompositionGives20dB) {
  Rng rng(27);
  std::vector<double> s(50), w(50);
  for (auto& v : s) v = rng.next_gaussian();
  for (auto& v : w) v = rng.next_gaussian();
  double ws = 0, ss = 0;
  for (int i = 0; i < 50; ++i) {
    ws += w[i] * s[i];
    ss += s[i] * s[i];
  }
  std::vector<double> e(50);
  double ee = 0;
  for (int i = 0; i < 50; ++i) {
    e[i] = w[i] - ws / ss * s[i];
    ee += e[i] * e[i];
  }
  const double scale = std::sqrt(ss / (100.0 * ee));  // energy ratio 100
  std::vector<double> est(50);
  for (int i = 0; i < 50; ++i) est[i] = s[i] + scale * e[i];
  EXPECT_NEAR(si_sdr(est, s), 20.0, 1e-6);
}

TEST(SiSdr, ArgumentErrors) {
  std::vector<double> a = {1.0, 2.0}, zero = {0.0, 0.0}, shorter = {1.0};
  EXPECT_THROW(si_sdr(a, zero), std::invalid_argument);
  EXPECT_THROW(si_sdr(a, shorter), std::invalid_argument);
}

TEST(SiSdrLoss, GradientMatchesFiniteDifferences) {
  Rng rng(29);
  std::vector<double> e(24), s(24);
  for (auto& v : e) v = rng.next_gaussian();
  for (auto& v : s) v = rng.next_gaussian();
  LossResult r = si_sdr_loss_grad(e, s);
  auto f = [&](const std::vector<double>& est) { return -si_sdr_direct(est, s); };
  std::vector<double> fd = finite_diff_gradient(f, e, 1e-7);
  EXPECT_LT(tu::vec_rel_err(r.grad, fd), 1e-4);
}

TEST(SiSdrLoss, GradientOrthogonalToEstimateAndDescends) {
  Rng rng(31);
  std::vector<double> e(30), s(30);
  for (auto& v : e) v = rng.next_gaussian();
  for (auto& v : s) v = rng.next_gaussian();
  LossResult r = si_sdr_loss_grad(e, s);
  double dot = 0, ge = 0, ee = 0;
  for (size_t i = 0; i < e.size(); ++i) {
    dot += r.grad[i] * e[i];
    ge += r.grad[i] * r.grad[i];
    ee += e[i] * e[i];
  }
  // scale invariance forces <grad, estimate> = 0
  EXPECT_LT(std::abs(dot) / std::sqrt(ge * ee), 1e-12);

  std::vector<double> e2(e);
  for (size_t i = 0; i < e.size(); ++i) e2[i] -= 1e-4 * r.grad[i];
  EXPECT_LT(si_sdr_loss_grad(e2, s).value, r.value);
}

TEST(Proxy, ZeroOnIdenticalSignals) {
  Rng rng(33);
  std::vector<double> s(300);
  for (auto& v : s) v = rng.next_gaussian();
  LossResult r = perceptual_proxy_loss(s, s, small_proxy());
  EXPECT_EQ(r.value, 0.0);
  for (double g : r.grad) EXPECT_EQ(g, 0.0);
}

TEST(Proxy, RequiresTwoResolutionsAndEqualLengths) {
  ProxyConfig bad;
  bad.resolutions = {{64, 16}};
  std::vector<double> a(128, 0.1), b(128, 0.1), c(100, 0.1);
  EXPECT_THROW(perceptual_proxy_loss(a, b, bad), std::invalid_argument);
  EXPECT_THROW(perceptual_proxy_loss(a, c, small_proxy()),
               std::invalid_argument);
}

TEST(Proxy, GradientMatchesFiniteDifferences) {
  Rng rng(35);
  std::vector<double> e(200), s(200);
  for (auto& v : e) v = 0.5 * rng.next_gaussian();
  for (auto& v : s) v = 0.5 * rng.next_gaussian();
  LossResult r = perceptual_proxy_loss(e, s, small_proxy());
  auto f = [&](const std::vector<double>& est) {
    return perceptual_proxy_loss(est, s, small_proxy()).value;
  };
  std::vector<double> fd = finite_diff_gradient(f, e, 1e-6);
  EXPECT_LT(tu::vec_rel_err(r.grad, fd), 1e-3);
}

TEST(Proxy, ToleratesTimeShiftFarBetterThanSiSdr) {
  // 1 kHz harmonic tone; 8-sample circular shift; both degradations are
  // normalized by their value under 10 dB additive white noise
  const int n = 4000;
  const double fs = 16000.0;
  std::vector<double> s = harmonic(n, 1000.0, fs, {1.0, 0.6, 0.4});
  std::vector<double> shifted(n);
  for (int i = 0; i < n; ++i) shifted[i] = s[(i + n - 8) % n];

  Rng rng(37);
  std::vector<double> noisy(n);
  double es = 0, en = 0;
  std::vector<double> noise(n);
  for (int i = 0; i < n; ++i) {
    noise[i] = rng.next_gaussian();
    es += s[i] * s[i];
    en += noise[i] * noise[i];
  }
  const double alpha = std::sqrt(es / en) * std::pow(10.0, -0.5);  // 10 dB
  for (int i = 0; i < n; ++i) noisy[i] = s[i] + alpha * noise[i];

  ProxyConfig cfg;  // default two resolutions (512/128, 128/32)
  const double proxy_shift = perceptual_proxy_loss(shifted, s, cfg).value;
  const double proxy_noise = perceptual_proxy_loss(noisy, s, cfg).value;
  const double sdr_shift = kSiSdrCapDb - si_sdr(shifted, s);
  const double sdr_noise = kSiSdrCapDb - si_sdr(noisy, s);

  const double rel_proxy = proxy_shift / proxy_noise;
  const double rel_sdr = sdr_shift / sdr_noise;
  EXPECT_GT(sdr_shift, sdr_noise);  // the shift hurts SI-SDR more than noise
  EXPECT_LT(rel_proxy / rel_sdr, 0.2);
}

TEST(JointLoss, AffineCombination) {
  LossWeights w;  // paper defaults
  EXPECT_DOUBLE_EQ(joint_loss(1.0, 1.0, 1.0, w), 1.0 + 5e-4 + 5e-5);
  LossWeights zero{0.0, 0.0};
  EXPECT_EQ(joint_loss(0.731, 2.0, -3.0, zero), 0.731);
  EXPECT_EQ(joint_loss(0.0, 0.0, 0.0, w), 0.0);
  LossWeights bad{-1.0, 0.0};
  EXPECT_THROW(joint_loss(1.0, 1.0, 1.0, bad), std::invalid_argument);
}
