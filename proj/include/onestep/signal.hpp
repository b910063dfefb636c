// Waveform <-> complex-spectrogram frontend (STFT/iSTFT with exact adjoints
// for gradient propagation), synthetic mixture generation, WAV PCM16 I/O and
// the line-delimited dataset manifest.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "onestep/numerics.hpp"

namespace onestep {

struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;
};

enum class WindowKind { hann, rect };

inline const char* to_string(WindowKind w) {
  return w == WindowKind::hann ? "hann" : "rect";
}
inline WindowKind window_kind_from_string(const std::string& s) {
  if (s == "hann") return WindowKind::hann;
  if (s == "rect") return WindowKind::rect;
  throw std::invalid_argument("unknown window kind: " + s);
}

// Centered, windowed DFT frames. The same window is applied at analysis and
// synthesis and the overlap-add divides by sum(w^2), so reconstruction is
// exact whenever that sum stays positive; construction additionally enforces
// the stricter constant-overlap-add property on w^2.
//
// spectral_scale is the pluggable pre/post transform hook: spectrograms are
// multiplied by it on the way in and divided on the way out (identity = 1).
struct StftConfig {
  int window_size = 510;
  int hop = 170;  // window_size / 3; keeps sum(w^2) exactly constant
  WindowKind window = WindowKind::hann;
  double sample_rate = 16000.0;
  double spectral_scale = 1.0;
};

class Stft {
 public:
  explicit Stft(const StftConfig& cfg) : cfg_(cfg) {
    const int W = cfg.window_size;
    if (W < 2 || W % 2 != 0)
      throw std::invalid_argument("StftConfig: window_size must be even, >= 2");
    if (cfg.hop < 1 || cfg.hop > W)
      throw std::invalid_argument("StftConfig: need 1 <= hop <= window_size");
    if (!(cfg.spectral_scale > 0.0))
      throw std::invalid_argument("StftConfig: spectral_scale must be > 0");
    window_.resize(W);
    for (int n = 0; n < W; ++n) {
      window_[n] = cfg.window == WindowKind::hann
                       ? 0.5 * (1.0 - std::cos(2.0 * M_PI * n / W))
                       : 1.0;
    }
    check_cola();
    build_tables();
  }

  const StftConfig& config() const { return cfg_; }
  int bins() const { return cfg_.window_size / 2 + 1; }
  int frames_for(int n_samples) const {
    if (n_samples < cfg_.window_size)
      throw std::invalid_argument("Stft: input shorter than window");
    return 1 + (n_samples + cfg_.hop - 1) / cfg_.hop;
  }
  double cola_constant() const { return cola_constant_; }

  // bins x frames complex spectrogram.
  ComplexMatrix forward(const Waveform& w) const {
    const int n = static_cast<int>(w.samples.size());
    const int L = frames_for(n);
    Eigen::MatrixXd frames = gather_frames(w.samples, L);
    Eigen::MatrixXd re = frames * cos_;   // L x F
    Eigen::MatrixXd im = -(frames * sin_);
    ComplexMatrix out(bins(), L);
    for (int b = 0; b < bins(); ++b)
      for (int m = 0; m < L; ++m)
        out.at(b, m) = cfg_.spectral_scale * cdouble(re(m, b), im(m, b));
    return out;
  }

  // Gradient of a scalar loss wrt the input samples, given the gradient wrt
  // the forward() output (real and imaginary parts taken as independent).
  std::vector<double> forward_adjoint(const ComplexMatrix& grad_spec,
                                      int n_samples) const {
    const int L = frames_for(n_samples);
    if (grad_spec.rows != bins() || grad_spec.cols != L)
      throw std::invalid_argument("forward_adjoint: gradient shape mismatch");
    const int F = bins();
    Eigen::MatrixXd gr(L, F), gi(L, F);
    for (int b = 0; b < F; ++b)
      for (int m = 0; m < L; ++m) {
        gr(m, b) = cfg_.spectral_scale * grad_spec.at(b, m).real();
        gi(m, b) = cfg_.spectral_scale * grad_spec.at(b, m).imag();
      }
    Eigen::MatrixXd gframes = gr * cos_.transpose() - gi * sin_.transpose();
    return scatter_frames(gframes, n_samples);
  }

  // Overlap-add inverse with pointwise sum(w^2) normalization.
  Waveform inverse(const ComplexMatrix& spec, int out_len) const {
    const int L = spec.cols;
    if (spec.rows != bins())
      throw std::invalid_argument("istft: spectrogram bin count mismatch");
    if (out_len < 1 || out_len > padded_len(L) - pad())
      throw std::invalid_argument("istft: out_len outside reconstructible range");
    const int F = bins();
    Eigen::MatrixXd xr(L, F), xi(L, F);
    for (int b = 0; b < F; ++b)
      for (int m = 0; m < L; ++m) {
        xr(m, b) = spec.at(b, m).real() / cfg_.spectral_scale;
        xi(m, b) = spec.at(b, m).imag() / cfg_.spectral_scale;
      }
    Eigen::MatrixXd frames = xr * icos_ + xi * isin_;  // L x W
    // windowed overlap-add and per-sample normalization
    std::vector<double> acc(padded_len(L), 0.0);
    std::vector<double> den = denom(L);
    const int W = cfg_.window_size;
    for (int m = 0; m < L; ++m) {
      const int off = m * cfg_.hop;
      for (int n = 0; n < W; ++n) acc[off + n] += window_[n] * frames(m, n);
    }
    Waveform out;
    out.sample_rate = cfg_.sample_rate;
    out.samples.resize(out_len);
    for (int j = 0; j < out_len; ++j)
      out.samples[j] = acc[j + pad()] / den[j + pad()];
    return out;
  }

  // Gradient wrt the spectrogram, given the gradient wrt inverse() output.
  ComplexMatrix inverse_adjoint(const std::vector<double>& grad_wave,
                                int frames_count) const {
    const int L = frames_count;
    std::vector<double> gpad(padded_len(L), 0.0);
    std::vector<double> den = denom(L);
    for (size_t j = 0; j < grad_wave.size(); ++j)
      gpad[j + pad()] = grad_wave[j] / den[j + pad()];
    const int W = cfg_.window_size;
    Eigen::MatrixXd gframes(L, W);
    for (int m = 0; m < L; ++m) {
      const int off = m * cfg_.hop;
      for (int n = 0; n < W; ++n) gframes(m, n) = window_[n] * gpad[off + n];
    }
    Eigen::MatrixXd gr = gframes * icos_.transpose();  // L x F
    Eigen::MatrixXd gi = gframes * isin_.transpose();
    ComplexMatrix out(bins(), L);
    for (int b = 0; b < bins(); ++b)
      for (int m = 0; m < L; ++m)
        out.at(b, m) =
            cdouble(gr(m, b), gi(m, b)) / cfg_.spectral_scale;
    return out;
  }

 private:
  int pad() const { return cfg_.window_size / 2; }
  int padded_len(int L) const { return (L - 1) * cfg_.hop + cfg_.window_size; }

  // sum over frames of w^2 at each padded position
  std::vector<double> denom(int L) const {
    std::vector<double> den(padded_len(L), 0.0);
    for (int m = 0; m < L; ++m) {
      const int off = m * cfg_.hop;
      for (int n = 0; n < cfg_.window_size; ++n)
        den[off + n] += window_[n] * window_[n];
    }
    for (double& d : den) d = std::max(d, 1e-300);
    return den;
  }

  void check_cola() {
    // interior of a long synthetic overlap: spread must vanish
    const int W = cfg_.window_size, H = cfg_.hop;
    const int reps = 8 * (W / H + 2);
    std::vector<double> acc(reps * H + W, 0.0);
    for (int m = 0; m < reps; ++m)
      for (int n = 0; n < W; ++n) acc[m * H + n] += window_[n] * window_[n];
    double lo = 1e300, hi = -1e300;
    for (int j = W; j < reps * H - W; ++j) {
      lo = std::min(lo, acc[j]);
      hi = std::max(hi, acc[j]);
    }
    cola_constant_ = 0.5 * (lo + hi);
    if (hi - lo > 1e-10 * std::max(1.0, cola_constant_))
      throw std::invalid_argument(
          "StftConfig: window/hop pair violates constant overlap-add "
          "(sum of squared windows not constant)");
  }

  void build_tables() {
    const int W = cfg_.window_size, F = bins();
    cos_.resize(W, F);
    sin_.resize(W, F);
    icos_.resize(F, W);
    isin_.resize(F, W);
    for (int b = 0; b < F; ++b) {
      const double coef = (b == 0 || b == W / 2) ? 1.0 : 2.0;
      for (int n = 0; n < W; ++n) {
        const double a = 2.0 * M_PI * b * n / W;
        cos_(n, b) = std::cos(a);
        sin_(n, b) = std::sin(a);
        icos_(b, n) = coef * std::cos(a) / W;
        isin_(b, n) = -coef * std::sin(a) / W;
      }
    }
  }

  Eigen::MatrixXd gather_frames(const std::vector<double>& x, int L) const {
    const int W = cfg_.window_size;
    std::vector<double> padded(padded_len(L), 0.0);
    std::copy(x.begin(), x.end(), padded.begin() + pad());
    Eigen::MatrixXd frames(L, W);
    for (int m = 0; m < L; ++m) {
      const int off = m * cfg_.hop;
      for (int n = 0; n < W; ++n) frames(m, n) = window_[n] * padded[off + n];
    }
    return frames;
  }

  std::vector<double> scatter_frames(const Eigen::MatrixXd& gframes,
                                     int n_samples) const {
    const int L = static_cast<int>(gframes.rows());
    const int W = cfg_.window_size;
    std::vector<double> gpad(padded_len(L), 0.0);
    for (int m = 0; m < L; ++m) {
      const int off = m * cfg_.hop;
      for (int n = 0; n < W; ++n) gpad[off + n] += window_[n] * gframes(m, n);
    }
    std::vector<double> out(n_samples);
    for (int j = 0; j < n_samples; ++j) out[j] = gpad[j + pad()];
    return out;
  }

  StftConfig cfg_;
  std::vector<double> window_;
  double cola_constant_ = 0.0;
  Eigen::MatrixXd cos_, sin_, icos_, isin_;
};

inline ComplexMatrix stft(const Waveform& w, const StftConfig& cfg) {
  return Stft(cfg).forward(w);
}
inline Waveform istft(const ComplexMatrix& s, const StftConfig& cfg,
                      int out_len) {
  return Stft(cfg).inverse(s, out_len);
}

// ---------------------------------------------------------------------------
// Synthetic mixtures

enum class CleanKind { harmonic_tone, chirp, filtered_noise_formant };
enum class NoiseKind { white, pink, babble_like };

inline const char* to_string(CleanKind k) {
  switch (k) {
    case CleanKind::harmonic_tone: return "harmonic_tone";
    case CleanKind::chirp: return "chirp";
    default: return "filtered_noise_formant";
  }
}
inline const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::white: return "white";
    case NoiseKind::pink: return "pink";
    default: return "babble_like";
  }
}
inline CleanKind clean_kind_from_string(const std::string& s) {
  if (s == "harmonic_tone") return CleanKind::harmonic_tone;
  if (s == "chirp") return CleanKind::chirp;
  if (s == "filtered_noise_formant") return CleanKind::filtered_noise_formant;
  throw std::invalid_argument("unknown clean kind: " + s);
}
inline NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "white") return NoiseKind::white;
  if (s == "pink") return NoiseKind::pink;
  if (s == "babble_like") return NoiseKind::babble_like;
  throw std::invalid_argument("unknown noise kind: " + s);
}

struct MixtureSpec {
  CleanKind clean_kind = CleanKind::harmonic_tone;
  NoiseKind noise_kind = NoiseKind::white;
  double snr_db = 10.0;  // +infinity means "noisy == clean"
  double duration = 1.0;
  double sample_rate = 16000.0;
  uint64_t seed = 0;
};

namespace detail {

inline double signal_energy(const std::vector<double>& s) {
  double e = 0.0;
  for (double v : s) e += v * v;
  return e;
}

inline void normalize_rms(std::vector<double>& s, double target_rms) {
  double e = signal_energy(s);
  if (e <= 0.0) return;
  double scale = target_rms / std::sqrt(e / s.size());
  for (double& v : s) v *= scale;
}

inline void apply_fade(std::vector<double>& s, int fade_len) {
  fade_len = std::min<int>(fade_len, static_cast<int>(s.size()) / 2);
  for (int i = 0; i < fade_len; ++i) {
    double g = 0.5 * (1.0 - std::cos(M_PI * i / fade_len));
    s[i] *= g;
    s[s.size() - 1 - i] *= g;
  }
}

inline std::vector<double> gen_harmonic_tone(int n, double fs, Rng& rng) {
  const double f0 = 90.0 + 310.0 * rng.next_double();
  const int n_harm = 2 + static_cast<int>(rng.next_range(0, 4));
  const double decay = 0.5 + rng.next_double();
  const double am_freq = 1.0 + 3.0 * rng.next_double();
  const double am_phase = 2.0 * M_PI * rng.next_double();
  std::vector<double> phases(n_harm);
  for (double& p : phases) p = 2.0 * M_PI * rng.next_double();
  std::vector<double> s(n, 0.0);
  for (int h = 1; h <= n_harm; ++h) {
    const double amp = 1.0 / std::pow(h, decay);
    const double w = 2.0 * M_PI * f0 * h / fs;
    if (f0 * h >= 0.45 * fs) break;
    for (int i = 0; i < n; ++i) s[i] += amp * std::sin(w * i + phases[h - 1]);
  }
  for (int i = 0; i < n; ++i)
    s[i] *= 1.0 + 0.3 * std::sin(2.0 * M_PI * am_freq * i / fs + am_phase);
  return s;
}

inline std::vector<double> gen_chirp(int n, double fs, Rng& rng) {
  const double f_start = 100.0 + 500.0 * rng.next_double();
  const double ratio = 1.5 + 1.5 * rng.next_double();
  const double f_end = std::min(f_start * ratio, 0.4 * fs);
  const double phase0 = 2.0 * M_PI * rng.next_double();
  std::vector<double> s(n);
  double phase = phase0;
  for (int i = 0; i < n; ++i) {
    const double f = f_start + (f_end - f_start) * i / n;
    phase += 2.0 * M_PI * f / fs;
    s[i] = std::sin(phase);
  }
  return s;
}

inline std::vector<double> gen_formant_noise(int n, double fs, Rng& rng) {
  std::vector<double> s(n);
  for (double& v : s) v = rng.next_gaussian();
  for (int stage = 0; stage < 2; ++stage) {  // two resonators in cascade
    const double fc = 300.0 + 2200.0 * rng.next_double();
    const double r = 0.97 + 0.025 * rng.next_double();
    const double w = 2.0 * M_PI * fc / fs;
    const double a1 = -2.0 * r * std::cos(w), a2 = r * r;
    double y1 = 0.0, y2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double y = s[i] - a1 * y1 - a2 * y2;
      y2 = y1;
      y1 = y;
      s[i] = y;
    }
  }
  return s;
}

inline std::vector<double> gen_white(int n, Rng& rng) {
  std::vector<double> s(n);
  for (double& v : s) v = rng.next_gaussian();
  return s;
}

// Paul Kellet's 3-pole pink noise approximation.
inline std::vector<double> gen_pink(int n, Rng& rng) {
  std::vector<double> s(n);
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = rng.next_gaussian();
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    s[i] = b0 + b1 + b2 + w * 0.1848;
  }
  return s;
}

inline std::vector<double> gen_babble(int n, double fs, Rng& rng) {
  std::vector<double> s(n, 0.0);
  for (int v = 0; v < 6; ++v) {
    Rng voice = rng.child(v + 1);
    std::vector<double> tone = gen_harmonic_tone(n, fs, voice);
    const double am = 2.0 + 6.0 * voice.next_double();
    const double ph = 2.0 * M_PI * voice.next_double();
    for (int i = 0; i < n; ++i)
      s[i] += tone[i] * (0.5 + 0.5 * std::sin(2.0 * M_PI * am * i / fs + ph));
  }
  Rng floor_rng = rng.child(99);
  for (int i = 0; i < n; ++i) s[i] += 0.05 * floor_rng.next_gaussian();
  return s;
}

}  // namespace detail

// Clean/noisy pair with the noise scaled so the mixture hits snr_db exactly.
inline std::pair<Waveform, Waveform> synth_pair(const MixtureSpec& spec,
                                                Rng& rng) {
  if (!(spec.duration > 0.0))
    throw std::invalid_argument("synth_pair: duration must be > 0");
  const int n = static_cast<int>(std::lround(spec.duration * spec.sample_rate));
  const double fs = spec.sample_rate;

  std::vector<double> clean;
  for (int attempt = 0;; ++attempt) {
    Rng gen = rng.child(1000 + attempt);
    switch (spec.clean_kind) {
      case CleanKind::harmonic_tone: clean = detail::gen_harmonic_tone(n, fs, gen); break;
      case CleanKind::chirp: clean = detail::gen_chirp(n, fs, gen); break;
      case CleanKind::filtered_noise_formant: clean = detail::gen_formant_noise(n, fs, gen); break;
    }
    detail::apply_fade(clean, static_cast<int>(0.02 * fs));
    if (detail::signal_energy(clean) > 0.0) break;
    if (attempt >= 8)
      throw std::runtime_error("synth_pair: zero-energy clean draw persisted");
  }
  detail::normalize_rms(clean, 0.1);

  Waveform clean_w{clean, fs};
  if (std::isinf(spec.snr_db)) return {clean_w, clean_w};

  Rng noise_rng = rng.child(2000);
  std::vector<double> noise;
  switch (spec.noise_kind) {
    case NoiseKind::white: noise = detail::gen_white(n, noise_rng); break;
    case NoiseKind::pink: noise = detail::gen_pink(n, noise_rng); break;
    case NoiseKind::babble_like: noise = detail::gen_babble(n, fs, noise_rng); break;
  }
  const double e_clean = detail::signal_energy(clean);
  const double e_noise = detail::signal_energy(noise);
  const double alpha =
      std::sqrt(e_clean / e_noise) * std::pow(10.0, -spec.snr_db / 20.0);
  Waveform noisy_w{clean, fs};
  for (int i = 0; i < n; ++i) noisy_w.samples[i] += alpha * noise[i];
  return {clean_w, noisy_w};
}

inline std::pair<Waveform, Waveform> synth_pair(const MixtureSpec& spec) {
  Rng rng(spec.seed);
  return synth_pair(spec, rng);
}

// ---------------------------------------------------------------------------
// WAV PCM16 mono I/O

namespace detail {
inline void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}
inline uint32_t get_u32(const std::string& s, size_t off) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(s[off + i]);
  return v;
}
inline uint16_t get_u16(const std::string& s, size_t off) {
  return static_cast<uint16_t>(static_cast<uint8_t>(s[off]) |
                               (static_cast<uint8_t>(s[off + 1]) << 8));
}
}  // namespace detail

inline void wav_write(const std::string& path, const Waveform& w) {
  const uint32_t n = static_cast<uint32_t>(w.samples.size());
  const uint32_t rate = static_cast<uint32_t>(std::lround(w.sample_rate));
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  detail::put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);   // PCM
  detail::put_u16(out, 1);   // mono
  detail::put_u32(out, rate);
  detail::put_u32(out, rate * 2);
  detail::put_u16(out, 2);   // block align
  detail::put_u16(out, 16);  // bits
  out += "data";
  detail::put_u32(out, 2 * n);
  for (double v : w.samples) {
    long q = std::lround(v * 32768.0);
    q = std::clamp(q, -32768L, 32767L);
    detail::put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("wav_write: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

inline Waveform wav_read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("wav_read: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string buf = ss.str();
  auto fail = [&](const std::string& chunk) -> Waveform {
    throw std::runtime_error("wav_read: malformed " + chunk + " chunk in " + path);
  };
  if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0) return fail("RIFF");
  if (buf.compare(8, 4, "WAVE") != 0) return fail("WAVE");

  Waveform w;
  bool have_fmt = false, have_data = false;
  size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    std::string id = buf.substr(pos, 4);
    uint32_t sz = detail::get_u32(buf, pos + 4);
    pos += 8;
    if (pos + sz > buf.size()) return fail(id);
    if (id == "fmt ") {
      if (sz < 16) return fail("fmt ");
      if (detail::get_u16(buf, pos) != 1)
        throw std::runtime_error("wav_read: unsupported encoding (want PCM) in " + path);
      if (detail::get_u16(buf, pos + 2) != 1)
        throw std::runtime_error("wav_read: unsupported channel count (want mono) in " + path);
      if (detail::get_u16(buf, pos + 14) != 16)
        throw std::runtime_error("wav_read: unsupported bit depth (want 16) in " + path);
      w.sample_rate = detail::get_u32(buf, pos + 4);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) return fail("data");
      w.samples.resize(sz / 2);
      for (size_t i = 0; i < w.samples.size(); ++i) {
        int16_t q = static_cast<int16_t>(detail::get_u16(buf, pos + 2 * i));
        w.samples[i] = q / 32768.0;
      }
      have_data = true;
    }
    pos += sz + (sz % 2);  // chunks are word-aligned
  }
  if (!have_data) return fail("data");
  return w;
}

// ---------------------------------------------------------------------------
// Dataset manifest: one line per pair,
//   id <TAB> clean.wav <TAB> noisy.wav <TAB> snr_db <TAB> seed
// paths are relative to the manifest's directory; '#' starts a comment.

struct ManifestEntry {
  std::string id;
  std::string clean_path;
  std::string noisy_path;
  double snr_db = 0.0;
  uint64_t seed = 0;
};

inline std::string dir_of(const std::string& path) {
  size_t p = path.find_last_of('/');
  return p == std::string::npos ? std::string(".") : path.substr(0, p);
}

inline void manifest_write(const std::string& path,
                           const std::vector<ManifestEntry>& entries) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("manifest_write: cannot open " + path);
  f << "# id\tclean\tnoisy\tsnr_db\tseed\n";
  for (const auto& e : entries) {
    f << e.id << '\t' << e.clean_path << '\t' << e.noisy_path << '\t'
      << e.snr_db << '\t' << e.seed << '\n';
  }
}

inline std::vector<ManifestEntry> manifest_read(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("manifest_read: cannot open " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ManifestEntry e;
    if (!(ls >> e.id >> e.clean_path >> e.noisy_path >> e.snr_db >> e.seed))
      throw std::runtime_error("manifest_read: bad line " +
                               std::to_string(lineno) + " in " + path);
    out.push_back(e);
  }
  return out;
}

}  // namespace onestep
