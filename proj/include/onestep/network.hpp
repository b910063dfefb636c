// The trainable function F_theta: a residual MLP over flattened
// real/imaginary spectrogram features of (x, y) plus a sinusoidal time
// embedding, with an exact hand-written backward pass, flat parameter
// access, EMA shadow parameters, and a binary checkpoint container.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "onestep/numerics.hpp"

namespace onestep {

struct NetworkSpec {
  int input_dim = 4;       // 2*F*L features of x plus 2*F*L of y
  int hidden_dim = 32;
  int n_layers = 2;        // residual blocks between input and output layers
  int time_embed_dim = 8;  // even; half sine, half cosine features
  std::string activation = "silu";  // silu | tanh | relu

  int output_dim() const { return input_dim / 2; }  // same shape as x

  void validate() const {
    if (input_dim < 2 || input_dim % 4 != 0)
      throw std::invalid_argument("NetworkSpec: input_dim must be 4*F*L");
    if (hidden_dim < 1 || n_layers < 1)
      throw std::invalid_argument("NetworkSpec: dims must be >= 1");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0)
      throw std::invalid_argument("NetworkSpec: time_embed_dim must be even");
    if (activation != "silu" && activation != "tanh" && activation != "relu")
      throw std::invalid_argument("NetworkSpec: unknown activation " + activation);
  }

  bool operator==(const NetworkSpec& o) const = default;
};

inline void to_json(nlohmann::json& j, const NetworkSpec& s) {
  j = {{"input_dim", s.input_dim},
       {"hidden_dim", s.hidden_dim},
       {"n_layers", s.n_layers},
       {"time_embed_dim", s.time_embed_dim},
       {"activation", s.activation}};
}
inline void from_json(const nlohmann::json& j, NetworkSpec& s) {
  j.at("input_dim").get_to(s.input_dim);
  j.at("hidden_dim").get_to(s.hidden_dim);
  j.at("n_layers").get_to(s.n_layers);
  j.at("time_embed_dim").get_to(s.time_embed_dim);
  j.at("activation").get_to(s.activation);
}

namespace detail {

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }
inline double silu_grad(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

enum class Act { silu, tanh, relu };
inline Act act_from_string(const std::string& s) {
  if (s == "silu") return Act::silu;
  if (s == "tanh") return Act::tanh;
  return Act::relu;
}

inline Eigen::VectorXd act_apply(Act a, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(x.size());
  switch (a) {
    case Act::silu:
      for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = silu(x[i]);
      break;
    case Act::tanh:
      y = x.array().tanh();
      break;
    case Act::relu:
      y = x.cwiseMax(0.0);
      break;
  }
  return y;
}

inline Eigen::VectorXd act_grad(Act a, const Eigen::VectorXd& pre) {
  Eigen::VectorXd g(pre.size());
  switch (a) {
    case Act::silu:
      for (Eigen::Index i = 0; i < pre.size(); ++i) g[i] = silu_grad(pre[i]);
      break;
    case Act::tanh: {
      Eigen::ArrayXd t = pre.array().tanh();
      g = (1.0 - t * t).matrix();
      break;
    }
    case Act::relu:
      for (Eigen::Index i = 0; i < pre.size(); ++i) g[i] = pre[i] > 0.0 ? 1.0 : 0.0;
      break;
  }
  return g;
}

}  // namespace detail

// Log-spaced sinusoidal embedding of t in [0, 1].
inline Eigen::VectorXd time_embedding(double t, int dim) {
  const int half = dim / 2;
  Eigen::VectorXd e(dim);
  for (int j = 0; j < half; ++j) {
    const double f =
        half == 1 ? 1.0 : std::exp(std::log(256.0) * j / (half - 1));
    e[2 * j] = std::sin(2.0 * M_PI * f * t);
    e[2 * j + 1] = std::cos(2.0 * M_PI * f * t);
  }
  return e;
}

// Interleaved packing of a complex matrix into real features:
// feature[2i] = Re(entry i), feature[2i+1] = Im(entry i), row-major order.
inline void pack_features(const ComplexMatrix& m, double* dst) {
  for (size_t i = 0; i < m.size(); ++i) {
    dst[2 * i] = m.data[i].real();
    dst[2 * i + 1] = m.data[i].imag();
  }
}

inline ComplexMatrix unpack_features(const double* src, int rows, int cols) {
  ComplexMatrix m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i)
    m.data[i] = cdouble(src[2 * i], src[2 * i + 1]);
  return m;
}

// F_theta(x, y, t). Architecture:
//   z0   = [features(x); features(y); time_embedding(t)]
//   h0   = act(W_in z0 + b_in)
//   h_l  = h_{l-1} + act(W_l h_{l-1} + b_l)        l = 1..n_layers
//   out  = W_out h_L + b_out
// Parameters live in one flat row-major vector (checkpoint layout).
class Network {
 public:
  struct Cache {
    Eigen::VectorXd z0;
    Eigen::VectorXd a_in;                // pre-activation of input layer
    std::vector<Eigen::VectorXd> a_blk;  // pre-activations of blocks
    std::vector<Eigen::VectorXd> h;      // h[0] = h0, h[l] = after block l
    int x_rows = 0, x_cols = 0;
    bool valid = false;
  };

  explicit Network(NetworkSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    compute_offsets();
    theta_.assign(param_count_, 0.0);
  }

  // Gaussian fan-in init for all layers; output layer starts at zero so an
  // untrained F_theta is exactly the zero function.
  static Network init_random(const NetworkSpec& spec, Rng& rng) {
    Network net(spec);
    const int in_total = spec.input_dim + spec.time_embed_dim;
    Rng wrng = rng.child(0x6e657477);  // distinct stream per purpose
    net.fill_gaussian(net.off_w_in_, spec.hidden_dim * in_total,
                      1.0 / std::sqrt(double(in_total)), wrng);
    for (int l = 0; l < spec.n_layers; ++l) {
      net.fill_gaussian(net.off_w_blk_[l], spec.hidden_dim * spec.hidden_dim,
                        1.0 / std::sqrt(double(spec.hidden_dim)), wrng);
    }
    // W_out, b_out stay zero
    return net;
  }

  const NetworkSpec& spec() const { return spec_; }
  size_t param_count() const { return param_count_; }
  std::vector<double>& theta() { return theta_; }
  const std::vector<double>& theta() const { return theta_; }

  uint64_t forward_calls() const { return forward_calls_; }
  uint64_t backward_calls() const { return backward_calls_; }
  void reset_counters() const { forward_calls_ = backward_calls_ = 0; }

  ComplexMatrix forward(const ComplexMatrix& x, const ComplexMatrix& y,
                        double t) const {
    Cache cache;
    return forward(x, y, t, cache);
  }

  ComplexMatrix forward(const ComplexMatrix& x, const ComplexMatrix& y,
                        double t, Cache& cache) const {
    require_same_shape(x, y, "Network::forward");
    if (static_cast<int>(2 * (x.size() + y.size())) != spec_.input_dim)
      throw std::invalid_argument("Network::forward: input_dim mismatch");
    ++forward_calls_;
    const int in_total = spec_.input_dim + spec_.time_embed_dim;
    cache.z0.resize(in_total);
    pack_features(x, cache.z0.data());
    pack_features(y, cache.z0.data() + 2 * x.size());
    cache.z0.tail(spec_.time_embed_dim) = time_embedding(t, spec_.time_embed_dim);

    const detail::Act act = detail::act_from_string(spec_.activation);
    cache.a_in = w_in() * cache.z0 + b_in();
    check_finite(cache.a_in, "input layer");
    cache.h.assign(1, detail::act_apply(act, cache.a_in));
    cache.a_blk.clear();
    for (int l = 0; l < spec_.n_layers; ++l) {
      cache.a_blk.push_back(w_blk(l) * cache.h.back() + b_blk(l));
      check_finite(cache.a_blk.back(), "block " + std::to_string(l));
      cache.h.push_back(cache.h.back() +
                        detail::act_apply(act, cache.a_blk.back()));
    }
    Eigen::VectorXd out = w_out() * cache.h.back() + b_out();
    check_finite(out, "output layer");
    cache.x_rows = x.rows;
    cache.x_cols = x.cols;
    cache.valid = true;
    return unpack_features(out.data(), x.rows, x.cols);
  }

  // Gradient of a scalar loss with respect to theta, given dLoss/dOutput
  // (real and imaginary parts independent) and the cache of the matching
  // forward call.
  std::vector<double> backward(const Cache& cache,
                               const ComplexMatrix& upstream) const {
    if (!cache.valid)
      throw std::logic_error("Network::backward: stale or missing cache");
    if (upstream.rows != cache.x_rows || upstream.cols != cache.x_cols)
      throw std::invalid_argument("Network::backward: upstream shape mismatch");
    ++backward_calls_;
    std::vector<double> grad(param_count_, 0.0);
    accumulate_backward(cache, upstream, grad);
    return grad;
  }

  // Same, but adds into an existing gradient buffer (batch accumulation).
  void accumulate_backward(const Cache& cache, const ComplexMatrix& upstream,
                           std::vector<double>& grad) const {
    if (grad.size() != param_count_)
      throw std::invalid_argument("Network::backward: gradient buffer size");
    const detail::Act act = detail::act_from_string(spec_.activation);
    Eigen::VectorXd g_out(spec_.output_dim());
    pack_features(upstream, g_out.data());

    auto gmap = [&](size_t off, int rows, int cols) {
      return Eigen::Map<
          Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          grad.data() + off, rows, cols);
    };
    auto gvec = [&](size_t off, int n) {
      return Eigen::Map<Eigen::VectorXd>(grad.data() + off, n);
    };

    gmap(off_w_out_, spec_.output_dim(), spec_.hidden_dim).noalias() +=
        g_out * cache.h.back().transpose();
    gvec(off_b_out_, spec_.output_dim()) += g_out;

    Eigen::VectorXd g_h = w_out().transpose() * g_out;
    for (int l = spec_.n_layers - 1; l >= 0; --l) {
      Eigen::VectorXd g_a =
          g_h.cwiseProduct(detail::act_grad(act, cache.a_blk[l]));
      gmap(off_w_blk_[l], spec_.hidden_dim, spec_.hidden_dim).noalias() +=
          g_a * cache.h[l].transpose();
      gvec(off_b_blk_[l], spec_.hidden_dim) += g_a;
      // residual: g_{h_{l-1}} = g_h (skip path) + W_l^T g_a
      g_h.noalias() += w_blk(l).transpose() * g_a;
    }
    Eigen::VectorXd g_a_in =
        g_h.cwiseProduct(detail::act_grad(act, cache.a_in));
    gmap(off_w_in_, spec_.hidden_dim, spec_.input_dim + spec_.time_embed_dim)
        .noalias() += g_a_in * cache.z0.transpose();
    gvec(off_b_in_, spec_.hidden_dim) += g_a_in;
  }

 private:
  using RowMajorMap =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>;

  RowMajorMap w_in() const {
    return RowMajorMap(theta_.data() + off_w_in_, spec_.hidden_dim,
                       spec_.input_dim + spec_.time_embed_dim);
  }
  Eigen::Map<const Eigen::VectorXd> b_in() const {
    return {theta_.data() + off_b_in_, spec_.hidden_dim};
  }
  RowMajorMap w_blk(int l) const {
    return RowMajorMap(theta_.data() + off_w_blk_[l], spec_.hidden_dim,
                       spec_.hidden_dim);
  }
  Eigen::Map<const Eigen::VectorXd> b_blk(int l) const {
    return {theta_.data() + off_b_blk_[l], spec_.hidden_dim};
  }
  RowMajorMap w_out() const {
    return RowMajorMap(theta_.data() + off_w_out_, spec_.output_dim(),
                       spec_.hidden_dim);
  }
  Eigen::Map<const Eigen::VectorXd> b_out() const {
    return {theta_.data() + off_b_out_, spec_.output_dim()};
  }

  void compute_offsets() {
    const int in_total = spec_.input_dim + spec_.time_embed_dim;
    size_t off = 0;
    off_w_in_ = off;
    off += static_cast<size_t>(spec_.hidden_dim) * in_total;
    off_b_in_ = off;
    off += spec_.hidden_dim;
    off_w_blk_.clear();
    off_b_blk_.clear();
    for (int l = 0; l < spec_.n_layers; ++l) {
      off_w_blk_.push_back(off);
      off += static_cast<size_t>(spec_.hidden_dim) * spec_.hidden_dim;
      off_b_blk_.push_back(off);
      off += spec_.hidden_dim;
    }
    off_w_out_ = off;
    off += static_cast<size_t>(spec_.output_dim()) * spec_.hidden_dim;
    off_b_out_ = off;
    off += spec_.output_dim();
    param_count_ = off;
  }

  void fill_gaussian(size_t off, size_t n, double std_dev, Rng& rng) {
    for (size_t i = 0; i < n; ++i)
      theta_[off + i] = std_dev * rng.next_gaussian();
  }

  static void check_finite(const Eigen::VectorXd& v, const std::string& layer) {
    if (!v.allFinite())
      throw std::runtime_error("Network: non-finite activation in " + layer);
  }

  NetworkSpec spec_;
  std::vector<double> theta_;
  size_t off_w_in_ = 0, off_b_in_ = 0, off_w_out_ = 0, off_b_out_ = 0;
  std::vector<size_t> off_w_blk_, off_b_blk_;
  size_t param_count_ = 0;
  mutable uint64_t forward_calls_ = 0;   // instrumentation, not thread-safe
  mutable uint64_t backward_calls_ = 0;
};

// ---------------------------------------------------------------------------
// EMA shadow parameters (the stopgrad target): updated only through
// ema_update, never written by the optimizer or backward pass.

struct EmaShadow {
  std::vector<double> theta_minus;
  double decay = 0.9999;
};

inline void ema_update(EmaShadow& shadow, const std::vector<double>& theta,
                       double decay) {
  if (shadow.theta_minus.size() != theta.size())
    throw std::invalid_argument("ema_update: length mismatch");
  if (!(decay >= 0.0 && decay <= 1.0))
    throw std::invalid_argument("ema_update: decay outside [0, 1]");
  for (size_t i = 0; i < theta.size(); ++i)
    shadow.theta_minus[i] = decay * shadow.theta_minus[i] + (1.0 - decay) * theta[i];
}

// ---------------------------------------------------------------------------
// Checkpoint container:
//   bytes 0..7   magic "ONESTEP\x01"
//   u32 LE       header length
//   header       JSON: {"role": str, "spec": NetworkSpec, "param_count": N,
//                       "meta": arbitrary object}
//   payload      N little-endian float64 parameters
//   u64 LE       FNV-1a checksum of the payload bytes

constexpr char kCheckpointMagic[8] = {'O', 'N', 'E', 'S', 'T', 'E', 'P', '\x01'};

inline uint64_t fnv1a64(const unsigned char* data, size_t n) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t theta_checksum(const std::vector<double>& theta) {
  return fnv1a64(reinterpret_cast<const unsigned char*>(theta.data()),
                 theta.size() * sizeof(double));
}

struct Checkpoint {
  Network net;
  std::string role;      // "teacher" or "student"
  nlohmann::json meta;   // free-form run metadata
};

inline void save_checkpoint(const std::string& path, const Network& net,
                            const std::string& role,
                            const nlohmann::json& meta = nlohmann::json::object()) {
  nlohmann::json header = {{"role", role},
                           {"spec", net.spec()},
                           {"param_count", net.param_count()},
                           {"meta", meta}};
  const std::string hs = header.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(kCheckpointMagic, 8);
  uint32_t hlen = static_cast<uint32_t>(hs.size());
  f.write(reinterpret_cast<const char*>(&hlen), 4);
  f.write(hs.data(), hlen);
  f.write(reinterpret_cast<const char*>(net.theta().data()),
          static_cast<std::streamsize>(net.param_count() * sizeof(double)));
  uint64_t sum = theta_checksum(net.theta());
  f.write(reinterpret_cast<const char*>(&sum), 8);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (f.gcount() != 8 || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  uint32_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), 4);
  std::string hs(hlen, '\0');
  f.read(hs.data(), hlen);
  if (!f) throw std::runtime_error("load_checkpoint: truncated header in " + path);
  nlohmann::json header = nlohmann::json::parse(hs);
  NetworkSpec spec = header.at("spec").get<NetworkSpec>();
  Network net(spec);
  size_t n = header.at("param_count").get<size_t>();
  if (n != net.param_count())
    throw std::runtime_error("load_checkpoint: param_count mismatch in " + path);
  f.read(reinterpret_cast<char*>(net.theta().data()),
         static_cast<std::streamsize>(n * sizeof(double)));
  uint64_t sum = 0;
  f.read(reinterpret_cast<char*>(&sum), 8);
  if (!f) throw std::runtime_error("load_checkpoint: truncated payload in " + path);
  if (sum != theta_checksum(net.theta()))
    throw std::runtime_error("load_checkpoint: checksum mismatch in " + path);
  return Checkpoint{std::move(net), header.at("role").get<std::string>(),
                    header.value("meta", nlohmann::json::object())};
}

}  // namespace onestep
