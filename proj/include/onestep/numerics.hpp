// Seeded counter-based randomness, complex matrices and finite-difference
// utilities shared by every other module.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace onestep {

using cdouble = std::complex<double>;

// Counter-based generator: Philox4x32-10 (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3", SC'11), as in Random123. The 64-bit seed is
// the key, the 128-bit counter is (block_index, stream_id). Draws depend only
// on (seed, stream, counter), so equal seeds reproduce the exact same integer
// sequence on every platform, and independent child streams are cheap.
//
// Not shareable across threads: callers derive per-worker streams via child().
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : seed_(seed), stream_(stream), block_index_(0), word_pos_(4) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  // Independent stream derived from this one. Index may be any value;
  // distinct indices give statistically independent sequences.
  Rng child(uint64_t index) const {
    return Rng(seed_, mix64(stream_ ^ (0x9E3779B97F4A7C15ULL * (index + 1))));
  }

  uint32_t next_u32() {
    if (word_pos_ >= 4) {
      words_ = block(block_index_++);
      word_pos_ = 0;
    }
    return words_[word_pos_++];
  }

  uint64_t next_u64() {
    uint64_t lo = next_u32();
    uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform double in [0, 1), 53 usable bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in {lo, ..., hi} inclusive (unbiased by rejection).
  uint64_t next_range(uint64_t lo, uint64_t hi) {
    if (lo > hi) throw std::invalid_argument("Rng::next_range: lo > hi");
    uint64_t span = hi - lo + 1;
    if (span == 0) return next_u64();  // full 64-bit range
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return lo + v % span;
  }

  // Independent standard-normal pair via Box-Muller.
  void next_gaussian_pair(double& a, double& b) {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    a = r * std::cos(2.0 * M_PI * u2);
    b = r * std::sin(2.0 * M_PI * u2);
  }

  // Single standard-normal draw (second Box-Muller value is discarded so the
  // stream position never depends on caller history).
  double next_gaussian() {
    double a, b;
    next_gaussian_pair(a, b);
    return a;
  }

  // One 128-bit Philox block; counter words are (lo(index), hi(index),
  // lo(stream), hi(stream)), key words (lo(seed), hi(seed)).
  static std::array<uint32_t, 4> philox_block(uint64_t seed, uint64_t stream,
                                              uint64_t index) {
    uint32_t x0 = static_cast<uint32_t>(index);
    uint32_t x1 = static_cast<uint32_t>(index >> 32);
    uint32_t x2 = static_cast<uint32_t>(stream);
    uint32_t x3 = static_cast<uint32_t>(stream >> 32);
    uint32_t k0 = static_cast<uint32_t>(seed);
    uint32_t k1 = static_cast<uint32_t>(seed >> 32);
    for (int round = 0; round < 10; ++round) {
      uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, x0, hi0, lo0);
      mulhilo(0xCD9E8D57u, x2, hi1, lo1);
      x0 = hi1 ^ x1 ^ k0;
      x1 = lo1;
      x2 = hi0 ^ x3 ^ k1;
      x3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return {x0, x1, x2, x3};
  }

 private:
  static void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
  }

  std::array<uint32_t, 4> block(uint64_t index) const {
    return philox_block(seed_, stream_, index);
  }

  static uint64_t mix64(uint64_t z) {  // splitmix64 finalizer
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  uint64_t seed_;
  uint64_t stream_;
  uint64_t block_index_;
  std::array<uint32_t, 4> words_{};
  int word_pos_;
};

// Dense row-major complex matrix. Immutable-by-convention once built: the
// math routines never mutate their inputs, so values can be shared read-only.
struct ComplexMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<cdouble> data;

  ComplexMatrix() = default;
  ComplexMatrix(int r, int c) : rows(r), cols(c), data(check_dims(r, c)) {}

  cdouble& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  const cdouble& at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  size_t size() const { return data.size(); }

  bool same_shape(const ComplexMatrix& o) const {
    return rows == o.rows && cols == o.cols;
  }

 private:
  static size_t check_dims(int r, int c) {
    if (r < 1 || c < 1)
      throw std::invalid_argument("ComplexMatrix: rows*cols must be >= 1");
    return static_cast<size_t>(r) * static_cast<size_t>(c);
  }
};

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b,
                               const char* where) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(where) + ": shape mismatch");
}

inline bool all_finite(const ComplexMatrix& m) {
  for (const cdouble& v : m.data)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

// Squared Frobenius norm over real+imaginary parts.
inline double squared_norm(const ComplexMatrix& m) {
  double s = 0.0;
  for (const cdouble& v : m.data) s += std::norm(v);
  return s;
}

// Circularly symmetric complex Gaussian: each entry has independent real and
// imaginary parts ~ N(0, std^2/2), so E|z|^2 = std^2.
inline ComplexMatrix sample_complex_gaussian(Rng& rng, int rows, int cols,
                                             double std_dev) {
  if (!(std_dev >= 0.0))
    throw std::invalid_argument("sample_complex_gaussian: std must be >= 0");
  ComplexMatrix out(rows, cols);
  if (std_dev == 0.0) return out;  // degenerate; consumes no draws
  const double scale = std_dev / std::sqrt(2.0);
  for (cdouble& v : out.data) {
    double a, b;
    rng.next_gaussian_pair(a, b);
    v = cdouble(scale * a, scale * b);
  }
  return out;
}

// Central-difference gradient of a scalar function; the oracle that every
// hand-written backward pass in this repository is checked against.
inline std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& p, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h > 0");
  std::vector<double> grad(p.size());
  std::vector<double> q = p;
  for (size_t i = 0; i < p.size(); ++i) {
    q[i] = p[i] + h;
    double fp = f(q);
    q[i] = p[i] - h;
    double fm = f(q);
    q[i] = p[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error(
          "finite_diff_gradient: non-finite evaluation at coordinate " +
          std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace onestep
