#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace kwv {

// Complex DFT of fixed length. Radix-2 for powers of two, direct summation
// otherwise. Forward uses exp(-2 pi i jk/n); inverse is scaled by 1/n.
// Immutable after construction, so one instance may be shared across threads.
class Fft {
 public:
  Fft() = default;
  explicit Fft(std::size_t n) : n_(n), pow2_(n > 0 && (n & (n - 1)) == 0) {
    twiddle_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                        static_cast<double>(n));
    }
    if (pow2_) {
      bitrev_.resize(n);
      std::size_t bits = 0;
      while ((std::size_t{1} << bits) < n) ++bits;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b) {
          if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        }
        bitrev_[i] = r;
      }
    }
  }

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<std::complex<double>> a) const { transform(a, false); }

  void inverse(std::span<std::complex<double>> a) const {
    transform(a, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : a) v *= scale;
  }

 private:
  void transform(std::span<std::complex<double>> a, bool inv) const {
    if (n_ <= 1) return;
    if (!pow2_) {
      std::vector<std::complex<double>> out(n_);
      for (std::size_t k = 0; k < n_; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
          const auto& w = twiddle_[(j * k) % n_];
          acc += a[j] * (inv ? std::conj(w) : w);
        }
        out[k] = acc;
      }
      for (std::size_t k = 0; k < n_; ++k) a[k] = out[k];
      return;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n_ / len;
      for (std::size_t i = 0; i < n_; i += len) {
        for (std::size_t j = 0; j < half; ++j) {
          const auto& t = twiddle_[j * step];
          const std::complex<double> w = inv ? std::conj(t) : t;
          const std::complex<double> u = a[i + j];
          const std::complex<double> v = a[i + j + half] * w;
          a[i + j] = u + v;
          a[i + j + half] = u - v;
        }
      }
    }
  }

  std::size_t n_ = 0;
  bool pow2_ = false;
  std::vector<std::complex<double>> twiddle_;
  std::vector<std::size_t> bitrev_;
};

// Signed wavenumber of DFT bin m for length n.
inline int signed_wavenumber(int m, int n) noexcept { return m <= n / 2 ? m : m - n; }

}  // namespace kwv
