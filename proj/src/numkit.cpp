#include "edog/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edog {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (!same_shape(o)) throw DomainError("matrix shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (!same_shape(o)) throw DomainError("matrix shape mismatch in -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DomainError("matmul shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.data() + i * a.cols();
    double* orow = out.data() + i * out.cols();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.data() + k * b.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> v) {
  std::vector<double> out(v.size());
  if (v.empty()) return out;
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

double cross_entropy(std::span<const double> p, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= p.size())
    throw DomainError("cross_entropy: class id out of range");
  return -std::log(std::max(p[static_cast<std::size_t>(y)], kProbFloor));
}

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr) {
  if (!param.same_shape(grad) || !param.same_shape(state.m))
    throw DomainError("adam_step shape mismatch");
  state.t += 1;
  const double b1t = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(state.t));
  const double b2t = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad.data()[i];
    double& m = state.m.data()[i];
    double& v = state.v.data()[i];
    m = AdamState::kBeta1 * m + (1.0 - AdamState::kBeta1) * g;
    v = AdamState::kBeta2 * v + (1.0 - AdamState::kBeta2) * g * g;
    const double mhat = m / b1t;
    const double vhat = v / b2t;
    param.data()[i] -= lr * mhat / (std::sqrt(vhat) + AdamState::kEps);
  }
}

void sgd_step(Matrix& param, const Matrix& grad, double lr) {
  if (!param.same_shape(grad)) throw DomainError("sgd_step shape mismatch");
  for (std::size_t i = 0; i < param.size(); ++i) param.data()[i] -= lr * grad.data()[i];
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& at,
                        double h) {
  Matrix grad(at.rows(), at.cols());
  Matrix x = at;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + h;
    const double fp = f(x);
    x.data()[i] = orig - h;
    const double fm = f(x);
    x.data()[i] = orig;
    grad.data()[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

double PrngStream::next_gaussian() {
  double u1 = next_double();
  const double u2 = next_double();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t PrngStream::next_below(std::uint64_t n) {
  if (n == 0) throw DomainError("next_below: n must be positive");
  // Lemire's multiply-shift with rejection; unbiased and deterministic.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    const std::uint64_t threshold = (0ull - n) % n;
    while (lo < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

PrngStream PrngStream::derive(std::string_view label) const {
  return PrngStream(mix64(seed_ + fnv1a64(label)));
}

PrngStream PrngStream::derive(std::uint64_t index) const {
  return PrngStream(mix64(seed_ + mix64(index + 0x632BE59BD9B4E019ull)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return PrngStream(seed).derive(label).seed();
}

}  // namespace edog
