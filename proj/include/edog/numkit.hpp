#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "edog/errors.hpp"

namespace edog {

// Dense row-major double matrix. All models here are small (at most a few
// hundred rows), so there is no sparse storage and no BLAS backend.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

double stable_sigmoid(double x);
std::vector<double> softmax(std::span<const double> v);
double cross_entropy(std::span<const double> p, int y);

// Probability floor used when taking logs of model outputs.
inline constexpr double kProbFloor = 1e-12;

// Adam accumulators for one parameter matrix. beta1/beta2/eps are fixed.
struct AdamState {
  Matrix m;
  Matrix v;
  long t = 0;

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t rows, std::size_t cols) : m(rows, cols), v(rows, cols) {}
  explicit AdamState(const Matrix& like) : AdamState(like.rows(), like.cols()) {}
};

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr);
void sgd_step(Matrix& param, const Matrix& grad, double lr);

// Central-difference gradient of a scalar function, used as the oracle for
// every hand-derived gradient in this project.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& at,
                        double h = 1e-5);

// Deterministic 64-bit PRNG (splitmix64). Substreams are derived from the
// construction seed by label or index so that independent components of an
// experiment can be reseeded reproducibly without coordinating draw order.
class PrngStream {
 public:
  explicit PrngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double next_gaussian();

  // Uniform in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n);

  PrngStream derive(std::string_view label) const;
  PrngStream derive(std::uint64_t index) const;

  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

// Seed for a named child stream; convenience for APIs that take raw seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace edog
