#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rcor {

// Paired univariate observations (x_i, y_i): two equally long columns of
// finite values, at least two rows.
class PairedSample {
 public:
  PairedSample(std::vector<double> x, std::vector<double> y);

  std::size_t n() const noexcept { return x_.size(); }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }

  PairedSample swapped() const { return PairedSample(y_, x_); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

// Ranks of `values`, 1-based, each rank used exactly once. Ties are broken
// uniformly at random by priorities drawn from Rng(tie_seed), so tied inputs
// get a reproducible random order; untied inputs never touch the seed.
std::vector<std::int64_t> rank_vector(std::span<const double> values,
                                      std::uint64_t tie_seed = 0);

// Ranks of both columns plus the concomitant arrangement:
// concomitant_ranks[k] is the y-rank of the pair holding the (k+1)-smallest x.
// Column streams are derived from tie_seed (x: lane 1, y: lane 2), so
// x_ranks == rank_vector(x, derive_seed(tie_seed, 1)) and similarly for y.
struct RankProfile {
  std::vector<std::int64_t> x_ranks;
  std::vector<std::int64_t> y_ranks;
  std::vector<std::int64_t> concomitant_ranks;
  std::uint64_t tie_seed = 0;
};

RankProfile concomitant_profile(const PairedSample& sample,
                                std::uint64_t tie_seed = 0);

// Concomitant arrangement of two rank permutations of {1..n}: entry k is
// y_ranks at the position whose x-rank is k+1.
std::vector<std::int64_t> concomitant_from_ranks(
    std::span<const std::int64_t> x_ranks, std::span<const std::int64_t> y_ranks);

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Paired multivariate observations: row i couples X_i in R^p with Y_i in R^q.
class MultiSample {
 public:
  MultiSample(Matrix x, Matrix y);

  std::size_t n() const noexcept { return x_.rows(); }
  std::size_t p() const noexcept { return x_.cols(); }
  std::size_t q() const noexcept { return y_.cols(); }
  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }

  MultiSample swapped() const { return MultiSample(y_, x_); }

 private:
  Matrix x_;
  Matrix y_;
};

// Componentwise-dominance counts: rx[i] = #{ j != i : X_j <= X_i in every
// coordinate }, same for ry, and rxy[i] counts joint dominance in both
// blocks. self_inclusion additionally counts j == i (adds one everywhere).
struct MultiRankProfile {
  std::vector<std::int64_t> rx;
  std::vector<std::int64_t> ry;
  std::vector<std::int64_t> rxy;
  std::int64_t rx_total = 0;
  std::int64_t ry_total = 0;
  std::int64_t rxy_total = 0;
  bool self_inclusion = false;
};

MultiRankProfile multivariate_ranks(const MultiSample& sample,
                                    bool self_inclusion = false);

}  // namespace rcor
