#include "rcor/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rcor/rng.hpp"

namespace rcor {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite value");
    }
  }
}

}  // namespace

PairedSample::PairedSample(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) {
    throw std::invalid_argument("PairedSample: columns differ in length");
  }
  if (x_.size() < 2) {
    throw std::invalid_argument("PairedSample: need at least two rows");
  }
  require_finite(x_, "PairedSample");
  require_finite(y_, "PairedSample");
}

std::vector<std::int64_t> rank_vector(std::span<const double> values,
                                      std::uint64_t tie_seed) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("rank_vector: empty input");
  require_finite(values, "rank_vector");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });

  bool has_ties = false;
  for (std::size_t k = 1; k < n; ++k) {
    if (values[order[k - 1]] == values[order[k]]) {
      has_ties = true;
      break;
    }
  }
  if (has_ties) {
    std::vector<std::uint64_t> priority(n);
    Rng rng(tie_seed);
    for (auto& p : priority) p = rng.next_u64();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (values[a] != values[b]) return values[a] < values[b];
      if (priority[a] != priority[b]) return priority[a] < priority[b];
      return a < b;
    });
  }

  std::vector<std::int64_t> ranks(n);
  for (std::size_t k = 0; k < n; ++k) {
    ranks[order[k]] = static_cast<std::int64_t>(k) + 1;
  }
  return ranks;
}

std::vector<std::int64_t> concomitant_from_ranks(
    std::span<const std::int64_t> x_ranks,
    std::span<const std::int64_t> y_ranks) {
  const std::size_t n = x_ranks.size();
  if (y_ranks.size() != n) {
    throw std::invalid_argument("concomitant_from_ranks: length mismatch");
  }
  std::vector<std::int64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t r = x_ranks[i];
    if (r < 1 || r > static_cast<std::int64_t>(n)) {
      throw std::invalid_argument("concomitant_from_ranks: not a rank permutation");
    }
    out[static_cast<std::size_t>(r) - 1] = y_ranks[i];
  }
  return out;
}

RankProfile concomitant_profile(const PairedSample& sample,
                                std::uint64_t tie_seed) {
  RankProfile profile;
  profile.tie_seed = tie_seed;
  profile.x_ranks = rank_vector(sample.x(), derive_seed(tie_seed, 1));
  profile.y_ranks = rank_vector(sample.y(), derive_seed(tie_seed, 2));
  profile.concomitant_ranks =
      concomitant_from_ranks(profile.x_ranks, profile.y_ranks);
  return profile;
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: value count does not match shape");
  }
}

MultiSample::MultiSample(Matrix x, Matrix y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() != y_.rows()) {
    throw std::invalid_argument("MultiSample: row counts differ");
  }
  if (x_.rows() < 2) {
    throw std::invalid_argument("MultiSample: need at least two rows");
  }
  if (x_.cols() == 0 || y_.cols() == 0) {
    throw std::invalid_argument("MultiSample: empty coordinate block");
  }
  require_finite(x_.values(), "MultiSample");
  require_finite(y_.values(), "MultiSample");
}

namespace {

// X_j <= X_i componentwise.
bool dominates(const Matrix& m, std::size_t i, std::size_t j) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (m(j, c) > m(i, c)) return false;
  }
  return true;
}

}  // namespace

MultiRankProfile multivariate_ranks(const MultiSample& sample,
                                    bool self_inclusion) {
  const std::size_t n = sample.n();
  MultiRankProfile profile;
  profile.self_inclusion = self_inclusion;
  const std::int64_t self = self_inclusion ? 1 : 0;
  profile.rx.assign(n, self);
  profile.ry.assign(n, self);
  profile.rxy.assign(n, self);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool dx = dominates(sample.x(), i, j);
      const bool dy = dominates(sample.y(), i, j);
      if (dx) ++profile.rx[i];
      if (dy) ++profile.ry[i];
      if (dx && dy) ++profile.rxy[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    profile.rx_total += profile.rx[i];
    profile.ry_total += profile.ry[i];
    profile.rxy_total += profile.rxy[i];
  }
  return profile;
}

}  // namespace rcor
