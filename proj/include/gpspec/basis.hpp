#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gpspec/error.hpp"

namespace gpspec {

using WaveVector = std::array<int, 3>;

/// Smallest length >= n whose prime factors are all in {2, 3, 5, 7}.
inline int efficient_fft_length(int n) {
  if (n <= 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

/// Planewave basis on (0, 2pi)^d: all wave-vectors k with |k| <= M (Euclidean norm),
/// enumerated lexicographically (first component slowest), together with the default
/// collocation grid size N >= 4M + 2.
class BasisSpec {
 public:
  BasisSpec(int dim, int cutoff, int grid) : dim_(dim), cutoff_(cutoff), grid_(grid) {
    const int side = 2 * cutoff + 1;
    int box = 1;
    for (int i = 0; i < dim; ++i) box *= side;
    lookup_.assign(static_cast<std::size_t>(box), -1);

    const int m2 = cutoff * cutoff;
    WaveVector k{0, 0, 0};
    const int lo = -cutoff;
    // Iterate the bounding box in lexicographic order.
    std::array<int, 3> hi{0, 0, 0};
    for (int i = 0; i < dim; ++i) hi[i] = cutoff;
    for (int i = 0; i < 3; ++i) k[i] = (i < dim) ? lo : 0;
    while (true) {
      const int n2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
      if (n2 <= m2) {
        lookup_[box_index(k)] = static_cast<int>(modes_.size());
        modes_.push_back(k);
        norm2_.push_back(static_cast<double>(n2));
      }
      int axis = dim - 1;
      while (axis >= 0 && k[axis] == hi[axis]) {
        k[axis] = lo;
        --axis;
      }
      if (axis < 0) break;
      ++k[axis];
    }

    negated_.resize(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      const auto& q = modes_[i];
      negated_[i] = static_cast<std::size_t>(index_of({-q[0], -q[1], -q[2]}));
    }
  }

  int dim() const noexcept { return dim_; }
  int cutoff() const noexcept { return cutoff_; }
  /// Default collocation points per dimension.
  int grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return modes_.size(); }

  const WaveVector& mode(std::size_t i) const { return modes_[i]; }
  const std::vector<WaveVector>& modes() const noexcept { return modes_; }
  /// |k|^2 for the i-th mode.
  double norm2(std::size_t i) const { return norm2_[i]; }
  /// Index of -k for the i-th mode.
  std::size_t negated(std::size_t i) const { return negated_[i]; }

  /// Position of k in the enumeration, or -1 if |k| > M.
  int index_of(const WaveVector& k) const {
    for (int i = 0; i < dim_; ++i) {
      if (k[i] < -cutoff_ || k[i] > cutoff_) return -1;
    }
    for (int i = dim_; i < 3; ++i) {
      if (k[i] != 0) return -1;
    }
    return lookup_[box_index(k)];
  }

  /// Two bases describe the same space when dimension and cutoff agree.
  bool same_space(const BasisSpec& other) const noexcept {
    return dim_ == other.dim_ && cutoff_ == other.cutoff_;
  }

 private:
  std::size_t box_index(const WaveVector& k) const {
    const int side = 2 * cutoff_ + 1;
    std::size_t idx = 0;
    for (int i = 0; i < dim_; ++i) idx = idx * side + static_cast<std::size_t>(k[i] + cutoff_);
    return idx;
  }

  int dim_;
  int cutoff_;
  int grid_;
  std::vector<WaveVector> modes_;
  std::vector<double> norm2_;
  std::vector<std::size_t> negated_;
  std::vector<int> lookup_;
};

using Basis = std::shared_ptr<const BasisSpec>;

/// Upper bound on collocation points (N^d) accepted by make_basis.
inline constexpr std::int64_t kDefaultGridBudget = std::int64_t{1} << 26;

inline Basis make_basis(int dim, int cutoff, std::int64_t grid_budget = kDefaultGridBudget) {
  if (dim < 1 || dim > 3) {
    throw Error(ErrorCode::kInvalidArgument, "dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  if (cutoff < 0) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff must be nonnegative, got " + std::to_string(cutoff));
  }
  const int grid = efficient_fft_length(4 * cutoff + 2);
  double points = 1.0;
  for (int i = 0; i < dim; ++i) points *= grid;
  if (points > static_cast<double>(grid_budget)) {
    throw Error(ErrorCode::kBasisTooLarge,
                "cutoff " + std::to_string(cutoff) + " in d=" + std::to_string(dim) +
                    " needs " + std::to_string(static_cast<long long>(points)) + " grid points");
  }
  return std::make_shared<const BasisSpec>(dim, cutoff, grid);
}

inline void require_same_space(const BasisSpec& a, const BasisSpec& b) {
  if (!a.same_space(b)) {
    throw Error(ErrorCode::kBasisMismatch,
                "bases differ (d=" + std::to_string(a.dim()) + ", M=" + std::to_string(a.cutoff()) +
                    " vs d=" + std::to_string(b.dim()) + ", M=" + std::to_string(b.cutoff()) + ")");
  }
}

}  // namespace gpspec
