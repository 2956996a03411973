#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lqwidth {

/// Largest ambient dimension supported by the fixed-capacity cube index.
inline constexpr std::size_t kMaxDim = 4;

/// Deepest level whose indices still fit in 64 bits with room to spare.
inline constexpr unsigned kMaxLevel = 62;

/// Dyadic rational num / 2^log2_den, kept exact for geometric predicates.
struct Dyadic {
  std::int64_t num = 0;
  int log2_den = 0;

  double value() const;
  /// Same number with the smallest non-negative power-of-two denominator.
  Dyadic reduced() const;
  friend bool operator==(const Dyadic& a, const Dyadic& b);
};

/// Half-open cube prod_k (l_k 2^-n, (l_k + 1) 2^-n] inside (0,1]^m.
class DyadicCube {
 public:
  DyadicCube() = default;
  DyadicCube(unsigned level, std::span<const std::uint64_t> index);

  static DyadicCube unit(std::size_t dim);
  /// The unique level-n cube whose half-open box contains x (x in (0,1]^m).
  static DyadicCube containing(std::span<const double> x, unsigned level);

  unsigned level() const { return level_; }
  std::size_t dim() const { return dim_; }
  std::uint64_t index(std::size_t axis) const { return index_[axis]; }
  std::span<const std::uint64_t> indices() const { return {index_.data(), dim_}; }

  /// Child selector bit k chooses the upper half along axis k.
  DyadicCube child(unsigned selector) const;
  std::vector<DyadicCube> children() const;
  DyadicCube parent() const;
  /// Ancestor at a coarser (or equal) level.
  DyadicCube ancestor(unsigned level) const;

  std::size_t child_count() const { return std::size_t{1} << dim_; }
  double volume() const;
  double side() const;
  double lower(std::size_t axis) const;
  double upper(std::size_t axis) const;
  std::vector<double> center() const;

  /// True when `other` is this cube or one of its descendants.
  bool contains(const DyadicCube& other) const;
  bool contains_point(std::span<const double> x) const;
  bool disjoint(const DyadicCube& other) const;

  std::string to_string() const;

  friend bool operator==(const DyadicCube& a, const DyadicCube& b);
  friend std::strong_ordering operator<=>(const DyadicCube& a, const DyadicCube& b);

 private:
  unsigned level_ = 0;
  std::size_t dim_ = 1;
  std::array<std::uint64_t, kMaxDim> index_{};
};

struct DyadicCubeHash {
  std::size_t operator()(const DyadicCube& c) const noexcept;
};

}  // namespace lqwidth
