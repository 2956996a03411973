#include "lqwidth/dyadic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lqwidth {

double Dyadic::value() const { return std::ldexp(static_cast<double>(num), -log2_den); }

Dyadic Dyadic::reduced() const {
  Dyadic d = *this;
  if (d.num == 0) return {0, 0};
  while (d.log2_den > 0 && d.num % 2 == 0) {
    d.num /= 2;
    --d.log2_den;
  }
  while (d.log2_den < 0) {
    d.num *= 2;
    ++d.log2_den;
  }
  return d;
}

bool operator==(const Dyadic& a, const Dyadic& b) {
  const Dyadic ra = a.reduced();
  const Dyadic rb = b.reduced();
  return ra.num == rb.num && ra.log2_den == rb.log2_den;
}

DyadicCube::DyadicCube(unsigned level, std::span<const std::uint64_t> index)
    : level_(level), dim_(index.size()) {
  if (dim_ == 0 || dim_ > kMaxDim) {
    throw std::invalid_argument("DyadicCube: dimension must be in [1, " +
                                std::to_string(kMaxDim) + "]");
  }
  if (level > kMaxLevel) {
    throw std::invalid_argument("DyadicCube: level " + std::to_string(level) +
                                " exceeds " + std::to_string(kMaxLevel));
  }
  const std::uint64_t bound = std::uint64_t{1} << level;
  for (std::size_t k = 0; k < dim_; ++k) {
    if (index[k] >= bound) {
      throw std::out_of_range("DyadicCube: index out of range for level " +
                              std::to_string(level));
    }
    index_[k] = index[k];
  }
}

DyadicCube DyadicCube::unit(std::size_t dim) {
  std::array<std::uint64_t, kMaxDim> zeros{};
  return DyadicCube(0, std::span<const std::uint64_t>(zeros.data(), dim));
}

DyadicCube DyadicCube::containing(std::span<const double> x, unsigned level) {
  std::array<std::uint64_t, kMaxDim> idx{};
  if (x.empty() || x.size() > kMaxDim) {
    throw std::invalid_argument("DyadicCube::containing: bad point dimension");
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0 && x[k] <= 1.0)) {
      throw std::out_of_range("DyadicCube::containing: point outside (0,1]^m");
    }
    // ldexp is exact, so the ceiling lands on the cube whose closed right face holds x.
    const double scaled = std::ceil(std::ldexp(x[k], static_cast<int>(level)));
    idx[k] = static_cast<std::uint64_t>(scaled) - 1;
  }
  return DyadicCube(level, std::span<const std::uint64_t>(idx.data(), x.size()));
}

DyadicCube DyadicCube::child(unsigned selector) const {
  DyadicCube c = *this;
  c.level_ = level_ + 1;
  if (c.level_ > kMaxLevel) throw std::out_of_range("DyadicCube::child: level overflow");
  for (std::size_t k = 0; k < dim_; ++k) {
    c.index_[k] = 2 * index_[k] + ((selector >> k) & 1U);
  }
  return c;
}

std::vector<DyadicCube> DyadicCube::children() const {
  std::vector<DyadicCube> out;
  out.reserve(child_count());
  for (unsigned sel = 0; sel < child_count(); ++sel) out.push_back(child(sel));
  return out;
}

DyadicCube DyadicCube::parent() const {
  if (level_ == 0) throw std::logic_error("DyadicCube::parent: unit cube has no parent");
  return ancestor(level_ - 1);
}

DyadicCube DyadicCube::ancestor(unsigned level) const {
  if (level > level_) throw std::invalid_argument("DyadicCube::ancestor: finer level");
  DyadicCube c = *this;
  c.level_ = level;
  const unsigned shift = level_ - level;
  for (std::size_t k = 0; k < dim_; ++k) c.index_[k] = index_[k] >> shift;
  return c;
}

double DyadicCube::volume() const {
  return std::ldexp(1.0, -static_cast<int>(level_ * dim_));
}

double DyadicCube::side() const { return std::ldexp(1.0, -static_cast<int>(level_)); }

double DyadicCube::lower(std::size_t axis) const {
  return std::ldexp(static_cast<double>(index_[axis]), -static_cast<int>(level_));
}

double DyadicCube::upper(std::size_t axis) const {
  return std::ldexp(static_cast<double>(index_[axis] + 1), -static_cast<int>(level_));
}

std::vector<double> DyadicCube::center() const {
  std::vector<double> c(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    c[k] = std::ldexp(static_cast<double>(2 * index_[k] + 1), -static_cast<int>(level_ + 1));
  }
  return c;
}

bool DyadicCube::contains(const DyadicCube& other) const {
  if (other.dim_ != dim_ || other.level_ < level_) return false;
  const unsigned shift = other.level_ - level_;
  for (std::size_t k = 0; k < dim_; ++k) {
    if ((other.index_[k] >> shift) != index_[k]) return false;
  }
  return true;
}

bool DyadicCube::contains_point(std::span<const double> x) const {
  if (x.size() != dim_) return false;
  for (std::size_t k = 0; k < dim_; ++k) {
    if (!(x[k] > 0.0 && x[k] <= 1.0)) return false;
  }
  return contains(containing(x, level_));
}

bool DyadicCube::disjoint(const DyadicCube& other) const {
  return !contains(other) && !other.contains(*this);
}

std::string DyadicCube::to_string() const {
  std::ostringstream os;
  os << "L" << level_ << "(";
  for (std::size_t k = 0; k < dim_; ++k) os << (k ? "," : "") << index_[k];
  os << ")";
  return os.str();
}

bool operator==(const DyadicCube& a, const DyadicCube& b) {
  if (a.level_ != b.level_ || a.dim_ != b.dim_) return false;
  for (std::size_t k = 0; k < a.dim_; ++k) {
    if (a.index_[k] != b.index_[k]) return false;
  }
  return true;
}

std::strong_ordering operator<=>(const DyadicCube& a, const DyadicCube& b) {
  if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
  if (auto c = a.level_ <=> b.level_; c != 0) return c;
  // Axis 0 varies fastest in child order, so compare the last axis first.
  for (std::size_t k = a.dim_; k-- > 0;) {
    if (auto c = a.index_[k] <=> b.index_[k]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::size_t DyadicCubeHash::operator()(const DyadicCube& c) const noexcept {
  std::size_t h = std::hash<unsigned>{}(c.level()) ^ (c.dim() << 8);
  for (std::size_t k = 0; k < c.dim(); ++k) {
    h ^= std::hash<std::uint64_t>{}(c.index(k)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace lqwidth
