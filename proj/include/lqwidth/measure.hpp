#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lqwidth/dyadic.hpp"

namespace lqwidth {

// Measure descriptions. Every variant describes a Borel probability measure
// on the half-open unit cube (0,1]^m.

struct Lebesgue {
  std::size_t dim = 1;
};

/// x -> 2^-ratio_exp * x + offset, with an offset on the 2^-ratio_exp grid.
struct DyadicMap {
  unsigned ratio_exp = 1;
  std::vector<Dyadic> offset;
};

struct DyadicIFS {
  std::size_t dim = 1;
  std::vector<DyadicMap> maps;
  std::vector<double> weights;
};

/// x -> ratio * x + offset on [0,1].
struct AffineMap1D {
  double ratio = 0.5;
  double offset = 0.0;
};

struct GeneralIFS1D {
  std::vector<AffineMap1D> maps;
  std::vector<double> weights;
  /// Recursion stops once the accumulated branch weight drops below this.
  double tolerance = 1e-12;
};

struct Atom {
  std::vector<double> point;
  double weight = 0.0;
};

struct Atomic {
  std::size_t dim = 1;
  std::vector<Atom> atoms;
};

/// Piecewise-constant density on the level-`depth` grid; axis 0 varies fastest.
struct DyadicDensity {
  std::size_t dim = 1;
  unsigned depth = 0;
  std::vector<double> density;
};

struct MixtureComponent;

struct Mixture {
  std::vector<MixtureComponent> components;
};

struct MeasureSpec {
  using Variant =
      std::variant<Lebesgue, DyadicIFS, GeneralIFS1D, Atomic, DyadicDensity, Mixture>;
  Variant value;

  MeasureSpec() = default;
  template <typename T>
  MeasureSpec(T v) : value(std::move(v)) {}  // NOLINT(google-explicit-constructor)
};

struct MixtureComponent {
  double coefficient = 0.0;
  MeasureSpec spec;
};

/// Thrown when a spec fails validation; carries every violation found.
class InvalidMeasure : public std::runtime_error {
 public:
  explicit InvalidMeasure(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Tolerance for probability normalization of weights and coefficients.
inline constexpr double kNormalizationTolerance = 1e-12;

std::size_t dimension(const MeasureSpec& spec);
std::string type_name(const MeasureSpec& spec);

/// Empty result means the spec is valid.
std::vector<std::string> validate(const MeasureSpec& spec);
void require_valid(const MeasureSpec& spec);

/// True when cube masses are exact products/sums (no tolerance-bounded recursion).
bool is_exact(const MeasureSpec& spec);

std::vector<DyadicCube> children(const DyadicCube& cube);

double cube_mass(const MeasureSpec& spec, const DyadicCube& cube);

struct WeightedCube {
  DyadicCube cube;
  double mass = 0.0;
};

/// Positive-mass cubes at level n, found by pruned descent from the unit cube.
std::vector<WeightedCube> support(const MeasureSpec& spec, unsigned level);
std::vector<DyadicCube> support_cubes(const MeasureSpec& spec, unsigned level);

/// Atoms at 1/k with weights proportional to e^-k for k = 1..cutoff.
Atomic exp_harmonic_atoms(unsigned cutoff);

/// Draws one point distributed according to the measure.
std::vector<double> sample_point(const MeasureSpec& spec, std::mt19937_64& rng);

}  // namespace lqwidth
