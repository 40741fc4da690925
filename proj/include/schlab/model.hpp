#pragma once

// The critical random Schrodinger matrix H_n: unit off-diagonals and diagonal
// entries v_k = sigma * omega_k / sqrt(n), plus the energy-indexed constants
// (arcsine density factor, time horizon tau, diagonalizing basis of T(E)).

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "schlab/mat2.hpp"
#include "schlab/rng.hpp"

namespace schlab {

/// Thrown when an energy or parameter falls outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class NoiseFamily { rademacher, gaussian, uniform };

std::string_view to_string(NoiseFamily family);
NoiseFamily parse_noise_family(std::string_view name);

/// Law of the standardized potential omega_k: mean 0, variance 1.
/// The uniform family lives on [-sqrt(3), sqrt(3)].
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;

  double draw(Rng& rng) const;
};

struct ModelParams {
  std::size_t n = 1;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TridiagModel {
  std::vector<double> diag;

  std::size_t size() const noexcept { return diag.size(); }
  double max_abs_diag() const noexcept;
  /// Lower/upper Gershgorin bounds for the spectrum.
  double lower_bound() const noexcept;
  double upper_bound() const noexcept;
};

/// Constants attached to a bulk energy |E| < 2. T(E) = Z * D * Zinv with
/// D = diag(conj(z), z); Z maps (1, 1) to the recursion's initial vector (1, 0).
struct EnergyContext {
  double E = 0.0;
  double sigma = 0.0;
  double rho = 1.0;
  double tau = 0.0;
  Complex z;
  Mat2c Z, Zinv, D;

  /// T(E)^power computed spectrally; exact unit-modulus rotation in D.
  Mat2 t_power(long long power) const;
};

/// 1 / sqrt(1 - E^2 / 4); the arcsine density is rho / (2 pi).
double rho(double E);

EnergyContext energy_context(double E, double sigma);

/// Model for `params` whose omega's come from stream `trial` of params.seed.
/// Deterministic in (params, noise, trial).
TridiagModel sample_model(const ModelParams& params, const NoiseSpec& noise,
                          std::uint64_t trial = 0);

/// Model with a given diagonal (tests and bindings).
TridiagModel model_from_diagonal(std::span<const double> diag);

}  // namespace schlab
