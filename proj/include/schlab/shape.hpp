#pragma once

// Shape of an eigenvector: the probability measure n |psi(floor(n t))|^2 dt on
// [0, 1], binned, together with a peak estimator and log-decay profiles.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "schlab/model.hpp"
#include "schlab/tridiag.hpp"

namespace schlab {

inline constexpr std::size_t kDefaultShapeBins = 64;

/// Densities on equal-width bins of [0, 1]; mean of `bins` is 1.
struct ShapeMeasure {
  std::vector<double> bins;

  std::size_t bin_count() const noexcept { return bins.size(); }
  double bin_center(std::size_t j) const noexcept {
    return (static_cast<double>(j) + 0.5) / static_cast<double>(bins.size());
  }
  /// sum(bins) / bin_count; 1 for a probability measure.
  double total_mass() const noexcept;
};

/// Site l = 1..n carries mass psi(l)^2 spread uniformly over [(l-1)/n, l/n);
/// bin j collects the mass falling in [j/B, (j+1)/B). Requires 1 <= B <= n.
ShapeMeasure shape_measure(const SpectralPair& pair, std::size_t bin_count);
ShapeMeasure shape_from_masses(std::span<const double> masses,
                               std::size_t bin_count);

/// Boxcar-smoothed argmax: center of the first length-`window` run of bins
/// with maximal mean.
double peak(const ShapeMeasure& measure, std::size_t window);

inline std::size_t default_peak_window(std::size_t bin_count) {
  return bin_count / 16 > 0 ? bin_count / 16 : 1;
}

struct ProfilePoint {
  double distance;
  double log_density;
};

struct LogProfile {
  std::vector<ProfilePoint> points;
  std::size_t skipped_zero_bins = 0;
};

/// (|t_j - peak|, log bins_j) for every bin with positive mass.
LogProfile log_profile(const ShapeMeasure& measure, double peak_location);

/// Least-squares slope of log density against distance, using points with
/// distance >= min_distance. NaN when fewer than two distinct distances.
double fit_decay_slope(const LogProfile& profile, double min_distance = 0.0);

/// Where to draw an eigenvalue from in finite-n shape experiments.
struct EigenSelection {
  /// Uniform over the spectrum when unset; otherwise the eigenvalue nearest
  /// to this energy.
  bool nearest_to_energy = false;
  double energy = 0.0;
  /// With nearest_to_energy: take the eigenvalue of rank floor(n F(energy)),
  /// F the arcsine distribution function, instead of the nearest one. The
  /// nearest eigenvalue is biased toward large spacings.
  bool by_rank = false;
  /// Fixed ascending index, overrides both of the above when set.
  bool use_index = false;
  std::size_t index = 0;
};

/// Eigenpair of `model` chosen per `selection`; the uniform pick draws from
/// the selection stream of (seed, trial).
SpectralPair select_eigenpair(const TridiagModel& model, std::uint64_t seed,
                              std::uint64_t trial, const EigenSelection& selection);

struct ShapeSample {
  double mu = 0.0;
  std::size_t index = 0;
  ShapeMeasure measure;
  double peak = 0.0;
  double slope = 0.0;
};

/// One finite-n draw: model for `trial`, eigenvalue per `selection`,
/// eigenvector, shape measure, peak and fitted decay slope (points closer to
/// the peak than window / bin_count are excluded from the fit).
ShapeSample finite_shape_sample(const ModelParams& params,
                                const NoiseSpec& noise, std::uint64_t trial,
                                const EigenSelection& selection,
                                std::size_t bin_count, std::size_t window);

}  // namespace schlab
