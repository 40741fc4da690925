#include "schlab/shape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "schlab/rng.hpp"
#include "schlab/stats.hpp"

namespace schlab {

double ShapeMeasure::total_mass() const noexcept {
  double sum = 0.0;
  for (double b : bins) sum += b;
  return bins.empty() ? 0.0 : sum / static_cast<double>(bins.size());
}

ShapeMeasure shape_from_masses(std::span<const double> masses,
                               std::size_t bin_count) {
  const std::size_t n = masses.size();
  if (bin_count < 1 || bin_count > n)
    throw std::invalid_argument("bin_count must lie in [1, n]");
  // In units of 1 / (n B): site l (0-based) covers [l B, (l+1) B) and bin j
  // covers [j n, (j+1) n). Bin density = sum of mass * overlap.
  ShapeMeasure out;
  out.bins.assign(bin_count, 0.0);
  const auto B = static_cast<std::uint64_t>(bin_count);
  const auto N = static_cast<std::uint64_t>(n);
  for (std::uint64_t l = 0; l < N; ++l) {
    const std::uint64_t lo = l * B, hi = (l + 1) * B;
    for (std::uint64_t j = lo / N; j < B && j * N < hi; ++j) {
      const std::uint64_t overlap = std::min(hi, (j + 1) * N) - std::max(lo, j * N);
      out.bins[j] += masses[l] * static_cast<double>(overlap);
    }
  }
  return out;
}

ShapeMeasure shape_measure(const SpectralPair& pair, std::size_t bin_count) {
  std::vector<double> masses(pair.psi.size());
  std::transform(pair.psi.begin(), pair.psi.end(), masses.begin(),
                 [](double v) { return v * v; });
  return shape_from_masses(masses, bin_count);
}

double peak(const ShapeMeasure& measure, std::size_t window) {
  const std::size_t B = measure.bin_count();
  if (window < 1 || window > B)
    throw std::invalid_argument("peak window must lie in [1, bin_count]");
  double running = 0.0;
  for (std::size_t j = 0; j < window; ++j) running += measure.bins[j];
  double best = running;
  std::size_t best_start = 0;
  for (std::size_t start = 1; start + window <= B; ++start) {
    running += measure.bins[start + window - 1] - measure.bins[start - 1];
    if (running > best) {
      best = running;
      best_start = start;
    }
  }
  return (static_cast<double>(best_start) + 0.5 * static_cast<double>(window)) /
         static_cast<double>(B);
}

LogProfile log_profile(const ShapeMeasure& measure, double peak_location) {
  LogProfile out;
  out.points.reserve(measure.bin_count());
  for (std::size_t j = 0; j < measure.bin_count(); ++j) {
    const double b = measure.bins[j];
    if (!(b > 0.0)) {
      ++out.skipped_zero_bins;
      continue;
    }
    out.points.push_back(
        {std::fabs(measure.bin_center(j) - peak_location), std::log(b)});
  }
  return out;
}

double fit_decay_slope(const LogProfile& profile, double min_distance) {
  double sx = 0.0, sy = 0.0;
  std::size_t m = 0;
  for (const auto& p : profile.points) {
    if (p.distance < min_distance) continue;
    sx += p.distance;
    sy += p.log_density;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : profile.points) {
    if (p.distance < min_distance) continue;
    sxx += (p.distance - mx) * (p.distance - mx);
    sxy += (p.distance - mx) * (p.log_density - my);
  }
  if (!(sxx > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

SpectralPair select_eigenpair(const TridiagModel& model, std::uint64_t seed,
                              std::uint64_t trial, const EigenSelection& selection) {
  const std::size_t n = model.size();
  const double tol = default_eigen_tolerance(model);
  std::size_t index = 0;
  if (selection.use_index) {
    if (selection.index >= n)
      throw std::out_of_range("eigenvalue index exceeds n - 1");
    index = selection.index;
  } else if (selection.nearest_to_energy && selection.by_rank) {
    const double rank = std::floor(static_cast<double>(n) * arcsine_cdf_clamped(selection.energy));
    index = std::min(n - 1, static_cast<std::size_t>(std::max(0.0, rank)));
  } else if (selection.nearest_to_energy) {
    const std::size_t below = sturm_count(model, selection.energy);
    const std::size_t first = below > 0 ? below - 1 : 0;
    const std::size_t last = std::min(n, below + 1);
    const auto candidates = eigenvalues_by_index(model, first, last, tol);
    index = first;
    for (std::size_t k = 1; k < candidates.size(); ++k)
      if (std::fabs(candidates[k] - selection.energy) <
          std::fabs(candidates[index - first] - selection.energy))
        index = first + k;
  } else {
    Rng rng = Rng::stream(seed, StreamTag::selection, trial);
    index = static_cast<std::size_t>(rng.below(n));
  }
  const double mu = eigenvalues_by_index(model, index, index + 1, tol).front();
  SpectralPair pair = eigenvector(model, mu, seed ^ trial);
  pair.index = index;
  return pair;
}

ShapeSample finite_shape_sample(const ModelParams& params,
                                const NoiseSpec& noise, std::uint64_t trial,
                                const EigenSelection& selection,
                                std::size_t bin_count, std::size_t window) {
  const TridiagModel model = sample_model(params, noise, trial);
  const SpectralPair pair = select_eigenpair(model, params.seed, trial, selection);
  ShapeSample sample;
  sample.index = pair.index;
  sample.mu = pair.mu;
  sample.measure = shape_measure(pair, bin_count);
  sample.peak = peak(sample.measure, window);
  sample.slope = fit_decay_slope(
      log_profile(sample.measure, sample.peak),
      static_cast<double>(window) / static_cast<double>(bin_count));
  return sample;
}

}  // namespace schlab
