#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "schlab/model.hpp"

namespace schlab {

/// 99% two-sided normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct EmpiricalSummary {
  std::size_t sample_count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double ks_vs_reference = 0.0;
  double ci_halfwidth = 0.0;  // 99% normal-approximation CI for the mean
};

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanEstimate mean_estimate(std::span<const double> values);

/// Mean, unbiased variance and 99% CI half-width; ks_vs_reference is left 0.
EmpiricalSummary summarize(std::span<const double> values);

/// Antiderivative of rho / (2 pi): 1/2 + arcsin(E / 2) / pi on [-2, 2].
double arcsine_cdf(double E);
/// Same, extended by 0 below -2 and 1 above 2.
double arcsine_cdf_clamped(double E);
/// Inverse of arcsine_cdf on [0, 1].
double arcsine_quantile(double p);

/// sup_x |F_m(x) - cdf(x)|.
double ks_one_sample(std::span<const double> samples,
                     const std::function<double(double)>& cdf);
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic Kolmogorov quantile c(alpha) = sqrt(-ln(alpha / 2) / 2).
double kolmogorov_quantile(double alpha);
double ks_critical_one_sample(std::size_t m, double alpha = 0.01);
double ks_critical_two_sample(std::size_t m1, std::size_t m2, double alpha = 0.01);

struct DosResult {
  EmpiricalSummary summary;  // of the pooled eigenvalues; ks vs arcsine law
  std::vector<double> pooled;  // sorted
};

/// Pools the spectra of `trials` independent models.
DosResult dos_check(const ModelParams& params, const NoiseSpec& noise,
                    std::size_t trials, unsigned threads = 1);

struct GapOptions {
  double E = 0.5;
  double R = 10.0;  // counting window [-R, R] in rescaled units
  std::size_t trials = 1000;
  std::size_t limit_trials = 1000;
  std::size_t sde_steps = 5000;
  std::size_t profile_points = 256;  // limit |q|^2 samples for the shape statistics
  unsigned threads = 1;
};

struct GapComparison {
  double E = 0.0;
  double tau = 0.0;
  double R = 0.0;
  bool degenerate = false;  // sigma = 0: no random limit to compare with

  std::vector<double> finite_gaps, limit_gaps;
  std::vector<double> finite_counts, limit_counts;
  EmpiricalSummary finite_gap_summary, limit_gap_summary;
  EmpiricalSummary finite_count_summary, limit_count_summary;
  double gap_ks = 0.0;
  double gap_ks_critical = 0.0;
  double count_ks = 0.0;
  double expected_count = 0.0;  // R / pi

  /// Shape attached to the first point above 0: log of the total mass of
  /// m_n on [0, tau] against log of 2 int |q|^2, and the fraction of that
  /// mass in [0, tau / 2].
  std::vector<double> finite_log_mass, limit_log_mass;
  std::vector<double> finite_head_fraction, limit_head_fraction;
  double mass_ks = 0.0;
  double head_ks = 0.0;
  double shape_ks_critical = 0.0;

  /// Trials with at least one rescaled eigenvalue in [-R, R].
  std::size_t finite_nonempty = 0;
  /// Rescaled, phase-shifted eigenvalues n rho (mu - E) + alpha of trial 0.
  std::vector<double> example_points;
};

/// Rescaled eigenvalues n rho(E) (mu - E) + shift lying in [lo, hi).
std::vector<double> rescaled_eigenvalues(const TridiagModel& model, double E,
                                         double shift, double lo, double hi);

/// Finite-n point process around E against Sch*_tau(E): counts in [-R, R]
/// and the gap between the first two points above 0, with a uniform phase
/// shift alpha applied to the finite-n points.
GapComparison gap_statistics(const ModelParams& params, const NoiseSpec& noise,
                             const GapOptions& options);

}  // namespace schlab
