#pragma once

// Limiting objects of the critical model, simulated by Euler-Maruyama:
//
//   d theta = lambda dt + dB + Im(e^{-i theta} dW)
//   d r     = dt / 4      + Re(e^{-i theta} dW)
//   d phi   = dt          - Re(e^{-i theta} dW) phi          (phi = d theta / d lambda)
//
// with B real and W = (B2 + i B3) / sqrt(2) complex Brownian motions. One
// stored noise realization drives every lambda, so level sets in lambda are
// well defined. Sch_tau^phase = { lambda : theta^{lambda/tau}(tau) in 2 pi Z + phase }.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "schlab/mat2.hpp"
#include "schlab/model.hpp"
#include "schlab/rng.hpp"
#include "schlab/shape.hpp"

namespace schlab {

inline constexpr std::size_t kDefaultSdeSteps = 5000;
inline constexpr std::size_t kDefaultProfilePoints = 64;

/// Stored Brownian increments over [0, horizon] on a uniform grid.
struct NoiseRealization {
  double dt = 0.0;
  std::vector<double> dB;     // real motion B, variance dt
  std::vector<double> dW_re;  // Re W increments, variance dt / 2
  std::vector<double> dW_im;  // Im W increments, variance dt / 2
  std::uint64_t key = 0;      // seeds Brownian-bridge refinements
  bool drift_only = false;    // built by zeros(); refinements stay zero

  std::size_t steps() const noexcept { return dB.size(); }
  double horizon() const noexcept { return dt * static_cast<double>(steps()); }

  static NoiseRealization generate(double horizon, std::size_t steps,
                                   std::uint64_t key);
  /// All increments zero: drift-only integration.
  static NoiseRealization zeros(double horizon, std::size_t steps);

  /// Same Brownian paths sampled at twice the resolution (Brownian bridge
  /// midpoints). Deterministic in `key`.
  NoiseRealization refined() const;
};

struct LimitPath {
  double lambda = 0.0;
  double dt = 0.0;
  std::vector<double> theta, r, phi;  // length steps + 1, starting at 0
};

/// Terminal values of one integration plus discretization diagnostics.
struct LimitState {
  double theta = 0.0;
  double r = 0.0;
  double phi = 0.0;
  double min_phi = 0.0;
  double max_step_theta = 0.0;  // largest |theta_{k+1} - theta_k|
};

/// Path with drift parameter `lambda` on [0, tau]; the noise must cover tau.
LimitPath simulate_limit_path(double lambda, double tau,
                              const NoiseRealization& noise);

/// Terminal state at time tau with drift `lambda`. When `r_profile` is
/// non-empty it receives r at the times tau * k / (size - 1).
LimitState integrate_limit(double lambda, double tau,
                           const NoiseRealization& noise,
                           std::span<double> r_profile = {});

struct SchSample {
  double tau = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  double phase = 0.0;
  std::vector<double> roots;
  /// profiles[k][j] = r^{roots[k]/tau}(tau j / P); |q|^2 = exp(r).
  std::vector<std::vector<double>> profiles;
  std::size_t evaluations = 0;
  std::size_t refinements = 0;
};

struct SchOptions {
  double tol = 1e-8;  // |theta - target| at an accepted root
  std::size_t profile_points = kDefaultProfilePoints;  // 0 disables profiles
  double max_window = 1e5;
};

/// Roots of theta^{lambda/tau}(tau) in 2 pi Z + phase with lambda in
/// [lo, hi), ascending. Throws std::length_error for windows beyond
/// options.max_window.
SchSample sample_sch(double tau, double lo, double hi, double phase,
                     const NoiseRealization& noise,
                     const SchOptions& options = {});

/// The first `count` roots strictly greater than `start`, searching windows
/// of growing length.
std::vector<double> first_roots_after(double tau, double start, double phase,
                                      const NoiseRealization& noise,
                                      std::size_t count,
                                      const SchOptions& options = {});

/// Z at the given (unsorted, any sign) times for a two-sided Brownian motion
/// Z built from two independent one-sided motions glued at 0.
std::vector<double> two_sided_brownian(std::span<const double> times, Rng& rng);

/// log S(s) = Z_s / sqrt(2) - |s| / 4.
inline double log_limit_shape(double s, double z) {
  return z / 1.4142135623730951 - (s < 0 ? -s : s) / 4.0;
}

struct LimitShapeOptions {
  bool fix_peak = false;  // use `peak` instead of a uniform draw
  double peak = 0.5;
  bool zero_brownian = false;  // Z identically 0
  std::size_t oversample = 8;  // fine grid points per shape bin
};

struct LimitShapeSample {
  double peak = 0.0;  // U
  ShapeMeasure measure;
};

/// Normalized binned density of S(tau (t - U)) on [0, 1].
LimitShapeSample sample_limit_shape(double tau, Rng& rng,
                                    std::size_t bin_count = kDefaultShapeBins,
                                    const LimitShapeOptions& options = {});

/// 2x2 complex path of dQ = 1/2 Z (diag(i l, -i l) dt + [[i dB, dW], [conj dW, -i dB]]) Z^{-1} Q.
struct QMatrixPath {
  double dt = 0.0;
  std::vector<Mat2c> Q;  // Q[0] = I
};

QMatrixPath simulate_Q_matrix(double lambda, const EnergyContext& ctx,
                              const NoiseRealization& noise);

/// First component of Z^{-1} Q (1, 0)^T; the second is its conjugate for real lambda.
Vec2c q_vector(const EnergyContext& ctx, const Mat2c& Q);

enum class TestFunctional {
  unit,              // G = 1
  lambda_indicator,  // G = 1{0 <= lambda <= pi}
  mid_mass_capped,   // G = min(1, |q|^2(tau / 2))
  end_mass_capped,   // G = min(1, |q|^2(tau))
};

const char* to_string(TestFunctional f);
TestFunctional parse_test_functional(std::string_view name);

struct IntensityResult {
  double lhs = 0.0;
  double lhs_stderr = 0.0;
  double rhs = 0.0;
  double rhs_stderr = 0.0;
  double stderr_combined = 0.0;
  double mean_root_count = 0.0;
  double root_count_stderr = 0.0;
  std::size_t trials = 0;
};

/// Both sides of E sum_{lambda in Sch*} G(lambda, |q^{lambda/tau}|^2) =
/// (1/2pi) int d lambda E G(lambda, exp(B/sqrt2 + f^U/2)) over [lo, hi).
/// The left side is Monte Carlo over `trials` realizations; the right side is
/// quadrature over U of the closed-form Gaussian expectation.
IntensityResult intensity_check(double tau, double lo, double hi,
                                TestFunctional functional, std::size_t trials,
                                std::uint64_t seed,
                                std::size_t steps = kDefaultSdeSteps,
                                unsigned threads = 1);

/// Realization `trial` of Sch*_tau as used by intensity_check: noise and
/// uniform phase drawn from the streams of `seed`.
SchSample sample_sch_star(double tau, double lo, double hi, std::uint64_t seed,
                          std::uint64_t trial, std::size_t steps = kDefaultSdeSteps,
                          const SchOptions& options = {});

/// Right-hand side alone.
double intensity_rhs(double tau, double lo, double hi, TestFunctional functional);

struct TranslationResult {
  double ks = 0.0;
  double critical_1pct = 0.0;
  std::vector<double> shifted;  // first root of Sch^phase + u above 0
  std::vector<double> direct;   // first root of Sch^{phase + u} above 0
};

TranslationResult translation_invariance_test(double tau, double u,
                                              double phase, std::size_t trials,
                                              std::uint64_t seed,
                                              std::size_t steps = kDefaultSdeSteps,
                                              unsigned threads = 1);

/// First two points above 0 of Sch*_tau (uniform phase) for realization
/// `trial` of `seed`, with r^{first/tau} sampled at `profile_points` + 1
/// equally spaced times of [0, tau].
struct LimitLocalSample {
  double first = 0.0;
  double gap = 0.0;
  std::vector<double> r_profile;
};

LimitLocalSample limit_local_sample(double tau, std::uint64_t seed,
                                    std::uint64_t trial, std::size_t steps,
                                    std::size_t profile_points);

/// Gap between the first two points above 0 of Sch*_tau (uniform phase) for
/// realization `trial` of `seed`.
double limit_first_gap(double tau, std::uint64_t seed, std::uint64_t trial,
                       std::size_t steps = kDefaultSdeSteps);

/// Number of Sch*_tau points in [lo, hi) for realization `trial`.
std::size_t limit_count(double tau, double lo, double hi, std::uint64_t seed,
                        std::uint64_t trial, std::size_t steps = kDefaultSdeSteps);

}  // namespace schlab
