#include "schlab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "schlab/parallel.hpp"
#include "schlab/stats.hpp"

namespace schlab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMaxRefinements = 6;

std::size_t steps_for(double tau, const NoiseRealization& noise) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (noise.steps() == 0 || !(noise.dt > 0.0))
    throw std::invalid_argument("noise realization is empty");
  const double exact = tau / noise.dt;
  const auto k = static_cast<std::size_t>(std::llround(exact));
  if (k > noise.steps() || std::fabs(exact - static_cast<double>(k)) > 1e-6 * exact)
    throw std::invalid_argument(
        "noise realization must cover [0, tau] on its own grid");
  return k;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// E[min(1, e^X)] for X ~ N(mean, var).
double capped_lognormal_mean(double mean, double var) {
  if (var <= 0.0) return std::min(1.0, std::exp(mean));
  const double sd = std::sqrt(var);
  return normal_cdf(mean / sd) + std::exp(mean + 0.5 * var) * normal_cdf(-(mean + var) / sd);
}

template <typename F>
double simpson(F&& f, double a, double b, std::size_t intervals) {
  if (!(b > a)) return 0.0;
  if (intervals % 2 == 1) ++intervals;
  const double h = (b - a) / static_cast<double>(intervals);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i)
    sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return sum * h / 3.0;
}

double evaluate_functional(TestFunctional functional, double lambda,
                           const std::vector<double>& profile) {
  switch (functional) {
    case TestFunctional::unit:
      return 1.0;
    case TestFunctional::lambda_indicator:
      return (lambda >= 0.0 && lambda <= std::numbers::pi) ? 1.0 : 0.0;
    case TestFunctional::mid_mass_capped:
      return std::min(1.0, std::exp(profile.at(profile.size() / 2)));
    case TestFunctional::end_mass_capped:
      return std::min(1.0, std::exp(profile.back()));
  }
  return 0.0;
}

NoiseRealization noise_for(double tau, std::size_t steps, std::uint64_t seed,
                           std::uint64_t index) {
  return NoiseRealization::generate(
      tau, steps,
      stream_key(seed, static_cast<std::uint64_t>(StreamTag::sde_noise), index));
}

double phase_for(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, StreamTag::phase, index);
  return kTwoPi * rng.uniform();
}

}  // namespace

NoiseRealization NoiseRealization::generate(double horizon, std::size_t steps,
                                            std::uint64_t key) {
  if (!(horizon > 0.0) || steps == 0)
    throw std::invalid_argument("noise needs a positive horizon and step count");
  NoiseRealization noise;
  noise.dt = horizon / static_cast<double>(steps);
  noise.key = key;
  noise.dB.resize(steps);
  noise.dW_re.resize(steps);
  noise.dW_im.resize(steps);
  Rng rng(key);
  const double sd = std::sqrt(noise.dt);
  const double sd_half = std::sqrt(noise.dt / 2.0);
  for (std::size_t k = 0; k < steps; ++k) {
    noise.dB[k] = sd * rng.normal();
    noise.dW_re[k] = sd_half * rng.normal();
    noise.dW_im[k] = sd_half * rng.normal();
  }
  return noise;
}

NoiseRealization NoiseRealization::zeros(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || steps == 0)
    throw std::invalid_argument("noise needs a positive horizon and step count");
  NoiseRealization noise;
  noise.dt = horizon / static_cast<double>(steps);
  noise.dB.assign(steps, 0.0);
  noise.dW_re.assign(steps, 0.0);
  noise.dW_im.assign(steps, 0.0);
  noise.drift_only = true;
  return noise;
}

NoiseRealization NoiseRealization::refined() const {
  if (drift_only) return zeros(horizon(), 2 * steps());
  NoiseRealization out;
  out.dt = dt / 2.0;
  out.key = mix64(key ^ 0x5bd1e995u);
  Rng rng(out.key);
  const std::size_t n = steps();
  out.dB.resize(2 * n);
  out.dW_re.resize(2 * n);
  out.dW_im.resize(2 * n);
  // Bridge midpoint: first half = increment / 2 + N(0, var / 4).
  auto split = [&](const std::vector<double>& in, std::vector<double>& dst,
                   double var) {
    const double sd = std::sqrt(var / 4.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double first = in[k] / 2.0 + sd * rng.normal();
      dst[2 * k] = first;
      dst[2 * k + 1] = in[k] - first;
    }
  };
  split(dB, out.dB, dt);
  split(dW_re, out.dW_re, dt / 2.0);
  split(dW_im, out.dW_im, dt / 2.0);
  return out;
}

LimitPath simulate_limit_path(double lambda, double tau,
                              const NoiseRealization& noise) {
  const std::size_t K = steps_for(tau, noise);
  LimitPath path;
  path.lambda = lambda;
  path.dt = noise.dt;
  path.theta.assign(K + 1, 0.0);
  path.r.assign(K + 1, 0.0);
  path.phi.assign(K + 1, 0.0);
  const double dt = noise.dt;
  double theta = 0.0, r = 0.0, phi = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double re = c * noise.dW_re[k] + s * noise.dW_im[k];
    const double im = c * noise.dW_im[k] - s * noise.dW_re[k];
    theta += lambda * dt + noise.dB[k] + im;
    r += 0.25 * dt + re;
    phi += dt - re * phi;
    path.theta[k + 1] = theta;
    path.r[k + 1] = r;
    path.phi[k + 1] = phi;
  }
  return path;
}

LimitState integrate_limit(double lambda, double tau,
                           const NoiseRealization& noise,
                           std::span<double> r_profile) {
  const std::size_t K = steps_for(tau, noise);
  const double dt = noise.dt;
  const double drift = lambda * dt;
  const double* dB = noise.dB.data();
  const double* wr = noise.dW_re.data();
  const double* wi = noise.dW_im.data();

  std::size_t next_mark = 0;
  const std::size_t marks = r_profile.size();
  auto mark_step = [&](std::size_t j) {
    return marks <= 1 ? std::size_t{0} : (j * K + (marks - 1) / 2) / (marks - 1);
  };

  LimitState st;
  st.min_phi = 0.0;
  double theta = 0.0, r = 0.0, phi = 0.0;
  double max_step = 0.0, min_phi = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    while (next_mark < marks && mark_step(next_mark) == k) r_profile[next_mark++] = r;
    const double c = std::cos(theta), s = std::sin(theta);
    const double re = c * wr[k] + s * wi[k];
    const double im = c * wi[k] - s * wr[k];
    const double step = drift + dB[k] + im;
    theta += step;
    r += 0.25 * dt + re;
    phi += dt - re * phi;
    max_step = std::max(max_step, std::fabs(step));
    min_phi = std::min(min_phi, phi);
  }
  while (next_mark < marks) r_profile[next_mark++] = r;
  st.theta = theta;
  st.r = r;
  st.phi = phi;
  st.min_phi = min_phi;
  st.max_step_theta = max_step;
  return st;
}

SchSample sample_sch(double tau, double lo, double hi, double phase,
                     const NoiseRealization& noise_in,
                     const SchOptions& options) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi >= lo))
    throw std::invalid_argument("window must be finite with lo <= hi");
  if (!(options.tol > 0.0)) throw std::invalid_argument("root tolerance must be positive");
  if (hi - lo > options.max_window)
    throw std::length_error("Sch window length " + std::to_string(hi - lo) +
                            " exceeds the path storage budget");
  steps_for(tau, noise_in);

  NoiseRealization refined_noise;
  const NoiseRealization* noise = &noise_in;
  SchSample out;
  out.tau = tau;
  out.window_lo = lo;
  out.window_hi = hi;
  out.phase = phase;

  for (std::size_t attempt = 0;; ++attempt) {
    out.roots.clear();
    bool unresolved = false;
    auto eval = [&](double lambda) {
      ++out.evaluations;
      LimitState st = integrate_limit(lambda / tau, tau, *noise);
      // The continuous branch of theta is only tracked if every step moves
      // less than pi, and monotonicity in lambda needs phi > 0.
      if (st.max_step_theta >= std::numbers::pi || !(st.min_phi >= 0.0))
        unresolved = true;
      return st;
    };

    double lam = lo;
    LimitState cur = eval(lam);
    double phi_max = std::max(cur.phi, 1e-3 * tau);
    while (lam < hi && !unresolved) {
      const double h = tau * std::numbers::pi / (2.0 * phi_max);
      const double nxt = std::min(hi, lam + h);
      const LimitState next = eval(nxt);
      phi_max = std::max(phi_max, next.phi);
      if (next.theta < cur.theta) {
        unresolved = true;
        break;
      }
      // Targets 2 pi m + phase in [theta(lam), theta(nxt)).
      double target = phase + kTwoPi * std::ceil((cur.theta - phase) / kTwoPi);
      if (target < cur.theta) target += kTwoPi;
      for (; target < next.theta; target += kTwoPi) {
        double a = lam, b = nxt;
        double fa = cur.theta - target;
        if (fa == 0.0) {
          out.roots.push_back(a);
          continue;
        }
        double x = a + (target - cur.theta) / (next.theta - cur.theta) * (b - a);
        double root = x;
        for (int it = 0; it < 200; ++it) {
          const LimitState st = eval(x);
          const double f = st.theta - target;
          root = x;
          if (std::fabs(f) <= options.tol) break;
          if (f < 0.0)
            a = x;
          else
            b = x;
          if (b - a <= 1e-15 * std::max(1.0, std::fabs(x))) break;
          const double slope = st.phi / tau;
          double xn = slope > 0.0 ? x - f / slope : 0.5 * (a + b);
          if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
          x = xn;
        }
        out.roots.push_back(root);
      }
      lam = nxt;
      cur = next;
    }
    if (!unresolved) break;
    if (attempt >= kMaxRefinements)
      throw std::runtime_error(
          "Euler scheme does not resolve theta on this window even after "
          "refining the noise; use a smaller dt or window");
    refined_noise = noise->refined();
    noise = &refined_noise;
    ++out.refinements;
  }

  std::sort(out.roots.begin(), out.roots.end());
  out.roots.erase(std::unique(out.roots.begin(), out.roots.end()), out.roots.end());
  if (options.profile_points > 0) {
    out.profiles.reserve(out.roots.size());
    for (double root : out.roots) {
      std::vector<double> profile(options.profile_points + 1);
      integrate_limit(root / tau, tau, *noise, profile);
      out.profiles.push_back(std::move(profile));
    }
  }
  return out;
}

std::vector<double> first_roots_after(double tau, double start, double phase,
                                      const NoiseRealization& noise,
                                      std::size_t count,
                                      const SchOptions& options) {
  SchOptions opts = options;
  opts.profile_points = 0;
  std::vector<double> found;
  double lo = start;
  double length = 2.0 * std::numbers::pi * static_cast<double>(std::max<std::size_t>(count, 1)) + 1.0;
  while (found.size() < count) {
    if (lo - start > opts.max_window)
      throw std::length_error("no Sch points found within the search budget");
    const SchSample s = sample_sch(tau, lo, lo + length, phase, noise, opts);
    for (double root : s.roots)
      if (root > start && found.size() < count) found.push_back(root);
    lo += length;
    length *= 2.0;
  }
  return found;
}

std::vector<double> two_sided_brownian(std::span<const double> times, Rng& rng) {
  std::vector<double> values(times.size(), 0.0);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > 0.0)
      pos.push_back(i);
    else if (times[i] < 0.0)
      neg.push_back(i);
  }
  auto walk = [&](std::vector<std::size_t>& idx) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::fabs(times[a]) < std::fabs(times[b]);
    });
    double t_prev = 0.0, z = 0.0;
    for (std::size_t i : idx) {
      const double t = std::fabs(times[i]);
      z += std::sqrt(t - t_prev) * rng.normal();
      values[i] = z;
      t_prev = t;
    }
  };
  walk(pos);
  walk(neg);
  return values;
}

LimitShapeSample sample_limit_shape(double tau, Rng& rng, std::size_t bin_count,
                                    const LimitShapeOptions& options) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (bin_count < 1 || options.oversample < 1)
    throw std::invalid_argument("bin_count and oversample must be positive");
  LimitShapeSample out;
  out.peak = options.fix_peak ? options.peak : rng.uniform();
  const std::size_t fine = bin_count * options.oversample;
  std::vector<double> s(fine);
  for (std::size_t i = 0; i < fine; ++i)
    s[i] = tau * ((static_cast<double>(i) + 0.5) / static_cast<double>(fine) - out.peak);
  std::vector<double> z = options.zero_brownian ? std::vector<double>(fine, 0.0)
                                                : two_sided_brownian(s, rng);
  std::vector<double> logs(fine);
  for (std::size_t i = 0; i < fine; ++i) logs[i] = log_limit_shape(s[i], z[i]);
  const double top = *std::max_element(logs.begin(), logs.end());
  out.measure.bins.assign(bin_count, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < fine; ++i) {
    const double v = std::exp(logs[i] - top);
    out.measure.bins[i / options.oversample] += v;
    total += v;
  }
  const double scale = static_cast<double>(bin_count) / total;
  for (double& b : out.measure.bins) b *= scale;
  return out;
}

QMatrixPath simulate_Q_matrix(double lambda, const EnergyContext& ctx,
                              const NoiseRealization& noise) {
  QMatrixPath path;
  path.dt = noise.dt;
  path.Q.resize(noise.steps() + 1);
  path.Q[0] = Mat2c::identity();
  const Complex I(0.0, 1.0);
  for (std::size_t k = 0; k < noise.steps(); ++k) {
    const Complex dW(noise.dW_re[k], noise.dW_im[k]);
    const Complex diag = I * (lambda * noise.dt + noise.dB[k]);
    const Mat2c generator{0.5 * diag, 0.5 * dW, 0.5 * std::conj(dW), -0.5 * diag};
    const Mat2c& Q = path.Q[k];
    path.Q[k + 1] = Q + ctx.Z * (generator * (ctx.Zinv * Q));
  }
  return path;
}

Vec2c q_vector(const EnergyContext& ctx, const Mat2c& Q) {
  return (ctx.Zinv * Q) * Vec2c{Complex(1.0), Complex(0.0)};
}

const char* to_string(TestFunctional f) {
  switch (f) {
    case TestFunctional::unit:
      return "unit";
    case TestFunctional::lambda_indicator:
      return "lambda_indicator";
    case TestFunctional::mid_mass_capped:
      return "mid_mass_capped";
    case TestFunctional::end_mass_capped:
      return "end_mass_capped";
  }
  return "unknown";
}

TestFunctional parse_test_functional(std::string_view name) {
  for (auto f : {TestFunctional::unit, TestFunctional::lambda_indicator,
                 TestFunctional::mid_mass_capped, TestFunctional::end_mass_capped})
    if (name == to_string(f)) return f;
  throw std::invalid_argument("unknown test functional: " + std::string(name));
}

double intensity_rhs(double tau, double lo, double hi, TestFunctional functional) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  double lambda_mass = 0.0;
  if (functional == TestFunctional::lambda_indicator)
    lambda_mass = std::max(0.0, std::min(hi, std::numbers::pi) - std::max(lo, 0.0));
  else
    lambda_mass = std::max(0.0, hi - lo);

  double path_factor = 1.0;
  if (functional == TestFunctional::mid_mass_capped ||
      functional == TestFunctional::end_mass_capped) {
    const double s = functional == TestFunctional::mid_mass_capped ? tau / 2.0 : tau;
    // Under the tilted law the path at time s is B_s / sqrt2 + f^u(s) / 2,
    // f^u(s) = (u - |u - s|) / 2.
    auto integrand = [&](double u) {
      const double f = 0.5 * (u - std::fabs(u - s));
      return capped_lognormal_mean(0.5 * f, s / 2.0);
    };
    path_factor = (simpson(integrand, 0.0, std::min(s, tau), 4000) +
                   simpson(integrand, s, tau, 4000)) /
                  tau;
  }
  return lambda_mass / kTwoPi * path_factor;
}

SchSample sample_sch_star(double tau, double lo, double hi, std::uint64_t seed,
                          std::uint64_t trial, std::size_t steps,
                          const SchOptions& options) {
  return sample_sch(tau, lo, hi, phase_for(seed, trial),
                    noise_for(tau, steps, seed, trial), options);
}

IntensityResult intensity_check(double tau, double lo, double hi,
                                TestFunctional functional, std::size_t trials,
                                std::uint64_t seed, std::size_t steps,
                                unsigned threads) {
  if (trials < 2) throw std::invalid_argument("intensity_check needs >= 2 trials");
  std::vector<double> sums(trials), counts(trials);
  SchOptions opts;
  opts.profile_points = 2;  // r at 0, tau / 2, tau
  parallel_for(trials, threads, [&](std::size_t i) {
    const SchSample sample = sample_sch_star(tau, lo, hi, seed, i, steps, opts);
    double total = 0.0;
    for (std::size_t k = 0; k < sample.roots.size(); ++k)
      total += evaluate_functional(functional, sample.roots[k], sample.profiles[k]);
    sums[i] = total;
    counts[i] = static_cast<double>(sample.roots.size());
  });
  const MeanEstimate lhs = mean_estimate(sums);
  const MeanEstimate count = mean_estimate(counts);
  IntensityResult out;
  out.trials = trials;
  out.lhs = lhs.mean;
  out.lhs_stderr = lhs.stderr_;
  out.rhs = intensity_rhs(tau, lo, hi, functional);
  out.rhs_stderr = 0.0;
  out.stderr_combined = std::hypot(out.lhs_stderr, out.rhs_stderr);
  out.mean_root_count = count.mean;
  out.root_count_stderr = count.stderr_;
  return out;
}

TranslationResult translation_invariance_test(double tau, double u,
                                              double phase, std::size_t trials,
                                              std::uint64_t seed,
                                              std::size_t steps,
                                              unsigned threads) {
  if (trials < 100) throw std::invalid_argument("translation test needs >= 100 trials");
  TranslationResult out;
  out.shifted.resize(trials);
  out.direct.resize(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    const NoiseRealization a = noise_for(tau, steps, seed, 2 * i);
    out.shifted[i] = first_roots_after(tau, -u, phase, a, 1).front() + u;
    const NoiseRealization b = noise_for(tau, steps, seed, 2 * i + 1);
    out.direct[i] = first_roots_after(tau, 0.0, phase + u, b, 1).front();
  });
  out.ks = ks_two_sample(out.shifted, out.direct);
  out.critical_1pct = ks_critical_two_sample(trials, trials, 0.01);
  return out;
}

LimitLocalSample limit_local_sample(double tau, std::uint64_t seed,
                                    std::uint64_t trial, std::size_t steps,
                                    std::size_t profile_points) {
  const NoiseRealization noise = noise_for(tau, steps, seed, trial);
  const auto roots = first_roots_after(tau, 0.0, phase_for(seed, trial), noise, 2);
  LimitLocalSample out;
  out.first = roots[0];
  out.gap = roots[1] - roots[0];
  if (profile_points > 0) {
    out.r_profile.assign(profile_points + 1, 0.0);
    integrate_limit(roots[0] / tau, tau, noise, out.r_profile);
  }
  return out;
}

double limit_first_gap(double tau, std::uint64_t seed, std::uint64_t trial,
                       std::size_t steps) {
  const NoiseRealization noise = noise_for(tau, steps, seed, trial);
  const auto roots = first_roots_after(tau, 0.0, phase_for(seed, trial), noise, 2);
  return roots[1] - roots[0];
}

std::size_t limit_count(double tau, double lo, double hi, std::uint64_t seed,
                        std::uint64_t trial, std::size_t steps) {
  const NoiseRealization noise = noise_for(tau, steps, seed, trial);
  SchOptions opts;
  opts.profile_points = 0;
  return sample_sch(tau, lo, hi, phase_for(seed, trial), noise, opts).roots.size();
}

}  // namespace schlab
