#include "schlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "schlab/parallel.hpp"
#include "schlab/sde.hpp"
#include "schlab/transfer.hpp"
#include "schlab/tridiag.hpp"

namespace schlab {

MeanEstimate mean_estimate(std::span<const double> values) {
  MeanEstimate out;
  const std::size_t m = values.size();
  if (m == 0) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(m);
  if (m > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
  }
  return out;
}

EmpiricalSummary summarize(std::span<const double> values) {
  EmpiricalSummary s;
  s.sample_count = values.size();
  if (values.empty()) return s;
  const MeanEstimate est = mean_estimate(values);
  s.mean = est.mean;
  const auto m = static_cast<double>(values.size());
  s.variance = values.size() > 1 ? est.stderr_ * est.stderr_ * m : 0.0;
  s.ci_halfwidth = kZ99 * est.stderr_;
  return s;
}

double arcsine_cdf(double E) {
  if (!(E >= -2.0 && E <= 2.0))
    throw DomainError("arcsine_cdf requires E in [-2, 2]");
  return 0.5 + std::asin(E / 2.0) / std::numbers::pi;
}

double arcsine_cdf_clamped(double E) {
  if (E <= -2.0) return 0.0;
  if (E >= 2.0) return 1.0;
  return arcsine_cdf(E);
}

double arcsine_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level outside [0, 1]");
  return 2.0 * std::sin(std::numbers::pi * (p - 0.5));
}

double ks_one_sample(std::span<const double> samples,
                     const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_one_sample needs samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    // Treat tied samples as one jump of the empirical CDF.
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(j) / m - f, f - static_cast<double>(i) / m});
    i = j;
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample needs samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double kolmogorov_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0);
}

double ks_critical_one_sample(std::size_t m, double alpha) {
  return kolmogorov_quantile(alpha) / std::sqrt(static_cast<double>(m));
}

double ks_critical_two_sample(std::size_t m1, std::size_t m2, double alpha) {
  const auto a = static_cast<double>(m1), b = static_cast<double>(m2);
  return kolmogorov_quantile(alpha) * std::sqrt((a + b) / (a * b));
}

DosResult dos_check(const ModelParams& params, const NoiseSpec& noise,
                    std::size_t trials, unsigned threads) {
  if (trials < 1) throw std::invalid_argument("dos_check needs at least one trial");
  params.validate();
  std::vector<std::vector<double>> spectra(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    spectra[i] = eigenvalues(sample_model(params, noise, i));
  });
  DosResult out;
  out.pooled.reserve(trials * params.n);
  for (const auto& s : spectra) out.pooled.insert(out.pooled.end(), s.begin(), s.end());
  std::sort(out.pooled.begin(), out.pooled.end());
  out.summary = summarize(out.pooled);
  out.summary.ks_vs_reference = ks_one_sample(out.pooled, arcsine_cdf_clamped);
  return out;
}

namespace {

struct LocalMass {
  double total;
  double head;  // part over [0, tau / 2)
};

// m_n^lambda[0, tau] with density |(2/rho) M_{n,E}(lambda, floor(n t / tau))_{11}|^2.
LocalMass finite_local_mass(const TridiagModel& model, const EnergyContext& ctx,
                            double lambda) {
  const std::size_t n = model.size();
  const auto products = transfer_products(model, local_energy(ctx, n, lambda));
  const double cell = ctx.tau / static_cast<double>(n);
  const double scale = 2.0 / ctx.rho;
  LocalMass out{0.0, 0.0};
  for (std::size_t l = 0; l < n; ++l) {
    const double v = scale * products[l].a11;
    const double piece = v * v * cell;
    out.total += piece;
    if (2 * l < n) out.head += piece;
  }
  return out;
}

// Trapezoid rule for 2 int exp(r) over [0, tau] from r on an even uniform grid.
LocalMass limit_local_mass(double tau, const std::vector<double>& r) {
  const std::size_t P = r.size() - 1;
  const double h = tau / static_cast<double>(P);
  LocalMass out{0.0, 0.0};
  for (std::size_t k = 0; k < P; ++k) {
    const double piece = h * (std::exp(r[k]) + std::exp(r[k + 1]));  // 2 * h * mean
    out.total += piece;
    if (2 * k < P) out.head += piece;
  }
  return out;
}

}  // namespace

std::vector<double> rescaled_eigenvalues(const TridiagModel& model, double E,
                                         double shift, double lo, double hi) {
  const double scale = static_cast<double>(model.size()) * rho(E);
  const double mu_lo = E + (lo - shift) / scale;
  const double mu_hi = E + (hi - shift) / scale;
  // Slightly widened so endpoint decisions are made in rescaled units.
  const double pad = 1e-9 / scale;
  std::vector<double> out;
  for (double mu : eigenvalues_in(model, mu_lo - pad, mu_hi + pad,
                                  default_eigen_tolerance(model))) {
    const double x = scale * (mu - E) + shift;
    if (x >= lo && x < hi) out.push_back(x);
  }
  return out;
}

GapComparison gap_statistics(const ModelParams& params, const NoiseSpec& noise,
                             const GapOptions& options) {
  params.validate();
  if (!(std::fabs(options.E) < 2.0) || options.E == 0.0)
    throw DomainError("gap statistics need 0 < |E| < 2");
  if (!(options.R > 0.0)) throw std::invalid_argument("window R must be positive");
  if (options.profile_points < 2 || options.profile_points % 2 != 0)
    throw std::invalid_argument("profile_points must be even and at least 2");
  const EnergyContext ctx = energy_context(options.E, params.sigma);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  GapComparison out;
  out.E = options.E;
  out.tau = ctx.tau;
  out.R = options.R;
  out.expected_count = options.R / std::numbers::pi;
  out.degenerate = params.sigma == 0.0;

  const std::size_t T = options.trials;
  out.finite_gaps.assign(T, std::numeric_limits<double>::quiet_NaN());
  out.finite_counts.assign(T, 0.0);
  out.finite_log_mass.assign(T, std::numeric_limits<double>::quiet_NaN());
  out.finite_head_fraction.assign(T, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::vector<double>> first_points(T > 0 ? 1 : 0);
  parallel_for(T, options.threads, [&](std::size_t i) {
    const TridiagModel model = sample_model(params, noise, i);
    Rng rng = Rng::stream(params.seed, StreamTag::shift, i);
    const double alpha = kTwoPi * rng.uniform();
    const auto window = rescaled_eigenvalues(model, options.E, alpha, -options.R, options.R);
    out.finite_counts[i] = static_cast<double>(window.size());
    if (i == 0) first_points[0] = window;
    // First two points above 0.
    double length = 8.0 * std::numbers::pi;
    for (int attempt = 0; attempt < 12; ++attempt, length *= 2.0) {
      auto pts = rescaled_eigenvalues(model, options.E, alpha, 0.0, length);
      pts.erase(std::remove(pts.begin(), pts.end(), 0.0), pts.end());
      if (pts.size() >= 2) {
        out.finite_gaps[i] = pts[1] - pts[0];
        const auto [mass, head] = finite_local_mass(model, ctx, pts[0] - alpha);
        out.finite_log_mass[i] = std::log(mass);
        out.finite_head_fraction[i] = head / mass;
        break;
      }
    }
  });
  if (!first_points.empty()) out.example_points = first_points[0];

  auto drop_missing = [](std::vector<double>& v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }),
            v.end());
  };
  drop_missing(out.finite_gaps);
  drop_missing(out.finite_log_mass);
  drop_missing(out.finite_head_fraction);
  std::vector<double> nonempty;
  for (double c : out.finite_counts)
    if (c > 0) nonempty.push_back(c);
  out.finite_nonempty = nonempty.size();
  out.finite_gap_summary = summarize(out.finite_gaps);
  out.finite_count_summary = summarize(out.finite_counts);

  if (out.degenerate) return out;

  const std::size_t L = options.limit_trials;
  out.limit_gaps.resize(L);
  out.limit_counts.resize(L);
  out.limit_log_mass.resize(L);
  out.limit_head_fraction.resize(L);
  const std::uint64_t limit_seed =
      stream_key(params.seed, static_cast<std::uint64_t>(StreamTag::comparison));
  parallel_for(L, options.threads, [&](std::size_t i) {
    const auto local = limit_local_sample(ctx.tau, limit_seed, i, options.sde_steps,
                                          options.profile_points);
    out.limit_gaps[i] = local.gap;
    const auto [mass, head] = limit_local_mass(ctx.tau, local.r_profile);
    out.limit_log_mass[i] = std::log(mass);
    out.limit_head_fraction[i] = head / mass;
    out.limit_counts[i] = static_cast<double>(
        limit_count(ctx.tau, -options.R, options.R, limit_seed, i, options.sde_steps));
  });
  out.limit_gap_summary = summarize(out.limit_gaps);
  out.limit_count_summary = summarize(out.limit_counts);
  if (!out.finite_gaps.empty() && !out.limit_gaps.empty()) {
    out.gap_ks = ks_two_sample(out.finite_gaps, out.limit_gaps);
    out.gap_ks_critical = ks_critical_two_sample(out.finite_gaps.size(), out.limit_gaps.size());
    out.finite_gap_summary.ks_vs_reference = out.gap_ks;
    out.limit_gap_summary.ks_vs_reference = out.gap_ks;
  }
  if (!out.finite_log_mass.empty() && !out.limit_log_mass.empty()) {
    out.mass_ks = ks_two_sample(out.finite_log_mass, out.limit_log_mass);
    out.head_ks = ks_two_sample(out.finite_head_fraction, out.limit_head_fraction);
    out.shape_ks_critical =
        ks_critical_two_sample(out.finite_log_mass.size(), out.limit_log_mass.size());
  }
  if (!out.finite_counts.empty() && !out.limit_counts.empty()) {
    out.count_ks = ks_two_sample(out.finite_counts, out.limit_counts);
    out.finite_count_summary.ks_vs_reference = out.count_ks;
    out.limit_count_summary.ks_vs_reference = out.count_ks;
  }
  return out;
}

}  // namespace schlab
