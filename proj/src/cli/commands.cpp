#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "schlab/model.hpp"
#include "schlab/parallel.hpp"
#include "schlab/sde.hpp"
#include "schlab/shape.hpp"
#include "schlab/stats.hpp"
#include "schlab/tridiag.hpp"

namespace schlab::cli {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const std::vector<std::string> kNoiseChoices{"rademacher", "gaussian", "uniform"};

void add_model_params(ParamSet& p) {
  p.add({"n", Kind::integer, nullptr, "matrix size"});
  p.add({"sigma", Kind::real, 1.0, "noise strength (>= 0)"});
  p.add({"noise", Kind::text, "gaussian", "noise family", kNoiseChoices});
}

ModelParams model_params(const Json& cfg, std::uint64_t seed) {
  return ModelParams{static_cast<std::size_t>(get_uint(cfg, "n")), get_real(cfg, "sigma"), seed};
}

NoiseSpec noise_spec(const Json& cfg) { return NoiseSpec{parse_noise_family(get_text(cfg, "noise"))}; }

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void validate_model(const Json& cfg) {
  require(get_uint(cfg, "n") >= 1, "--n must be at least 1");
  require(get_real(cfg, "sigma") >= 0.0, "--sigma must be nonnegative");
}

Json summary_json(const EmpiricalSummary& s) {
  Json j = Json::object();
  j["sample_count"] = s.sample_count;
  j["mean"] = s.mean;
  j["variance"] = s.variance;
  j["ci_halfwidth"] = s.ci_halfwidth;
  return j;
}

Json ci_entry(double halfwidth) {
  Json j = Json::object();
  j["level"] = 0.99;
  j["halfwidth"] = halfwidth;
  return j;
}

Json check_json(double value, double threshold, bool pass, const std::string& rule) {
  Json j = Json::object();
  j["value"] = value;
  j["threshold"] = threshold;
  j["rule"] = rule;
  j["pass"] = pass;
  return j;
}

std::size_t resolve_window(const Json& cfg, std::size_t bins) {
  const auto w = static_cast<std::size_t>(get_uint(cfg, "window"));
  return w == 0 ? default_peak_window(bins) : w;
}

std::vector<double> index_axis(std::size_t count, double offset = 0.0) {
  std::vector<double> x(count);
  for (std::size_t i = 0; i < count; ++i) x[i] = static_cast<double>(i) + offset;
  return x;
}

// Centered boxcar average of width `window`, truncated at the ends.
std::vector<double> smooth(const std::vector<double>& v, std::size_t window) {
  const auto B = static_cast<std::ptrdiff_t>(v.size());
  const auto half_lo = static_cast<std::ptrdiff_t>(window / 2);
  const auto half_hi = static_cast<std::ptrdiff_t>(window) - half_lo - 1;
  std::vector<double> out(v.size());
  for (std::ptrdiff_t j = 0; j < B; ++j) {
    const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, j - half_lo);
    const std::ptrdiff_t b = std::min<std::ptrdiff_t>(B - 1, j + half_hi);
    double s = 0.0;
    for (std::ptrdiff_t k = a; k <= b; ++k) s += v[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(j)] = s / static_cast<double>(b - a + 1);
  }
  return out;
}

// ---------------------------------------------------------------- dos

std::unique_ptr<Command> make_dos() {
  auto c = std::make_unique<Command>();
  c->name = "dos";
  c->description = "Pooled eigenvalue distribution against the arcsine law";
  c->csv_help =
      "series: histogram (x = bin center, y = empirical density), "
      "arcsine_reference (x = bin center, y = arcsine mass of the bin / width)";
  add_model_params(c->params);
  c->params.add({"trials", Kind::integer, 1, "independent matrices pooled"});
  c->params.add({"bins", Kind::integer, 64, "histogram bins"});
  c->params.add({"ks_threshold", Kind::real, 0.02, "largest acceptable KS distance"});
  c->validate = [](const Json& cfg) {
    validate_model(cfg);
    require(get_uint(cfg, "trials") >= 1, "--trials must be at least 1");
    require(get_uint(cfg, "bins") >= 1, "--bins must be at least 1");
    require(get_real(cfg, "ks_threshold") > 0.0, "--ks-threshold must be positive");
  };
  c->run = [](const Json& cfg, const RunContext& ctx) {
    const auto res = dos_check(model_params(cfg, ctx.seed), noise_spec(cfg),
                               get_uint(cfg, "trials"), ctx.threads);
    Report r;
    const double threshold = get_real(cfg, "ks_threshold");
    const double ks = res.summary.ks_vs_reference;
    r.results = summary_json(res.summary);
    r.results["trials"] = get_uint(cfg, "trials");
    r.results["ks"] = ks;
    r.results["ks_critical_1pct"] = ks_critical_one_sample(res.pooled.size());
    r.results["check"] = check_json(ks, threshold, ks <= threshold, "ks <= threshold");
    r.ci["mean"] = ci_entry(res.summary.ci_halfwidth);
    r.statistical_failure = !(ks <= threshold);

    const auto B = static_cast<std::size_t>(get_uint(cfg, "bins"));
    const double lo = std::min(-2.0, res.pooled.front());
    const double hi = std::max(2.0, res.pooled.back());
    const double width = (hi - lo) / static_cast<double>(B);
    std::vector<double> counts(B, 0.0);
    for (double x : res.pooled) {
      const auto j = static_cast<std::size_t>(std::floor((x - lo) / width));
      counts[std::min(j, B - 1)] += 1.0;
    }
    auto& hist = r.add_series("histogram");
    auto& ref = r.add_series("arcsine_reference");
    const auto total = static_cast<double>(res.pooled.size());
    for (std::size_t j = 0; j < B; ++j) {
      const double a = lo + width * static_cast<double>(j);
      const double center = a + 0.5 * width;
      hist.x.push_back(center);
      hist.y.push_back(counts[j] / (total * width));
      ref.x.push_back(center);
      ref.y.push_back((arcsine_cdf_clamped(a + width) - arcsine_cdf_clamped(a)) / width);
    }
    return r;
  };
  return c;
}

// ---------------------------------------------------------------- eigvec

std::unique_ptr<Command> make_eigvec() {
  auto c = std::make_unique<Command>();
  c->name = "eigvec";
  c->description = "One eigenvector with its binned and smoothed l2 mass";
  c->csv_help =
      "series: psi (x = site l = 1..n, y = psi(l)), bins (x = bin center, y = "
      "density of n|psi(floor(nt))|^2 dt), smoothed (x = bin center, y = boxcar "
      "average of bins over --window)";
  add_model_params(c->params);
  c->params.add({"index", Kind::integer, nullptr, "ascending eigenvalue index", {}, true});
  c->params.add({"energy", Kind::real, nullptr, "pick the eigenvalue nearest this energy", {}, true});
  c->params.add({"trial", Kind::integer, 0, "matrix realization number"});
  c->params.add({"bins", Kind::integer, kDefaultShapeBins, "shape bins"});
  c->params.add({"window", Kind::integer, 0, "peak/smoothing window in bins (0: bins/16)"});
  c->validate = [](const Json& cfg) {
    validate_model(cfg);
    const auto n = get_uint(cfg, "n"), bins = get_uint(cfg, "bins");
    require(bins >= 1 && bins <= n, "--bins must lie in [1, n]");
    require(get_uint(cfg, "window") <= bins, "--window must not exceed --bins");
    require(!(is_set(cfg, "index") && is_set(cfg, "energy")),
            "--index and --energy are mutually exclusive");
    if (is_set(cfg, "index")) require(get_uint(cfg, "index") < n, "--index must be below n");
  };
  c->run = [](const Json& cfg, const RunContext& ctx) {
    const auto params = model_params(cfg, ctx.seed);
    const auto trial = get_uint(cfg, "trial");
    const auto model = sample_model(params, noise_spec(cfg), trial);
    EigenSelection sel;
    if (is_set(cfg, "index")) {
      sel.use_index = true;
      sel.index = static_cast<std::size_t>(get_uint(cfg, "index"));
    } else if (is_set(cfg, "energy")) {
      sel.nearest_to_energy = true;
      sel.energy = get_real(cfg, "energy");
    }
    const SpectralPair pair = select_eigenpair(model, ctx.seed, trial, sel);
    const auto bins = static_cast<std::size_t>(get_uint(cfg, "bins"));
    const std::size_t window = resolve_window(cfg, bins);
    const ShapeMeasure measure = shape_measure(pair, bins);
    const double pk = peak(measure, window);
    const double slope = fit_decay_slope(log_profile(measure, pk),
                                         static_cast<double>(window) / static_cast<double>(bins));
    double norm = 0.0;
    for (double v : pair.psi) norm += v * v;

    Report r;
    r.results["mu"] = pair.mu;
    r.results["index"] = pair.index;
    r.results["residual"] = pair.residual;
    r.results["method"] = pair.method == EigenvectorMethod::transfer_recursion
                              ? "transfer_recursion"
                              : "inverse_iteration";
    r.results["norm"] = norm;
    r.results["window"] = window;
    r.results["peak"] = pk;
    r.results["slope"] = slope;
    if (params.sigma > 0.0 && std::fabs(pair.mu) < 2.0) {
      const double tau = energy_context(pair.mu, params.sigma).tau;
      r.results["tau"] = tau;
      r.results["expected_slope"] = -tau / 4.0;
    } else {
      r.results["tau"] = nullptr;
      r.results["expected_slope"] = nullptr;
    }
    auto& psi = r.add_series("psi");
    psi.x = index_axis(pair.psi.size(), 1.0);
    psi.y = pair.psi;
    auto& b = r.add_series("bins");
    auto& s = r.add_series("smoothed");
    for (std::size_t j = 0; j < bins; ++j) b.x.push_back(measure.bin_center(j));
    b.y = measure.bins;
    s.x = b.x;
    s.y = smooth(measure.bins, window);
    return r;
  };
  return c;
}

// ---------------------------------------------------------------- shape-stats

struct ShapeDraw {
  bool used = false;
  double tau = 0.0;
  double peak = 0.0;
  double slope = 0.0;            // anchored per block
  double slope_estimated = 0.0;  // anchored at the boxcar peak
  LogProfile profile;
};

struct Block {
  Json json;
  std::vector<double> peaks, slopes;
  std::vector<double> profile_x, profile_y, profile_n;
  MeanEstimate slope;
  double profile_slope = 0.0;  // fitted to the averaged log-profile
  double expected = 0.0;
};

Block summarize_block(const std::vector<ShapeDraw>& draws, const std::string& anchor,
                      std::size_t bins, double exclusion) {
  Block b;
  std::vector<double> slopes_est;
  double expected_sum = 0.0;
  std::size_t skipped = 0;
  // half-bin buckets: boxcar peaks sit on bin centers or bin edges
  const std::size_t buckets = 2 * bins;
  std::vector<double> sum(buckets + 1, 0.0), cnt(buckets + 1, 0.0);
  for (const auto& d : draws) {
    if (!d.used || !std::isfinite(d.slope)) {
      ++skipped;
      continue;
    }
    b.peaks.push_back(d.peak);
    b.slopes.push_back(d.slope);
    if (std::isfinite(d.slope_estimated)) slopes_est.push_back(d.slope_estimated);
    expected_sum += -d.tau / 4.0;
    for (const auto& p : d.profile.points) {
      const auto k = std::min(buckets, static_cast<std::size_t>(
                                           std::lround(p.distance * static_cast<double>(buckets))));
      sum[k] += p.log_density;
      cnt[k] += 1.0;
    }
  }
  for (std::size_t k = 0; k <= buckets; ++k) {
    if (cnt[k] > 0) {
      b.profile_x.push_back(static_cast<double>(k) / static_cast<double>(buckets));
      b.profile_y.push_back(sum[k] / cnt[k]);
      b.profile_n.push_back(cnt[k]);
    }
  }
  b.slope = mean_estimate(b.slopes);
  LogProfile averaged;
  for (std::size_t k = 0; k < b.profile_x.size(); ++k)
    averaged.points.push_back({b.profile_x[k], b.profile_y[k]});
  b.profile_slope = fit_decay_slope(averaged, exclusion);
  b.expected = b.slopes.empty() ? 0.0 : expected_sum / static_cast<double>(b.slopes.size());
  const MeanEstimate est = mean_estimate(slopes_est);

  Json peak = Json::object();
  const double ks = b.peaks.empty()
                        ? std::nan("")
                        : ks_one_sample(b.peaks, [](double x) { return std::clamp(x, 0.0, 1.0); });
  peak["mean"] = mean_estimate(b.peaks).mean;
  peak["ks_uniform"] = ks;
  peak["ks_critical_1pct"] = b.peaks.empty() ? std::nan("") : ks_critical_one_sample(b.peaks.size());
  Json slope = Json::object();
  slope["anchor"] = anchor;
  slope["mean"] = b.slope.mean;
  slope["stderr"] = b.slope.stderr_;
  slope["expected"] = b.expected;
  slope["relative_error"] = b.expected != 0.0 ? std::fabs(b.slope.mean - b.expected) / std::fabs(b.expected)
                                              : std::nan("");
  slope["averaged_profile_slope"] = b.profile_slope;
  slope["averaged_profile_relative_error"] =
      b.expected != 0.0 ? std::fabs(b.profile_slope - b.expected) / std::fabs(b.expected) : std::nan("");
  Json slope_est = Json::object();
  slope_est["mean"] = est.mean;
  slope_est["stderr"] = est.stderr_;
  b.json["samples"] = b.slopes.size();
  b.json["skipped"] = skipped;
  b.json["peak"] = std::move(peak);
  b.json["slope"] = std::move(slope);
  b.json["slope_estimated_peak"] = std::move(slope_est);
  return b;
}

std::unique_ptr<Command> make_shape_stats() {
  auto c = std::make_unique<Command>();
  c->name = "shape-stats";
  c->description = "Peak and decay statistics of eigenvector shapes against the limit shape";
  c->csv_help =
      "series: finite_n_peaks, limit_peaks (y = peak location), finite_n_slopes, "
      "limit_slopes (y = fitted log-density slope), finite_n_profile, limit_profile "
      "(x = distance from the peak, y = mean log density), finite_n_profile_counts, "
      "limit_profile_counts (y = samples averaged at that distance)";
  add_model_params(c->params);
  c->params.add({"trials", Kind::integer, 200, "finite-n eigenvector draws"});
  c->params.add({"limit_trials", Kind::integer, 0, "limit shape draws (0: same as --trials)"});
  c->params.add({"energy", Kind::real, nullptr, "draw the eigenvalue near this energy instead of uniformly", {}, true});
  c->params.add({"energy_selection", Kind::text, "rank",
                 "with --energy: rank floor(n F(E)) or the nearest eigenvalue (spacing-biased)",
                 {"rank", "nearest"}});
  c->params.add({"bins", Kind::integer, kDefaultShapeBins, "shape bins"});
  c->params.add({"window", Kind::integer, 0, "peak window in bins (0: bins/16)"});
  c->params.add({"peak_ks_threshold", Kind::real, 0.08, "largest acceptable KS of finite-n peaks vs uniform"});
  c->params.add({"slope_tolerance", Kind::real, 0.2, "largest acceptable relative error of the finite-n slope"});
  c->validate = [](const Json& cfg) {
    validate_model(cfg);
    const auto n = get_uint(cfg, "n"), bins = get_uint(cfg, "bins");
    require(get_uint(cfg, "trials") >= 2, "--trials must be at least 2");
    require(bins >= 2 && bins <= n, "--bins must lie in [2, n]");
    require(get_uint(cfg, "window") <= bins, "--window must not exceed --bins");
    require(get_real(cfg, "peak_ks_threshold") > 0.0, "--peak-ks-threshold must be positive");
    require(get_real(cfg, "slope_tolerance") > 0.0, "--slope-tolerance must be positive");
  };
  c->run = [](const Json& cfg, const RunContext& ctx) {
    const auto params = model_params(cfg, ctx.seed);
    const auto noise = noise_spec(cfg);
    const auto T = static_cast<std::size_t>(get_uint(cfg, "trials"));
    const std::size_t L = get_uint(cfg, "limit_trials") == 0
                              ? T
                              : static_cast<std::size_t>(get_uint(cfg, "limit_trials"));
    const auto bins = static_cast<std::size_t>(get_uint(cfg, "bins"));
    const std::size_t window = resolve_window(cfg, bins);
    const double exclusion = static_cast<double>(window) / static_cast<double>(bins);
    EigenSelection sel;
    if (is_set(cfg, "energy")) {
      sel.nearest_to_energy = true;
      sel.energy = get_real(cfg, "energy");
      sel.by_rank = get_text(cfg, "energy_selection") == "rank";
    }
    const bool degenerate = params.sigma == 0.0;

    std::vector<ShapeDraw> finite(T);
    parallel_for(T, ctx.threads, [&](std::size_t i) {
      const ShapeSample s = finite_shape_sample(params, noise, i, sel, bins, window);
      ShapeDraw& d = finite[i];
      d.peak = s.peak;
      d.slope = d.slope_estimated = s.slope;
      d.profile = log_profile(s.measure, s.peak);
      d.used = !degenerate && std::fabs(s.mu) < 2.0;
      if (d.used) d.tau = energy_context(s.mu, params.sigma).tau;
    });

    std::vector<ShapeDraw> limit(degenerate ? 0 : L);
    parallel_for(limit.size(), ctx.threads, [&](std::size_t i) {
      const ShapeDraw& src = finite[i % T];
      ShapeDraw& d = limit[i];
      if (!src.used) return;
      Rng rng = Rng::stream(ctx.seed, StreamTag::limit_shape, i);
      const LimitShapeSample s = sample_limit_shape(src.tau, rng, bins);
      d.used = true;
      d.tau = src.tau;
      d.peak = peak(s.measure, window);
      d.profile = log_profile(s.measure, s.peak);
      d.slope = fit_decay_slope(d.profile, exclusion);
      d.slope_estimated = fit_decay_slope(log_profile(s.measure, d.peak), exclusion);
    });

    const Block fb = summarize_block(finite, "estimated_peak", bins, exclusion);
    const Block lb = summarize_block(limit, "true_peak", bins, exclusion);

    Report r;
    r.results["degenerate"] = degenerate;
    if (sel.nearest_to_energy)
      r.results["energy_in_proven_regime"] = sel.energy != 0.0 && std::fabs(sel.energy) < 2.0;
    else
      r.results["energy_in_proven_regime"] = nullptr;
    r.results["window"] = window;
    r.results["finite_n"] = fb.json;
    r.results["limit"] = lb.json;
    Json checks = Json::object();
    if (!degenerate && !fb.slopes.empty() && !lb.slopes.empty()) {
      const double peak_ks = fb.json["peak"]["ks_uniform"].get<double>();
      const double peak_thr = get_real(cfg, "peak_ks_threshold");
      const double rel = std::fabs(fb.profile_slope - fb.expected) / std::fabs(fb.expected);
      const double tol = get_real(cfg, "slope_tolerance");
      const double dev = std::fabs(lb.slope.mean - lb.expected);
      checks["finite_peak_uniformity"] =
          check_json(peak_ks, peak_thr, peak_ks <= peak_thr, "ks_uniform <= threshold");
      checks["finite_slope"] =
          check_json(rel, tol, rel <= tol,
                     "|averaged profile slope - expected| / |expected| <= threshold");
      checks["limit_slope"] = check_json(dev, 3.0 * lb.slope.stderr_, dev <= 3.0 * lb.slope.stderr_,
                                         "|mean - expected| <= 3 stderr");
      r.statistical_failure = !(peak_ks <= peak_thr && rel <= tol && dev <= 3.0 * lb.slope.stderr_);
    }
    r.results["checks"] = std::move(checks);
    r.ci["finite_n_slope_mean"] = ci_entry(kZ99 * fb.slope.stderr_);
    r.ci["limit_slope_mean"] = ci_entry(kZ99 * lb.slope.stderr_);

    auto put = [&](const std::string& name, const std::vector<double>& y) {
      auto& s = r.add_series(name);
      s.x = index_axis(y.size());
      s.y = y;
    };
    put("finite_n_peaks", fb.peaks);
    put("limit_peaks", lb.peaks);
    put("finite_n_slopes", fb.slopes);
    put("limit_slopes", lb.slopes);
    auto& fp = r.add_series("finite_n_profile");
    fp.x = fb.profile_x;
    fp.y = fb.profile_y;
    put("finite_n_profile_counts", fb.profile_n);
    put("limit_profile_counts", lb.profile_n);
    auto& lp = r.add_series("limit_profile");
    lp.x = lb.profile_x;
    lp.y = lb.profile_y;
    return r;
  };
  return c;
}

// ---------------------------------------------------------------- sch-sim

std::unique_ptr<Command> make_sch_sim() {
  auto c = std::make_unique<Command>();
  c->name = "sch-sim";
  c->description = "Sch*_tau point process samples and the intensity identity";
  c->csv_help =
      "series: roots (x = realization, y = root), q2_trial<i>_root<k> (x = t in "
      "[0, tau], y = |q|^2 = exp(r) for that root)";
  c->params.add({"tau", Kind::real, 1.0, "time horizon tau > 0"});
  c->params.add({"lo", Kind::real, 0.0, "window start (inclusive)"});
  c->params.add({"hi", Kind::real, kTwoPi, "window end (exclusive)"});
  c->params.add({"trials", Kind::integer, 1000, "independent realizations"});
  c->params.add({"steps", Kind::integer, kDefaultSdeSteps, "Euler steps over [0, tau]"});
  c->params.add({"dt", Kind::real, nullptr, "step size; overrides --steps with round(tau/dt)", {}, true});
  c->params.add({"functional", Kind::text, "unit", "test functional G",
                 {"unit", "lambda_indicator", "mid_mass_capped", "end_mass_capped"}});
  c->params.add({"profile_points", Kind::integer, kDefaultProfilePoints, "|q|^2 samples per emitted root"});
  c->params.add({"emit_trials", Kind::integer, 10, "realizations whose roots and profiles are written"});
  c->validate = [](const Json& cfg) {
    const double tau = get_real(cfg, "tau");
    require(tau > 0.0, "--tau must be positive");
    require(get_real(cfg, "hi") > get_real(cfg, "lo"), "--hi must exceed --lo");
    require(get_real(cfg, "hi") - get_real(cfg, "lo") <= SchOptions{}.max_window,
            "window longer than the supported maximum");
    require(get_uint(cfg, "trials") >= 2, "--trials must be at least 2");
    require(get_uint(cfg, "steps") >= 1, "--steps must be at least 1");
    if (is_set(cfg, "dt")) {
      const double dt = get_real(cfg, "dt");
      require(dt > 0.0 && tau / dt >= 0.5 && tau / dt < 1e8, "--dt must lie in (0, 2 tau]");
    }
    require(get_uint(cfg, "profile_points") >= 1, "--profile-points must be at least 1");
  };
  c->run = [](const Json& cfg, const RunContext& ctx) {
    const double tau = get_real(cfg, "tau");
    const double lo = get_real(cfg, "lo"), hi = get_real(cfg, "hi");
    const auto trials = static_cast<std::size_t>(get_uint(cfg, "trials"));
    const std::size_t steps = is_set(cfg, "dt")
                                  ? static_cast<std::size_t>(std::llround(tau / get_real(cfg, "dt")))
                                  : static_cast<std::size_t>(get_uint(cfg, "steps"));
    const TestFunctional f = parse_test_functional(get_text(cfg, "functional"));
    const IntensityResult res = intensity_check(tau, lo, hi, f, trials, ctx.seed, steps, ctx.threads);

    Report r;
    const double expected_count = (hi - lo) / kTwoPi;
    const double diff = std::fabs(res.lhs - res.rhs);
    const double count_dev = std::fabs(res.mean_root_count - expected_count);
    r.results["steps"] = steps;
    Json intensity = Json::object();
    intensity["functional"] = to_string(f);
    intensity["lhs"] = res.lhs;
    intensity["lhs_stderr"] = res.lhs_stderr;
    intensity["rhs"] = res.rhs;
    intensity["stderr"] = res.stderr_combined;
    intensity["check"] = check_json(diff, 3.0 * res.stderr_combined, diff <= 3.0 * res.stderr_combined,
                                    "|lhs - rhs| <= 3 stderr");
    r.results["intensity"] = std::move(intensity);
    Json counts = Json::object();
    counts["mean"] = res.mean_root_count;
    counts["stderr"] = res.root_count_stderr;
    counts["expected"] = expected_count;
    counts["check"] = check_json(count_dev, 3.0 * res.root_count_stderr,
                                 count_dev <= 3.0 * res.root_count_stderr,
                                 "|mean - (hi - lo) / 2 pi| <= 3 stderr");
    r.results["root_count"] = std::move(counts);
    r.ci["intensity_lhs"] = ci_entry(kZ99 * res.lhs_stderr);
    r.ci["root_count_mean"] = ci_entry(kZ99 * res.root_count_stderr);
    r.statistical_failure =
        !(diff <= 3.0 * res.stderr_combined && count_dev <= 3.0 * res.root_count_stderr);

    const std::size_t emit = std::min<std::size_t>(trials, get_uint(cfg, "emit_trials"));
    SchOptions opts;
    opts.profile_points = static_cast<std::size_t>(get_uint(cfg, "profile_points"));
    std::vector<SchSample> samples(emit);
    parallel_for(emit, ctx.threads, [&](std::size_t i) {
      samples[i] = sample_sch_star(tau, lo, hi, ctx.seed, i, steps, opts);
    });
    auto& roots = r.add_series("roots");
    for (std::size_t i = 0; i < emit; ++i)
      for (double root : samples[i].roots) {
        roots.x.push_back(static_cast<double>(i));
        roots.y.push_back(root);
      }
    for (std::size_t i = 0; i < emit; ++i)
      for (std::size_t k = 0; k < samples[i].roots.size(); ++k) {
        auto& s = r.add_series("q2_trial" + std::to_string(i) + "_root" + std::to_string(k));
        const auto& prof = samples[i].profiles[k];
        for (std::size_t j = 0; j < prof.size(); ++j) {
          s.x.push_back(tau * static_cast<double>(j) / static_cast<double>(prof.size() - 1));
          s.y.push_back(std::exp(prof[j]));
        }
      }
    return r;
  };
  return c;
}

// ---------------------------------------------------------------- compare

std::unique_ptr<Command> make_compare() {
  auto c = std::make_unique<Command>();
  c->name = "compare";
  c->description = "Finite-n local eigenvalue statistics near E against Sch*_tau(E)";
  c->csv_help =
      "series: finite_gaps, limit_gaps (y = first gap above 0), finite_counts, "
      "limit_counts (y = points in [-R, R]), finite_log_mass, limit_log_mass, "
      "finite_head_fraction, limit_head_fraction (local shape statistics), "
      "example_points (y = rescaled shifted eigenvalues of realization 0)";
  add_model_params(c->params);
  c->params.add({"energy", Kind::real, 0.5, "energy E with 0 < |E| < 2"});
  c->params.add({"R", Kind::real, 10.0, "counting window [-R, R] in rescaled units"});
  c->params.add({"trials", Kind::integer, 1000, "finite-n realizations"});
  c->params.add({"limit_trials", Kind::integer, 0, "Sch* realizations (0: same as --trials)"});
  c->params.add({"steps", Kind::integer, kDefaultSdeSteps, "Euler steps over [0, tau]"});
  c->params.add({"profile_points", Kind::integer, 256, "|q|^2 samples for the local shape statistics"});
  c->params.add({"alpha", Kind::real, 0.01, "KS significance level"});
  c->validate = [](const Json& cfg) {
    validate_model(cfg);
    const double E = get_real(cfg, "energy");
    require(E != 0.0 && std::fabs(E) < 2.0, "--energy must satisfy 0 < |E| < 2");
    require(get_real(cfg, "R") > 0.0, "--R must be positive");
    require(get_uint(cfg, "trials") >= 2, "--trials must be at least 2");
    require(get_uint(cfg, "steps") >= 1, "--steps must be at least 1");
    const auto pp = get_uint(cfg, "profile_points");
    require(pp >= 2 && pp % 2 == 0, "--profile-points must be even and at least 2");
    const double a = get_real(cfg, "alpha");
    require(a > 0.0 && a < 1.0, "--alpha must lie in (0, 1)");
  };
  c->run = [](const Json& cfg, const RunContext& ctx) {
    const auto params = model_params(cfg, ctx.seed);
    GapOptions opts;
    opts.E = get_real(cfg, "energy");
    opts.R = get_real(cfg, "R");
    opts.trials = static_cast<std::size_t>(get_uint(cfg, "trials"));
    opts.limit_trials = get_uint(cfg, "limit_trials") == 0
                            ? opts.trials
                            : static_cast<std::size_t>(get_uint(cfg, "limit_trials"));
    opts.sde_steps = static_cast<std::size_t>(get_uint(cfg, "steps"));
    opts.profile_points = static_cast<std::size_t>(get_uint(cfg, "profile_points"));
    opts.threads = ctx.threads;
    const double alpha = get_real(cfg, "alpha");
    const GapComparison g = gap_statistics(params, noise_spec(cfg), opts);

    Report r;
    r.results["degenerate"] = g.degenerate;
    r.results["tau"] = g.tau;
    r.results["finite_nonempty"] = g.finite_nonempty;
    Json counts = Json::object();
    counts["expected"] = g.expected_count;
    counts["finite"] = summary_json(g.finite_count_summary);
    counts["limit"] = summary_json(g.limit_count_summary);
    counts["ks"] = g.count_ks;
    counts["note"] = "diagnostic only: counts are discrete";
    r.ci["finite_count_mean"] = ci_entry(g.finite_count_summary.ci_halfwidth);
    r.ci["finite_gap_mean"] = ci_entry(g.finite_gap_summary.ci_halfwidth);

    if (g.degenerate) {
      Json lattice = Json::object();
      lattice["mean_gap"] = g.finite_gap_summary.mean;
      lattice["expected_spacing"] = kTwoPi;
      lattice["gap_variance"] = g.finite_gap_summary.variance;
      r.results["lattice"] = std::move(lattice);
      r.results["gap"] = Json::object({{"finite", summary_json(g.finite_gap_summary)}});
      r.results["count"] = std::move(counts);
    } else {
      const double gap_crit = ks_critical_two_sample(g.finite_gaps.size(), g.limit_gaps.size(), alpha);
      const double shape_crit =
          ks_critical_two_sample(g.finite_log_mass.size(), g.limit_log_mass.size(), alpha);
      Json gap = Json::object();
      gap["finite"] = summary_json(g.finite_gap_summary);
      gap["limit"] = summary_json(g.limit_gap_summary);
      gap["check"] = check_json(g.gap_ks, gap_crit, g.gap_ks < gap_crit, "two-sample ks < critical(alpha)");
      r.results["gap"] = std::move(gap);
      r.results["count"] = std::move(counts);
      Json shape = Json::object();
      shape["log_mass"] = check_json(g.mass_ks, shape_crit, g.mass_ks < shape_crit,
                                     "two-sample ks < critical(alpha)");
      shape["head_fraction"] = check_json(g.head_ks, shape_crit, g.head_ks < shape_crit,
                                          "two-sample ks < critical(alpha)");
      r.results["local_shape"] = std::move(shape);
      r.ci["limit_count_mean"] = ci_entry(g.limit_count_summary.ci_halfwidth);
      r.ci["limit_gap_mean"] = ci_entry(g.limit_gap_summary.ci_halfwidth);
      r.statistical_failure =
          !(g.gap_ks < gap_crit && g.mass_ks < shape_crit && g.head_ks < shape_crit);
    }
    Json thresholds = Json::object();
    thresholds["alpha"] = alpha;
    thresholds["gap_ks_critical"] =
        g.limit_gaps.empty() ? std::nan("")
                             : ks_critical_two_sample(g.finite_gaps.size(), g.limit_gaps.size(), alpha);
    thresholds["shape_ks_critical"] =
        g.limit_log_mass.empty()
            ? std::nan("")
            : ks_critical_two_sample(g.finite_log_mass.size(), g.limit_log_mass.size(), alpha);
    r.results["thresholds"] = std::move(thresholds);

    auto put = [&](const std::string& name, const std::vector<double>& y) {
      auto& s = r.add_series(name);
      s.x = index_axis(y.size());
      s.y = y;
    };
    put("finite_gaps", g.finite_gaps);
    put("limit_gaps", g.limit_gaps);
    put("finite_counts", g.finite_counts);
    put("limit_counts", g.limit_counts);
    put("finite_log_mass", g.finite_log_mass);
    put("limit_log_mass", g.limit_log_mass);
    put("finite_head_fraction", g.finite_head_fraction);
    put("limit_head_fraction", g.limit_head_fraction);
    put("example_points", g.example_points);
    return r;
  };
  return c;
}

}  // namespace

std::vector<std::unique_ptr<Command>> make_commands() {
  std::vector<std::unique_ptr<Command>> out;
  out.push_back(make_dos());
  out.push_back(make_eigvec());
  out.push_back(make_shape_stats());
  out.push_back(make_sch_sim());
  out.push_back(make_compare());
  return out;
}

}  // namespace schlab::cli
