#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "closed_forms.hpp"
#include "schlab/shape.hpp"
#include "schlab/stats.hpp"

using namespace schlab;

namespace {

SpectralPair pair_from(std::vector<double> psi) {
  SpectralPair p;
  p.psi = std::move(psi);
  return p;
}

std::vector<double> random_unit(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> psi(n);
  double norm = 0.0;
  for (double& v : psi) {
    v = rng.normal();
    norm += v * v;
  }
  for (double& v : psi) v /= std::sqrt(norm);
  return psi;
}

}  // namespace

TEST_CASE("shape_measure examples") {
  std::vector<double> point(8, 0.0);
  point[0] = 1.0;
  const auto m = shape_measure(pair_from(point), 4);
  CHECK(m.bins == std::vector<double>{4.0, 0.0, 0.0, 0.0});

  for (std::size_t B : {1u, 3u, 7u, 10u}) {
    const auto flat = shape_measure(pair_from(std::vector<double>(10, 1.0 / std::sqrt(10.0))), B);
    for (double b : flat.bins) CHECK(b == doctest::Approx(1.0).epsilon(1e-12));
  }

  const auto sine = shape_measure(pair_from(oracle::laplacian_eigenvector(101, 50)), 10);
  for (double b : sine.bins) CHECK(std::fabs(b - 1.0) < 0.15);

  CHECK_THROWS_AS(shape_measure(pair_from(point), 0), std::invalid_argument);
  CHECK_THROWS_AS(shape_measure(pair_from(point), 9), std::invalid_argument);
}

TEST_CASE("shape_measure: mass, nonnegativity, sign invariance") {
  for (std::size_t n : {13u, 64u, 1000u}) {
    const auto psi = random_unit(n, n);
    std::vector<double> flipped(psi);
    for (double& v : flipped) v = -v;
    for (std::size_t B : {1u, 5u, 13u}) {
      const auto a = shape_measure(pair_from(psi), B);
      const auto b = shape_measure(pair_from(flipped), B);
      CHECK(a.bins == b.bins);
      CHECK(std::fabs(a.total_mass() - 1.0) < 1e-10);
      for (double v : a.bins) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("shape_measure: refinement consistency") {
  const std::size_t n = 960;
  const auto psi = random_unit(n, 4);
  for (std::size_t k : {1u, 3u, 8u, 30u, 60u}) {
    const auto fine = shape_measure(pair_from(psi), 2 * k);
    const auto coarse = shape_measure(pair_from(psi), k);
    for (std::size_t j = 0; j < k; ++j)
      CHECK(coarse.bins[j] == doctest::Approx(0.5 * (fine.bins[2 * j] + fine.bins[2 * j + 1])).epsilon(1e-12));
  }
  // Not exact when 2k does not divide n, but still mass preserving.
  const auto odd = shape_measure(pair_from(random_unit(101, 5)), 64);
  CHECK(std::fabs(odd.total_mass() - 1.0) < 1e-10);
}

TEST_CASE("shape_measure of computed eigenvectors preserves mass") {
  const auto model = sample_model(ModelParams{500, 4.0, 3}, NoiseSpec{});
  const auto mu = eigenvalues(model);
  for (std::size_t k = 0; k < mu.size(); k += 50) {
    const auto m = shape_measure(eigenvector(model, mu[k]), kDefaultShapeBins);
    CHECK(std::fabs(m.total_mass() - 1.0) < 1e-10);
  }
}

TEST_CASE("peak examples") {
  const ShapeMeasure point{{4.0, 0.0, 0.0, 0.0}};
  CHECK(peak(point, 1) == 0.125);
  const ShapeMeasure flat{std::vector<double>(8, 1.0)};
  CHECK(peak(flat, 1) == 1.0 / 16.0);
  CHECK(peak(flat, 4) == 0.25);
  const ShapeMeasure bump{{0.0, 1.0, 3.0, 3.0, 1.0, 0.0, 0.0, 0.0}};
  CHECK(peak(bump, 2) == 0.375);
  CHECK_THROWS_AS(peak(flat, 0), std::invalid_argument);
  CHECK_THROWS_AS(peak(flat, 9), std::invalid_argument);
  CHECK(default_peak_window(64) == 4);
  CHECK(default_peak_window(8) == 1);
}

TEST_CASE("log_profile and slope fitting") {
  const double tau = 5.0, u = 0.3;
  const std::size_t B = 64;
  ShapeMeasure m;
  for (std::size_t j = 0; j < B; ++j) {
    const double t = (j + 0.5) / B;
    m.bins.push_back(std::exp(-tau * std::fabs(t - u) / 4.0) / 0.77);
  }
  const auto profile = log_profile(m, u);
  CHECK(profile.points.size() == B);
  CHECK(fit_decay_slope(profile) == doctest::Approx(-tau / 4.0).epsilon(1e-9));
  CHECK(fit_decay_slope(profile, 0.1) == doctest::Approx(-tau / 4.0).epsilon(1e-9));

  const ShapeMeasure flat{std::vector<double>(16, 1.0)};
  CHECK(std::fabs(fit_decay_slope(log_profile(flat, 0.5))) < 1e-14);

  ShapeMeasure holes{{1.0, 0.0, 2.0, 0.0}};
  const auto hp = log_profile(holes, 0.0);
  CHECK(hp.points.size() == 2);
  CHECK(hp.skipped_zero_bins == 2);
  CHECK(std::isnan(fit_decay_slope(LogProfile{{{0.1, 0.0}}})));
  CHECK(std::isnan(fit_decay_slope(profile, 2.0)));
}

TEST_CASE("finite_shape_sample: determinism and selection") {
  const ModelParams params{400, 4.0, 21};
  const EigenSelection uniform{};
  const auto a = finite_shape_sample(params, NoiseSpec{}, 3, uniform, 64, 4);
  const auto b = finite_shape_sample(params, NoiseSpec{}, 3, uniform, 64, 4);
  CHECK(a.mu == b.mu);
  CHECK(a.measure.bins == b.measure.bins);
  CHECK(a.slope == b.slope);
  CHECK(std::fabs(a.measure.total_mass() - 1.0) < 1e-10);

  EigenSelection near;
  near.nearest_to_energy = true;
  near.energy = 0.5;
  const auto s = finite_shape_sample(params, NoiseSpec{}, 0, near, 64, 4);
  const auto all = eigenvalues(sample_model(params, NoiseSpec{}, 0));
  const auto best = *std::min_element(all.begin(), all.end(), [](double x, double y) {
    return std::fabs(x - 0.5) < std::fabs(y - 0.5);
  });
  CHECK(s.mu == doctest::Approx(best).epsilon(1e-10));
  CHECK(all[s.index] == doctest::Approx(s.mu).epsilon(1e-10));

  EigenSelection rank = near;
  rank.by_rank = true;
  const auto r = finite_shape_sample(params, NoiseSpec{}, 0, rank, 64, 4);
  CHECK(r.index == static_cast<std::size_t>(std::floor(400 * arcsine_cdf(0.5))));
  CHECK(std::fabs(r.mu - 0.5) < 0.05);
  rank.energy = 2.5;
  CHECK(finite_shape_sample(params, NoiseSpec{}, 0, rank, 64, 4).index == 399);
  rank.energy = -2.5;
  CHECK(finite_shape_sample(params, NoiseSpec{}, 0, rank, 64, 4).index == 0);

  EigenSelection fixed;
  fixed.use_index = true;
  fixed.index = 17;
  CHECK(finite_shape_sample(params, NoiseSpec{}, 0, fixed, 64, 4).index == 17);
  fixed.index = 400;
  CHECK_THROWS_AS(finite_shape_sample(params, NoiseSpec{}, 0, fixed, 64, 4), std::out_of_range);
}

TEST_CASE("peak locations are roughly uniform (small run)") {
  const ModelParams params{300, 4.0, 5};
  std::vector<double> peaks;
  for (std::uint64_t t = 0; t < 300; ++t)
    peaks.push_back(finite_shape_sample(params, NoiseSpec{}, t, EigenSelection{}, 64, 4).peak);
  const double ks = ks_one_sample(peaks, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(ks < 0.12);
}
