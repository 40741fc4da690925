#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "closed_forms.hpp"
#include "jacobi.hpp"
#include "schlab/transfer.hpp"
#include "schlab/tridiag.hpp"

using namespace schlab;

namespace {

TridiagModel laplacian(std::size_t n) { return TridiagModel{std::vector<double>(n, 0.0)}; }

TridiagModel seeded(std::size_t n, double sigma, std::uint64_t seed,
                    NoiseFamily family = NoiseFamily::gaussian) {
  return sample_model(ModelParams{n, sigma, seed}, NoiseSpec{family});
}

}  // namespace

TEST_CASE("sturm_count examples") {
  const auto m = laplacian(3);
  CHECK(sturm_count(m, 1.0) == 2);
  CHECK(sturm_count(m, -1.0) == 1);
  CHECK(sturm_count(m, 0.0) == 1);  // 0 is an eigenvalue: strictly below
  const auto r = seeded(40, 3.0, 2);
  CHECK(sturm_count(r, r.lower_bound() - 1e-9) == 0);
  CHECK(sturm_count(r, -2.0 - r.max_abs_diag() - 1e-9) == 0);
  CHECK(sturm_count(r, 2.0 + r.max_abs_diag() + 1e-9) == 40);
}

TEST_CASE("sturm_count is nondecreasing and agrees with multi-shift pass") {
  const auto m = seeded(60, 2.0, 7);
  std::vector<double> xs;
  for (int i = 0; i <= 400; ++i) xs.push_back(-5.0 + 10.0 * i / 400.0);
  const auto counts = sturm_counts(m, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(counts[i] == sturm_count(m, xs[i]));
    if (i > 0) CHECK(counts[i] >= counts[i - 1]);
  }
  CHECK(counts.front() == 0);
  CHECK(counts.back() == 60);
}

TEST_CASE("eigenvalues at sigma = 0 match 2 cos(pi k/(n+1))") {
  for (std::size_t n : {1u, 3u, 100u}) {
    const auto mu = eigenvalues(laplacian(n));
    const auto exact = oracle::laplacian_eigenvalues(n);
    REQUIRE(mu.size() == n);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::fabs(mu[k] - exact[k]) < 1e-11);
  }
  const auto mu3 = eigenvalues(laplacian(3));
  CHECK(mu3[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::fabs(mu3[1]) < 1e-12);
  CHECK(mu3[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("eigenvalues match the dense Jacobi oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = seeded(5 + seed * 5, 1.5, seed);
    const auto dense = oracle::jacobi_eigen(oracle::dense_model(m.diag));
    const auto mu = eigenvalues(m);
    for (std::size_t k = 0; k < mu.size(); ++k)
      CHECK(std::fabs(mu[k] - dense.values[k]) < 1e-9);
  }
}

TEST_CASE("eigenvalues: trace, sorting, interlacing") {
  const auto m = seeded(120, 2.0, 4);
  const auto mu = eigenvalues(m);
  CHECK(std::is_sorted(mu.begin(), mu.end()));
  double tr = 0.0, sum = 0.0;
  for (double v : m.diag) tr += v;
  for (double v : mu) sum += v;
  CHECK(std::fabs(tr - sum) < 1e-8 * 120);

  for (std::size_t n = 2; n <= 8; ++n) {
    const auto full = seeded(n, 1.0, 40 + n);
    TridiagModel sub{std::vector<double>(full.diag.begin(), full.diag.end() - 1)};
    const auto a = eigenvalues(full), b = eigenvalues(sub);
    const auto dense = oracle::jacobi_eigen(oracle::dense_model(sub.diag));
    for (std::size_t k = 0; k + 1 < n; ++k) {
      CHECK(a[k] <= b[k] + 1e-12);
      CHECK(b[k] <= a[k + 1] + 1e-12);
      CHECK(std::fabs(b[k] - dense.values[k]) < 1e-9);
    }
  }
}

TEST_CASE("eigenvalue brackets honor the requested tolerance") {
  const auto m = seeded(30, 1.0, 5);
  for (double tol : {1e-3, 1e-8}) {
    const auto coarse = eigenvalues(m, tol);
    const auto fine = eigenvalues(m, 1e-14);
    for (std::size_t k = 0; k < 30; ++k) CHECK(std::fabs(coarse[k] - fine[k]) <= tol);
  }
  CHECK_THROWS_AS(eigenvalues(m, 0.0), std::invalid_argument);
  const auto window = eigenvalues_in(m, -0.5, 0.5, 1e-12);
  const auto all = eigenvalues(m);
  std::vector<double> expected;
  for (double v : all)
    if (v > -0.5 && v < 0.5) expected.push_back(v);
  REQUIRE(window.size() == expected.size());
  for (std::size_t k = 0; k < window.size(); ++k) CHECK(std::fabs(window[k] - expected[k]) < 1e-11);
}

TEST_CASE("eigenvector closed forms at n = 3") {
  const auto m = laplacian(3);
  const auto zero = eigenvector(m, 0.0);
  CHECK(zero.psi[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::fabs(zero.psi[1]) < 1e-14);
  CHECK(zero.psi[2] == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(zero.index == 1);

  const auto top = eigenvector(m, std::sqrt(2.0));
  CHECK(top.psi[0] == doctest::Approx(0.5));
  CHECK(top.psi[1] == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(top.psi[2] == doctest::Approx(0.5));
  CHECK(top.index == 2);
}

TEST_CASE("eigenvectors: oracle agreement, norm, sign, residual") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = seeded(5, 1.0, 100 + seed);
    const auto dense = oracle::jacobi_eigen(oracle::dense_model(m.diag));
    const auto mu = eigenvalues(m);
    for (std::size_t k = 0; k < 5; ++k) {
      const auto pair = eigenvector(m, mu[k]);
      double norm = 0.0;
      for (double v : pair.psi) norm += v * v;
      CHECK(std::fabs(norm - 1.0) < 1e-10);
      const auto first = std::find_if(pair.psi.begin(), pair.psi.end(),
                                      [](double v) { return v != 0.0; });
      CHECK(*first > 0.0);
      CHECK(pair.residual <= residual_tolerance(m));
      CHECK(pair.index == k);
      CHECK(oracle::l2_distance_up_to_sign(pair.psi, dense.vectors[k]) < 1e-6);
    }
  }
}

TEST_CASE("eigenvector falls back to inverse iteration and reports bad mu") {
  // Strong disorder at large n: the forward recursion loses the decaying
  // solution for eigenvalues localized near the far end.
  const auto m = seeded(400, 40.0, 3);
  const auto mu = eigenvalues(m);
  std::size_t inverse_used = 0;
  for (std::size_t k = 0; k < mu.size(); k += 7) {
    const auto pair = eigenvector(m, mu[k]);
    CHECK(pair.residual <= residual_tolerance(m));
    inverse_used += pair.method == EigenvectorMethod::inverse_iteration;
  }
  CHECK(inverse_used > 0);

  const auto small = laplacian(3);
  CHECK_THROWS_AS(eigenvector(small, 0.7), ResidualError);
}

TEST_CASE("count_in_window") {
  const auto m = laplacian(3);
  CHECK(count_in_window(m, 0.1, 0.1) == 0);
  CHECK(count_in_window(m, 0.0, 0.1) == 1);
  CHECK_THROWS_AS(count_in_window(m, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(count_in_window(m, 0.0, 0.0), std::invalid_argument);

  const auto r = seeded(500, 1.0, 8);
  std::size_t prev = count_in_window(r, 0.5, 40.0);
  for (double R = 40.0; R > 0.01; R *= 0.8) {
    const std::size_t c = count_in_window(r, 0.5, R);
    CHECK(c <= prev);
    prev = c;
  }
}

TEST_CASE("Simon-Last spacing bound holds between consecutive eigenvalues") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = seeded(80, 1.0, seed);
    const auto mu = eigenvalues(m);
    for (std::size_t k = 0; k + 1 < mu.size(); ++k) {
      for (double frac : {0.1, 0.5, 0.9}) {
        const double E = mu[k] + frac * (mu[k + 1] - mu[k]);
        CHECK(mu[k + 1] - mu[k] >= 1.0 / transfer_norm_sum(m, E, 2.0));
      }
    }
  }
}

TEST_CASE("eigenvalue count bound via transfer norms (beta = 1/2)") {
  const double beta = 0.5;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto m = seeded(100, 1.0, 20 + seed);
    const auto mu = eigenvalues(m);
    for (double center : {-1.0, 0.3, 1.2}) {
      const double lo = center - 0.15, hi = center + 0.15;
      const auto N = static_cast<double>(std::count_if(
          mu.begin(), mu.end(), [&](double v) { return v > lo && v < hi; }));
      const double lhs = std::pow(std::max(N - 1.0, 0.0), 1.0 + beta);
      // Midpoint quadrature of the transfer-norm integral.
      const int cells = 4000;
      double integral = 0.0;
      for (int i = 0; i < cells; ++i) {
        const double E = lo + (i + 0.5) * (hi - lo) / cells;
        integral += transfer_norm_sum(m, E, 2.0 + 2.0 * beta) * (hi - lo) / cells;
      }
      const double rhs = std::pow(100.0 * (hi - lo), beta) * integral;
      CHECK(lhs <= rhs);
    }
  }
}
