#include "schlab/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace schlab {
namespace {

constexpr double kTinyPivot = 1e-300;

inline double guard_zero(double d) {
  return d == 0.0 ? std::copysign(kTinyPivot, d) : d;
}

// Bisection of the eigenvalues with indices [first, last), all brackets
// starting from [lo, hi] (which must satisfy count(lo) <= first and
// count(hi) >= last). All active brackets advance in lock-step so that each
// pass over the diagonal serves every eigenvalue at once.
std::vector<double> bisect_indices(const TridiagModel& model, std::size_t first,
                                   std::size_t last, double lo, double hi,
                                   double tol) {
  const std::size_t m = last - first;
  std::vector<double> lower(m, lo), upper(m, hi);
  std::vector<std::size_t> active(m);
  std::iota(active.begin(), active.end(), std::size_t{0});
  std::vector<double> mids;
  while (!active.empty()) {
    mids.resize(active.size());
    for (std::size_t j = 0; j < active.size(); ++j) {
      const std::size_t k = active[j];
      mids[j] = 0.5 * (lower[k] + upper[k]);
    }
    const auto counts = sturm_counts(model, mids);
    std::size_t kept = 0;
    for (std::size_t j = 0; j < active.size(); ++j) {
      const std::size_t k = active[j];
      const double mid = mids[j];
      if (counts[j] > first + k)
        upper[k] = mid;
      else
        lower[k] = mid;
      const double mid_next = 0.5 * (lower[k] + upper[k]);
      const bool done = upper[k] - lower[k] <= tol || mid_next == lower[k] ||
                        mid_next == upper[k];
      if (!done) active[kept++] = k;
    }
    active.resize(kept);
  }
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = 0.5 * (lower[k] + upper[k]);
  return out;
}

// LU factorization with partial pivoting of a tridiagonal matrix (the
// LAPACK dgttrf layout) and the matching solve.
struct TridiagLU {
  std::vector<double> dl, d, du, du2;
  std::vector<bool> swapped;

  TridiagLU(const TridiagModel& model, double shift, double pivot_floor) {
    const std::size_t n = model.size();
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = model.diag[i] - shift;
    dl.assign(n > 0 ? n - 1 : 0, 1.0);
    du.assign(n > 0 ? n - 1 : 0, 1.0);
    du2.assign(n > 1 ? n - 2 : 0, 0.0);
    swapped.assign(n > 0 ? n - 1 : 0, false);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::fabs(d[i]) >= std::fabs(dl[i])) {
        if (d[i] == 0.0) d[i] = pivot_floor;
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = true;
      }
    }
    if (n > 0 && std::fabs(d[n - 1]) < pivot_floor)
      d[n - 1] = std::copysign(pivot_floor, d[n - 1]);
    for (double& p : d)
      if (p == 0.0) p = pivot_floor;
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped[i]) {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl[i] * b[i];
      } else {
        b[i + 1] -= dl[i] * b[i];
      }
    }
    if (n == 0) return;
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;)
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
  }
};

void normalize_with_sign(std::vector<double>& psi) {
  double scale = 0.0;
  for (double v : psi) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return;
  double sumsq = 0.0;
  for (double& v : psi) {
    v /= scale;
    sumsq += v * v;
  }
  double norm = std::sqrt(sumsq);
  auto first = std::find_if(psi.begin(), psi.end(),
                            [](double v) { return v != 0.0; });
  if (first != psi.end() && *first < 0.0) norm = -norm;
  for (double& v : psi) v /= norm;
}

std::vector<double> forward_recursion(const TridiagModel& model, double mu) {
  const std::size_t n = model.size();
  std::vector<double> psi(n);
  psi[0] = 1.0;
  if (n > 1) psi[1] = mu - model.diag[0];
  for (std::size_t l = 1; l + 1 < n; ++l) {
    psi[l + 1] = (mu - model.diag[l]) * psi[l] - psi[l - 1];
    if (std::fabs(psi[l + 1]) > 1e150) {
      for (std::size_t k = 0; k <= l + 1; ++k) psi[k] *= 1e-150;
    }
  }
  normalize_with_sign(psi);
  return psi;
}

std::vector<double> inverse_iteration(const TridiagModel& model, double mu,
                                      std::uint64_t seed) {
  const std::size_t n = model.size();
  const double scale = 2.0 + model.max_abs_diag();
  const TridiagLU lu(model, mu,
                     std::numeric_limits<double>::epsilon() * scale);
  Rng rng = Rng::stream(seed, StreamTag::inverse_iteration, n);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (int step = 0; step < 2; ++step) {
    lu.solve(x);
    normalize_with_sign(x);
  }
  return x;
}

// Bisection down to adjacent doubles on [mu - margin, mu + margin] for the
// eigenvalue with ascending index k; the forward recursion amplifies any
// error in mu by up to the squared size of the model.
double polish(const TridiagModel& model, double mu, double margin, std::size_t k);

}  // namespace

std::size_t sturm_count(const TridiagModel& model, double x) {
  std::size_t count = 0;
  double d = 1.0;
  bool first = true;
  for (double v : model.diag) {
    d = first ? v - x : (v - x) - 1.0 / d;
    first = false;
    d = guard_zero(d);
    count += d < 0.0 ? 1 : 0;
  }
  return count;
}

std::vector<std::size_t> sturm_counts(const TridiagModel& model,
                                      std::span<const double> shifts) {
  const std::size_t m = shifts.size();
  std::vector<double> d(m);
  std::vector<std::int64_t> count(m, 0);
  const std::size_t n = model.size();
  if (n == 0) return std::vector<std::size_t>(m, 0);
  {
    const double v = model.diag[0];
    for (std::size_t j = 0; j < m; ++j) {
      double dj = v - shifts[j];
      dj = dj == 0.0 ? std::copysign(kTinyPivot, dj) : dj;
      d[j] = dj;
      count[j] += dj < 0.0;
    }
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double v = model.diag[k];
    for (std::size_t j = 0; j < m; ++j) {
      double dj = (v - shifts[j]) - 1.0 / d[j];
      dj = dj == 0.0 ? std::copysign(kTinyPivot, dj) : dj;
      d[j] = dj;
      count[j] += dj < 0.0;
    }
  }
  return {count.begin(), count.end()};
}

double default_eigen_tolerance(const TridiagModel& model) {
  return 1e-12 * (2.0 + model.max_abs_diag());
}

std::vector<double> eigenvalues(const TridiagModel& model, double tol) {
  return eigenvalues_by_index(model, 0, model.size(), tol);
}

std::vector<double> eigenvalues(const TridiagModel& model) {
  return eigenvalues(model, default_eigen_tolerance(model));
}

std::vector<double> eigenvalues_by_index(const TridiagModel& model,
                                         std::size_t first, std::size_t last,
                                         double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (first > last || last > model.size())
    throw std::out_of_range("eigenvalue index range out of bounds");
  if (first == last) return {};
  return bisect_indices(model, first, last, model.lower_bound(),
                        model.upper_bound(), tol);
}

std::vector<double> eigenvalues_in(const TridiagModel& model, double lo,
                                   double hi, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(lo < hi)) return {};
  const double lo_up = std::nextafter(lo, std::numeric_limits<double>::infinity());
  const double shifts[2] = {lo_up, hi};
  const auto counts = sturm_counts(model, shifts);
  if (counts[1] <= counts[0]) return {};
  return bisect_indices(model, counts[0], counts[1], lo, hi, tol);
}

double residual_tolerance(const TridiagModel& model) {
  return 1e-8 * (2.0 + model.max_abs_diag());
}

double residual(const TridiagModel& model, double mu,
                std::span<const double> psi) {
  const std::size_t n = model.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = (model.diag[i] - mu) * psi[i];
    if (i > 0) r += psi[i - 1];
    if (i + 1 < n) r += psi[i + 1];
    worst = std::max(worst, std::fabs(r));
  }
  return worst;
}

SpectralPair eigenvector(const TridiagModel& model, double mu,
                         std::uint64_t seed) {
  if (model.size() == 0) throw std::invalid_argument("empty model");
  const double tol = residual_tolerance(model);
  SpectralPair pair;
  pair.mu = mu;
  // mu may sit on either side of the exact eigenvalue; count with a margin.
  const double margin = 1e-10 * (2.0 + model.max_abs_diag());
  const std::size_t below = sturm_count(model, mu + margin);
  pair.index = below > 0 ? below - 1 : 0;
  mu = polish(model, mu, margin, pair.index);
  pair.mu = mu;

  pair.psi = forward_recursion(model, mu);
  pair.residual = residual(model, mu, pair.psi);
  pair.method = EigenvectorMethod::transfer_recursion;
  if (pair.residual <= tol && std::isfinite(pair.residual)) return pair;

  pair.psi = inverse_iteration(model, mu, seed);
  pair.residual = residual(model, mu, pair.psi);
  pair.method = EigenvectorMethod::inverse_iteration;
  if (pair.residual <= tol && std::isfinite(pair.residual)) return pair;

  throw ResidualError("no eigenvector with residual below tolerance for mu = " +
                          std::to_string(mu),
                      pair.residual);
}

std::size_t count_in_window(const TridiagModel& model, double E, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("window radius R must be positive");
  const double half = R / (static_cast<double>(model.size()) * rho(E));
  const double lo_up =
      std::nextafter(E - half, std::numeric_limits<double>::infinity());
  const double shifts[2] = {lo_up, E + half};
  const auto counts = sturm_counts(model, shifts);
  return counts[1] > counts[0] ? counts[1] - counts[0] : 0;
}

namespace {

double polish(const TridiagModel& model, double mu, double margin, std::size_t k) {
  double lo = mu - margin, hi = mu + margin;
  if (sturm_count(model, lo) > k || sturm_count(model, hi) <= k) return mu;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(model, mid) <= k)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

}  // namespace schlab
