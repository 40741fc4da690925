#pragma once

// Spectrum of the symmetric tridiagonal model (unit off-diagonals) by Sturm
// sequence bisection, and eigenvectors from the transfer recursion.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "schlab/model.hpp"

namespace schlab {

/// Raised when a requested eigenvector does not satisfy the residual bound,
/// i.e. `mu` is not an eigenvalue to working precision.
class ResidualError : public std::runtime_error {
 public:
  ResidualError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

enum class EigenvectorMethod { transfer_recursion, inverse_iteration };

struct SpectralPair {
  double mu = 0.0;
  std::vector<double> psi;  // unit l2 norm, first nonzero entry positive
  std::size_t index = 0;    // rank of mu in the ascending spectrum
  double residual = 0.0;    // max-norm of H psi - mu psi
  EigenvectorMethod method = EigenvectorMethod::transfer_recursion;
};

/// Number of eigenvalues strictly below x.
std::size_t sturm_count(const TridiagModel& model, double x);

/// sturm_count for many shifts in one pass over the diagonal.
std::vector<std::size_t> sturm_counts(const TridiagModel& model,
                                      std::span<const double> shifts);

/// Default bracket width: 1e-12 * (2 + max|diag|).
double default_eigen_tolerance(const TridiagModel& model);

/// All n eigenvalues in ascending order, each bracketed to width <= tol.
std::vector<double> eigenvalues(const TridiagModel& model, double tol);
std::vector<double> eigenvalues(const TridiagModel& model);

/// Eigenvalues with ascending indices [first, last).
std::vector<double> eigenvalues_by_index(const TridiagModel& model,
                                         std::size_t first, std::size_t last,
                                         double tol);

/// Eigenvalues lying in the open interval (lo, hi), ascending.
std::vector<double> eigenvalues_in(const TridiagModel& model, double lo,
                                   double hi, double tol);

/// Residual bound used to accept an eigenvector: 1e-8 * (2 + max|diag|).
double residual_tolerance(const TridiagModel& model);

/// Normalized eigenvector for the eigenvalue mu. Tries the forward transfer
/// recursion psi(l+1) = (mu - v_l) psi(l) - psi(l-1) first and falls back to
/// two steps of inverse iteration. Throws ResidualError if neither passes.
SpectralPair eigenvector(const TridiagModel& model, double mu,
                         std::uint64_t seed = 0);

/// ||H psi - mu psi||_inf.
double residual(const TridiagModel& model, double mu,
                std::span<const double> psi);

/// Number of eigenvalues in the open window E -+ R / (n rho(E)).
std::size_t count_in_window(const TridiagModel& model, double E, double R);

}  // namespace schlab
