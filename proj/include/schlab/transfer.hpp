#pragma once

// Transfer matrices of the eigenvalue recursion
//
//     (psi(l+1), psi(l)) = T(mu - v_l) (psi(l), psi(l-1)),  T(x) = [[x, -1], [1, 0]],
//
// their ordered products M_n(mu, l), and the regularized evolution
// Q_n(lambda, l) = T(E)^{-l} M_{n,E}(lambda, l) with mu = E + lambda / (rho n).

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "schlab/mat2.hpp"
#include "schlab/model.hpp"

namespace schlab {

/// A product whose entries left the representable range of the unscaled
/// accumulator; use transfer_product_scaled instead.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

inline constexpr double kTransferOverflow = 1e150;

struct TransferState {
  Mat2 m = Mat2::identity();
};

/// M = exp(log_scale) * m with ||m|| kept near 1.
struct ScaledTransfer {
  Mat2 m = Mat2::identity();
  double log_scale = 0.0;
};

struct QPath {
  double lambda = 0.0;
  double E = 0.0;
  std::vector<Mat2> steps;  // steps[l] = Q_n(lambda, l), l = 0..n
};

TransferState t_step(double x);

/// T(mu - v_ell) ... T(mu - v_1); identity for ell = 0.
TransferState transfer_product(const TridiagModel& model, double mu,
                               std::size_t ell);

ScaledTransfer transfer_product_scaled(const TridiagModel& model, double mu,
                                       std::size_t ell);

/// All partial products M_n(mu, l) for l = 0..n.
std::vector<Mat2> transfer_products(const TridiagModel& model, double mu);

/// (M_n(mu, n))_{11}; its real zeros are the eigenvalues of H_n.
/// Throws OverflowError once an entry exceeds kTransferOverflow.
double eigen_condition(const TridiagModel& model, double mu);

/// Spectral parameter mu = E + lambda / (rho(E) n).
double local_energy(const EnergyContext& ctx, std::size_t n, double lambda);

QPath q_path(const TridiagModel& model, const EnergyContext& ctx,
             double lambda);

/// Binned density of |(2/rho) (M_{n,E}(lambda, floor(n t / tau)))_{11}|^2 on
/// [0, tau], sampled at the bin centers.
std::vector<double> finite_m_measure(const TridiagModel& model,
                                     const EnergyContext& ctx, double lambda,
                                     std::size_t bins);

/// sum_{l=1..n} ||M_n(E, l)||_HS^power.
double transfer_norm_sum(const TridiagModel& model, double E, double power);

}  // namespace schlab
