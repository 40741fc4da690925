#include "schlab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace schlab {
namespace {

// T(x) * m without forming T(x).
inline Mat2 left_step(double x, const Mat2& m) {
  return {x * m.a11 - m.a21, x * m.a12 - m.a22, m.a11, m.a12};
}

void check_ell(const TridiagModel& model, std::size_t ell) {
  if (ell > model.size())
    throw std::out_of_range("transfer index " + std::to_string(ell) +
                            " exceeds n = " + std::to_string(model.size()));
}

}  // namespace

TransferState t_step(double x) { return {Mat2{x, -1.0, 1.0, 0.0}}; }

TransferState transfer_product(const TridiagModel& model, double mu,
                               std::size_t ell) {
  check_ell(model, ell);
  Mat2 m = Mat2::identity();
  for (std::size_t k = 0; k < ell; ++k) m = left_step(mu - model.diag[k], m);
  return {m};
}

ScaledTransfer transfer_product_scaled(const TridiagModel& model, double mu,
                                       std::size_t ell) {
  check_ell(model, ell);
  ScaledTransfer out;
  for (std::size_t k = 0; k < ell; ++k) {
    out.m = left_step(mu - model.diag[k], out.m);
    const double norm = max_abs_entry(out.m);
    if (norm > 1e64) {
      out.m = (1.0 / norm) * out.m;
      out.log_scale += std::log(norm);
    }
  }
  return out;
}

std::vector<Mat2> transfer_products(const TridiagModel& model, double mu) {
  std::vector<Mat2> out(model.size() + 1);
  out[0] = Mat2::identity();
  for (std::size_t k = 0; k < model.size(); ++k)
    out[k + 1] = left_step(mu - model.diag[k], out[k]);
  return out;
}

double eigen_condition(const TridiagModel& model, double mu) {
  Mat2 m = Mat2::identity();
  for (double v : model.diag) {
    m = left_step(mu - v, m);
    if (!(max_abs_entry(m) <= kTransferOverflow))
      throw OverflowError("transfer product overflow at mu = " +
                          std::to_string(mu));
  }
  return m.a11;
}

double local_energy(const EnergyContext& ctx, std::size_t n, double lambda) {
  return ctx.E + lambda / (ctx.rho * static_cast<double>(n));
}

QPath q_path(const TridiagModel& model, const EnergyContext& ctx,
             double lambda) {
  rho(ctx.E);  // validates |E| < 2
  const std::size_t n = model.size();
  const double mu = local_energy(ctx, n, lambda);
  QPath path;
  path.lambda = lambda;
  path.E = ctx.E;
  path.steps.resize(n + 1);
  path.steps[0] = Mat2::identity();
  Mat2 m = Mat2::identity();
  for (std::size_t l = 1; l <= n; ++l) {
    m = left_step(mu - model.diag[l - 1], m);
    path.steps[l] = ctx.t_power(-static_cast<long long>(l)) * m;
  }
  return path;
}

std::vector<double> finite_m_measure(const TridiagModel& model,
                                     const EnergyContext& ctx, double lambda,
                                     std::size_t bins) {
  if (bins < 1) throw std::invalid_argument("bins must be at least 1");
  const std::size_t n = model.size();
  const auto products = transfer_products(model, local_energy(ctx, n, lambda));
  const double scale = 2.0 / ctx.rho;
  std::vector<double> density(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    // Bin center t = (j + 1/2) tau / bins, so floor(n t / tau) does not
    // depend on tau.
    const auto ell = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * (static_cast<double>(j) + 0.5) /
                   static_cast<double>(bins)));
    const double entry = scale * products[std::min(ell, n)].a11;
    density[j] = entry * entry;
  }
  return density;
}

double transfer_norm_sum(const TridiagModel& model, double E, double power) {
  Mat2 m = Mat2::identity();
  double total = 0.0;
  for (double v : model.diag) {
    m = left_step(E - v, m);
    total += std::pow(hs_norm(m), power);
  }
  return total;
}

}  // namespace schlab
