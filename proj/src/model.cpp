#include "schlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace schlab {

std::string_view to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::rademacher:
      return "rademacher";
    case NoiseFamily::gaussian:
      return "gaussian";
    case NoiseFamily::uniform:
      return "uniform";
  }
  return "unknown";
}

NoiseFamily parse_noise_family(std::string_view name) {
  if (name == "rademacher") return NoiseFamily::rademacher;
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "uniform") return NoiseFamily::uniform;
  throw std::invalid_argument("unknown noise family: " + std::string(name));
}

double NoiseSpec::draw(Rng& rng) const {
  switch (family) {
    case NoiseFamily::rademacher:
      return (rng() >> 63) != 0 ? 1.0 : -1.0;
    case NoiseFamily::gaussian:
      return rng.normal();
    case NoiseFamily::uniform:
      return std::numbers::sqrt3 * (2.0 * rng.uniform() - 1.0);
  }
  return 0.0;
}

void ModelParams::validate() const {
  if (n < 1) throw std::invalid_argument("matrix size n must be at least 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("sigma must be finite and nonnegative");
}

double TridiagModel::max_abs_diag() const noexcept {
  double m = 0.0;
  for (double v : diag) m = std::max(m, std::fabs(v));
  return m;
}

double TridiagModel::lower_bound() const noexcept {
  double lo = 0.0;
  for (double v : diag) lo = std::min(lo, v);
  return lo - 2.0;
}

double TridiagModel::upper_bound() const noexcept {
  double hi = 0.0;
  for (double v : diag) hi = std::max(hi, v);
  return hi + 2.0;
}

double rho(double E) {
  if (!(std::fabs(E) < 2.0))
    throw DomainError("energy must satisfy |E| < 2, got " + std::to_string(E));
  return 1.0 / std::sqrt(1.0 - E * E / 4.0);
}

EnergyContext energy_context(double E, double sigma) {
  EnergyContext ctx;
  ctx.E = E;
  ctx.sigma = sigma;
  ctx.rho = rho(E);
  ctx.tau = (sigma * ctx.rho) * (sigma * ctx.rho);
  ctx.z = Complex(E / 2.0, std::sqrt(1.0 - E * E / 4.0));
  const Complex zbar = std::conj(ctx.z);
  const Complex pref(0.0, ctx.rho / 2.0);
  ctx.Z = {pref * zbar, -pref * ctx.z, pref, -pref};
  ctx.Zinv = {Complex(1.0), -ctx.z, Complex(1.0), -zbar};
  ctx.D = {zbar, Complex(0.0), Complex(0.0), ctx.z};
  return ctx;
}

Mat2 EnergyContext::t_power(long long power) const {
  // z = exp(i * angle); D^power = diag(exp(-i power angle), exp(i power angle)).
  const double angle = std::arg(z);
  const double phase = std::fmod(static_cast<double>(power) * angle,
                                 2.0 * std::numbers::pi);
  const Complex w = std::polar(1.0, phase);
  const Mat2c Dp{std::conj(w), Complex(0.0), Complex(0.0), w};
  return real_part(Z * Dp * Zinv);
}

TridiagModel sample_model(const ModelParams& params, const NoiseSpec& noise,
                          std::uint64_t trial) {
  params.validate();
  TridiagModel model;
  model.diag.resize(params.n);
  Rng rng = Rng::stream(params.seed, StreamTag::model, trial);
  const double scale = params.sigma / std::sqrt(static_cast<double>(params.n));
  for (double& v : model.diag) v = scale * noise.draw(rng);
  return model;
}

TridiagModel model_from_diagonal(std::span<const double> diag) {
  if (diag.empty()) throw std::invalid_argument("diagonal must be nonempty");
  for (double v : diag)
    if (!std::isfinite(v))
      throw std::invalid_argument("diagonal entries must be finite");
  return TridiagModel{std::vector<double>(diag.begin(), diag.end())};
}

}  // namespace schlab
