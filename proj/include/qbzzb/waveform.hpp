#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qbzzb/prior.hpp"
#include "qbzzb/specfun.hpp"
#include "qbzzb/types.hpp"

namespace qbzzb {

/// Mean photon flux <I(t)> sampled on a time grid.
template <typename Scalar = double>
class FluxProfile {
 public:
  FluxProfile(VectorX<Scalar> grid, VectorX<Scalar> flux)
      : grid_(std::move(grid)), flux_(std::move(flux)) {
    if (grid_.size() == 0 || grid_.size() != flux_.size()) {
      throw std::invalid_argument("FluxProfile: grid/flux size mismatch");
    }
    if (!grid_.allFinite() || !flux_.allFinite()) {
      throw std::domain_error("FluxProfile: entries must be finite");
    }
    if ((flux_.array() < Scalar(0)).any()) {
      throw std::domain_error("FluxProfile: flux must be nonnegative");
    }
    for (Index i = 0; i + 1 < grid_.size(); ++i) {
      if (!(grid_[i] < grid_[i + 1])) {
        throw std::domain_error("FluxProfile: grid must be strictly increasing");
      }
    }
  }

  Index size() const { return grid_.size(); }
  const VectorX<Scalar>& grid() const { return grid_; }
  const VectorX<Scalar>& flux() const { return flux_; }

  /// Mode duration dt for a uniform grid; nonuniform spacing (beyond 1e-9
  /// relative) is a domain error.
  Scalar uniform_dt() const {
    if (grid_.size() < 2) {
      throw std::domain_error("FluxProfile: at least two samples needed to define dt");
    }
    const Scalar dt = grid_[1] - grid_[0];
    for (Index i = 1; i + 1 < grid_.size(); ++i) {
      if (std::abs(grid_[i + 1] - grid_[i] - dt) > Scalar(1e-9L) * dt) {
        throw std::domain_error("FluxProfile: grid is not uniform");
      }
    }
    return dt;
  }

 private:
  VectorX<Scalar> grid_;
  VectorX<Scalar> flux_;
};

/// Per-mode mean photon numbers <n_l> = dt <I(t_l)> on a uniform grid.
template <typename Scalar>
VectorX<Scalar> discretize(const FluxProfile<Scalar>& flux) {
  return flux.uniform_dt() * flux.flux();
}

namespace detail {

template <typename Scalar>
void check_aligned(const OUProcess<Scalar>& ou, const FluxProfile<Scalar>& flux) {
  const auto& a = ou.grid();
  const auto& b = flux.grid();
  if (a.size() != b.size()) {
    throw std::invalid_argument("waveform: misaligned grids (size)");
  }
  const Scalar span = std::max(Scalar(1), a[a.size() - 1] - a[0]);
  if ((a - b).cwiseAbs().maxCoeff() > Scalar(1e-9L) * span) {
    throw std::invalid_argument("waveform: misaligned grids");
  }
}

}  // namespace detail

/// Weighted-flux upper bound on the time-resolved resource at grid point t_k:
///   H_+(t_k) <= sum_l exp(-|t_k - t_l| / T0) dt <I(t_l)>,
/// a rectangle-rule rendering of the OU-weighted flux integral (the variance
/// sigma0 cancels between kernel and normalization). Contributions beyond
/// |t - t'| > 20 T0 are dropped; the relative truncation error is below e^-20.
/// For constant flux and grid extent much larger than T0 this converges to
/// 2 T0 <I> as dt -> 0.
template <typename Scalar>
Scalar h_plus_time_upper(const OUProcess<Scalar>& ou, const FluxProfile<Scalar>& flux,
                         Index t_index) {
  detail::check_aligned(ou, flux);
  if (t_index < 0 || t_index >= flux.size()) {
    throw std::out_of_range("h_plus_time_upper: t_index out of range");
  }
  const Scalar dt = flux.uniform_dt();
  const Scalar tk = flux.grid()[t_index];
  const Scalar horizon = 20 * ou.t_corr();

  Scalar sum = Scalar(0);
  for (Index l = 0; l < flux.size(); ++l) {
    const Scalar gap = std::abs(flux.grid()[l] - tk);
    if (gap > horizon) continue;
    sum += std::exp(-gap / ou.t_corr()) * dt * flux.flux()[l];
  }
  return sum;
}

/// Time-resolved asymptotic error limit Sigma(t,t) >= 1/(80 lambda^2 H_+^2(t)),
/// evaluated with the weighted-flux upper bound on H_+ (hence still a valid,
/// if weaker, lower bound on the error). Infinite when the flux carries no
/// photons within the correlation horizon.
template <typename Scalar>
Scalar hlimit_time(const OUProcess<Scalar>& ou, const FluxProfile<Scalar>& flux,
                   Index t_index) {
  const Scalar h = h_plus_time_upper(ou, flux, t_index);
  if (h == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  const Scalar lam = lambda_constant<Scalar>().lambda;
  return Scalar(1) / (80 * lam * lam * h * h);
}

/// Fits the log-log slope of the time-resolved limit against constant flux
/// levels, evaluated at the central grid point. The asymptotic formula is
/// exactly quadratic in 1/<I>, so the slope is -2 up to rounding.
template <typename Scalar>
Scalar scaling_check(const OUProcess<Scalar>& ou, const std::vector<Scalar>& flux_levels) {
  if (flux_levels.size() < 3) {
    throw std::invalid_argument("scaling_check: need at least 3 flux levels");
  }
  const Index center = ou.grid().size() / 2;
  std::vector<Scalar> lx, ly;
  lx.reserve(flux_levels.size());
  ly.reserve(flux_levels.size());
  for (Scalar level : flux_levels) {
    if (!(level > Scalar(0)) || !std::isfinite(level)) {
      throw std::domain_error("scaling_check: flux levels must be positive");
    }
    const FluxProfile<Scalar> profile(ou.grid(),
                                      VectorX<Scalar>::Constant(ou.grid().size(), level));
    const Scalar limit = hlimit_time(ou, profile, center);
    lx.push_back(std::log(level));
    ly.push_back(std::log(limit));
  }

  // least-squares slope of ly on lx
  const Scalar n = Scalar(static_cast<double>(lx.size()));
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const Scalar denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > Scalar(0))) {
    throw std::domain_error("scaling_check: degenerate level spacing");
  }
  return (n * sxy - sx * sy) / denom;
}

}  // namespace qbzzb
