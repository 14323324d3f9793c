#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qbzzb {

template <typename Scalar = double>
struct QuadratureResult {
  Scalar value;
  Scalar error;           ///< absolute error estimate
  Scalar max_abs_sample;  ///< largest |f| seen at any quadrature node
  bool converged;
};

namespace detail {

// Gauss-Kronrod 7/15 pair on [-1, 1] (QUADPACK dqk15 constants).
// nodes[3], nodes[5], nodes[7] plus the mirrored points form the Gauss rule.
inline constexpr double kGk15Node[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGk15WeightK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGk15WeightG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Scalar, typename F>
void gk15_panel(F&& f, Scalar a, Scalar b, Scalar& value, Scalar& error,
                Scalar& max_abs_sample) {
  const Scalar center = (a + b) / 2;
  const Scalar half = (b - a) / 2;

  const Scalar f_center = f(center);
  Scalar k15 = Scalar(kGk15WeightK[7]) * f_center;
  Scalar g7 = Scalar(kGk15WeightG[3]) * f_center;
  max_abs_sample = std::max(max_abs_sample, std::abs(f_center));

  for (int i = 0; i < 7; ++i) {
    const Scalar dx = half * Scalar(kGk15Node[i]);
    const Scalar f_lo = f(center - dx);
    const Scalar f_hi = f(center + dx);
    max_abs_sample = std::max({max_abs_sample, std::abs(f_lo), std::abs(f_hi)});
    k15 += Scalar(kGk15WeightK[i]) * (f_lo + f_hi);
    if (i % 2 == 1) {
      g7 += Scalar(kGk15WeightG[i / 2]) * (f_lo + f_hi);
    }
  }

  value = half * k15;
  const Scalar diff = std::abs(half * (k15 - g7));
  // QUADPACK-style sharpened estimate, never below the raw rule difference.
  const Scalar scaled = Scalar(200) * diff;
  error = std::max(diff, scaled * std::sqrt(scaled));
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration over the panels defined by an
/// ascending breakpoint list. Bisects the worst panel until the summed error
/// estimate meets max(rel_tol*|value|, abs_tol) or the panel budget runs out.
/// Deterministic for a given integrand and breakpoints.
template <typename Scalar, typename F>
QuadratureResult<Scalar> integrate_adaptive(F&& f, std::vector<Scalar> breakpoints,
                                            Scalar rel_tol, Scalar abs_tol,
                                            int max_panels = 4000) {
  if (breakpoints.size() < 2) {
    throw std::invalid_argument("integrate_adaptive: need at least two breakpoints");
  }
  std::sort(breakpoints.begin(), breakpoints.end());

  struct Panel {
    Scalar a, b, value, error;
  };
  std::vector<Panel> panels;
  panels.reserve(64);
  Scalar max_abs_sample = Scalar(0);

  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) continue;  // drop empty panels
    Panel p{breakpoints[i], breakpoints[i + 1], Scalar(0), Scalar(0)};
    detail::gk15_panel(f, p.a, p.b, p.value, p.error, max_abs_sample);
    panels.push_back(p);
  }
  if (panels.empty()) {
    return {Scalar(0), Scalar(0), max_abs_sample, true};
  }

  while (true) {
    Scalar total = Scalar(0), total_err = Scalar(0);
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].value;
      total_err += panels[i].error;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    if (total_err <= std::max(rel_tol * std::abs(total), abs_tol)) {
      return {total, total_err, max_abs_sample, true};
    }
    if (static_cast<int>(panels.size()) >= max_panels) {
      return {total, total_err, max_abs_sample, false};
    }
    const Panel old = panels[worst];
    const Scalar mid = (old.a + old.b) / 2;
    if (mid <= old.a || mid >= old.b) {
      // panel width at machine resolution; treat its estimate as final
      Panel& p = panels[worst];
      p.error = Scalar(0);
      continue;
    }
    Panel lo{old.a, mid, Scalar(0), Scalar(0)};
    Panel hi{mid, old.b, Scalar(0), Scalar(0)};
    detail::gk15_panel(f, lo.a, lo.b, lo.value, lo.error, max_abs_sample);
    detail::gk15_panel(f, hi.a, hi.b, hi.value, hi.error, max_abs_sample);
    panels[worst] = lo;
    panels.push_back(hi);
  }
}

template <typename Scalar, typename F>
QuadratureResult<Scalar> integrate_adaptive(F&& f, Scalar a, Scalar b, Scalar rel_tol,
                                            Scalar abs_tol, int max_panels = 4000) {
  return integrate_adaptive(std::forward<F>(f), std::vector<Scalar>{a, b}, rel_tol,
                            abs_tol, max_panels);
}

}  // namespace qbzzb
