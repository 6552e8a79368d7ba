#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace scsamp {

namespace detail {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 nodes on [-1,1]).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGk15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

}  // namespace detail

struct PanelEstimate {
  double value;
  double error;
};

/// One Gauss-Kronrod 15(7) panel on [a, b].
template <class F>
PanelEstimate gk15_panel(const F& f, double a, double b) {
  const double hl = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  double kron = 0.0;
  double gauss = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double x = detail::kGk15Nodes[j];
    double fsum;
    if (j == 7) {
      fsum = f(c);
      kron += detail::kGk15Weights[7] * fsum;
      gauss += detail::kG7Weights[3] * fsum;
    } else {
      fsum = f(c - hl * x) + f(c + hl * x);
      kron += detail::kGk15Weights[j] * fsum;
      if (j % 2 == 1) gauss += detail::kG7Weights[j / 2] * fsum;
    }
  }
  kron *= hl;
  gauss *= hl;
  return {kron, std::abs(kron - gauss)};
}

/// Adaptive Gauss-Kronrod integration of f over [a, b].
/// Splits the worst panel until the summed error estimate meets
/// max(abs_tol, rel_tol*|I|) or the panel budget runs out.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12,
                 double rel_tol = 1e-10, std::size_t max_panels = 4000) {
  if (!(b > a)) return 0.0;
  struct Seg {
    double a, b, value, error;
  };
  std::vector<Seg> segs;
  auto first = gk15_panel(f, a, b);
  segs.push_back({a, b, first.value, first.error});
  double total = first.value;
  double err = first.error;
  while (segs.size() < max_panels) {
    if (err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[i].error > segs[worst].error) worst = i;
    Seg s = segs[worst];
    const double mid = 0.5 * (s.a + s.b);
    if (mid <= s.a || mid >= s.b) break;  // interval exhausted by precision
    auto left = gk15_panel(f, s.a, mid);
    auto right = gk15_panel(f, mid, s.b);
    total += left.value + right.value - s.value;
    err += left.error + right.error - s.error;
    segs[worst] = {s.a, mid, left.value, left.error};
    segs.push_back({mid, s.b, right.value, right.error});
  }
  return total;
}

/// Integrate over [knots.front(), knots.back()] with forced panel boundaries
/// at the interior knots (placed at known kinks or sharp transitions).
template <class F>
double integrate_with_knots(const F& f, const std::vector<double>& knots,
                            double abs_tol = 1e-12, double rel_tol = 1e-10) {
  if (knots.size() < 2) return 0.0;
  double total = 0.0;
  const double piece_abs = abs_tol / static_cast<double>(knots.size() - 1);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i + 1] > knots[i])
      total += integrate(f, knots[i], knots[i + 1], piece_abs, rel_tol);
  }
  return total;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

}  // namespace scsamp
