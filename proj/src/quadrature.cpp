#include "smoothent/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace smoothent {

namespace {

struct Panel {
  double a, b;
  double fa, fm, fb;
  double estimate;  // Simpson value on [a, b]
  double tol;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double tol, long max_evals) {
  return integrate_split(f, {a, b}, tol, max_evals);
}

QuadratureResult integrate_split(const std::function<double(double)>& f,
                                 const std::vector<double>& breakpoints,
                                 double tol, long max_evals) {
  QuadratureResult result;
  if (breakpoints.size() < 2)
    throw std::invalid_argument("integrate_split: need at least two breakpoints");
  std::vector<double> bp = breakpoints;
  std::sort(bp.begin(), bp.end());

  std::vector<Panel> stack;
  const double per_panel_tol = tol / static_cast<double>(bp.size() - 1);
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double lo = bp[i], hi = bp[i + 1];
    if (!(hi > lo)) continue;
    Panel p{lo, hi, f(lo), f(0.5 * (lo + hi)), f(hi), 0.0, per_panel_tol};
    result.evals += 3;
    p.estimate = simpson(lo, hi, p.fa, p.fm, p.fb);
    stack.push_back(p);
  }

  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    if (result.evals + 2 > max_evals) {
      // Budget gone: accept the unrefined panel and flag non-convergence.
      result.value += p.estimate;
      result.error_estimate += std::abs(p.estimate);
      result.converged = false;
      continue;
    }
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    result.evals += 2;
    const double left = simpson(p.a, m, p.fa, flm, p.fm);
    const double right = simpson(m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.estimate;
    const double width = p.b - p.a;
    if (std::abs(delta) <= 15.0 * p.tol || width < 1e-14 * std::max(1.0, std::abs(m))) {
      result.value += left + right + delta / 15.0;
      result.error_estimate += std::abs(delta) / 15.0;
    } else {
      stack.push_back(Panel{p.a, m, p.fa, flm, p.fm, left, p.tol / 2.0});
      stack.push_back(Panel{m, p.b, p.fm, frm, p.fb, right, p.tol / 2.0});
    }
  }
  return result;
}

}  // namespace smoothent
