#include "nhg/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <numbers>
#include <queue>

#include "nhg/errors.hpp"

namespace nhg {

Rule gauss_legendre(int m) {
  if (m < 1) throw ParameterError("Gauss-Legendre needs at least one node");
  const auto zeros = boost::math::legendre_p_zeros<double>(m);
  Rule r;
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it == 0.0) continue;
    r.x.push_back(-*it);
  }
  if (m % 2 == 1) r.x.push_back(0.0);
  for (double z : zeros) {
    if (z != 0.0) r.x.push_back(z);
  }
  for (double x : r.x) {
    const double dp = boost::math::legendre_p_prime(m, x);
    r.w.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  }
  return r;
}

Rule gauss_legendre(int m, double a, double b) {
  Rule r = gauss_legendre(m);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    r.x[i] = c + h * r.x[i];
    r.w[i] *= h;
  }
  return r;
}

Rule radial_rule(int m, double radius, int power) {
  Rule r = gauss_legendre(m, 0.0, radius);
  for (std::size_t i = 0; i < r.x.size(); ++i) r.w[i] *= std::pow(r.x[i], power);
  return r;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

const GK15& gk15() {
  static const GK15 rule = [] {
    GK15 g{};
    const auto& xk = boost::math::quadrature::gauss_kronrod<double, 15>::abscissa();
    const auto& wk = boost::math::quadrature::gauss_kronrod<double, 15>::weights();
    const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
    // Boost stores the nonnegative half: xk[0] = 0, Gauss nodes at even indices.
    int idx = 0;
    for (int i = 7; i >= 1; --i, ++idx) {
      g.x[idx] = -xk[static_cast<std::size_t>(i)];
      g.wk[idx] = wk[static_cast<std::size_t>(i)];
      g.wg[idx] = (i % 2 == 0) ? wg[static_cast<std::size_t>(i / 2)] : 0.0;
    }
    for (int i = 0; i <= 7; ++i, ++idx) {
      g.x[idx] = xk[static_cast<std::size_t>(i)];
      g.wk[idx] = wk[static_cast<std::size_t>(i)];
      g.wg[idx] = (i % 2 == 0) ? wg[static_cast<std::size_t>(i / 2)] : 0.0;
    }
    return g;
  }();
  return rule;
}

Panel integrate_panel(const VectorIntegrand& f, int components, double a, double b) {
  const GK15& g = gk15();
  const auto K = static_cast<std::size_t>(components);
  Panel p;
  p.a = a;
  p.b = b;
  p.value.assign(K, 0.0);
  p.error.assign(K, 0.0);
  p.l1.assign(K, 0.0);
  std::vector<double> gauss(K, 0.0);
  std::vector<double> buf(K);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (int i = 0; i < 15; ++i) {
    f(c + h * g.x[i], buf.data());
    for (std::size_t k = 0; k < K; ++k) {
      p.value[k] += g.wk[i] * buf[k];
      gauss[k] += g.wg[i] * buf[k];
      p.l1[k] += g.wk[i] * std::fabs(buf[k]);
      p.peak = std::max(p.peak, std::fabs(buf[k]));
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    p.value[k] *= h;
    p.l1[k] *= h;
    p.error[k] = std::fabs(p.value[k] - h * gauss[k]);
  }
  return p;
}

namespace {

IntegralResult collect(const std::vector<Panel>& panels, int components, double tail) {
  const auto K = static_cast<std::size_t>(components);
  IntegralResult r;
  r.value.assign(K, 0.0);
  r.error.assign(K, 0.0);
  r.l1.assign(K, 0.0);
  std::vector<double> tmp(panels.size());
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < panels.size(); ++i) tmp[i] = panels[i].value[k];
    r.value[k] = pairwise_sum(tmp);
    for (std::size_t i = 0; i < panels.size(); ++i) tmp[i] = panels[i].error[k];
    r.error[k] = pairwise_sum(tmp) + tail;
    for (std::size_t i = 0; i < panels.size(); ++i) tmp[i] = panels[i].l1[k];
    r.l1[k] = pairwise_sum(tmp);
  }
  r.panels = static_cast<int>(panels.size());
  return r;
}

// Worst relative excess over the tolerance, per panel.
double panel_badness(const Panel& p, const std::vector<double>& l1) {
  double b = 0.0;
  for (std::size_t k = 0; k < p.error.size(); ++k) {
    if (l1[k] > 0.0) b = std::max(b, p.error[k] / l1[k]);
  }
  return b;
}

bool refine(const VectorIntegrand& f, int components, std::vector<Panel>& panels, double tail, double rel_tol,
            double abs_tol, int budget) {
  const auto K = static_cast<std::size_t>(components);
  for (;;) {
    IntegralResult r = collect(panels, components, tail);
    bool ok = true;
    for (std::size_t k = 0; k < K; ++k) {
      if (r.error[k] > rel_tol * r.l1[k] + abs_tol) ok = false;
    }
    if (ok) return true;
    if (static_cast<int>(panels.size()) >= budget) return false;
    // Split the worst few panels in one sweep to keep the loop short.
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(panels.size());
    for (std::size_t i = 0; i < panels.size(); ++i) order.emplace_back(panel_badness(panels[i], r.l1), i);
    std::sort(order.begin(), order.end(), [](auto& x, auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });
    const std::size_t nsplit = std::max<std::size_t>(1, std::min<std::size_t>(order.size() / 8 + 1, budget - panels.size()));
    std::vector<char> split(panels.size(), 0);
    for (std::size_t i = 0; i < nsplit && i < order.size(); ++i) split[order[i].second] = 1;
    std::vector<Panel> next;
    next.reserve(panels.size() + nsplit);
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (!split[i]) {
        next.push_back(std::move(panels[i]));
        continue;
      }
      const double m = 0.5 * (panels[i].a + panels[i].b);
      next.push_back(integrate_panel(f, components, panels[i].a, m));
      next.push_back(integrate_panel(f, components, m, panels[i].b));
    }
    panels = std::move(next);
  }
}

}  // namespace

IntegralResult integrate_half_line(const VectorIntegrand& f, int components, const HalfLineOptions& opt) {
  std::vector<Panel> panels;
  const auto K = static_cast<std::size_t>(components);
  std::vector<double> l1(K, 0.0);
  double s = 0.0;
  double w = opt.initial_width;
  int quiet = 0;
  double tail = 0.0;
  for (;;) {
    if (static_cast<int>(panels.size()) >= opt.panel_budget || s > opt.max_extent) {
      IntegralResult r = collect(panels, components, 0.0);
      r.converged = false;
      return r;
    }
    const bool last = s + w >= opt.stop_at;
    if (last) w = opt.stop_at - s;
    Panel p = integrate_panel(f, components, s, s + w);
    for (std::size_t k = 0; k < K; ++k) l1[k] += p.l1[k];
    s += w;
    if (last) {
      panels.push_back(std::move(p));
      break;
    }
    // Tail beyond s bounded by peak / decay for an exponentially decaying envelope.
    bool small = s >= opt.min_extent;
    double tail_here = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      tail_here = std::max(tail_here, p.peak / opt.decay);
      if (p.peak / opt.decay > 1e-3 * opt.rel_tol * l1[k]) small = false;
    }
    panels.push_back(std::move(p));
    if (small) {
      if (++quiet >= 2) {
        tail = tail_here;
        break;
      }
    } else {
      quiet = 0;
    }
    w = std::min(opt.max_width, w * 1.25);
  }
  const bool ok = refine(f, components, panels, tail, opt.rel_tol, 0.0, opt.panel_budget);
  IntegralResult r = collect(panels, components, tail);
  r.converged = ok;
  return r;
}

IntegralResult integrate_interval(const std::function<double(double)>& f, double a, double b, double rel_tol,
                                  double abs_tol, int panel_budget) {
  VectorIntegrand vf = [&f](double x, double* out) { out[0] = f(x); };
  std::vector<Panel> panels;
  const int init = 4;
  for (int i = 0; i < init; ++i) {
    const double lo = a + (b - a) * i / init, hi = a + (b - a) * (i + 1) / init;
    panels.push_back(integrate_panel(vf, 1, lo, hi));
  }
  const bool ok = refine(vf, 1, panels, 0.0, rel_tol, abs_tol, panel_budget);
  IntegralResult r = collect(panels, 1, 0.0);
  r.converged = ok;
  return r;
}

BallRule ball_rule(int dim, double radius, int radial_nodes, int angular_nodes) {
  if (dim < 1) throw ParameterError("ball rule needs dim >= 1");
  BallRule br;
  br.dim = dim;
  const auto d = static_cast<std::size_t>(dim);
  if (dim == 1) {
    Rule r = gauss_legendre(2 * radial_nodes, -radius, radius);
    br.points = r.x;
    br.weights = r.w;
    return br;
  }
  const Rule rr = radial_rule(radial_nodes, radius, dim - 1);
  const Rule polar = gauss_legendre(angular_nodes, 0.0, std::numbers::pi);
  const int nt = 2 * angular_nodes;
  const int npolar = dim - 2;
  // Enumerate (r, phi_1..phi_{d-2}, phi_{d-1}).
  std::vector<int> idx(static_cast<std::size_t>(npolar), 0);
  std::vector<double> dir(d);
  for (;;) {
    double wang = 1.0;
    double sprod = 1.0;
    for (int k = 0; k < npolar; ++k) {
      const double phi = polar.x[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
      wang *= polar.w[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] * std::pow(std::sin(phi), dim - 2 - k);
      dir[static_cast<std::size_t>(k)] = sprod * std::cos(phi);
      sprod *= std::sin(phi);
    }
    for (int j = 0; j < nt; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / nt;
      dir[d - 2] = sprod * std::cos(phi);
      dir[d - 1] = sprod * std::sin(phi);
      const double wt = wang * 2.0 * std::numbers::pi / nt;
      for (std::size_t i = 0; i < rr.x.size(); ++i) {
        for (std::size_t c = 0; c < d; ++c) br.points.push_back(rr.x[i] * dir[c]);
        br.weights.push_back(wt * rr.w[i]);
      }
    }
    int k = npolar - 1;
    while (k >= 0) {
      if (++idx[static_cast<std::size_t>(k)] < angular_nodes) break;
      idx[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return br;
}

}  // namespace nhg
