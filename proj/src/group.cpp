#include "nhg/group.hpp"

#include <cmath>
#include <sstream>

#include "nhg/errors.hpp"

namespace nhg {

GroupParams::GroupParams(std::vector<int> k, std::vector<double> a) : k_(std::move(k)), a_(std::move(a)) {
  if (k_.empty()) throw ParameterError("group needs at least one block");
  if (k_.size() != a_.size()) throw ParameterError("k and a must have the same length");
  for (int ki : k_) {
    if (ki < 1) throw ParameterError("every k_i must be >= 1");
  }
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (!(a_[i] > 0.0) || !std::isfinite(a_[i])) throw ParameterError("every a_i must be positive");
    if (i > 0 && !(a_[i] > a_[i - 1])) throw ParameterError("a must be strictly increasing");
  }
  if (a_.back() != 1.0) {
    std::ostringstream os;
    os << "a_l must equal 1 (got " << a_.back() << ")";
    throw ParameterError(os.str());
  }
  begin_.push_back(0);
  for (std::size_t i = 0; i < k_.size(); ++i) {
    for (int j = 0; j < k_[i]; ++j) {
      block_of_.push_back(static_cast<int>(i));
      coef_.push_back(a_[i]);
    }
    n_ += k_[i];
    begin_.push_back(n_);
  }
}

GroupPoint origin(const GroupParams& params) { return GroupPoint::zeros(params.dim()); }

void check_shape(const GroupParams& params, std::span<const double> g) {
  if (g.size() != static_cast<std::size_t>(params.dim())) {
    std::ostringstream os;
    os << "point has " << g.size() << " coordinates, group expects " << params.dim();
    throw ParameterError(os.str());
  }
}

double symplectic(const GroupParams& params, std::span<const double> g, std::span<const double> h) {
  double s = 0.0;
  for (int m = 0; m < params.n(); ++m) {
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    s += params.coef(m) * (g[i + 1] * h[i] - g[i] * h[i + 1]);
  }
  return s;
}

void multiply_into(const GroupParams& params, std::span<const double> g, std::span<const double> h,
                   std::span<double> out) {
  const std::size_t last = out.size() - 1;
  const double t = g[last] + h[last] + 2.0 * symplectic(params, g, h);
  for (std::size_t i = 0; i < last; ++i) out[i] = g[i] + h[i];
  out[last] = t;
}

GroupPoint multiply(const GroupParams& params, const GroupPoint& g, const GroupPoint& h) {
  check_shape(params, g.coords());
  check_shape(params, h.coords());
  GroupPoint out = GroupPoint::zeros(params.dim());
  multiply_into(params, g.coords(), h.coords(), out.coords());
  return out;
}

GroupPoint inverse(const GroupPoint& g) {
  GroupPoint out = g;
  for (auto& c : out.coords()) c = -c;
  return out;
}

GroupPoint dilate(double r, const GroupPoint& g) {
  if (!(r > 0.0)) throw DomainError("dilation factor must be positive");
  GroupPoint out = g;
  auto c = out.coords();
  for (std::size_t i = 0; i + 1 < c.size(); ++i) c[i] *= r;
  c[c.size() - 1] *= r * r;
  return out;
}

double block_norm2(const GroupParams& params, std::span<const double> g, int i) {
  double s = 0.0;
  for (int m = params.block_begin(i); m < params.block_end(i); ++m) {
    const std::size_t j = 2 * static_cast<std::size_t>(m);
    s += g[j] * g[j] + g[j + 1] * g[j + 1];
  }
  return s;
}

double z_norm2(std::span<const double> g) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) s += g[i] * g[i];
  return s;
}

void tangent(const GroupParams& params, std::span<const double> A, std::span<const double> E,
             std::span<const double> B, std::span<double> out) {
  // (A . eE) . B has t = t_A + t_B + 2 w(A, eE) + 2 w(A + eE, B), z = z_A + eE + z_B.
  const std::size_t last = out.size() - 1;
  double dt = 0.0;
  for (int m = 0; m < params.n(); ++m) {
    const std::size_t i = 2 * static_cast<std::size_t>(m);
    const double a = params.coef(m);
    dt += a * (A[i + 1] * E[i] - A[i] * E[i + 1]);
    dt += a * (E[i + 1] * B[i] - E[i] * B[i + 1]);
    out[i] = E[i];
    out[i + 1] = E[i + 1];
  }
  out[last] = 2.0 * dt;
}

std::vector<double> unit_direction(const GroupParams& params, int m, int dir) {
  if (m < 0 || m >= params.n() || (dir != 0 && dir != 1)) throw ParameterError("invalid field index");
  std::vector<double> e(2 * static_cast<std::size_t>(params.n()), 0.0);
  e[2 * static_cast<std::size_t>(m) + static_cast<std::size_t>(dir)] = 1.0;
  return e;
}

}  // namespace nhg
