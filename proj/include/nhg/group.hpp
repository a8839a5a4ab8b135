#pragma once

// Nonisotropic Heisenberg group H(K,A) = C^{k_1} x ... x C^{k_l} x R.
//
// Points are stored as a flat real vector
//   [x_{1,1}, y_{1,1}, ..., x_{l,k_l}, y_{l,k_l}, t]
// so "complex coordinate m" occupies slots 2m and 2m+1 and t is the last slot.
//
// Complex inner product convention: <w, w'> = sum_k w_k conj(w'_k).  With this
// choice the group law reads
//   (z,t).(z',t') = (z + z', t + t' + 2 sum_i a_i Im<z_i, z'_i>)
//                 = (z + z', t + t' + 2 sum_m a(m) (y_m x'_m - x_m y'_m)),
// the left-invariant fields are X = d/dx + 2 a y d/dt, Y = d/dy - 2 a x d/dt,
// and the rays of the polar map are horizontal.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nhg {

class GroupParams {
 public:
  /// Validates 0 < a_1 < ... < a_l = 1 and k_i >= 1.
  GroupParams(std::vector<int> k, std::vector<double> a);

  int blocks() const { return static_cast<int>(k_.size()); }
  const std::vector<int>& k() const { return k_; }
  const std::vector<double>& a() const { return a_; }
  int n() const { return n_; }
  /// Real dimension 2n+1.
  int dim() const { return 2 * n_ + 1; }
  /// Index of the first complex coordinate of block i.
  int block_begin(int i) const { return begin_[static_cast<std::size_t>(i)]; }
  int block_end(int i) const { return begin_[static_cast<std::size_t>(i) + 1]; }
  int block_of(int m) const { return block_of_[static_cast<std::size_t>(m)]; }
  /// a_i for the block owning complex coordinate m.
  double coef(int m) const { return coef_[static_cast<std::size_t>(m)]; }
  const std::vector<double>& coefs() const { return coef_; }

  bool operator==(const GroupParams& other) const {
    return k_ == other.k_ && a_ == other.a_;
  }

 private:
  std::vector<int> k_;
  std::vector<double> a_;
  int n_ = 0;
  std::vector<int> begin_;
  std::vector<int> block_of_;
  std::vector<double> coef_;
};

class GroupPoint {
 public:
  GroupPoint() = default;
  explicit GroupPoint(std::vector<double> coords) : c_(std::move(coords)) {}
  /// The origin of a group with real dimension `dim`.
  static GroupPoint zeros(int dim) { return GroupPoint(std::vector<double>(static_cast<std::size_t>(dim), 0.0)); }

  std::span<const double> coords() const { return c_; }
  std::span<double> coords() { return c_; }
  std::size_t size() const { return c_.size(); }

  double x(int m) const { return c_[2 * static_cast<std::size_t>(m)]; }
  double y(int m) const { return c_[2 * static_cast<std::size_t>(m) + 1]; }
  double t() const { return c_.back(); }
  std::complex<double> z(int m) const { return {x(m), y(m)}; }

  double& operator[](std::size_t i) { return c_[i]; }
  double operator[](std::size_t i) const { return c_[i]; }

  bool operator==(const GroupPoint&) const = default;

 private:
  std::vector<double> c_;
};

GroupPoint origin(const GroupParams& params);

/// Checks that a point has the shape 2n+1 of `params`.
void check_shape(const GroupParams& params, std::span<const double> g);

GroupPoint multiply(const GroupParams& params, const GroupPoint& g, const GroupPoint& h);
GroupPoint inverse(const GroupPoint& g);
/// (z,t) -> (r z, r^2 t); r must be positive.
GroupPoint dilate(double r, const GroupPoint& g);

/// |z_i|^2 for block i.
double block_norm2(const GroupParams& params, std::span<const double> g, int i);
/// |z|^2.
double z_norm2(std::span<const double> g);

// Allocation-free kernels used by the Monte-Carlo loops.
void multiply_into(const GroupParams& params, std::span<const double> g, std::span<const double> h,
                   std::span<double> out);
/// sum_m a(m) (y_m x'_m - x_m y'_m), i.e. sum_i a_i Im<z_i, z'_i>.
double symplectic(const GroupParams& params, std::span<const double> g, std::span<const double> h);

/// d/de of A . exp(e E) . B at e = 0, in Euclidean coordinates.  E is a horizontal
/// direction of length 2n (coefficients of X_{1,1}, Y_{1,1}, ...).
void tangent(const GroupParams& params, std::span<const double> A, std::span<const double> E,
             std::span<const double> B, std::span<double> out);

/// Horizontal unit direction selecting X (dir = 0) or Y (dir = 1) on coordinate m.
std::vector<double> unit_direction(const GroupParams& params, int m, int dir);

}  // namespace nhg
