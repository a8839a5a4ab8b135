#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhg/group.hpp"

namespace nhg {

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

/// A real function on H with Euclidean derivatives.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;
  virtual double value(std::span<const double> g) const = 0;
  /// Writes the Euclidean gradient (d/dx_{1,1}, d/dy_{1,1}, ..., d/dt) and returns the value.
  virtual double gradient(std::span<const double> g, std::span<double> grad) const = 0;
  virtual bool has_hessian() const { return false; }
  /// Row-major dim x dim Euclidean Hessian; throws CapabilityError when unavailable.
  virtual double hessian(std::span<const double> g, std::span<double> grad, std::span<double> hess) const;
  /// Euclidean ball containing the support, or nothing when not compactly supported.
  virtual std::optional<Ball> support() const { return std::nullopt; }
};

struct Monomial {
  double coeff = 0.0;
  std::vector<int> exps;
};

/// Polynomial in w = (g - center)/scale, optionally multiplied by the C^2 bump (1 - |w|^2)^3_+.
class TestFunction final : public SmoothFunction {
 public:
  TestFunction(std::vector<double> center, double scale, std::vector<Monomial> poly, bool bump = true,
               std::string id = {});

  /// Global polynomial in the raw coordinates (center 0, scale 1, no bump).
  static TestFunction polynomial(int dim, std::vector<Monomial> poly, std::string id = {});
  static TestFunction constant(int dim, double c);

  double value(std::span<const double> g) const override;
  double gradient(std::span<const double> g, std::span<double> grad) const override;
  bool has_hessian() const override { return true; }
  double hessian(std::span<const double> g, std::span<double> grad, std::span<double> hess) const override;
  std::optional<Ball> support() const override;

  const std::string& id() const { return id_; }
  const std::vector<double>& center() const { return center_; }
  double scale() const { return scale_; }
  bool has_bump() const { return bump_; }
  const std::vector<Monomial>& poly() const { return poly_; }
  int degree() const;
  int dim() const { return static_cast<int>(center_.size()); }

  /// Exact Lebesgue integral over R^{2n+1} (bump functions only).
  double exact_integral() const;

  nlohmann::json to_json() const;
  static TestFunction from_json(const nlohmann::json& j);

 private:
  double eval(std::span<const double> g, std::span<double> grad, std::span<double> hess) const;

  std::vector<double> center_;
  double scale_;
  std::vector<Monomial> poly_;
  bool bump_;
  std::string id_;
  int max_exp_ = 0;
};

/// f(M x + b) for an affine map of the Euclidean coordinates.
class AffinePullback final : public SmoothFunction {
 public:
  AffinePullback(const SmoothFunction& f, std::vector<double> matrix, std::vector<double> offset);
  double value(std::span<const double> g) const override;
  double gradient(std::span<const double> g, std::span<double> grad) const override;

 private:
  void map(std::span<const double> g, std::span<double> out) const;
  const SmoothFunction& f_;
  std::vector<double> m_;
  std::vector<double> b_;
};

/// The reduction map g' -> g . delta_r(g') as an AffinePullback of f.
AffinePullback translate_dilate(const GroupParams& params, const SmoothFunction& f, const GroupPoint& g, double r);

/// Family of test functions, e.g. the frozen 32-member sweep family.
std::vector<TestFunction> load_family(const std::string& path);
void save_family(const std::string& path, const std::vector<TestFunction>& family);
/// Deterministic generator used to produce the frozen family file.
std::vector<TestFunction> generate_family(const GroupParams& params, int count, unsigned long long seed);

// --- Invariant vector fields -------------------------------------------------

enum class Side { left, right };

struct FieldIndex {
  int coord = 0;  ///< complex coordinate m (block-major order)
  int dir = 0;    ///< 0 selects X_m, 1 selects Y_m
};

/// Converts a Euclidean gradient at g into the 2n horizontal components
/// (X_{1,1} f, Y_{1,1} f, ...) or their right-invariant counterparts.
void horizontal_from_euclidean(const GroupParams& params, Side side, std::span<const double> g,
                               std::span<const double> grad, std::span<double> out);

double apply_left_field(const GroupParams& params, FieldIndex which, const SmoothFunction& f, const GroupPoint& g);
double apply_right_field(const GroupParams& params, FieldIndex which, const SmoothFunction& f, const GroupPoint& g);
double horizontal_gradient_norm(const GroupParams& params, const SmoothFunction& f, const GroupPoint& g,
                                Side side = Side::left);
/// sum (X^2 + Y^2) f through the chain rule; needs a Hessian.
double sub_laplacian(const GroupParams& params, const SmoothFunction& f, const GroupPoint& g);

}  // namespace nhg
