#pragma once

#include <cstdint>

#include "nhg/group.hpp"
#include "nhg/report.hpp"
#include "nhg/test_function.hpp"

namespace nhg {

/// Associativity, identity, inverses, dilation automorphism and delta_r delta_s = delta_rs
/// over random triples; worst deviation relative to the size of the operands.
VerificationReport check_group_axioms(const GroupParams& params, std::size_t cases, std::uint64_t seed);

/// X(f o L_h)(g) = (Xf)(hg) and X-hat(f o R_h)(g) = (X-hat f)(gh) for every field.
VerificationReport check_field_invariance(const GroupParams& params, std::size_t cases, std::uint64_t seed);

/// Chain-rule fields against central differences of f(g exp(eE)) and f(exp(eE) g).
VerificationReport check_field_finite_difference(const GroupParams& params, std::size_t cases, std::uint64_t seed,
                                                 double eps = 1e-5);

/// Lebesgue measure is invariant under left and right translation and scales by r^Q under
/// dilation: Monte-Carlo integrals of translated bumps against the exact integral, as z-scores.
VerificationReport check_measure_invariance(const GroupParams& params, std::size_t cases, std::size_t samples,
                                            std::uint64_t seed);

/// g -> g . h as an affine pullback of f.
AffinePullback right_translate(const GroupParams& params, const SmoothFunction& f, const GroupPoint& h);

}  // namespace nhg
