#pragma once

#include "flexsusp/suspension.hpp"

#include <optional>
#include <random>
#include <vector>

namespace flexsusp {

// l_1..l_M, m_1..m_M, L_1..L_M; the other half follows from m_k = l_{k+M}.
struct HalfParamsIOEE {
  int M = 0;
  std::vector<double> l, m, L;
};

// All N lengths l_k are free; m_k = l_{N-k+2} (so m_1 = l_1) and
// L_{k+M} = L_{M-k+1}. An explicit m may be supplied and is then checked
// against the mirror relation.
struct HalfParamsIIAEE {
  int M = 0;
  std::vector<double> l;
  std::vector<double> L;
  std::vector<double> m;
};

// l, m, L repeat with period M.
struct HalfParamsIIOEE {
  int M = 0;
  std::vector<double> l, m, L;
};

SuspensionParams expand(const HalfParamsIOEE& h);
SuspensionParams expand(const HalfParamsIIAEE& h);
SuspensionParams expand(const HalfParamsIIOEE& h);

ConstructedSuspension build_I_OEE(const HalfParamsIOEE& h);
ConstructedSuspension build_II_AEE(const HalfParamsIIAEE& h);
ConstructedSuspension build_II_OEE(const HalfParamsIIOEE& h);

// Largest deviation from the coordinate symmetry of the type at this
// embedding (rotation about y for I-OEE, reflection in z for II-AEE,
// reflection in x for II-OEE).
double symmetry_defect(SuspensionType t, const Embedding& e);

// Max |closure gap| / L_N over `samples` Chebyshev points of the flexion
// interval, or +inf if the interval is empty or nothing embeds.
double max_relative_gap(const SuspensionParams& p, const Theta1Rule& theta1, const SignPattern& signs,
                        int samples = 33);

struct DrawStats {
  int rejections = 0;
};

// Log-uniform lengths in [0.5, 2], rejection-sampled until the full set is
// valid and has a non-empty flexion interval. The result is assembled with
// the type's branch choices but not certified. Returns nullopt after
// `max_rejections` failed draws.
std::optional<ConstructedSuspension> random_symmetric(SuspensionType t, int M, std::mt19937_64& rng,
                                                      int max_rejections = 1000, DrawStats* stats = nullptr);

}  // namespace flexsusp
