#pragma once

#include <nlohmann/json_fwd.hpp>

#include "nbarrier/geometry.hpp"
#include "nbarrier/model.hpp"

namespace nbarrier {

/// Positive combination weights alpha, beta (, gamma).
struct Weights {
  Vec values;

  explicit Weights(Vec v);  // throws DomainError unless all entries > 0
  int species() const { return static_cast<int>(values.size()); }
};

/// A-priori bounds on p(x) = sum_k weight_k * profile_k(x) together with the
/// inputs they were evaluated from.
struct BoundsResult {
  double p_lower = 0.0;
  double p_upper = 0.0;
  int chi = 1;
  Vec weights;
  Vec diffusion;
  Region region;
};

/// 0 iff either endpoint is the extinction state (only the trivial lower
/// bound p >= 0 survives there), else 1.
int chi_indicator(const BoundaryState& e_minus, const BoundaryState& e_plus);

/// p_upper = max(a*ubar, b*vbar) * max(d1,d2)/min(d1,d2),
/// p_lower = min(a*ulow, b*vlow) * min(d1,d2)/max(d1,d2) * chi.
BoundsResult bounds_two(const Weights& weights, const Vec& d,
                        const Region& region, int chi);

/// Three-species analogue with max/min taken over all three entries.
BoundsResult bounds_three(const Weights& weights, const Vec& d,
                          const Region& region, int chi);

nlohmann::json bounds_to_json(const BoundsResult& bounds);

}  // namespace nbarrier
