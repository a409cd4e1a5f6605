#include "nbarrier/nbmp.hpp"

#include <cassert>

#include <nlohmann/json.hpp>

namespace nbarrier {

Weights::Weights(Vec v) : values(std::move(v)) {
  if (values.size() < 2 || values.size() > 3)
    throw Error(Errc::DimensionMismatch, "expected 2 or 3 weights");
  if ((values.array() <= 0.0).any() || !values.allFinite())
    throw Error(Errc::DomainError, "weights must be positive");
}

int chi_indicator(const BoundaryState& e_minus, const BoundaryState& e_plus) {
  const bool extinct = e_minus.kind == StateKind::extinction ||
                       e_plus.kind == StateKind::extinction;
  return extinct ? 0 : 1;
}

namespace {

BoundsResult evaluate_bounds(const Weights& weights, const Vec& d,
                             const Region& region, int chi, int n) {
  if (weights.species() != n || d.size() != n || region.species() != n)
    throw Error(Errc::DimensionMismatch, "weights/diffusion/region mismatch");
  if ((d.array() <= 0.0).any() || !d.allFinite())
    throw Error(Errc::DomainError, "diffusion rates must be positive");
  if ((region.lower.array() <= 0.0).any() ||
      (region.upper.array() <= region.lower.array()).any())
    throw Error(Errc::DomainError, "region intercepts must satisfy "
                                   "upper > lower > 0");
  if (chi != 0 && chi != 1)
    throw Error(Errc::DomainError, "chi must be 0 or 1");

  const double d_max = d.maxCoeff();
  const double d_min = d.minCoeff();

  BoundsResult result;
  result.p_upper =
      (weights.values.array() * region.upper.array()).maxCoeff() *
      (d_max / d_min);
  result.p_lower =
      (weights.values.array() * region.lower.array()).minCoeff() *
      (d_min / d_max) * chi;
  result.chi = chi;
  result.weights = weights.values;
  result.diffusion = d;
  result.region = region;
  assert(result.p_lower <= result.p_upper);
  return result;
}

}  // namespace

BoundsResult bounds_two(const Weights& weights, const Vec& d,
                        const Region& region, int chi) {
  return evaluate_bounds(weights, d, region, chi, 2);
}

BoundsResult bounds_three(const Weights& weights, const Vec& d,
                          const Region& region, int chi) {
  return evaluate_bounds(weights, d, region, chi, 3);
}

nlohmann::json bounds_to_json(const BoundsResult& bounds) {
  return {{"p_lower", bounds.p_lower},
          {"p_upper", bounds.p_upper},
          {"chi", bounds.chi},
          {"weights",
           std::vector<double>(bounds.weights.begin(), bounds.weights.end())},
          {"diffusion", std::vector<double>(bounds.diffusion.begin(),
                                            bounds.diffusion.end())},
          {"region", region_to_json(bounds.region)}};
}

}  // namespace nbarrier
