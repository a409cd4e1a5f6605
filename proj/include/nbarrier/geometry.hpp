#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nbarrier/model.hpp"
#include "nbarrier/types.hpp"

namespace nbarrier {

/// Points found on one zero set (f, g, h or the combined field F), each with
/// |field| <= band_tol, in the nonnegative orthant.
struct NullclineSample {
  std::string label;
  std::vector<Point> points;
  double band_tol = 0.0;
};

/// The enclosing set between two lines (planes) of the intercept family
/// sum_k x_k / upper_k = 1 and sum_k x_k / lower_k = 1 and the coordinate
/// hyperplanes. Valid regions have upper_k > lower_k > 0 for each axis.
struct Region {
  Vec upper;
  Vec lower;

  int species() const { return static_cast<int>(upper.size()); }
};

enum class Containment { inside, outside_above, outside_below, boundary };

const char* to_string(Containment c) noexcept;

/// Grid scan over [0, box] at `resolution` nodes per axis: every axis-aligned
/// edge with a sign change is refined by bisection until |field| <= band_tol
/// (or 60 iterations). One sample per growth field, row-major point order.
/// Throws EmptyNullcline if some field never changes sign in the box.
std::vector<NullclineSample> sample_nullclines(const ReactionSystem& system,
                                               const Vec& bounding_box,
                                               int resolution,
                                               double band_tol);

/// Same scan for the combined field F(x) = sum_k weight_k x_k field_k(x),
/// restricted to the open first quadrant/octant: points with a zero
/// coordinate are dropped (F vanishes at the origin regardless of the
/// fields, so axis points carry no containment information).
NullclineSample sample_combined_field(const ReactionSystem& system,
                                      const Vec& weights,
                                      const Vec& bounding_box, int resolution,
                                      double band_tol);

/// Tightest region containing every sample point: minimizes the sum of upper
/// intercepts and maximizes the sum of lower intercepts over the intercept
/// family, by enumeration of active sample subsets (pairs of points define
/// candidate lines, triples define planes, single interior points define
/// tangency candidates) inside a cutting-plane working-set loop.
/// strictness_margin then scales upper intercepts by (1+margin) and lower by
/// (1-margin). Throws DegenerateFit when no valid candidate exists and
/// OrderViolation when some margined upper intercept <= lower intercept.
Region fit_region(const std::vector<NullclineSample>& samples,
                  double strictness_margin);

/// inside iff sum p_k/upper_k <= 1 and sum p_k/lower_k >= 1; boundary when
/// either sum equals 1 within 1e-12.
Containment contains(const Region& region, const Point& point);

nlohmann::json sample_to_json(const NullclineSample& sample);
nlohmann::json region_to_json(const Region& region);
Region region_from_json(const nlohmann::json& doc);

/// CSV with columns label,u,v[,w]; one row per point, samples concatenated.
void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<NullclineSample>& samples);

/// CSV with rows "upper,..." and "lower,..." in the same column layout.
void write_region_csv(const std::filesystem::path& path, const Region& region);

}  // namespace nbarrier
