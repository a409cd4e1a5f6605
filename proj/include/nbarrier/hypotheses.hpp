#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nbarrier/geometry.hpp"
#include "nbarrier/model.hpp"

namespace nbarrier {

enum class CheckStatus { pass, fail, indeterminate };

const char* to_string(CheckStatus status) noexcept;

struct HypothesisEntry {
  std::string id;  // "H1".."H4" for two species, "A1".."A4" for three
  CheckStatus status = CheckStatus::indeterminate;
  std::vector<Point> witness;  // offending or defining points, when known
  std::string message;
};

struct HypothesesOptions {
  Vec bounding_box;       // empty: 2x the largest axis root
  int resolution = 0;     // 0: 201 per axis for n=2, 41 for n=3
  double band_tol = 1e-10;
  double margin = 0.01;   // strictness margin of the fitted region
  double tol = 1e-9;      // positivity / equilibrium tolerance
  double small_scale = 0; // 0: 0.01x the smallest axis root
  double large_scale = 0; // 0: 2x the largest axis root
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;
  std::optional<Region> region;  // present when the containment check passed
  int resolution = 0;
  double tol = 0.0;

  bool all_pass() const;
};

struct CoexistenceResult {
  CheckStatus status = CheckStatus::fail;
  std::vector<Point> roots;  // polished interior common zeros (clustered)
};

/// Grid sign analysis over cells of [0,box]^n followed by damped-Newton
/// polishing with finite-difference Jacobians; clusters within radius 1e-6
/// are merged. Passes iff exactly one interior cluster remains.
CoexistenceResult check_coexistence_root(const ReactionSystem& system,
                                         const Vec& bounding_box,
                                         int resolution, double tol);

struct AxisRootsResult {
  CheckStatus status = CheckStatus::fail;
  Mat roots;  // (field, axis) -> positive root, NaN when count != 1
  std::string message;
};

/// Bracketing + bisection for each field restricted to each axis. Passes iff
/// every required axis equation has exactly one positive root; for three
/// species additionally requires that within each axis family the per-field
/// roots do not all coincide.
AxisRootsResult check_axis_roots(const ReactionSystem& system, double tol);

/// Pass iff all fields are strictly positive on the corner grid with all
/// coordinates in (0, small] and strictly negative with all coordinates in
/// [large, 2*large].
CheckStatus check_sign_behavior(const ReactionSystem& system, double small,
                                double large);

/// Pass iff every sample point is inside or on the boundary of the region.
CheckStatus check_containment(const ReactionSystem& system,
                              const Region& region,
                              const std::vector<NullclineSample>& samples,
                              Point* witness = nullptr);

/// Runs all four structural checks (H-family for two species, A-family for
/// three) plus the region fit. Never throws; failures become entries.
HypothesisReport verify_hypotheses(const ReactionSystem& system,
                                   const HypothesesOptions& options = {});

nlohmann::json report_to_json(const HypothesisReport& report);

/// Fixed-width table for terminal output.
std::string render_report_table(const HypothesisReport& report);

}  // namespace nbarrier
