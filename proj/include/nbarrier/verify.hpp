#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nbarrier/nbmp.hpp"
#include "nbarrier/solver.hpp"

namespace nbarrier {

/// One weight tuple checked against its bounds: grid-node extrema of p and
/// the margins to the two bound values.
struct VerificationRecord {
  Vec weights;
  BoundsResult bounds;
  double min_p = 0.0;
  double max_p = 0.0;
  double margin_lo = 0.0;  // min_p - p_lower
  double margin_hi = 0.0;  // p_upper - max_p
  bool pass = false;
};

struct VerificationReport {
  std::string system_name;
  Region region;
  double theta = 0.0;
  double half_length = 0.0;
  int grid_points = 0;
  double residual = 0.0;
  double tol_verify = 0.0;
  std::vector<VerificationRecord> records;
  bool overall = false;
};

/// p_i = sum_k w_k profile_k(x_i) and q_i = sum_k w_k d_k profile_k(x_i).
std::pair<Vec, Vec> combination_fields(const WaveSolution& solution,
                                       const Weights& weights);

/// Record per the invariant: pass iff min_p >= p_lower - tol and
/// max_p <= p_upper + tol; margins reported either way.
VerificationRecord check_bounds(const WaveSolution& solution,
                                const Weights& weights,
                                const BoundsResult& bounds, double tol_verify);

/// One record per grid tuple, bounds recomputed per tuple; record order is
/// grid order. chi must match the solution's endpoints.
VerificationReport sweep_weights(const WaveSolution& solution,
                                 const Region& region, int chi,
                                 const std::vector<Vec>& weight_grid,
                                 double tol_verify);

/// Cartesian grid of positive weight tuples, one entry per level
/// combination, row-major in the level lists.
std::vector<Vec> weight_grid(int n_species, const std::vector<double>& levels);

/// The default sweep levels {0.1, 0.3, 1, 3, 10}.
const std::vector<double>& default_sweep_levels();

nlohmann::json verification_to_json(const VerificationReport& report);

/// CSV columns alpha,beta[,gamma],p_lower,p_upper,min_p,max_p,margin_lo,
/// margin_hi,status.
void write_verification_csv(const std::filesystem::path& path,
                            const VerificationReport& report);

}  // namespace nbarrier
