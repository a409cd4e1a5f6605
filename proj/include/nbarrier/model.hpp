#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nbarrier/error.hpp"
#include "nbarrier/types.hpp"

namespace nbarrier {

/// One growth field f, g or h: a scalar function on the nonnegative orthant.
using GrowthField = std::function<double(const Point&)>;

/// Intrinsic rates and interaction matrix of a competitive Lotka-Volterra
/// family: growth_i(x) = sigma_i - sum_j c_ij x_j.
struct LotkaVolterraParams {
  Vec sigma;  // n positive intrinsic rates
  Mat c;      // n x n positive interaction coefficients

  int species() const { return static_cast<int>(sigma.size()); }
  void validate() const;  // throws Error(DomainError) on nonpositive entries
};

/// A competition-diffusion reaction system: n growth fields plus diffusion
/// rates. Immutable after construction; evaluation is pure.
struct ReactionSystem {
  int n_species = 0;
  std::vector<GrowthField> growth;  // size n_species
  Vec diffusion;                    // n_species positive rates
  std::string name;

  void validate() const;

  /// Raw field evaluation used by solvers: coordinates slightly below zero
  /// (discretization transients) are admitted down to -1e-6 and clamped
  /// there; the orthant policy of eval_reaction_terms does not apply.
  double eval_growth(int k, const Point& x) const;
};

enum class StateKind {
  extinction,
  exclusive_1,
  exclusive_2,
  exclusive_3,
  coexistence,
};

const char* to_string(StateKind kind) noexcept;

/// An equilibrium used as a wave endpoint, classified by positivity pattern.
struct BoundaryState {
  Point point;
  StateKind kind = StateKind::extinction;
};

/// Two-point boundary value problem for a traveling-wave profile on the
/// truncated domain [-L, L] with N grid intervals.
struct WaveProblem {
  ReactionSystem system;
  BoundaryState e_minus;
  BoundaryState e_plus;
  std::optional<double> theta;  // empty means the speed is a free unknown
  double half_length = 30.0;
  int grid_points = 600;  // grid nodes x_0..x_N, N = grid_points

  void validate() const;
};

ReactionSystem make_lotka_volterra(const LotkaVolterraParams& params,
                                   const Vec& diffusion,
                                   std::string name = "lotka_volterra");

/// Tabulated growth field on a rectangular grid, bilinear interpolation,
/// constant extension outside the table. For systems given by data only.
GrowthField tabulated_field_2d(const Vec& u_grid, const Vec& v_grid,
                               const Mat& values);

/// Trilinear analogue; `values(i, j*W+k)` holds the sample at
/// (u_grid[i], v_grid[j], w_grid[k]) with W = w_grid.size().
GrowthField tabulated_field_3d(const Vec& u_grid, const Vec& v_grid,
                               const Vec& w_grid, const Mat& values);

/// Parses {"species":2,"type":"lotka_volterra","sigma":[..],"c":[[..]],
/// "d":[..]} with an optional "name". Unknown keys are errors.
ReactionSystem system_from_json(const nlohmann::json& doc);

/// Growth values (f,g(,h)) at a point of the nonnegative orthant. Negative
/// coordinates of magnitude < 1e-13 are treated as zero; anything more
/// negative is a NegativeCoordinate error.
Vec eval_reaction_terms(const ReactionSystem& system, const Point& point);

/// Classifies a point by its positivity pattern (coordinates > tol count as
/// positive) and checks that it actually satisfies the defining equilibrium
/// equations: all fields vanish for coexistence, field k's own equation for
/// an exclusive state.
BoundaryState classify_boundary_state(const ReactionSystem& system,
                                      const Point& point, double tol = 1e-9);

}  // namespace nbarrier
