#pragma once

#include <filesystem>
#include <vector>

#include "nbarrier/model.hpp"
#include "nbarrier/types.hpp"

namespace nbarrier {

struct NewtonOptions {
  double tol = 1e-10;       // residual max-norm target
  int max_iter = 200;
  double fd_step = 1e-7;    // relative finite-difference step
  double armijo_c = 1e-4;
  int max_backtracks = 40;
};

/// Discrete traveling-wave profile on the uniform grid of a WaveProblem.
/// Values in [-1e-12, 0) are clamped to 0; anything more negative fails
/// construction.
struct WaveSolution {
  Vec x;          // grid nodes, size N+1
  Mat profiles;   // (N+1) x n, one column per species
  double theta = 0.0;
  double residual = 0.0;     // discrete residual max-norm at return
  double bc_mismatch = 0.0;  // max deviation of end rows from e-/e+
  WaveProblem problem;
};

/// Snapshot of the parabolic system at time t on a Neumann domain.
struct MarchState {
  Vec y;
  Mat profiles;
  double t = 0.0;
  double front_position = 0.0;  // NaN when no species shows a front
};

struct MarchOptions {
  double dt = 0.05;
  double t_end = 100.0;
  std::vector<double> snapshot_times;  // empty: single snapshot at t_end
  double blow_up_threshold = 0.0;      // 0: 10x the largest axis root
  int front_margin_cells = 10;
  double transition_fraction = 0.1;    // band defining the active front zone
};

/// Componentwise tanh interpolation between the endpoints, unit width,
/// centered at x = 0. The standard initial guess.
Mat tanh_profile(const WaveProblem& problem, double width = 1.0);

/// Damped Newton (Armijo backtracking on the residual max-norm) on the
/// second-order central-difference discretization with Dirichlet values e-/e+
/// and fixed speed theta. `init` empty means the tanh guess. Banded
/// finite-difference Jacobian, sparse LU linear solves.
WaveSolution solve_bvp(const WaveProblem& problem, const Mat& init = {},
                       const NewtonOptions& options = {});

/// Extended Newton on (profiles, theta) with the phase condition
/// profile_s(0) = e-_s + phase_anchor*(e+_s - e-_s), where s is the first
/// species whose endpoint values differ. problem.theta, when set, seeds the
/// speed iterate (otherwise 0).
WaveSolution solve_bvp_free_speed(const WaveProblem& problem,
                                  const Mat& init = {},
                                  double phase_anchor = 0.5,
                                  const NewtonOptions& options = {});

/// Max-norm of the discrete residual of `solution` under `system`, using the
/// same stencils as solve_bvp and the solution's own theta.
double residual_norm(const ReactionSystem& system,
                     const WaveSolution& solution);

/// IMEX time-marching of the parabolic system on [y_0, y_M] with zero-flux
/// boundaries: explicit reaction step, implicit (backward Euler) diffusion
/// via a tridiagonal solve per species. Requires dt * max|field| <= 0.5.
/// Profiles stay nonnegative. Snapshots are taken at the requested times
/// (rounded to whole steps).
std::vector<MarchState> time_march(const ReactionSystem& system, const Vec& y,
                                   const Mat& initial,
                                   const MarchOptions& options);

enum class FrontPick { first, last };

/// Linearly interpolated position where `profile` crosses `level`; throws
/// NoCrossing when it never does.
double front_position(const Vec& y, const Vec& profile, double level,
                      FrontPick pick = FrontPick::first);

/// Least-squares slope of species-1 front position against time over the
/// snapshots. `level` NaN means the midpoint of the first snapshot's
/// endpoint values. Needs >= 3 snapshots, each with a crossing.
double estimate_speed(const std::vector<MarchState>& snapshots,
                      double level = std::numeric_limits<double>::quiet_NaN(),
                      FrontPick pick = FrontPick::first);

/// Piecewise-linear resampling of (x, values) onto query points; clamped at
/// the ends.
Vec interp_linear(const Vec& x, const Vec& values, const Vec& queries);

/// Local 4-point (cubic Lagrange) resampling; clamped at the ends.
Vec interp_cubic(const Vec& x, const Vec& values, const Vec& queries);

/// CSV columns x,u,v[,w],p,q with p,q formed from `weights` at export time.
void write_wave_csv(const std::filesystem::path& path,
                    const WaveSolution& solution, const Vec& weights);

/// CSV columns y,u,v[,w] for one snapshot.
void write_snapshot_csv(const std::filesystem::path& path,
                        const MarchState& state);

}  // namespace nbarrier
