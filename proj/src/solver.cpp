#include "nbarrier/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "format_util.hpp"

namespace nbarrier {

namespace {

constexpr double kProfileFloor = -1e-12;

// Interior-unknown view of the discretized wave system. Unknown layout is
// node-major: z[(i-1)*n + k] = species k at node i, i = 1..N-1, which keeps
// the Jacobian bandwidth at n.
struct Discretization {
  const ReactionSystem* system;
  int n;
  int N;
  double h;
  Point e_minus;
  Point e_plus;

  int unknowns() const { return n * (N - 1); }

  double value(const Vec& z, int node, int k) const {
    if (node == 0) return e_minus[k];
    if (node == N) return e_plus[k];
    return z[(node - 1) * n + k];
  }

  Vec residual(const Vec& z, double theta) const {
    Vec r(unknowns());
    Point p(n);
    const double inv_h2 = 1.0 / (h * h);
    const double inv_2h = 0.5 / h;
    for (int i = 1; i < N; ++i) {
      for (int k = 0; k < n; ++k) p[k] = value(z, i, k);
      for (int k = 0; k < n; ++k) {
        const double left = value(z, i - 1, k);
        const double right = value(z, i + 1, k);
        const double diffusion =
            (*system).diffusion[k] * (left - 2.0 * p[k] + right) * inv_h2;
        const double advection = theta * (right - left) * inv_2h;
        r[(i - 1) * n + k] =
            diffusion + advection + p[k] * system->eval_growth(k, p);
      }
    }
    return r;
  }

  // d(residual)/d(theta): the advection stencil, analytic since theta enters
  // linearly.
  Vec theta_column(const Vec& z) const {
    Vec c(unknowns());
    const double inv_2h = 0.5 / h;
    for (int i = 1; i < N; ++i)
      for (int k = 0; k < n; ++k)
        c[(i - 1) * n + k] =
            (value(z, i + 1, k) - value(z, i - 1, k)) * inv_2h;
    return c;
  }

  // Finite-difference Jacobian with 3n-coloring: columns whose nodes are
  // three apart never share a residual row, so one perturbed evaluation
  // serves a whole color class.
  Eigen::SparseMatrix<double> jacobian(const Vec& z, const Vec& r0,
                                       double theta, double fd_step) const {
    const int m = unknowns();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(m) * (n + 2));

    Vec zp = z;
    Vec steps(m);
    for (int color = 0; color < 3 * n; ++color) {
      const int node_phase = color / n;
      const int k = color % n;
      bool any = false;
      for (int i = 1; i < N; ++i) {
        if (i % 3 != node_phase) continue;
        const int col = (i - 1) * n + k;
        steps[col] = fd_step * std::max(1.0, std::abs(z[col]));
        zp[col] += steps[col];
        any = true;
      }
      if (!any) continue;
      const Vec rp = residual(zp, theta);
      for (int i = 1; i < N; ++i) {
        if (i % 3 != node_phase) continue;
        const int col = (i - 1) * n + k;
        const double inv_step = 1.0 / steps[col];
        // Rows affected by column (i,k): all species at node i, species k
        // at nodes i-1 and i+1.
        for (int l = 0; l < n; ++l) {
          const int row = (i - 1) * n + l;
          triplets.emplace_back(row, col, (rp[row] - r0[row]) * inv_step);
        }
        if (i - 1 >= 1) {
          const int row = (i - 2) * n + k;
          triplets.emplace_back(row, col, (rp[row] - r0[row]) * inv_step);
        }
        if (i + 1 <= N - 1) {
          const int row = i * n + k;
          triplets.emplace_back(row, col, (rp[row] - r0[row]) * inv_step);
        }
        zp[col] = z[col];
      }
    }

    Eigen::SparseMatrix<double> jac(m, m);
    jac.setFromTriplets(triplets.begin(), triplets.end());
    return jac;
  }
};

Discretization make_discretization(const WaveProblem& problem) {
  Discretization d;
  d.system = &problem.system;
  d.n = problem.system.n_species;
  d.N = problem.grid_points;
  d.h = 2.0 * problem.half_length / problem.grid_points;
  d.e_minus = problem.e_minus.point;
  d.e_plus = problem.e_plus.point;
  return d;
}

Vec interior_from_profiles(const Discretization& d, const Mat& profiles) {
  Vec z(d.unknowns());
  for (int i = 1; i < d.N; ++i)
    for (int k = 0; k < d.n; ++k) z[(i - 1) * d.n + k] = profiles(i, k);
  return z;
}

WaveSolution assemble_solution(const WaveProblem& problem,
                               const Discretization& d, const Vec& z,
                               double theta, double residual) {
  WaveSolution sol;
  sol.x = Vec::LinSpaced(d.N + 1, -problem.half_length, problem.half_length);
  sol.profiles.resize(d.N + 1, d.n);
  for (int i = 0; i <= d.N; ++i)
    for (int k = 0; k < d.n; ++k) sol.profiles(i, k) = d.value(z, i, k);

  const double min_value = sol.profiles.minCoeff();
  if (min_value < kProfileFloor)
    throw Error(Errc::DomainError,
                "converged profile dips to " + std::to_string(min_value) +
                    ", below the -1e-12 floor");
  sol.profiles = sol.profiles.cwiseMax(0.0);
  sol.theta = theta;
  sol.residual = residual;
  sol.bc_mismatch = std::max(
      (sol.profiles.row(0).transpose() - Vec(d.e_minus.cwiseMax(0.0)))
          .lpNorm<Eigen::Infinity>(),
      (sol.profiles.row(d.N).transpose() - Vec(d.e_plus.cwiseMax(0.0)))
          .lpNorm<Eigen::Infinity>());
  sol.problem = problem;
  return sol;
}

}  // namespace

Mat tanh_profile(const WaveProblem& problem, double width) {
  problem.validate();
  const int N = problem.grid_points;
  const int n = problem.system.n_species;
  const Vec x = Vec::LinSpaced(N + 1, -problem.half_length,
                               problem.half_length);
  Mat profiles(N + 1, n);
  for (int i = 0; i <= N; ++i) {
    const double w = 0.5 * (1.0 + std::tanh(x[i] / width));
    for (int k = 0; k < n; ++k)
      profiles(i, k) = problem.e_minus.point[k] +
                       w * (problem.e_plus.point[k] -
                            problem.e_minus.point[k]);
  }
  return profiles;
}

WaveSolution solve_bvp(const WaveProblem& problem, const Mat& init,
                       const NewtonOptions& options) {
  problem.validate();
  if (!problem.theta)
    throw Error(Errc::DomainError,
                "theta is free; use solve_bvp_free_speed for this problem");
  const double theta = *problem.theta;
  Discretization d = make_discretization(problem);
  Mat start = init.size() ? init : tanh_profile(problem);
  if (start.rows() != d.N + 1 || start.cols() != d.n)
    throw Error(Errc::DimensionMismatch, "initial guess shape mismatch");
  Vec z = interior_from_profiles(d, start);

  Vec r = d.residual(z, theta);
  double norm = r.lpNorm<Eigen::Infinity>();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (norm <= options.tol)
      return assemble_solution(problem, d, z, theta, norm);

    lu.compute(d.jacobian(z, r, theta, options.fd_step));
    if (lu.info() != Eigen::Success)
      throw Error(Errc::JacobianSingular,
                  "linearization is singular; retry with a perturbed guess");
    const Vec dz = lu.solve(-r);

    double lambda = 1.0;
    bool accepted = false;
    for (int back = 0; back < options.max_backtracks; ++back) {
      const Vec zt = z + lambda * dz;
      const Vec rt = d.residual(zt, theta);
      const double nt = rt.lpNorm<Eigen::Infinity>();
      if (nt <= (1.0 - options.armijo_c * lambda) * norm) {
        z = zt;
        r = rt;
        norm = nt;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted)
      throw Error(Errc::NoConvergence,
                  "line search stalled at residual " + std::to_string(norm));
  }
  if (norm <= options.tol) return assemble_solution(problem, d, z, theta, norm);
  throw Error(Errc::NoConvergence,
              "Newton did not reach tolerance; residual " +
                  std::to_string(norm));
}

WaveSolution solve_bvp_free_speed(const WaveProblem& problem, const Mat& init,
                                  double phase_anchor,
                                  const NewtonOptions& options) {
  problem.validate();
  if (!(phase_anchor > 0.0 && phase_anchor < 1.0))
    throw Error(Errc::DomainError, "phase anchor must lie in (0,1)");
  Discretization d = make_discretization(problem);

  int anchor_species = -1;
  for (int k = 0; k < d.n; ++k)
    if (d.e_minus[k] != d.e_plus[k]) {
      anchor_species = k;
      break;
    }
  if (anchor_species < 0)
    throw Error(Errc::PhaseDegenerate,
                "no component distinguishes the endpoints");
  const double target =
      d.e_minus[anchor_species] +
      phase_anchor * (d.e_plus[anchor_species] - d.e_minus[anchor_species]);
  const int anchor_index = (d.N / 2 - 1) * d.n + anchor_species;

  Mat start = init.size() ? init : tanh_profile(problem);
  if (start.rows() != d.N + 1 || start.cols() != d.n)
    throw Error(Errc::DimensionMismatch, "initial guess shape mismatch");
  Vec z = interior_from_profiles(d, start);
  double theta = problem.theta.value_or(0.0);

  auto merged_norm = [&](const Vec& r, double phase) {
    return std::max(r.lpNorm<Eigen::Infinity>(), std::abs(phase));
  };

  Vec r = d.residual(z, theta);
  double phase = z[anchor_index] - target;
  double norm = merged_norm(r, phase);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (norm <= options.tol) {
      WaveSolution sol = assemble_solution(problem, d, z, theta,
                                           r.lpNorm<Eigen::Infinity>());
      return sol;
    }

    lu.compute(d.jacobian(z, r, theta, options.fd_step));
    if (lu.info() != Eigen::Success)
      throw Error(Errc::JacobianSingular,
                  "linearization is singular; retry with a perturbed guess");
    // Bordered solve: two banded back-substitutions plus a scalar Schur
    // complement for the speed update.
    const Vec a = lu.solve(-r);
    const Vec b = lu.solve(d.theta_column(z));
    const double denom = b[anchor_index];
    if (std::abs(denom) < 1e-14 * (1.0 + a.lpNorm<Eigen::Infinity>()))
      throw Error(Errc::JacobianSingular,
                  "phase condition is blind to the speed at this iterate");
    const double dtheta = (a[anchor_index] + phase) / denom;
    const Vec dz = a - dtheta * b;

    double lambda = 1.0;
    bool accepted = false;
    for (int back = 0; back < options.max_backtracks; ++back) {
      const Vec zt = z + lambda * dz;
      const double tt = theta + lambda * dtheta;
      const Vec rt = d.residual(zt, tt);
      const double pt = zt[anchor_index] - target;
      const double nt = merged_norm(rt, pt);
      if (nt <= (1.0 - options.armijo_c * lambda) * norm) {
        z = zt;
        theta = tt;
        r = rt;
        phase = pt;
        norm = nt;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted)
      throw Error(Errc::NoConvergence,
                  "line search stalled at residual " + std::to_string(norm));
  }
  if (norm <= options.tol)
    return assemble_solution(problem, d, z, theta,
                             r.lpNorm<Eigen::Infinity>());
  throw Error(Errc::NoConvergence,
              "free-speed Newton did not reach tolerance; residual " +
                  std::to_string(norm));
}

double residual_norm(const ReactionSystem& system,
                     const WaveSolution& solution) {
  system.validate();
  const int n = system.n_species;
  const int N = static_cast<int>(solution.x.size()) - 1;
  if (solution.profiles.rows() != N + 1 || solution.profiles.cols() != n)
    throw Error(Errc::DimensionMismatch, "solution shape mismatch");
  const double h = solution.x[1] - solution.x[0];
  const double inv_h2 = 1.0 / (h * h);
  const double inv_2h = 0.5 / h;

  double worst = 0.0;
  Point p(n);
  for (int i = 1; i < N; ++i) {
    for (int k = 0; k < n; ++k) p[k] = solution.profiles(i, k);
    for (int k = 0; k < n; ++k) {
      const double diffusion =
          system.diffusion[k] *
          (solution.profiles(i - 1, k) - 2.0 * p[k] +
           solution.profiles(i + 1, k)) *
          inv_h2;
      const double advection =
          solution.theta *
          (solution.profiles(i + 1, k) - solution.profiles(i - 1, k)) * inv_2h;
      worst = std::max(
          std::abs(diffusion + advection + p[k] * system.eval_growth(k, p)),
          worst);
    }
  }
  return worst;
}

namespace {

// Largest positive axis root over all fields and axes, found by a doubling
// scan; sets the default blow-up scale.
double largest_axis_root(const ReactionSystem& system) {
  const int n = system.n_species;
  double hi = 1.0;
  for (int doubling = 0; doubling < 40; ++doubling) {
    bool all_negative = true;
    for (int k = 0; k < n && all_negative; ++k)
      for (int a = 0; a < n && all_negative; ++a) {
        Point p = Point::Zero(n);
        p[a] = hi;
        all_negative = system.eval_growth(k, p) < 0.0;
      }
    if (all_negative) break;
    hi *= 2.0;
  }
  constexpr int kScan = 256;
  double largest = 0.0;
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a) {
      double prev = 0.0, prev_v = 0.0;
      for (int i = 1; i <= kScan; ++i) {
        const double t = hi * (static_cast<double>(i) / kScan);
        Point p = Point::Zero(n);
        p[a] = t;
        const double v = system.eval_growth(k, p);
        if (i > 1 && prev_v * v <= 0.0 && (prev_v != 0.0 || v != 0.0))
          largest = std::max(largest, 0.5 * (prev + t));
        prev = t;
        prev_v = v;
      }
    }
  return largest > 0.0 ? largest : 1.0;
}

// Prefactored constant-coefficient tridiagonal solve for
// (I - mu * D2) x = rhs with zero-flux boundary rows.
struct ImplicitDiffusion {
  double mu = 0.0;
  Vec denom;  // forward-elimination pivots
  Vec upper;  // modified superdiagonal

  void factor(int nodes, double mu_in) {
    mu = mu_in;
    denom.resize(nodes);
    upper.resize(nodes);
    const double diag = 1.0 + 2.0 * mu;
    // Row 0 and row M carry the mirrored ghost node: off-diagonal -2mu.
    upper[0] = -2.0 * mu / diag;
    denom[0] = diag;
    for (int i = 1; i < nodes; ++i) {
      const double sub = (i == nodes - 1) ? -2.0 * mu : -mu;
      const double piv = diag - sub * upper[i - 1];
      denom[i] = piv;
      upper[i] = (i == nodes - 1) ? 0.0 : -mu / piv;
    }
  }

  void solve_in_place(Eigen::Ref<Vec> rhs) const {
    const int nodes = static_cast<int>(denom.size());
    rhs[0] /= denom[0];
    for (int i = 1; i < nodes; ++i) {
      const double sub = (i == nodes - 1) ? -2.0 * mu : -mu;
      rhs[i] = (rhs[i] - sub * rhs[i - 1]) / denom[i];
    }
    for (int i = nodes - 2; i >= 0; --i) rhs[i] -= upper[i] * rhs[i + 1];
  }
};

std::vector<double> level_crossings(const Vec& y, const Vec& profile,
                                    double level) {
  std::vector<double> positions;
  const int M = static_cast<int>(y.size()) - 1;
  for (int i = 0; i < M; ++i) {
    const double a = profile[i] - level;
    const double b = profile[i + 1] - level;
    if (a == 0.0) {
      positions.push_back(y[i]);
    } else if (a * b < 0.0) {
      positions.push_back(y[i] + (y[i + 1] - y[i]) * a / (a - b));
    }
  }
  const double last = profile[M] - level;
  if (last == 0.0) positions.push_back(y[M]);
  return positions;
}

double snapshot_front(const Vec& y, const Vec& profile) {
  const double level = 0.5 * (profile[0] + profile[profile.size() - 1]);
  auto crossings = level_crossings(y, profile, level);
  return crossings.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : crossings.front();
}

}  // namespace

std::vector<MarchState> time_march(const ReactionSystem& system, const Vec& y,
                                   const Mat& initial,
                                   const MarchOptions& options) {
  system.validate();
  const int n = system.n_species;
  const int nodes = static_cast<int>(y.size());
  if (nodes < 8) throw Error(Errc::DomainError, "need at least 8 grid nodes");
  if (initial.rows() != nodes || initial.cols() != n)
    throw Error(Errc::DimensionMismatch, "initial profile shape mismatch");
  if (initial.minCoeff() < 0.0)
    throw Error(Errc::NegativeCoordinate, "initial profiles must be >= 0");
  if (!(options.dt > 0.0) || !(options.t_end >= 0.0))
    throw Error(Errc::DomainError, "dt must be positive, t_end nonnegative");
  const double h = y[1] - y[0];
  for (int i = 0; i + 1 < nodes; ++i)
    if (std::abs((y[i + 1] - y[i]) - h) > 1e-9 * h)
      throw Error(Errc::DomainError, "grid must be uniform");

  const double blow_up = options.blow_up_threshold > 0.0
                             ? options.blow_up_threshold
                             : 10.0 * largest_axis_root(system);

  const long n_steps = std::lround(options.t_end / options.dt);
  if (std::abs(n_steps * options.dt - options.t_end) >
      1e-9 * std::max(1.0, options.t_end))
    throw Error(Errc::DomainError, "t_end must be a whole number of steps");

  std::vector<long> snap_steps;
  if (options.snapshot_times.empty()) {
    snap_steps.push_back(n_steps);
  } else {
    for (double t : options.snapshot_times) {
      if (t < 0.0 || t > options.t_end + 1e-9)
        throw Error(Errc::DomainError, "snapshot time outside [0, t_end]");
      snap_steps.push_back(std::lround(t / options.dt));
    }
    std::sort(snap_steps.begin(), snap_steps.end());
    snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()),
                     snap_steps.end());
  }

  std::vector<ImplicitDiffusion> diffusion(n);
  for (int k = 0; k < n; ++k)
    diffusion[k].factor(nodes, options.dt * system.diffusion[k] / (h * h));

  Mat profiles = initial;
  std::vector<MarchState> snapshots;
  auto take_snapshot = [&](double t) {
    MarchState state;
    state.y = y;
    state.profiles = profiles;
    state.t = t;
    state.front_position = snapshot_front(y, profiles.col(0));
    snapshots.push_back(std::move(state));
  };
  auto guard_front = [&](double t) {
    for (int k = 0; k < n; ++k) {
      const auto col = profiles.col(k);
      const double lo = col.minCoeff(), hi = col.maxCoeff();
      if (hi - lo < 1e-6 * std::max(1.0, hi)) continue;
      const double mid = 0.5 * (lo + hi);
      for (int i = 0; i + 1 < nodes; ++i) {
        const double a = col[i] - mid, b = col[i + 1] - mid;
        if (a * b <= 0.0 &&
            (i < options.front_margin_cells ||
             i + 1 > nodes - 1 - options.front_margin_cells))
          throw Error(Errc::FrontTooClose,
                      "front within " +
                          std::to_string(options.front_margin_cells) +
                          " cells of the boundary at t = " +
                          std::to_string(t));
      }
    }
  };

  size_t snap_cursor = 0;
  auto maybe_snapshot = [&](long step) {
    while (snap_cursor < snap_steps.size() && snap_steps[snap_cursor] == step) {
      take_snapshot(step * options.dt);
      ++snap_cursor;
    }
  };

  guard_front(0.0);
  maybe_snapshot(0);
  Mat stage(nodes, n);
  Point p(n);
  for (long step = 1; step <= n_steps; ++step) {
    double max_field = 0.0;
    for (int i = 0; i < nodes; ++i) {
      for (int k = 0; k < n; ++k) p[k] = profiles(i, k);
      for (int k = 0; k < n; ++k) {
        const double f = system.eval_growth(k, p);
        max_field = std::max(max_field, std::abs(f));
        stage(i, k) = p[k] * (1.0 + options.dt * f);
      }
    }
    if (options.dt * max_field > 0.5 + 1e-12)
      throw Error(Errc::DomainError,
                  "dt * max|field| = " + std::to_string(options.dt * max_field) +
                      " violates the explicit stability bound 0.5");

    for (int k = 0; k < n; ++k) {
      Vec column = stage.col(k);
      diffusion[k].solve_in_place(column);
      profiles.col(k) = column.cwiseMax(0.0);
    }

    if (profiles.maxCoeff() > blow_up)
      throw Error(Errc::BlowUp, "profile exceeded " + std::to_string(blow_up) +
                                    " at t = " +
                                    std::to_string(step * options.dt));
    guard_front(step * options.dt);
    maybe_snapshot(step);
  }
  return snapshots;
}

double front_position(const Vec& y, const Vec& profile, double level,
                      FrontPick pick) {
  if (y.size() != profile.size() || y.size() < 2)
    throw Error(Errc::DimensionMismatch, "grid/profile size mismatch");
  auto crossings = level_crossings(y, profile, level);
  if (crossings.empty())
    throw Error(Errc::NoCrossing, "profile never crosses the level");
  return pick == FrontPick::first ? crossings.front() : crossings.back();
}

double estimate_speed(const std::vector<MarchState>& snapshots, double level,
                      FrontPick pick) {
  if (snapshots.size() < 3)
    throw Error(Errc::DomainError, "need at least 3 snapshots");
  if (std::isnan(level)) {
    const Vec& first = snapshots.front().profiles.col(0);
    level = 0.5 * (first[0] + first[first.size() - 1]);
  }
  const auto m = snapshots.size();
  Vec t(m), pos(m);
  for (size_t i = 0; i < m; ++i) {
    t[i] = snapshots[i].t;
    pos[i] = front_position(snapshots[i].y, snapshots[i].profiles.col(0),
                            level, pick);
  }
  const double t_mean = t.mean();
  const double p_mean = pos.mean();
  const double denom = (t.array() - t_mean).square().sum();
  if (denom <= 0.0)
    throw Error(Errc::DomainError, "snapshot times must be distinct");
  return ((t.array() - t_mean) * (pos.array() - p_mean)).sum() / denom;
}

Vec interp_linear(const Vec& x, const Vec& values, const Vec& queries) {
  const int m = static_cast<int>(x.size());
  if (values.size() != m || m < 2)
    throw Error(Errc::DimensionMismatch, "interpolation data mismatch");
  Vec out(queries.size());
  for (int qi = 0; qi < queries.size(); ++qi) {
    double q = std::clamp(queries[qi], x[0], x[m - 1]);
    int i = static_cast<int>(
        std::upper_bound(x.data(), x.data() + m, q) - x.data() - 1);
    i = std::clamp(i, 0, m - 2);
    const double s = (q - x[i]) / (x[i + 1] - x[i]);
    out[qi] = (1.0 - s) * values[i] + s * values[i + 1];
  }
  return out;
}

Vec interp_cubic(const Vec& x, const Vec& values, const Vec& queries) {
  const int m = static_cast<int>(x.size());
  if (values.size() != m || m < 4)
    throw Error(Errc::DimensionMismatch, "cubic interpolation needs >= 4 nodes");
  Vec out(queries.size());
  for (int qi = 0; qi < queries.size(); ++qi) {
    double q = std::clamp(queries[qi], x[0], x[m - 1]);
    int i = static_cast<int>(
        std::upper_bound(x.data(), x.data() + m, q) - x.data() - 1);
    i = std::clamp(i, 0, m - 2);
    const int j0 = std::clamp(i - 1, 0, m - 4);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
      double basis = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) basis *= (q - x[j0 + b]) / (x[j0 + a] - x[j0 + b]);
      acc += basis * values[j0 + a];
    }
    out[qi] = acc;
  }
  return out;
}

void write_wave_csv(const std::filesystem::path& path,
                    const WaveSolution& solution, const Vec& weights) {
  const int n = static_cast<int>(solution.profiles.cols());
  if (weights.size() != n)
    throw Error(Errc::DimensionMismatch, "export weights dimension mismatch");
  const Vec& d = solution.problem.system.diffusion;
  std::ostringstream os;
  os << "x,u,v" << (n == 3 ? ",w" : "") << ",p,q\n";
  for (int i = 0; i < solution.x.size(); ++i) {
    os << detail::fmt_double(solution.x[i]);
    double p = 0.0, q = 0.0;
    for (int k = 0; k < n; ++k) {
      const double value = solution.profiles(i, k);
      os << "," << detail::fmt_double(value);
      p += weights[k] * value;
      q += weights[k] * d[k] * value;
    }
    os << "," << detail::fmt_double(p) << "," << detail::fmt_double(q) << "\n";
  }
  detail::write_file_atomic(path, os.str());
}

void write_snapshot_csv(const std::filesystem::path& path,
                        const MarchState& state) {
  const int n = static_cast<int>(state.profiles.cols());
  std::ostringstream os;
  os << "y,u,v" << (n == 3 ? ",w" : "") << "\n";
  for (int i = 0; i < state.y.size(); ++i) {
    os << detail::fmt_double(state.y[i]);
    for (int k = 0; k < n; ++k)
      os << "," << detail::fmt_double(state.profiles(i, k));
    os << "\n";
  }
  detail::write_file_atomic(path, os.str());
}

}  // namespace nbarrier
