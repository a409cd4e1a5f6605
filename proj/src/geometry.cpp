#include "nbarrier/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "format_util.hpp"

namespace nbarrier {

namespace {

using ScalarField = std::function<double(const Point&)>;

constexpr int kBisectionCap = 60;

void check_scan_args(const Vec& box, int n, int resolution, double band_tol) {
  if (box.size() != n)
    throw Error(Errc::DimensionMismatch, "bounding box dimension mismatch");
  if ((box.array() <= 0.0).any())
    throw Error(Errc::DomainError, "bounding box must be positive");
  if (resolution < 2)
    throw Error(Errc::DomainError, "resolution must be at least 2");
  if (!(band_tol > 0.0))
    throw Error(Errc::DomainError, "band_tol must be positive");
}

// Bisection along the segment [a, b] assuming field(a)*field(b) < 0.
// Returns the refined point, or nothing if 60 iterations cannot push the
// value into the band (discontinuous data).
std::optional<Point> refine_on_edge(const ScalarField& field, Point a,
                                    double fa, Point b, double fb,
                                    double band_tol) {
  Point mid = a;
  double fm = fa;
  for (int iter = 0; iter < kBisectionCap; ++iter) {
    mid = 0.5 * (a + b);
    fm = field(mid);
    if (std::abs(fm) <= band_tol) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
      fb = fm;
    }
  }
  return std::nullopt;
}

// Grid scan of one scalar field over [0, box]: exact node zeros plus
// bisection-refined sign changes on axis-aligned edges, row-major order.
std::vector<Point> scan_zero_set(const ScalarField& field, const Vec& box,
                                 int n, int resolution, double band_tol) {
  std::array<Vec, 3> axes;
  for (int a = 0; a < n; ++a)
    axes[a] = Vec::LinSpaced(resolution, 0.0, box[a]);

  const int planes = (n == 3) ? resolution : 1;
  std::vector<double> cache(static_cast<size_t>(resolution) * resolution *
                            planes);
  auto flat = [&](int i, int j, int k) {
    return (static_cast<size_t>(k) * resolution + j) * resolution + i;
  };

  Point x(n);
  for (int k = 0; k < planes; ++k)
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i) {
        x[0] = axes[0][i];
        x[1] = axes[1][j];
        if (n == 3) x[2] = axes[2][k];
        cache[flat(i, j, k)] = field(x);
      }

  std::vector<Point> points;
  auto node_point = [&](int i, int j, int k) {
    Point p(n);
    p[0] = axes[0][i];
    p[1] = axes[1][j];
    if (n == 3) p[2] = axes[2][k];
    return p;
  };

  for (int k = 0; k < planes; ++k)
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i) {
        const double v0 = cache[flat(i, j, k)];
        if (v0 == 0.0) {
          points.push_back(node_point(i, j, k));
          continue;
        }
        // Edges leaving this node in each positive axis direction.
        for (int a = 0; a < n; ++a) {
          const int ni = i + (a == 0), nj = j + (a == 1), nk = k + (a == 2);
          if (ni >= resolution || nj >= resolution || nk >= planes) continue;
          const double v1 = cache[flat(ni, nj, nk)];
          if (v0 * v1 < 0.0) {
            auto refined = refine_on_edge(field, node_point(i, j, k), v0,
                                          node_point(ni, nj, nk), v1,
                                          band_tol);
            if (refined) points.push_back(*refined);
          }
        }
      }
  return points;
}

}  // namespace

std::vector<NullclineSample> sample_nullclines(const ReactionSystem& system,
                                               const Vec& bounding_box,
                                               int resolution,
                                               double band_tol) {
  system.validate();
  const int n = system.n_species;
  check_scan_args(bounding_box, n, resolution, band_tol);
  static const char* kLabels[3] = {"f", "g", "h"};
  std::vector<NullclineSample> samples;
  for (int k = 0; k < n; ++k) {
    NullclineSample sample;
    sample.label = kLabels[k];
    sample.band_tol = band_tol;
    sample.points = scan_zero_set(
        [&](const Point& p) { return system.eval_growth(k, p); },
        bounding_box, n, resolution, band_tol);
    if (sample.points.empty())
      throw Error(Errc::EmptyNullcline,
                  std::string("field ") + kLabels[k] +
                      " has no zero in the bounding box");
    samples.push_back(std::move(sample));
  }
  return samples;
}

NullclineSample sample_combined_field(const ReactionSystem& system,
                                      const Vec& weights,
                                      const Vec& bounding_box, int resolution,
                                      double band_tol) {
  system.validate();
  const int n = system.n_species;
  if (weights.size() != n)
    throw Error(Errc::DimensionMismatch, "weights dimension mismatch");
  if ((weights.array() <= 0.0).any())
    throw Error(Errc::DomainError, "weights must be positive");
  check_scan_args(bounding_box, n, resolution, band_tol);

  auto combined = [&](const Point& p) {
    double value = 0.0;
    for (int k = 0; k < n; ++k)
      value += weights[k] * p[k] * system.eval_growth(k, p);
    return value;
  };
  std::vector<Point> raw =
      scan_zero_set(combined, bounding_box, n, resolution, band_tol);

  NullclineSample sample;
  sample.label = "F";
  sample.band_tol = band_tol;
  for (auto& p : raw)
    if ((p.array() > 0.0).all()) sample.points.push_back(std::move(p));
  if (sample.points.empty())
    throw Error(Errc::EmptyNullcline,
                "combined field has no interior zero in the bounding box");
  return sample;
}

namespace {

// The two intercept fits are solved in reciprocal coordinates a_k =
// 1/intercept_k, where both containment constraint families are linear:
//   upper:  a . p <= 1 for all sample points p    (minimize sum 1/a_k)
//   lower:  a . p >= 1 for all sample points p    (maximize sum 1/a_k)
// Optima are found by enumerating candidates with 1..n active points and
// verifying feasibility, with a working set that grows by worst violators.

struct FitContext {
  const std::vector<Point>& pts;
  int n;
  double scale;   // largest coordinate, for guards
  double slack;   // feasibility tolerance on a . p vs 1
  bool upper;     // sense
};

double objective(const Vec& a) {
  return a.cwiseInverse().sum();
}

bool valid_candidate(const Vec& a, const FitContext& ctx) {
  if (!a.allFinite()) return false;
  const double lo = 1e-7 / std::max(ctx.scale, 1e-30);  // intercept cap
  for (int k = 0; k < a.size(); ++k)
    if (!(a[k] > lo) || !(a[k] < 1e12)) return false;
  return true;
}

bool feasible(const Vec& a, const Point& p, const FitContext& ctx) {
  const double s = a.dot(p);
  return ctx.upper ? s <= 1.0 + ctx.slack : s >= 1.0 - ctx.slack;
}

// Stationary candidate with a single active point (all coordinates
// positive): a_k proportional to 1/sqrt(p_k).
std::optional<Vec> face_candidate(const Point& p, const FitContext& ctx) {
  if (!(p.array() > 0.0).all()) return std::nullopt;
  const double total = p.array().sqrt().sum();
  Vec a = (p.array().sqrt() * total).inverse().matrix();
  if (!valid_candidate(a, ctx)) return std::nullopt;
  return a;
}

std::optional<Vec> vertex_candidate_2(const Point& p, const Point& q,
                                      const FitContext& ctx) {
  const double det = p[0] * q[1] - p[1] * q[0];
  const double scale2 = ctx.scale * ctx.scale;
  if (std::abs(det) <= 1e-14 * std::max(scale2, 1e-30)) return std::nullopt;
  Vec a(2);
  a[0] = (q[1] - p[1]) / det;
  a[1] = (p[0] - q[0]) / det;
  if (!valid_candidate(a, ctx)) return std::nullopt;
  return a;
}

std::optional<Vec> vertex_candidate_3(const Point& p, const Point& q,
                                      const Point& r, const FitContext& ctx) {
  Eigen::Matrix3d m;
  m.row(0) = Eigen::Vector3d(p[0], p[1], p[2]);
  m.row(1) = Eigen::Vector3d(q[0], q[1], q[2]);
  m.row(2) = Eigen::Vector3d(r[0], r[1], r[2]);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
  if (!lu.isInvertible()) return std::nullopt;
  Vec a = lu.solve(Eigen::Vector3d::Ones());
  if (!valid_candidate(a, ctx)) return std::nullopt;
  return a;
}

// Two active points in three dimensions leave one degree of freedom; the
// objective is convex along the line, so its derivative is bisected for the
// stationary point. Boundary minima mean an intercept escapes to infinity.
std::optional<Vec> edge_candidate_3(const Point& p, const Point& q,
                                    const FitContext& ctx) {
  Eigen::Matrix<double, 2, 3> m;
  m.row(0) = Eigen::Vector3d(p[0], p[1], p[2]);
  m.row(1) = Eigen::Vector3d(q[0], q[1], q[2]);
  Eigen::Vector3d d = m.row(0).cross(m.row(1));
  const double dn = d.norm();
  if (dn <= 1e-13 * std::max(ctx.scale * ctx.scale, 1e-30))
    return std::nullopt;
  d /= dn;
  Eigen::Vector3d a0 =
      m.completeOrthogonalDecomposition().solve(Eigen::Vector2d::Ones());

  const double big = 1e8 * (a0.norm() + 1.0);
  double lo = -big, hi = big;
  for (int k = 0; k < 3; ++k) {
    if (d[k] > 1e-300)
      lo = std::max(lo, -a0[k] / d[k]);
    else if (d[k] < -1e-300)
      hi = std::min(hi, -a0[k] / d[k]);
    else if (!(a0[k] > 0.0))
      return std::nullopt;
  }
  if (!(lo < hi)) return std::nullopt;

  auto slope = [&](double s) {
    double val = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double ak = a0[k] + s * d[k];
      val -= d[k] / (ak * ak);
    }
    return val;
  };
  const double eps = 1e-12 * (hi - lo);
  double s_lo = lo + eps, s_hi = hi - eps;
  if (!(slope(s_lo) < 0.0) || !(slope(s_hi) > 0.0)) return std::nullopt;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (s_lo + s_hi);
    (slope(mid) < 0.0 ? s_lo : s_hi) = mid;
  }
  Vec a = a0 + 0.5 * (s_lo + s_hi) * d;
  if (!valid_candidate(a, ctx)) return std::nullopt;
  return a;
}

// Best valid candidate over the working set, or nothing.
std::optional<Vec> best_over_working_set(const std::vector<int>& working,
                                         const FitContext& ctx) {
  std::optional<Vec> best;
  double best_obj = 0.0;
  auto consider = [&](const std::optional<Vec>& cand) {
    if (!cand) return;
    for (int idx : working)
      if (!feasible(*cand, ctx.pts[idx], ctx)) return;
    const double obj = objective(*cand);
    const bool better = ctx.upper ? obj < best_obj : obj > best_obj;
    if (!best || better) {
      best = cand;
      best_obj = obj;
    }
  };

  const size_t m = working.size();
  for (size_t i = 0; i < m; ++i)
    consider(face_candidate(ctx.pts[working[i]], ctx));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j) {
      const Point& p = ctx.pts[working[i]];
      const Point& q = ctx.pts[working[j]];
      if (ctx.n == 2)
        consider(vertex_candidate_2(p, q, ctx));
      else
        consider(edge_candidate_3(p, q, ctx));
    }
  if (ctx.n == 3)
    for (size_t i = 0; i < m; ++i)
      for (size_t j = i + 1; j < m; ++j)
        for (size_t k = j + 1; k < m; ++k)
          consider(vertex_candidate_3(ctx.pts[working[i]],
                                      ctx.pts[working[j]],
                                      ctx.pts[working[k]], ctx));
  return best;
}

Vec fit_one_side(const FitContext& ctx) {
  const auto& pts = ctx.pts;
  const int m = static_cast<int>(pts.size());

  std::vector<int> working;
  auto add = [&](int idx) {
    if (std::find(working.begin(), working.end(), idx) == working.end())
      working.push_back(idx);
  };

  // Seeds: per-axis extremes plus the extreme total, by sense.
  for (int k = 0; k < ctx.n; ++k) {
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double val = ctx.upper
                             ? pts[i][k]
                             : pts[i][k] / (pts[i].sum() + 1e-12 * ctx.scale);
      if (val > best_val) {
        best_val = val;
        best = i;
      }
    }
    add(best);
  }
  {
    int best = 0;
    double best_val = ctx.upper ? -1.0 : std::numeric_limits<double>::max();
    for (int i = 0; i < m; ++i) {
      const double s = pts[i].sum();
      if (ctx.upper ? s > best_val : s < best_val) {
        best_val = s;
        best = i;
      }
    }
    add(best);
  }

  // Points ordered by total, used to enrich a stuck working set.
  std::vector<int> by_total(m);
  std::iota(by_total.begin(), by_total.end(), 0);
  std::stable_sort(by_total.begin(), by_total.end(), [&](int a, int b) {
    return ctx.upper ? pts[a].sum() > pts[b].sum()
                     : pts[a].sum() < pts[b].sum();
  });
  size_t enrich_cursor = 0;
  auto enrich = [&]() {
    while (enrich_cursor < by_total.size()) {
      const int idx = by_total[enrich_cursor++];
      if (std::find(working.begin(), working.end(), idx) == working.end()) {
        working.push_back(idx);
        return true;
      }
    }
    return false;
  };

  for (int round = 0; round < 300; ++round) {
    auto best = best_over_working_set(working, ctx);
    if (!best) {
      if (!enrich())
        throw Error(Errc::DegenerateFit,
                    std::string("no valid ") +
                        (ctx.upper ? "upper" : "lower") +
                        " intercept candidate (nullcline touching the origin "
                        "or confined to an axis)");
      continue;
    }
    // Worst violator over the full sample set.
    int worst = -1;
    double worst_excess = 0.0;
    for (int i = 0; i < m; ++i) {
      const double s = best->dot(pts[i]);
      const double excess = ctx.upper ? s - (1.0 + ctx.slack)
                                      : (1.0 - ctx.slack) - s;
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = i;
      }
    }
    if (worst < 0) return *best;
    add(worst);
  }
  throw Error(Errc::DegenerateFit, "active-set search did not settle");
}

}  // namespace

Region fit_region(const std::vector<NullclineSample>& samples,
                  double strictness_margin) {
  if (!(strictness_margin >= 0.0) || !(strictness_margin < 1.0))
    throw Error(Errc::DomainError, "strictness margin must be in [0, 1)");

  std::vector<Point> pts;
  int n = 0;
  for (const auto& sample : samples) {
    for (const auto& p : sample.points) {
      if (n == 0) n = static_cast<int>(p.size());
      if (p.size() != n)
        throw Error(Errc::DimensionMismatch, "mixed sample dimensions");
      if ((p.array() < 0.0).any())
        throw Error(Errc::NegativeCoordinate, "sample point outside orthant");
      pts.push_back(p);
    }
  }
  if (pts.empty()) throw Error(Errc::DomainError, "no sample points to fit");

  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.maxCoeff());
  if (scale <= 0.0)
    throw Error(Errc::DegenerateFit, "all sample points at the origin");
  const double slack = 1e-9 * std::max(1.0, scale);

  FitContext upper_ctx{pts, n, scale, slack, true};
  FitContext lower_ctx{pts, n, scale, slack, false};
  const Vec a_upper = fit_one_side(upper_ctx);
  const Vec a_lower = fit_one_side(lower_ctx);

  Region region;
  region.upper = a_upper.cwiseInverse() * (1.0 + strictness_margin);
  region.lower = a_lower.cwiseInverse() * (1.0 - strictness_margin);
  for (int k = 0; k < n; ++k) {
    if (!(region.lower[k] > 0.0))
      throw Error(Errc::DegenerateFit, "lower intercept collapsed to zero");
    if (!(region.upper[k] > region.lower[k]))
      throw Error(Errc::OrderViolation,
                  "upper intercept " + std::to_string(region.upper[k]) +
                      " does not exceed lower intercept " +
                      std::to_string(region.lower[k]) + " on axis " +
                      std::to_string(k));
  }
  return region;
}

const char* to_string(Containment c) noexcept {
  switch (c) {
    case Containment::inside: return "inside";
    case Containment::outside_above: return "outside_above";
    case Containment::outside_below: return "outside_below";
    case Containment::boundary: return "boundary";
  }
  return "?";
}

Containment contains(const Region& region, const Point& point) {
  const int n = region.species();
  if (point.size() != n)
    throw Error(Errc::DimensionMismatch, "point dimension mismatch");
  if ((point.array() < -1e-13).any())
    throw Error(Errc::NegativeCoordinate, "point outside orthant");
  const Point p = point.cwiseMax(0.0);
  const double s_up = (p.array() / region.upper.array()).sum();
  const double s_lo = (p.array() / region.lower.array()).sum();
  constexpr double kBand = 1e-12;
  if (std::abs(s_up - 1.0) <= kBand || std::abs(s_lo - 1.0) <= kBand)
    return Containment::boundary;
  if (s_up > 1.0) return Containment::outside_above;
  if (s_lo < 1.0) return Containment::outside_below;
  return Containment::inside;
}

nlohmann::json sample_to_json(const NullclineSample& sample) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : sample.points) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < p.size(); ++k) row.push_back(p[k]);
    points.push_back(std::move(row));
  }
  return {{"label", sample.label},
          {"band_tol", sample.band_tol},
          {"points", std::move(points)}};
}

nlohmann::json region_to_json(const Region& region) {
  return {{"upper", std::vector<double>(region.upper.begin(),
                                        region.upper.end())},
          {"lower", std::vector<double>(region.lower.begin(),
                                        region.lower.end())}};
}

Region region_from_json(const nlohmann::json& doc) {
  const auto upper = doc.at("upper").get<std::vector<double>>();
  const auto lower = doc.at("lower").get<std::vector<double>>();
  if (upper.size() != lower.size() || upper.size() < 2 || upper.size() > 3)
    throw Error(Errc::ConfigError, "region intercept lists malformed");
  Region region;
  region.upper = Eigen::Map<const Vec>(upper.data(), upper.size());
  region.lower = Eigen::Map<const Vec>(lower.data(), lower.size());
  return region;
}

void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<NullclineSample>& samples) {
  std::ostringstream os;
  int n = 0;
  for (const auto& s : samples)
    if (!s.points.empty()) n = static_cast<int>(s.points.front().size());
  os << "label,u,v" << (n == 3 ? ",w" : "") << "\n";
  for (const auto& s : samples)
    for (const auto& p : s.points) {
      os << s.label;
      for (int k = 0; k < p.size(); ++k) os << "," << detail::fmt_double(p[k]);
      os << "\n";
    }
  detail::write_file_atomic(path, os.str());
}

void write_region_csv(const std::filesystem::path& path,
                      const Region& region) {
  std::ostringstream os;
  os << "label,u,v" << (region.species() == 3 ? ",w" : "") << "\n";
  os << "upper";
  for (int k = 0; k < region.species(); ++k)
    os << "," << detail::fmt_double(region.upper[k]);
  os << "\nlower";
  for (int k = 0; k < region.species(); ++k)
    os << "," << detail::fmt_double(region.lower[k]);
  os << "\n";
  detail::write_file_atomic(path, os.str());
}

}  // namespace nbarrier
