#include "nbarrier/hypotheses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace nbarrier {

const char* to_string(CheckStatus status) noexcept {
  switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::indeterminate: return "indeterminate";
  }
  return "?";
}

bool HypothesisReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) {
    return e.status == CheckStatus::pass;
  });
}

namespace {

constexpr double kClusterRadius = 1e-6;

// Damped Newton polish of a common-zero candidate with a finite-difference
// Jacobian. Returns the polished point, or nothing if the iteration leaves
// the box or cannot reduce the residual (degenerate Jacobians keep the
// point only if it is already a zero).
std::optional<Point> polish_root(const ReactionSystem& system, Point x,
                                 const Vec& box) {
  const int n = system.n_species;
  const double scale = box.maxCoeff();
  auto residual = [&](const Point& p) {
    Vec r(n);
    for (int k = 0; k < n; ++k) r[k] = system.eval_growth(k, p);
    return r;
  };

  Vec r = residual(x);
  for (int iter = 0; iter < 60; ++iter) {
    if (r.lpNorm<Eigen::Infinity>() <= 1e-13) return x;
    Mat jac(n, n);
    for (int j = 0; j < n; ++j) {
      const double h = 1e-7 * std::max(std::abs(x[j]), 0.01 * scale);
      Point xp = x;
      xp[j] += h;
      jac.col(j) = (residual(xp) - r) / h;
    }
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible())
      return r.lpNorm<Eigen::Infinity>() <= 1e-9 ? std::optional<Point>(x)
                                                 : std::nullopt;
    const Vec step = lu.solve(-r);
    double lambda = 1.0;
    for (int back = 0; back < 30; ++back) {
      Point trial = x + lambda * step;
      bool in_box = true;
      for (int k = 0; k < n; ++k)
        in_box = in_box && trial[k] > -1e-9 && trial[k] < 2.0 * box[k];
      if (in_box) {
        Vec rt = residual(trial);
        if (rt.lpNorm<Eigen::Infinity>() <
            (1.0 - 1e-4 * lambda) * r.lpNorm<Eigen::Infinity>()) {
          x = trial;
          r = std::move(rt);
          break;
        }
      }
      lambda *= 0.5;
      if (back == 29) return std::nullopt;
    }
  }
  return r.lpNorm<Eigen::Infinity>() <= 1e-10 ? std::optional<Point>(x)
                                              : std::nullopt;
}

}  // namespace

CoexistenceResult check_coexistence_root(const ReactionSystem& system,
                                         const Vec& bounding_box,
                                         int resolution, double tol) {
  system.validate();
  const int n = system.n_species;
  if (bounding_box.size() != n || (bounding_box.array() <= 0.0).any())
    throw Error(Errc::DomainError, "bounding box must be positive");
  if (resolution < 4)
    throw Error(Errc::DomainError, "resolution must be at least 4");

  std::array<Vec, 3> axes;
  for (int a = 0; a < n; ++a)
    axes[a] = Vec::LinSpaced(resolution, 0.0, bounding_box[a]);
  const int planes = (n == 3) ? resolution : 1;

  // Cache all field values on the nodes, then look for cells where every
  // field attains both signs among the corners.
  std::vector<double> cache(static_cast<size_t>(n) * resolution * resolution *
                            planes);
  auto flat = [&](int k, int i, int j, int l) {
    return ((static_cast<size_t>(k) * planes + l) * resolution + j) *
               resolution +
           i;
  };
  Point x(n);
  for (int l = 0; l < planes; ++l)
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i) {
        x[0] = axes[0][i];
        x[1] = axes[1][j];
        if (n == 3) x[2] = axes[2][l];
        for (int k = 0; k < n; ++k)
          cache[flat(k, i, j, l)] = system.eval_growth(k, x);
      }

  std::vector<Point> polished;
  const int cell_planes = (n == 3) ? resolution - 1 : 1;
  for (int l = 0; l < cell_planes; ++l)
    for (int j = 0; j < resolution - 1; ++j)
      for (int i = 0; i < resolution - 1; ++i) {
        bool candidate = true;
        for (int k = 0; k < n && candidate; ++k) {
          bool has_pos = false, has_neg = false;
          for (int ci = 0; ci <= 1; ++ci)
            for (int cj = 0; cj <= 1; ++cj)
              for (int cl = 0; cl <= (n == 3 ? 1 : 0); ++cl) {
                const double v = cache[flat(k, i + ci, j + cj, l + cl)];
                has_pos = has_pos || v >= 0.0;
                has_neg = has_neg || v <= 0.0;
              }
          candidate = has_pos && has_neg;
        }
        if (!candidate) continue;
        Point center(n);
        center[0] = 0.5 * (axes[0][i] + axes[0][i + 1]);
        center[1] = 0.5 * (axes[1][j] + axes[1][j + 1]);
        if (n == 3) center[2] = 0.5 * (axes[2][l] + axes[2][l + 1]);
        if (auto root = polish_root(system, center, bounding_box))
          if ((root->array() > tol).all()) polished.push_back(*root);
      }

  CoexistenceResult result;
  for (const auto& root : polished) {
    bool merged = false;
    for (const auto& seen : result.roots)
      if ((root - seen).lpNorm<Eigen::Infinity>() <= kClusterRadius) {
        merged = true;
        break;
      }
    if (!merged) result.roots.push_back(root);
  }
  result.status = result.roots.size() == 1 ? CheckStatus::pass
                                           : CheckStatus::fail;
  return result;
}

namespace {

// All positive roots of a 1-D slice, by sign scan plus bisection.
std::vector<double> axis_roots_1d(const std::function<double(double)>& fn,
                                  double hi, double tol) {
  constexpr int kScan = 2048;
  std::vector<double> roots;
  double prev_t = hi * (1.0 / kScan);
  double prev_v = fn(prev_t);
  if (prev_v == 0.0) roots.push_back(prev_t);
  for (int i = 2; i <= kScan; ++i) {
    const double t = hi * (static_cast<double>(i) / kScan);
    const double v = fn(t);
    if (v == 0.0) {
      roots.push_back(t);
    } else if (prev_v * v < 0.0) {
      double a = prev_t, b = t, fa = prev_v;
      for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (a + b);
        const double fm = fn(mid);
        if (std::abs(fm) <= tol * 1e-4 || b - a < 1e-15 * hi) {
          a = b = mid;
          break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_t = t;
    prev_v = v;
  }
  return roots;
}

// Doubling scan for an axis range that captures the sign change of every
// field along every axis; falls back to a fixed cap.
double axis_scan_limit(const ReactionSystem& system) {
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
    if (all_negative) return 2.0 * hi;
    hi *= 2.0;
  }
  return hi;
}

}  // namespace

AxisRootsResult check_axis_roots(const ReactionSystem& system, double tol) {
  system.validate();
  const int n = system.n_species;
  const double hi = axis_scan_limit(system);

  AxisRootsResult result;
  result.roots = Mat::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  std::ostringstream msg;
  bool ok = true;

  // For two species the required equations are f(u,0), f(0,v), g(u,0),
  // g(0,v); for three, every field on every axis.
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a) {
      auto roots = axis_roots_1d(
          [&](double t) {
            Point p = Point::Zero(n);
            p[a] = t;
            return system.eval_growth(k, p);
          },
          hi, tol);
      std::erase_if(roots, [&](double r) { return r <= tol; });
      if (roots.size() == 1) {
        result.roots(k, a) = roots.front();
      } else {
        ok = false;
        msg << "field " << "fgh"[k] << " has " << roots.size()
            << " positive roots on axis " << a << "; ";
      }
    }

  if (ok && n == 3) {
    // Within each axis family the three per-field roots must not all
    // coincide.
    for (int a = 0; a < n; ++a) {
      const double r0 = result.roots(0, a), r1 = result.roots(1, a),
                   r2 = result.roots(2, a);
      const double spread = std::max({std::abs(r0 - r1), std::abs(r0 - r2),
                                      std::abs(r1 - r2)});
      if (spread <= tol * std::max(1.0, std::abs(r0))) {
        ok = false;
        msg << "axis " << a << " roots coincide across fields; ";
      }
    }
  }

  result.status = ok ? CheckStatus::pass : CheckStatus::fail;
  result.message = msg.str();
  return result;
}

CheckStatus check_sign_behavior(const ReactionSystem& system, double small,
                                double large) {
  system.validate();
  if (!(0.0 < small && small < large))
    throw Error(Errc::DomainError, "need 0 < small < large");
  const int n = system.n_species;

  constexpr int kLevels = 4;
  auto corner_grid_ok = [&](double lo, double hi, bool positive,
                            bool include_lo) {
    Point p(n);
    const int total = n == 2 ? kLevels * kLevels : kLevels * kLevels * kLevels;
    for (int idx = 0; idx < total; ++idx) {
      int rest = idx;
      for (int a = 0; a < n; ++a) {
        const int level = rest % kLevels;
        rest /= kLevels;
        const double fraction = include_lo
                                    ? static_cast<double>(level) / (kLevels - 1)
                                    : static_cast<double>(level + 1) / kLevels;
        p[a] = lo + (hi - lo) * fraction;
      }
      for (int k = 0; k < n; ++k) {
        const double v = system.eval_growth(k, p);
        if (positive ? v <= 0.0 : v >= 0.0) return false;
      }
    }
    return true;
  };

  const bool near_origin = corner_grid_ok(0.0, small, true, false);
  const bool far_field = corner_grid_ok(large, 2.0 * large, false, true);
  return near_origin && far_field ? CheckStatus::pass : CheckStatus::fail;
}

CheckStatus check_containment(const ReactionSystem& system,
                              const Region& region,
                              const std::vector<NullclineSample>& samples,
                              Point* witness) {
  (void)system;
  for (const auto& sample : samples)
    for (const auto& p : sample.points) {
      const Containment c = contains(region, p);
      if (c == Containment::outside_above || c == Containment::outside_below) {
        if (witness) *witness = p;
        return CheckStatus::fail;
      }
    }
  return CheckStatus::pass;
}

HypothesisReport verify_hypotheses(const ReactionSystem& system,
                                   const HypothesesOptions& options) {
  system.validate();
  const int n = system.n_species;
  const char prefix = n == 2 ? 'H' : 'A';
  auto id = [&](int i) { return std::string(1, prefix) + std::to_string(i); };

  HypothesisReport report;
  report.tol = options.tol;
  const int resolution =
      options.resolution > 0 ? options.resolution : (n == 2 ? 201 : 41);
  report.resolution = resolution;

  // Axis roots first: they set every default scale.
  AxisRootsResult axis = check_axis_roots(system, options.tol);
  double max_root = 1.0, min_root = 1.0;
  if (axis.roots.allFinite()) {
    max_root = axis.roots.maxCoeff();
    min_root = axis.roots.minCoeff();
  }

  Vec box = options.bounding_box;
  if (box.size() == 0) box = Vec::Constant(n, 2.0 * max_root);

  // [H1]/[A1] unique coexistence state.
  {
    HypothesisEntry entry{id(1), CheckStatus::fail, {}, ""};
    try {
      CoexistenceResult coex =
          check_coexistence_root(system, box, resolution, options.tol);
      entry.status = coex.status;
      entry.witness = coex.roots;
      entry.message = coex.status == CheckStatus::pass
                          ? "unique interior common zero"
                          : std::to_string(coex.roots.size()) +
                                " interior common-zero clusters at "
                                "resolution " +
                                std::to_string(resolution);
    } catch (const Error& e) {
      entry.message = e.what();
    }
    report.entries.push_back(std::move(entry));
  }

  // [H2]/[A2] axis roots.
  {
    HypothesisEntry entry{id(2), axis.status, {}, axis.message};
    if (axis.status == CheckStatus::pass)
      entry.message = "unique positive axis roots";
    report.entries.push_back(std::move(entry));
  }

  // [H3]/[A3] sign behavior near the origin and in the far field, with the
  // indeterminate escape hatch when a 10x wider scan disagrees.
  {
    const double small = options.small_scale > 0 ? options.small_scale
                                                 : 0.01 * min_root;
    const double large =
        options.large_scale > 0 ? options.large_scale : 2.0 * max_root;
    HypothesisEntry entry{id(3), CheckStatus::fail, {}, ""};
    try {
      entry.status = check_sign_behavior(system, small, large);
      if (entry.status == CheckStatus::fail &&
          check_sign_behavior(system, small / 10.0, large * 10.0) ==
              CheckStatus::pass) {
        entry.status = CheckStatus::indeterminate;
        entry.message = "fails at default scales but passes 10x wider";
      } else {
        entry.message = entry.status == CheckStatus::pass
                            ? "positive near origin, negative in far field"
                            : "wrong sign on the probe grid";
      }
    } catch (const Error& e) {
      entry.message = e.what();
    }
    report.entries.push_back(std::move(entry));
  }

  // [H4]/[A4] nullclines inside a fitted region.
  {
    HypothesisEntry entry{id(4), CheckStatus::fail, {}, ""};
    try {
      auto samples =
          sample_nullclines(system, box, resolution, options.band_tol);
      Region region = fit_region(samples, options.margin);
      Point witness;
      entry.status = check_containment(system, region, samples, &witness);
      if (entry.status == CheckStatus::pass) {
        entry.message = "nullclines contained in fitted region";
        report.region = region;
      } else {
        entry.witness.push_back(witness);
        entry.message = "sample point escapes the fitted region";
      }
    } catch (const Error& e) {
      entry.message = e.what();
    }
    report.entries.push_back(std::move(entry));
  }

  return report;
}

nlohmann::json report_to_json(const HypothesisReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& entry : report.entries) {
    nlohmann::json witnesses = nlohmann::json::array();
    for (const auto& w : entry.witness) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < w.size(); ++k) row.push_back(w[k]);
      witnesses.push_back(std::move(row));
    }
    entries.push_back({{"id", entry.id},
                       {"status", to_string(entry.status)},
                       {"witness", std::move(witnesses)},
                       {"message", entry.message}});
  }
  nlohmann::json doc = {{"entries", std::move(entries)},
                        {"resolution", report.resolution},
                        {"tol", report.tol},
                        {"all_pass", report.all_pass()}};
  doc["region"] =
      report.region ? region_to_json(*report.region) : nlohmann::json();
  return doc;
}

std::string render_report_table(const HypothesisReport& report) {
  std::ostringstream os;
  os << "  id   status          message\n";
  for (const auto& entry : report.entries) {
    std::string status = to_string(entry.status);
    status.resize(15, ' ');
    os << "  " << entry.id << "   " << status << " " << entry.message << "\n";
  }
  os << "  overall: " << (report.all_pass() ? "pass" : "fail") << "\n";
  return os.str();
}

}  // namespace nbarrier
