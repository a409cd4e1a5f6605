#include "nbarrier/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nbarrier {

namespace {

// Solvers probe fields slightly outside the orthant; anything below this is
// a caller bug rather than discretization noise.
constexpr double kExtensionFloor = -1e-6;
constexpr double kOrthantNoise = -1e-13;

std::string format_point(const Point& p) {
  std::ostringstream os;
  os << "(";
  for (int k = 0; k < p.size(); ++k) os << (k ? "," : "") << p[k];
  os << ")";
  return os.str();
}

}  // namespace

void LotkaVolterraParams::validate() const {
  const int n = species();
  if (n < 2 || n > 3)
    throw Error(Errc::DimensionMismatch, "expected 2 or 3 species");
  if (c.rows() != n || c.cols() != n)
    throw Error(Errc::DimensionMismatch, "interaction matrix must be n x n");
  if ((sigma.array() <= 0.0).any())
    throw Error(Errc::DomainError, "sigma entries must be positive");
  if ((c.array() <= 0.0).any())
    throw Error(Errc::DomainError, "interaction entries must be positive");
  if (!sigma.allFinite() || !c.allFinite())
    throw Error(Errc::DomainError, "parameters must be finite");
}

void ReactionSystem::validate() const {
  if (n_species < 2 || n_species > 3)
    throw Error(Errc::DimensionMismatch, "expected 2 or 3 species");
  if (static_cast<int>(growth.size()) != n_species)
    throw Error(Errc::DimensionMismatch, "one growth field per species");
  if (diffusion.size() != n_species)
    throw Error(Errc::DimensionMismatch, "one diffusion rate per species");
  if ((diffusion.array() <= 0.0).any() || !diffusion.allFinite())
    throw Error(Errc::DomainError, "diffusion rates must be positive");
  for (const auto& field : growth)
    if (!field) throw Error(Errc::DomainError, "growth field is empty");
}

double ReactionSystem::eval_growth(int k, const Point& x) const {
  Point q = x.cwiseMax(kExtensionFloor);
  const double value = growth[static_cast<size_t>(k)](q);
  if (!std::isfinite(value))
    throw Error(Errc::DomainError,
                "growth field " + std::to_string(k) + " is not finite at " +
                    format_point(q));
  return value;
}

const char* to_string(StateKind kind) noexcept {
  switch (kind) {
    case StateKind::extinction: return "extinction";
    case StateKind::exclusive_1: return "exclusive_1";
    case StateKind::exclusive_2: return "exclusive_2";
    case StateKind::exclusive_3: return "exclusive_3";
    case StateKind::coexistence: return "coexistence";
  }
  return "?";
}

void WaveProblem::validate() const {
  system.validate();
  const int n = system.n_species;
  if (e_minus.point.size() != n || e_plus.point.size() != n)
    throw Error(Errc::DimensionMismatch, "endpoint dimension mismatch");
  if ((e_minus.point - e_plus.point).lpNorm<Eigen::Infinity>() == 0.0)
    throw Error(Errc::DomainError, "e_minus and e_plus must differ");
  if (!(half_length > 0.0))
    throw Error(Errc::DomainError, "domain half-length must be positive");
  if (grid_points < 16)
    throw Error(Errc::DomainError, "need at least 16 grid intervals");
  if (theta && !std::isfinite(*theta))
    throw Error(Errc::DomainError, "theta must be finite or free");
}

ReactionSystem make_lotka_volterra(const LotkaVolterraParams& params,
                                   const Vec& diffusion, std::string name) {
  params.validate();
  const int n = params.species();
  ReactionSystem system;
  system.n_species = n;
  system.diffusion = diffusion;
  system.name = std::move(name);
  for (int k = 0; k < n; ++k) {
    const double sigma_k = params.sigma[k];
    const Vec row = params.c.row(k);
    system.growth.push_back(
        [sigma_k, row](const Point& x) { return sigma_k - row.dot(x); });
  }
  system.validate();
  return system;
}

namespace {

// 1-D index/fraction lookup with constant extension outside the table.
std::pair<Eigen::Index, double> bracket(const Vec& grid, double value) {
  const Eigen::Index m = grid.size();
  if (value <= grid[0]) return {0, 0.0};
  if (value >= grid[m - 1]) return {m - 2, 1.0};
  Eigen::Index i =
      std::upper_bound(grid.data(), grid.data() + m, value) - grid.data() - 1;
  i = std::min(i, m - 2);
  return {i, (value - grid[i]) / (grid[i + 1] - grid[i])};
}

void check_grid(const Vec& grid, const char* axis) {
  if (grid.size() < 2)
    throw Error(Errc::DomainError,
                std::string("tabulated ") + axis + "-grid needs >= 2 nodes");
  for (Eigen::Index i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1]))
      throw Error(Errc::DomainError,
                  std::string("tabulated ") + axis + "-grid must increase");
}

}  // namespace

GrowthField tabulated_field_2d(const Vec& u_grid, const Vec& v_grid,
                               const Mat& values) {
  check_grid(u_grid, "u");
  check_grid(v_grid, "v");
  if (values.rows() != u_grid.size() || values.cols() != v_grid.size())
    throw Error(Errc::DimensionMismatch, "table shape mismatch");
  return [u_grid, v_grid, values](const Point& x) {
    const auto [i, s] = bracket(u_grid, x[0]);
    const auto [j, t] = bracket(v_grid, x[1]);
    return (1 - s) * (1 - t) * values(i, j) + s * (1 - t) * values(i + 1, j) +
           (1 - s) * t * values(i, j + 1) + s * t * values(i + 1, j + 1);
  };
}

GrowthField tabulated_field_3d(const Vec& u_grid, const Vec& v_grid,
                               const Vec& w_grid, const Mat& values) {
  check_grid(u_grid, "u");
  check_grid(v_grid, "v");
  check_grid(w_grid, "w");
  if (values.rows() != u_grid.size() ||
      values.cols() != v_grid.size() * w_grid.size())
    throw Error(Errc::DimensionMismatch, "table shape mismatch");
  const Eigen::Index W = w_grid.size();
  return [u_grid, v_grid, w_grid, values, W](const Point& x) {
    const auto [i, s] = bracket(u_grid, x[0]);
    const auto [j, t] = bracket(v_grid, x[1]);
    const auto [k, r] = bracket(w_grid, x[2]);
    auto at = [&](Eigen::Index a, Eigen::Index b, Eigen::Index c) {
      return values(a, b * W + c);
    };
    auto plane = [&](Eigen::Index c) {
      return (1 - s) * (1 - t) * at(i, j, c) + s * (1 - t) * at(i + 1, j, c) +
             (1 - s) * t * at(i, j + 1, c) + s * t * at(i + 1, j + 1, c);
    };
    return (1 - r) * plane(k) + r * plane(k + 1);
  };
}

ReactionSystem system_from_json(const nlohmann::json& doc) {
  if (!doc.is_object())
    throw Error(Errc::ConfigError, "system spec must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "species" && key != "type" && key != "sigma" && key != "c" &&
        key != "d" && key != "name")
      throw Error(Errc::ConfigError, "unknown system key '" + key + "'");
  }
  for (const char* required : {"species", "type", "sigma", "c", "d"})
    if (!doc.contains(required))
      throw Error(Errc::ConfigError,
                  std::string("system spec missing '") + required + "'");
  if (doc.at("type").get<std::string>() != "lotka_volterra")
    throw Error(Errc::ConfigError, "unsupported system type");
  const int n = doc.at("species").get<int>();
  if (n < 2 || n > 3)
    throw Error(Errc::ConfigError, "species must be 2 or 3");

  LotkaVolterraParams params;
  const auto sigma = doc.at("sigma").get<std::vector<double>>();
  const auto rows = doc.at("c").get<std::vector<std::vector<double>>>();
  const auto d = doc.at("d").get<std::vector<double>>();
  if (static_cast<int>(sigma.size()) != n ||
      static_cast<int>(rows.size()) != n || static_cast<int>(d.size()) != n)
    throw Error(Errc::ConfigError, "sigma/c/d sizes must match species");
  params.sigma = Eigen::Map<const Vec>(sigma.data(), n);
  params.c.resize(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw Error(Errc::ConfigError, "c rows must have `species` entries");
    for (int j = 0; j < n; ++j) params.c(i, j) = rows[i][j];
  }
  Vec diffusion = Eigen::Map<const Vec>(d.data(), n);
  std::string name = doc.value("name", std::string("lotka_volterra"));
  try {
    return make_lotka_volterra(params, diffusion, std::move(name));
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
}

Vec eval_reaction_terms(const ReactionSystem& system, const Point& point) {
  if (point.size() != system.n_species)
    throw Error(Errc::DimensionMismatch, "point dimension mismatch");
  Point q = point;
  for (int k = 0; k < q.size(); ++k) {
    if (q[k] < 0.0) {
      if (q[k] < kOrthantNoise)
        throw Error(Errc::NegativeCoordinate,
                    "coordinate " + std::to_string(k) + " = " +
                        std::to_string(q[k]) + " at " + format_point(point));
      q[k] = 0.0;
    }
  }
  Vec values(system.n_species);
  for (int k = 0; k < system.n_species; ++k)
    values[k] = system.eval_growth(k, q);
  return values;
}

BoundaryState classify_boundary_state(const ReactionSystem& system,
                                      const Point& point, double tol) {
  if (!(tol > 0.0)) throw Error(Errc::DomainError, "tol must be positive");
  const int n = system.n_species;
  if (point.size() != n)
    throw Error(Errc::DimensionMismatch, "point dimension mismatch");
  for (int k = 0; k < n; ++k)
    if (point[k] < kOrthantNoise)
      throw Error(Errc::NegativeCoordinate,
                  "negative coordinate in " + format_point(point));

  int positive = 0, last_positive = -1;
  for (int k = 0; k < n; ++k) {
    if (point[k] > tol) {
      ++positive;
      last_positive = k;
    }
  }

  BoundaryState state;
  state.point = point.cwiseMax(0.0);
  if (positive == 0) {
    state.kind = StateKind::extinction;
    return state;
  }

  const Vec values = eval_reaction_terms(system, state.point);
  if (positive == n) {
    if (values.lpNorm<Eigen::Infinity>() > tol)
      throw Error(Errc::NotAnEquilibrium,
                  "growth residual " +
                      std::to_string(values.lpNorm<Eigen::Infinity>()) +
                      " at coexistence candidate " + format_point(point));
    state.kind = StateKind::coexistence;
    return state;
  }
  if (positive == 1) {
    if (std::abs(values[last_positive]) > tol)
      throw Error(Errc::NotAnEquilibrium,
                  "axis equation residual " +
                      std::to_string(std::abs(values[last_positive])) +
                      " at " + format_point(point));
    state.kind = last_positive == 0   ? StateKind::exclusive_1
                 : last_positive == 1 ? StateKind::exclusive_2
                                      : StateKind::exclusive_3;
    return state;
  }
  throw Error(Errc::NotAnEquilibrium,
              format_point(point) +
                  " has a mixed positivity pattern outside the admissible set");
}

}  // namespace nbarrier
