#include "nbarrier/verify.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "format_util.hpp"

namespace nbarrier {

std::pair<Vec, Vec> combination_fields(const WaveSolution& solution,
                                       const Weights& weights) {
  const int n = static_cast<int>(solution.profiles.cols());
  if (weights.species() != n)
    throw Error(Errc::DimensionMismatch, "weights dimension mismatch");
  const Vec& d = solution.problem.system.diffusion;
  if (d.size() != n)
    throw Error(Errc::DimensionMismatch, "solution system dimension mismatch");
  Vec p = solution.profiles * weights.values;
  Vec q = solution.profiles * (weights.values.array() * d.array()).matrix();
  return {std::move(p), std::move(q)};
}

VerificationRecord check_bounds(const WaveSolution& solution,
                                const Weights& weights,
                                const BoundsResult& bounds,
                                double tol_verify) {
  if (!(tol_verify >= 0.0))
    throw Error(Errc::DomainError, "tol_verify must be nonnegative");
  const auto [p, q] = combination_fields(solution, weights);
  VerificationRecord record;
  record.weights = weights.values;
  record.bounds = bounds;
  record.min_p = p.minCoeff();
  record.max_p = p.maxCoeff();
  record.margin_lo = record.min_p - bounds.p_lower;
  record.margin_hi = bounds.p_upper - record.max_p;
  record.pass = record.min_p >= bounds.p_lower - tol_verify &&
                record.max_p <= bounds.p_upper + tol_verify;
  return record;
}

VerificationReport sweep_weights(const WaveSolution& solution,
                                 const Region& region, int chi,
                                 const std::vector<Vec>& weight_grid,
                                 double tol_verify) {
  if (weight_grid.empty())
    throw Error(Errc::DomainError, "weight grid must be nonempty");
  const int n = static_cast<int>(solution.profiles.cols());
  const Vec& d = solution.problem.system.diffusion;

  VerificationReport report;
  report.system_name = solution.problem.system.name;
  report.region = region;
  report.theta = solution.theta;
  report.half_length = solution.problem.half_length;
  report.grid_points = solution.problem.grid_points;
  report.residual = solution.residual;
  report.tol_verify = tol_verify;
  report.overall = true;
  for (const Vec& tuple : weight_grid) {
    Weights weights(tuple);
    const BoundsResult bounds = n == 2 ? bounds_two(weights, d, region, chi)
                                       : bounds_three(weights, d, region, chi);
    VerificationRecord record =
        check_bounds(solution, weights, bounds, tol_verify);
    report.overall = report.overall && record.pass;
    report.records.push_back(std::move(record));
  }
  return report;
}

std::vector<Vec> weight_grid(int n_species,
                             const std::vector<double>& levels) {
  if (n_species < 2 || n_species > 3)
    throw Error(Errc::DimensionMismatch, "expected 2 or 3 species");
  if (levels.empty())
    throw Error(Errc::DomainError, "levels must be nonempty");
  for (double level : levels)
    if (!(level > 0.0))
      throw Error(Errc::DomainError, "levels must be positive");

  std::vector<Vec> grid;
  const size_t m = levels.size();
  if (n_species == 2) {
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j) {
        Vec w(2);
        w << levels[i], levels[j];
        grid.push_back(std::move(w));
      }
  } else {
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j)
        for (size_t k = 0; k < m; ++k) {
          Vec w(3);
          w << levels[i], levels[j], levels[k];
          grid.push_back(std::move(w));
        }
  }
  return grid;
}

const std::vector<double>& default_sweep_levels() {
  static const std::vector<double> levels = {0.1, 0.3, 1.0, 3.0, 10.0};
  return levels;
}

nlohmann::json verification_to_json(const VerificationReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    records.push_back(
        {{"weights", std::vector<double>(r.weights.begin(), r.weights.end())},
         {"p_lower", r.bounds.p_lower},
         {"p_upper", r.bounds.p_upper},
         {"chi", r.bounds.chi},
         {"min_p", r.min_p},
         {"max_p", r.max_p},
         {"margin_lo", r.margin_lo},
         {"margin_hi", r.margin_hi},
         {"status", r.pass ? "pass" : "fail"}});
  }
  return {{"system", report.system_name},
          {"region", region_to_json(report.region)},
          {"theta", report.theta},
          {"half_length", report.half_length},
          {"grid_points", report.grid_points},
          {"residual", report.residual},
          {"tol_verify", report.tol_verify},
          {"records", std::move(records)},
          {"overall", report.overall ? "pass" : "fail"}};
}

void write_verification_csv(const std::filesystem::path& path,
                            const VerificationReport& report) {
  const int n = report.region.species();
  std::ostringstream os;
  os << "alpha,beta" << (n == 3 ? ",gamma" : "")
     << ",p_lower,p_upper,min_p,max_p,margin_lo,margin_hi,status\n";
  for (const auto& r : report.records) {
    for (int k = 0; k < r.weights.size(); ++k)
      os << (k ? "," : "") << detail::fmt_double(r.weights[k]);
    os << "," << detail::fmt_double(r.bounds.p_lower) << ","
       << detail::fmt_double(r.bounds.p_upper) << ","
       << detail::fmt_double(r.min_p) << "," << detail::fmt_double(r.max_p)
       << "," << detail::fmt_double(r.margin_lo) << ","
       << detail::fmt_double(r.margin_hi) << ","
       << (r.pass ? "pass" : "fail") << "\n";
  }
  detail::write_file_atomic(path, os.str());
}

}  // namespace nbarrier
