#pragma once

#include <array>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vocspace/metrics.hpp"

namespace vocspace {

struct RegressionRow {
  std::string infant_id;
  int age_months = 0;
  double count = 0.0;  // covariate, the recording's CHNSP count
  double response = 0.0;
};

struct Standardizer {
  double mean = 0.0;
  double sd = 1.0;
  double apply(double v) const { return (v - mean) / sd; }
};

enum class Term { Age = 1, AgeSquared = 2, Count = 4 };
inline constexpr unsigned kAllTerms = 7;

inline constexpr std::array<std::string_view, 4> kCoefficientNames = {"intercept", "age", "age2",
                                                                      "count"};

/// ML fit of y = X beta + u_infant + e with X = [1, z(age), z(age^2), z(count)].
/// Each predictor is standardized separately (population sd); coefficients
/// are on that scale.
struct LmmFit {
  std::array<double, 4> beta{};
  double sigma_u2 = 0.0;
  double sigma2 = 0.0;
  double theta = 0.0;  // sigma_u2 / sigma2
  double loglik = 0.0;
  double loglik_without_age = 0.0;
  double loglik_without_age2 = 0.0;
  double p_linear = 1.0;
  double p_quadratic = 1.0;
  std::size_t n_obs = 0;
  std::size_t n_infants = 0;
  std::array<Standardizer, 3> transform{};  // age, age^2, count
  bool theta_at_upper_bound = false;
  bool degenerate = false;  // zero residual variance; p-values set to 1
};

struct ProfiledFit {
  std::vector<double> beta;  // intercept first, then included terms in order
  double sigma2 = 0.0;
  double loglik = 0.0;
};

/// Profiled likelihood at a fixed variance ratio theta >= 0 for the model
/// with the intercept plus the terms in `terms` (bitmask of Term).
ProfiledFit profile_at(std::span<const RegressionRow> rows, double theta,
                       unsigned terms = kAllTerms);

inline constexpr double kThetaMin = 1e-8;
inline constexpr double kThetaMax = 1e6;

/// Throws InputError for fewer than 2 infants or ages, non-finite responses,
/// non-positive counts, or a rank-deficient design (naming the column).
LmmFit fit_lmm(std::span<const RegressionRow> rows);

/// Upper chi-square(1) tail at 2 (llf - llr). Differences down to -1e-8 count
/// as zero; anything more negative throws InputError.
double lrt_pvalue(double loglik_full, double loglik_reduced);

// Key=value fit report.
std::string format_fit_report(const LmmFit& fit, std::string_view measure);

enum class Measure { Distance, Dispersion, Entropy };
Measure parse_measure(std::string_view name);  // distance | dispersion | entropy
std::string_view to_string(Measure m);

/// Rows with the measure present and at least one CHNSP clip.
std::vector<RegressionRow> regression_rows(std::span<const RecordingMeasures> measures,
                                           Measure measure);

/// Least-squares polynomial, coefficients from the constant term up.
std::vector<double> poly_trend(std::span<const double> x, std::span<const double> y,
                               std::size_t degree = 2);
double poly_eval(std::span<const double> coefficients, double x);

struct ProminenceVote {
  std::string clip_id;
  std::string listener_id;
  int prominence = 0;  // 1..5
};

enum class Validation { Validated, Excluded };

// Validated iff the unique mode of the ratings is 1. Throws on empty input
// or ratings outside 1..5.
Validation decide_prominence(std::span<const int> ratings);
std::map<std::string, Validation> validate_prominence(std::span<const ProminenceVote> votes);

std::vector<ProminenceVote> parse_votes(std::istream& in, std::string_view origin);

// Sample Pearson correlation. Needs >= 3 pairs and nonzero variance in both.
double pearson_r(std::span<const double> x, std::span<const double> y);

}  // namespace vocspace
