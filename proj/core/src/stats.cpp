#include "vocspace/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "vocspace/csv.hpp"
#include "vocspace/error.hpp"

namespace vocspace {
namespace {

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::vector<Eigen::Index>> groups;
  std::array<Standardizer, 3> transform{};
  std::vector<std::string_view> names;
};

Standardizer standardizer_of(const std::vector<double>& v) {
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double a : v) ss += (a - mean) * (a - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

void validate_rows(std::span<const RegressionRow> rows) {
  std::set<std::string> infants;
  std::set<int> ages;
  for (const auto& r : rows) {
    if (!std::isfinite(r.response)) {
      throw InputError("non-finite response for infant " + r.infant_id);
    }
    if (!(r.count > 0.0) || !std::isfinite(r.count)) {
      throw InputError("count covariate must be positive for infant " + r.infant_id);
    }
    infants.insert(r.infant_id);
    ages.insert(r.age_months);
  }
  if (infants.size() < 2) throw InputError("mixed model needs at least 2 infants");
  if (ages.size() < 2) throw InputError("mixed model needs at least 2 distinct ages");
}

// Gram-Schmidt over the columns in order; the first column that adds no new
// direction is reported.
void check_rank(const Eigen::MatrixXd& x, const std::vector<std::string_view>& names) {
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::VectorXd v = x.col(j);
    const double norm0 = v.norm();
    for (const auto& q : basis) v -= q.dot(v) * q;
    for (const auto& q : basis) v -= q.dot(v) * q;
    const double norm = v.norm();
    if (!(norm0 > 0.0) || norm <= 1e-10 * std::max(norm0, 1.0)) {
      throw InputError("rank-deficient design: column '" + std::string(names[j]) +
                       "' is collinear with earlier columns");
    }
    basis.push_back(v / norm);
  }
}

Design build_design(std::span<const RegressionRow> rows, unsigned terms) {
  validate_rows(rows);
  const auto n = rows.size();
  std::vector<double> age(n), age2(n), count(n);
  for (std::size_t i = 0; i < n; ++i) {
    age[i] = rows[i].age_months;
    age2[i] = age[i] * age[i];
    count[i] = rows[i].count;
  }
  Design d;
  d.transform = {standardizer_of(age), standardizer_of(age2), standardizer_of(count)};
  const std::array<const std::vector<double>*, 3> raw = {&age, &age2, &count};

  std::vector<int> included;
  for (int t = 0; t < 3; ++t) {
    if (terms & (1u << t)) included.push_back(t);
  }
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(included.size() + 1));
  d.y.resize(static_cast<Eigen::Index>(n));
  d.names.push_back(kCoefficientNames[0]);
  for (auto t : included) d.names.push_back(kCoefficientNames[static_cast<std::size_t>(t + 1)]);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    d.x(r, 0) = 1.0;
    for (std::size_t c = 0; c < included.size(); ++c) {
      const auto& s = d.transform[static_cast<std::size_t>(included[c])];
      const double v = (*raw[static_cast<std::size_t>(included[c])])[i];
      d.x(r, static_cast<Eigen::Index>(c + 1)) = s.sd > 0.0 ? s.apply(v) : 0.0;
    }
    d.y(r) = rows[i].response;
  }
  check_rank(d.x, d.names);

  std::map<std::string, std::vector<Eigen::Index>> by_infant;
  for (std::size_t i = 0; i < n; ++i) {
    by_infant[rows[i].infant_id].push_back(static_cast<Eigen::Index>(i));
  }
  for (auto& [id, g] : by_infant) d.groups.push_back(std::move(g));
  return d;
}

// V0 = blockdiag(I + theta 11'), inverse I - c 11' with c = theta / (1 + m theta),
// log|V0| = sum log(1 + m theta).
ProfiledFit profile(const Design& d, double theta) {
  const auto p = d.x.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  double logdet = 0.0;
  for (const auto& g : d.groups) {
    const auto m = static_cast<double>(g.size());
    const double c = theta / (1.0 + m * theta);
    logdet += std::log1p(m * theta);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
    double ys = 0.0;
    for (auto i : g) {
      const auto row = d.x.row(i);
      a.noalias() += row.transpose() * row;
      b.noalias() += row.transpose() * d.y(i);
      s += row.transpose();
      ys += d.y(i);
    }
    a.noalias() -= c * s * s.transpose();
    b.noalias() -= c * ys * s;
  }
  const Eigen::VectorXd beta = a.ldlt().solve(b);
  const Eigen::VectorXd r = d.y - d.x * beta;
  double rvr = 0.0;
  for (const auto& g : d.groups) {
    const auto m = static_cast<double>(g.size());
    const double c = theta / (1.0 + m * theta);
    double sum = 0.0, sq = 0.0;
    for (auto i : g) {
      sum += r(i);
      sq += r(i) * r(i);
    }
    rvr += sq - c * sum * sum;
  }
  const auto n = static_cast<double>(d.y.size());
  ProfiledFit out;
  out.beta.assign(beta.data(), beta.data() + beta.size());
  out.sigma2 = std::max(rvr, 0.0) / n;
  out.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * out.sigma2) + 1.0) - 0.5 * logdet;
  return out;
}

struct ThetaSearch {
  double theta = 0.0;
  ProfiledFit fit;
  bool at_upper_bound = false;
};

// Coarse scan of log theta over [kThetaMin, kThetaMax] to bracket the
// maximum, golden-section refinement inside the bracket, then theta = 0
// wins any tie.
ThetaSearch maximize_theta(const Design& d) {
  const double lo = std::log(kThetaMin);
  const double hi = std::log(kThetaMax);
  constexpr int kGrid = 57;
  auto f = [&](double lt) { return profile(d, std::exp(lt)).loglik; };
  std::vector<double> grid(kGrid), vals(kGrid);
  int best = 0;
  for (int i = 0; i < kGrid; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (kGrid - 1);
    vals[static_cast<std::size_t>(i)] = f(grid[static_cast<std::size_t>(i)]);
    if (vals[static_cast<std::size_t>(i)] > vals[static_cast<std::size_t>(best)]) best = i;
  }
  double a = grid[static_cast<std::size_t>(std::max(best - 1, 0))];
  double b = grid[static_cast<std::size_t>(std::min(best + 1, kGrid - 1))];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = f(c), fe = f(e);
  while (b - a > 1e-10) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = f(e);
    }
  }
  double lt = 0.5 * (a + b);
  double ll = f(lt);
  if (vals[static_cast<std::size_t>(best)] > ll) {
    lt = grid[static_cast<std::size_t>(best)];
    ll = vals[static_cast<std::size_t>(best)];
  }
  ThetaSearch out;
  out.theta = std::exp(lt);
  out.fit = profile(d, out.theta);
  out.at_upper_bound = lt >= hi - 1e-6;
  auto zero = profile(d, 0.0);
  if (zero.loglik >= out.fit.loglik - 1e-10 * (1.0 + std::abs(out.fit.loglik))) {
    out.theta = 0.0;
    out.fit = std::move(zero);
    out.at_upper_bound = false;
  }
  return out;
}

bool constant_response(std::span<const RegressionRow> rows) {
  return std::all_of(rows.begin(), rows.end(),
                     [&](const RegressionRow& r) { return r.response == rows[0].response; });
}

}  // namespace

ProfiledFit profile_at(std::span<const RegressionRow> rows, double theta, unsigned terms) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw InputError("theta must be >= 0");
  return profile(build_design(rows, terms), theta);
}

LmmFit fit_lmm(std::span<const RegressionRow> rows) {
  const auto design = build_design(rows, kAllTerms);
  LmmFit fit;
  fit.n_obs = rows.size();
  fit.n_infants = design.groups.size();
  fit.transform = design.transform;

  double y_mean = 0.0, y_ss = 0.0;
  for (const auto& r : rows) y_mean += r.response;
  y_mean /= static_cast<double>(rows.size());
  for (const auto& r : rows) y_ss += (r.response - y_mean) * (r.response - y_mean);

  auto mark_degenerate = [&] {
    fit.degenerate = true;
    fit.sigma2 = 0.0;
    fit.sigma_u2 = 0.0;
    fit.theta = 0.0;
    fit.loglik = fit.loglik_without_age = fit.loglik_without_age2 =
        std::numeric_limits<double>::infinity();
    fit.p_linear = fit.p_quadratic = 1.0;
  };
  if (constant_response(rows)) {
    fit.beta = {rows[0].response, 0.0, 0.0, 0.0};
    mark_degenerate();
    return fit;
  }

  const auto full = maximize_theta(design);
  std::copy(full.fit.beta.begin(), full.fit.beta.end(), fit.beta.begin());
  if (full.fit.sigma2 <= 1e-28 * y_ss / static_cast<double>(rows.size())) {
    mark_degenerate();
    return fit;
  }
  fit.theta = full.theta;
  fit.sigma2 = full.fit.sigma2;
  fit.sigma_u2 = full.theta * full.fit.sigma2;
  fit.loglik = full.fit.loglik;
  fit.theta_at_upper_bound = full.at_upper_bound;

  const auto no_age = maximize_theta(build_design(rows, kAllTerms & ~unsigned(Term::Age)));
  const auto no_age2 =
      maximize_theta(build_design(rows, kAllTerms & ~unsigned(Term::AgeSquared)));
  fit.loglik_without_age = no_age.fit.loglik;
  fit.loglik_without_age2 = no_age2.fit.loglik;
  // The nested optimum can exceed the full one only by optimizer tolerance.
  fit.p_linear = lrt_pvalue(fit.loglik, std::min(fit.loglik, fit.loglik_without_age));
  fit.p_quadratic = lrt_pvalue(fit.loglik, std::min(fit.loglik, fit.loglik_without_age2));
  return fit;
}

double lrt_pvalue(double loglik_full, double loglik_reduced) {
  if (!std::isfinite(loglik_full) || !std::isfinite(loglik_reduced)) {
    throw InputError("likelihood-ratio test needs finite log-likelihoods");
  }
  const double diff = loglik_full - loglik_reduced;
  if (diff < -1e-8) throw InputError("reduced model fits better than the full model");
  const double stat = 2.0 * std::max(diff, 0.0);
  if (stat == 0.0) return 1.0;
  return std::clamp(boost::math::gamma_q(0.5, stat / 2.0), 0.0, 1.0);
}

std::string format_fit_report(const LmmFit& fit, std::string_view measure) {
  std::string out;
  auto kv = [&](std::string_view k, const std::string& v) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  };
  kv("measure", std::string(measure));
  kv("model", "random-intercept LMM, ML; p-values from LRT against chi-square(1)");
  for (std::size_t i = 0; i < 4; ++i) {
    kv("beta_" + std::string(kCoefficientNames[i]), csv::format(fit.beta[i]));
  }
  kv("sigma_u2", csv::format(fit.sigma_u2));
  kv("sigma2", csv::format(fit.sigma2));
  kv("theta", csv::format(fit.theta));
  kv("loglik", csv::format(fit.loglik));
  kv("loglik_without_age", csv::format(fit.loglik_without_age));
  kv("loglik_without_age2", csv::format(fit.loglik_without_age2));
  kv("p_linear", csv::format(fit.p_linear));
  kv("p_quadratic", csv::format(fit.p_quadratic));
  kv("n_obs", std::to_string(fit.n_obs));
  kv("n_infants", std::to_string(fit.n_infants));
  constexpr std::array<std::string_view, 3> names = {"age", "age2", "count"};
  for (std::size_t i = 0; i < 3; ++i) {
    kv(std::string(names[i]) + "_mean", csv::format(fit.transform[i].mean));
    kv(std::string(names[i]) + "_sd", csv::format(fit.transform[i].sd));
  }
  kv("theta_at_upper_bound", fit.theta_at_upper_bound ? "true" : "false");
  kv("degenerate", fit.degenerate ? "true" : "false");
  return out;
}

Measure parse_measure(std::string_view name) {
  if (name == "distance") return Measure::Distance;
  if (name == "dispersion") return Measure::Dispersion;
  if (name == "entropy") return Measure::Entropy;
  throw InputError("unknown measure '" + std::string(name) +
                   "' (expected distance, dispersion or entropy)");
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::Distance: return "distance";
    case Measure::Dispersion: return "dispersion";
    case Measure::Entropy: return "entropy";
  }
  return "distance";
}

std::vector<RegressionRow> regression_rows(std::span<const RecordingMeasures> measures,
                                           Measure measure) {
  std::vector<RegressionRow> out;
  for (const auto& m : measures) {
    const auto& v = measure == Measure::Distance     ? m.centroid_distance
                    : measure == Measure::Dispersion ? m.mean_dispersion
                                                     : m.entropy_bits;
    if (!v || m.n_chnsp == 0) continue;
    out.push_back({m.infant_id, m.age_months, static_cast<double>(m.n_chnsp), *v});
  }
  return out;
}

std::vector<double> poly_trend(std::span<const double> x, std::span<const double> y,
                               std::size_t degree) {
  if (x.size() != y.size()) throw InputError("poly_trend: x and y differ in length");
  std::set<double> distinct(x.begin(), x.end());
  if (distinct.size() < degree + 1) {
    throw InputError("poly_trend: need at least " + std::to_string(degree + 1) +
                     " distinct x values");
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto p = static_cast<Eigen::Index>(degree + 1);
  Eigen::MatrixXd v(n, p);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double power = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      v(i, j) = power;
      power *= x[static_cast<std::size_t>(i)];
    }
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = v.colPivHouseholderQr().solve(rhs);
  return {c.data(), c.data() + c.size()};
}

double poly_eval(std::span<const double> coefficients, double x) {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Validation decide_prominence(std::span<const int> ratings) {
  if (ratings.empty()) throw InputError("no prominence ratings for clip");
  std::array<int, 6> tally{};
  for (int r : ratings) {
    if (r < 1 || r > 5) throw InputError("prominence rating outside 1..5: " + std::to_string(r));
    ++tally[static_cast<std::size_t>(r)];
  }
  const int top = *std::max_element(tally.begin() + 1, tally.end());
  const auto modes = std::count(tally.begin() + 1, tally.end(), top);
  return modes == 1 && tally[1] == top ? Validation::Validated : Validation::Excluded;
}

std::map<std::string, Validation> validate_prominence(std::span<const ProminenceVote> votes) {
  std::map<std::string, std::vector<int>> by_clip;
  for (const auto& v : votes) by_clip[v.clip_id].push_back(v.prominence);
  std::map<std::string, Validation> out;
  for (const auto& [clip, ratings] : by_clip) out[clip] = decide_prominence(ratings);
  return out;
}

std::vector<ProminenceVote> parse_votes(std::istream& in, std::string_view origin) {
  const auto table = csv::Table::parse(in, std::string(origin));
  const auto c_clip = table.column("clip_id");
  const auto c_listener = table.column("listener_id");
  const auto c_p = table.column("P");
  std::vector<ProminenceVote> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& f = table.row(i);
    const auto line = table.line_of(i);
    const auto p = csv::parse_int(f[c_p], "P", line);
    if (p < 1 || p > 5) {
      throw InputError(std::string(origin) + ": prominence outside 1..5, line " +
                       std::to_string(line));
    }
    out.push_back({f[c_clip], f[c_listener], static_cast<int>(p)});
  }
  return out;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("pearson_r: inputs differ in length");
  if (x.size() < 3) throw InputError("pearson_r needs at least 3 pairs");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw InputError("pearson_r: zero variance input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace vocspace
