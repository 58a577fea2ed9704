#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "quadric/expsums.hpp"

namespace quadric {

/// Flat `key = value` run description. Unknown keys are an error. Relative
/// form paths are resolved against the config file by load_config.
///
///   form = diag:1,1,1,1,-1      (or a path to a form file)
///   observable = bump            (bump | bump:m=<even> | const:<v>)
///   observable.center = 0,2      observable.width = 0.5
///   observable.project = true    (subtract the mean)
///   base = a,b,c,d; a,b,c,d      (base points as matrices, det > 0)
///   p.min = 10  p.max = 60  p.step = 10   or   p.list = 10,20,30,40,60
///   q = 0 (0: ceil(P^(1/20)))  eps0 = 1/240  delta = 0.1  H = 2
///   seed = 1  budget = 5e9
///   gauss.qmax = 30  gauss.samples = 4
///   experiments = sparse,smoothing,decay,gauss
///   output = results
struct ExperimentConfig {
  std::string form = "diag:1,1,1,1,-1";
  std::string observable = "bump";
  Complex center{0.0, 2.0};
  double width = 0.5;
  bool project = true;
  std::vector<std::array<double, 4>> bases;
  std::vector<double> P_schedule;
  std::int64_t Q = 0;
  double eps0 = 1.0 / 240.0;
  double delta = 0.1;
  std::int64_t H = 2;
  std::uint64_t seed = 1;
  double budget = 5e9;
  std::int64_t gauss_qmax = 30;
  std::size_t gauss_samples = 4;
  std::vector<std::string> experiments{"sparse", "smoothing", "decay", "gauss"};
  std::string output = "results";
  /// Key/value pairs as read, in file order, for the manifest.
  std::vector<std::pair<std::string, std::string>> echo;

  QuadraticForm quadratic_form() const;
  /// The per-coordinate observable (projected when `project`).
  Observable make_observable() const;
  std::vector<QuotientPoint> base_points() const;
};

/// Three generic base points, fixed once; the identity is avoided because
/// u(k) lies in SL(2, Z) there and the orbit of integer times is a single point.
std::vector<std::array<double, 4>> default_bases();

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// "diag:a,b,..." or a form file path.
QuadraticForm form_from_spec(const std::string& spec);

struct ExperimentRecord {
  std::size_t base = 0;
  double P = 0;
  std::int64_t N_F = 0;
  double sigma_sharp = 0;   // sum over |x| < P, F(x) = 0 of f(u(x) x0)
  double sigma_smooth = 0;  // same with weight plateau_delta(x/P)
  double avg_sharp = 0;     // sigma_sharp / N_F
  double avg_smooth = 0;    // sigma_smooth / N_F
  double control_avg = 0;   // f = 1, sharp cutoff: exactly 1
  double seconds = 0;       // not written to CSV (keeps outputs reproducible)
};

struct SparseAverage {
  std::vector<ExperimentRecord> records;
  std::string observable;
  bool zero_average = false;
  double sup_bound = 0;  // bound for |f| on the product
  std::vector<std::string> warnings;
};

/// Sigma(P) / N_F(P) for every base point and P in the schedule, sharp and smooth.
/// Throws Error when N_F(max P) <= 1 (obstructed or too small).
SparseAverage sparse_average(const ExperimentConfig& cfg);

struct SmoothingRow {
  std::size_t base = 0;
  double P = 0, delta = 0;
  double sigma_sharp = 0, sigma_smooth = 0, diff = 0;
  std::int64_t shell = 0;
  double bound = 0;  // sup|f| * shell
  bool holds = false;
  std::string observable;
};

/// |Sigma_sharp - Sigma_smooth| <= sup|f| shell_count(F, P, delta) at the
/// largest P, for the configured observable and for f = 1.
std::vector<SmoothingRow> smoothing_comparison(const ExperimentConfig& cfg, double delta);

struct DecayFit {
  std::string series;
  double exponent = 0;
  double reference = 0;  // n - 2
  std::vector<double> P;
  std::vector<double> abs_sigma;
  std::vector<double> dropped;  // P with Sigma numerically 0
};

/// Least-squares slope of log|sigma| against log P; zeros are dropped.
DecayFit fit_decay(const std::string& series, std::span<const double> P, std::span<const double> sigma,
                   double reference);

/// One fit per base point of the smooth Sigma(P), plus the f = 1 control.
std::vector<DecayFit> decay_study(const ExperimentConfig& cfg, const SparseAverage& avg);

/// gauss.samples draws for each q in 1..gauss.qmax; each row asserts the exact inequality.
std::vector<GaussSample> gauss_sum_survey(const ExperimentConfig& cfg);

std::string format_double(double x);

void write_sparse_csv(std::ostream& out, const SparseAverage& avg);
void write_smoothing_csv(std::ostream& out, std::span<const SmoothingRow> rows);
void write_decay_csv(std::ostream& out, std::span<const DecayFit> fits);
void write_gauss_csv(std::ostream& out, std::span<const GaussSample> rows);

struct RunSummary {
  std::vector<std::string> files;
  std::map<std::string, double> timings;
};

/// Run every configured experiment and write CSVs plus manifest.json into
/// cfg.output. Wall-clock timings go to timings.json so the rest is byte-identical.
RunSummary run_experiments(const ExperimentConfig& cfg);

}  // namespace quadric
