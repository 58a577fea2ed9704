#include "quadric/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/version.hpp>
#include <json.hpp>

#include "quadric/enumerate.hpp"

namespace quadric {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  // accept simple fractions like 1/240
  const auto slash = v.find('/');
  try {
    std::size_t pos = 0;
    if (slash != std::string::npos) {
      const double num = std::stod(v.substr(0, slash)), den = std::stod(v.substr(slash + 1));
      if (den == 0) throw InvalidArgument("zero denominator");
      return num / den;
    }
    const double x = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return x;
  } catch (const std::logic_error&) {
  }
  throw InvalidArgument("config: '" + key + "' expects a number, got '" + v + "'");
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 9e15) throw InvalidArgument("config: '" + key + "' expects an integer");
  return static_cast<std::int64_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("config: '" + key + "' expects true/false");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Everything the averages need, computed once at the largest P.
struct OrbitData {
  QuadricPointSet zeros;
  std::int64_t B = 0;
  std::vector<std::vector<double>> tables;  // per base point, f(x0 u(k)) at k + B
};

OrbitData prepare(const ExperimentConfig& cfg, const QuadraticForm& F, const Observable& f) {
  if (cfg.P_schedule.empty()) throw InvalidArgument("experiment: empty P schedule");
  const double Pmax = *std::max_element(cfg.P_schedule.begin(), cfg.P_schedule.end());
  EnumerationOptions eo;
  eo.work_budget = cfg.budget;
  OrbitData d;
  d.zeros = enumerate_zeros(F, Pmax, eo);
  d.B = box_radius(Pmax);
  for (const auto& x0 : cfg.base_points()) d.tables.push_back(orbit_table(f, x0, d.B));
  return d;
}

double product_value(const std::vector<double>& table, std::int64_t B, std::span<const std::int64_t> x) {
  double v = 1;
  for (auto k : x) v *= table[static_cast<std::size_t>(k + B)];
  return v;
}

double plateau_product(const WeightFunction& w, std::span<const std::int64_t> x, double P) {
  double v = 1;
  for (auto k : x) v *= w(static_cast<double>(k) / P);
  return v;
}

}  // namespace

std::vector<std::array<double, 4>> default_bases() {
  // det = 1 by construction: d = (1 + b c) / a
  auto mk = [](double a, double b, double c) { return std::array<double, 4>{a, b, c, (1 + b * c) / a}; };
  return {mk(1.1, 0.3, 0.2), mk(0.8, -0.45, 0.35), mk(1.3, 0.7, -0.25)};
}

QuadraticForm form_from_spec(const std::string& spec) {
  if (spec.rfind("diag:", 0) == 0) {
    std::vector<std::int64_t> d;
    for (const auto& t : split(spec.substr(5), ',')) d.push_back(to_int("form", t));
    if (d.empty()) throw InvalidArgument("form: empty diagonal");
    return QuadraticForm::diagonal(d);
  }
  return read_form_file(spec);
}

QuadraticForm ExperimentConfig::quadratic_form() const { return form_from_spec(form); }

Observable ExperimentConfig::make_observable() const {
  const auto f = observable_by_name(observable, center, width);
  return project ? zero_average_projection(f) : f;
}

std::vector<QuotientPoint> ExperimentConfig::base_points() const {
  std::vector<QuotientPoint> out;
  for (const auto& b : (bases.empty() ? default_bases() : bases)) out.push_back(base_point(b[0], b[1], b[2], b[3]));
  return out;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  c.P_schedule = {10, 20, 30, 40, 50, 60};
  std::string line;
  double pmin = -1, pmax = -1, pstep = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    c.echo.emplace_back(key, v);
    if (key == "form") {
      c.form = v;
    } else if (key == "observable") {
      c.observable = v;
    } else if (key == "observable.center") {
      const auto parts = split(v, ',');
      if (parts.size() != 2) throw InvalidArgument("config: observable.center expects re,im");
      c.center = {to_double(key, parts[0]), to_double(key, parts[1])};
    } else if (key == "observable.width") {
      c.width = to_double(key, v);
    } else if (key == "observable.project") {
      c.project = to_bool(key, v);
    } else if (key == "base") {
      c.bases.clear();
      for (const auto& m : split(v, ';')) {
        const auto e = split(m, ',');
        if (e.size() != 4) throw InvalidArgument("config: each base point needs four entries a,b,c,d");
        c.bases.push_back({to_double(key, e[0]), to_double(key, e[1]), to_double(key, e[2]), to_double(key, e[3])});
      }
    } else if (key == "p.min") {
      pmin = to_double(key, v);
    } else if (key == "p.max") {
      pmax = to_double(key, v);
    } else if (key == "p.step") {
      pstep = to_double(key, v);
    } else if (key == "p.list") {
      c.P_schedule.clear();
      for (const auto& t : split(v, ',')) c.P_schedule.push_back(to_double(key, t));
    } else if (key == "q") {
      c.Q = to_int(key, v);
    } else if (key == "eps0") {
      c.eps0 = to_double(key, v);
    } else if (key == "delta") {
      c.delta = to_double(key, v);
    } else if (key == "H") {
      c.H = to_int(key, v);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_int(key, v));
    } else if (key == "budget") {
      c.budget = to_double(key, v);
    } else if (key == "gauss.qmax") {
      c.gauss_qmax = to_int(key, v);
    } else if (key == "gauss.samples") {
      c.gauss_samples = static_cast<std::size_t>(to_int(key, v));
    } else if (key == "experiments") {
      c.experiments = split(v, ',');
    } else if (key == "output") {
      c.output = v;
    } else {
      throw InvalidArgument("config: unknown key '" + key + "'");
    }
  }
  if (pmin > 0 || pmax > 0 || pstep > 0) {
    if (!(pmin >= 1 && pmax >= pmin && pstep > 0)) throw InvalidArgument("config: need 1 <= p.min <= p.max and p.step > 0");
    c.P_schedule.clear();
    for (int k = 0;; ++k) {
      const double P = pmin + k * pstep;
      if (P > pmax + 1e-9) break;
      c.P_schedule.push_back(P);
    }
  }
  for (double P : c.P_schedule)
    if (!(P >= 1)) throw InvalidArgument("config: every P must be >= 1");
  if (!(c.delta > 0 && c.delta < 1)) throw InvalidArgument("config: delta must lie in (0, 1)");
  if (!(c.eps0 > 0 && c.eps0 <= 1.0 / 240.0)) throw InvalidArgument("config: eps0 must lie in (0, 1/240]");
  if (c.gauss_qmax < 1) throw InvalidArgument("config: gauss.qmax must be >= 1");
  static const std::vector<std::string> known{"sparse", "smoothing", "decay", "gauss"};
  for (const auto& e : c.experiments)
    if (std::find(known.begin(), known.end(), e) == known.end())
      throw InvalidArgument("config: unknown experiment '" + e + "'");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  auto c = parse_config(in);
  // relative form files are relative to the config file
  namespace fs = std::filesystem;
  if (c.form.rfind("diag:", 0) != 0 && fs::path(c.form).is_relative())
    c.form = (fs::path(path).parent_path() / c.form).lexically_normal().string();
  return c;
}

SparseAverage sparse_average(const ExperimentConfig& cfg) {
  const auto F = cfg.quadratic_form();
  const auto f = cfg.make_observable();
  SparseAverage out;
  out.observable = f.name();
  out.zero_average = f.is_zero_average();
  out.sup_bound = std::pow(f.sup_bound(), static_cast<double>(F.dim()));
  try {
    const auto rep = local_solubility(F);
    if (!rep.globally_unobstructed) out.warnings.push_back("form is locally obstructed");
  } catch (const Inconclusive& e) {
    out.warnings.push_back(std::string("local solubility inconclusive: ") + e.what());
  }
  const auto data = prepare(cfg, F, f);
  const auto w = plateau(cfg.delta);
  const std::vector<double> ones(static_cast<std::size_t>(2 * data.B + 1), 1.0);
  for (std::size_t b = 0; b < data.tables.size(); ++b) {
    for (double P : cfg.P_schedule) {
      const auto t0 = std::chrono::steady_clock::now();
      ExperimentRecord r;
      r.base = b;
      r.P = P;
      CompensatedSum sharp, smooth, control;
      for (std::size_t i = 0; i < data.zeros.count(); ++i) {
        const auto x = data.zeros.point(i);
        if (static_cast<double>(sup_norm(x)) >= P) continue;
        ++r.N_F;
        const double v = product_value(data.tables[b], data.B, x);
        sharp.add(v);
        smooth.add(v * plateau_product(w, x, P));
        control.add(product_value(ones, data.B, x));
      }
      if (r.N_F <= 1 && P == *std::max_element(cfg.P_schedule.begin(), cfg.P_schedule.end()))
        throw Error("obstructed-or-too-small: N_F(P) = " + std::to_string(r.N_F) + " at the largest P");
      r.sigma_sharp = sharp.value();
      r.sigma_smooth = smooth.value();
      r.avg_sharp = r.sigma_sharp / static_cast<double>(r.N_F);
      r.avg_smooth = r.sigma_smooth / static_cast<double>(r.N_F);
      r.control_avg = control.value() / static_cast<double>(r.N_F);
      r.seconds = seconds_since(t0);
      out.records.push_back(r);
    }
  }
  return out;
}

std::vector<SmoothingRow> smoothing_comparison(const ExperimentConfig& cfg, double delta) {
  if (!(delta > 0 && delta < 1)) throw InvalidArgument("smoothing_comparison: delta must lie in (0, 1)");
  const auto F = cfg.quadratic_form();
  const auto f = cfg.make_observable();
  const double P = *std::max_element(cfg.P_schedule.begin(), cfg.P_schedule.end());
  EnumerationOptions eo;
  eo.work_budget = cfg.budget;
  const std::int64_t shell = shell_count(F, P, delta, eo);
  const auto data = prepare(cfg, F, f);
  const auto w = plateau(delta);
  const double sup = std::pow(f.sup_bound(), static_cast<double>(F.dim()));
  std::vector<SmoothingRow> rows;
  auto run = [&](const std::vector<double>& table, std::size_t base, const std::string& name, double bound) {
    SmoothingRow r;
    r.base = base;
    r.P = P;
    r.delta = delta;
    r.observable = name;
    CompensatedSum sharp, smooth;
    for (std::size_t i = 0; i < data.zeros.count(); ++i) {
      const auto x = data.zeros.point(i);
      if (static_cast<double>(sup_norm(x)) >= P) continue;
      const double v = product_value(table, data.B, x);
      sharp.add(v);
      smooth.add(v * plateau_product(w, x, P));
    }
    r.sigma_sharp = sharp.value();
    r.sigma_smooth = smooth.value();
    r.diff = std::abs(r.sigma_sharp - r.sigma_smooth);
    r.shell = shell;
    r.bound = bound * static_cast<double>(shell);
    r.holds = r.diff <= r.bound * (1 + 1e-12);
    rows.push_back(r);
  };
  for (std::size_t b = 0; b < data.tables.size(); ++b) run(data.tables[b], b, f.name(), sup);
  run(std::vector<double>(static_cast<std::size_t>(2 * data.B + 1), 1.0), 0, "const(1)", 1.0);
  return rows;
}

DecayFit fit_decay(const std::string& series, std::span<const double> P, std::span<const double> sigma,
                   double reference) {
  if (P.size() != sigma.size()) throw DimensionMismatch("fit_decay: P and sigma differ in length");
  DecayFit fit;
  fit.series = series;
  fit.reference = reference;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (std::abs(sigma[i]) < 1e-300) {
      fit.dropped.push_back(P[i]);
      continue;
    }
    fit.P.push_back(P[i]);
    fit.abs_sigma.push_back(std::abs(sigma[i]));
  }
  if (fit.P.size() < 2) throw InvalidArgument("fit_decay: fewer than two nonzero values");
  const double k = static_cast<double>(fit.P.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < fit.P.size(); ++i) {
    const double x = std::log(fit.P[i]), y = std::log(fit.abs_sigma[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double den = k * sxx - sx * sx;
  if (den == 0) throw InvalidArgument("fit_decay: need at least two distinct P");
  fit.exponent = (k * sxy - sx * sy) / den;
  return fit;
}

std::vector<DecayFit> decay_study(const ExperimentConfig& cfg, const SparseAverage& avg) {
  const double ref = static_cast<double>(cfg.quadratic_form().dim()) - 2.0;
  std::vector<DecayFit> fits;
  std::size_t nb = 0;
  for (const auto& r : avg.records) nb = std::max(nb, r.base + 1);
  for (std::size_t b = 0; b < nb; ++b) {
    std::vector<double> P, s;
    for (const auto& r : avg.records)
      if (r.base == b) P.push_back(r.P), s.push_back(r.sigma_smooth);
    fits.push_back(fit_decay("base" + std::to_string(b), P, s, ref));
  }
  std::vector<double> P, s;
  for (const auto& r : avg.records)
    if (r.base == 0) P.push_back(r.P), s.push_back(r.control_avg * static_cast<double>(r.N_F));
  fits.push_back(fit_decay("control", P, s, ref));
  return fits;
}

std::vector<GaussSample> gauss_sum_survey(const ExperimentConfig& cfg) {
  const auto F = cfg.quadratic_form();
  const std::int64_t cap = gauss_q_cap(F, cfg.gauss_qmax);
  std::mt19937_64 rng(cfg.seed);
  std::vector<GaussSample> rows;
  for (std::int64_t q = 1; q <= cap; ++q)
    for (std::size_t s = 0; s < cfg.gauss_samples; ++s) {
      auto g = draw_gauss_sample(F, q, rng);
      if (!g.holds) throw Error("gauss survey: exact inequality failed at q = " + std::to_string(q));
      rows.push_back(std::move(g));
    }
  return rows;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_sparse_csv(std::ostream& out, const SparseAverage& avg) {
  out << "base,P,N_F,sigma_sharp,avg_sharp,sigma_smooth,avg_smooth,control_avg\n";
  for (const auto& r : avg.records)
    out << r.base << ',' << format_double(r.P) << ',' << r.N_F << ',' << format_double(r.sigma_sharp) << ','
        << format_double(r.avg_sharp) << ',' << format_double(r.sigma_smooth) << ',' << format_double(r.avg_smooth)
        << ',' << format_double(r.control_avg) << '\n';
}

void write_smoothing_csv(std::ostream& out, std::span<const SmoothingRow> rows) {
  out << "observable,base,P,delta,sigma_sharp,sigma_smooth,diff,shell_count,bound,holds\n";
  for (const auto& r : rows)
    out << r.observable << ',' << r.base << ',' << format_double(r.P) << ',' << format_double(r.delta) << ','
        << format_double(r.sigma_sharp) << ',' << format_double(r.sigma_smooth) << ',' << format_double(r.diff) << ','
        << r.shell << ',' << format_double(r.bound) << ',' << (r.holds ? "true" : "false") << '\n';
}

void write_decay_csv(std::ostream& out, std::span<const DecayFit> fits) {
  out << "series,P,abs_sigma,exponent,reference\n";
  for (const auto& f : fits) {
    for (std::size_t i = 0; i < f.P.size(); ++i)
      out << f.series << ',' << format_double(f.P[i]) << ',' << format_double(f.abs_sigma[i]) << ','
          << format_double(f.exponent) << ',' << format_double(f.reference) << '\n';
    for (double P : f.dropped)
      out << f.series << ',' << format_double(P) << ",0," << format_double(f.exponent) << ','
          << format_double(f.reference) << '\n';
  }
}

void write_gauss_csv(std::ostream& out, std::span<const GaussSample> rows) {
  out << "q,a,v_hash,abs,ratio,bound\n";
  for (const auto& g : rows)
    out << g.q << ',' << g.a << ',' << g.v_hash() << ',' << format_double(g.abs) << ',' << format_double(g.ratio)
        << ',' << format_double(std::sqrt(g.kernel)) << '\n';
}

RunSummary run_experiments(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output);
  RunSummary sum;
  nlohmann::ordered_json manifest;
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.echo) echo[k] = v;
  manifest["config"] = echo;
  manifest["resolved"] = {{"form", cfg.quadratic_form().describe()},
                          {"P", cfg.P_schedule},
                          {"delta", cfg.delta},
                          {"eps0", cfg.eps0},
                          {"seed", cfg.seed}};
  manifest["versions"] = {{"quadric", "0.1.0"},
                          {"compiler", __VERSION__},
                          {"boost", BOOST_LIB_VERSION},
                          {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  auto has = [&](const char* e) { return std::find(cfg.experiments.begin(), cfg.experiments.end(), e) != cfg.experiments.end(); };
  auto open = [&](const std::string& name) {
    const auto path = (fs::path(cfg.output) / name).string();
    sum.files.push_back(path);
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    return out;
  };
  nlohmann::ordered_json results = nlohmann::ordered_json::object();

  SparseAverage avg;
  if (has("sparse") || has("decay")) {
    const auto t0 = std::chrono::steady_clock::now();
    avg = sparse_average(cfg);
    sum.timings["sparse"] = seconds_since(t0);
    if (has("sparse")) {
      auto out = open("sparse_average.csv");
      write_sparse_csv(out, avg);
    }
    results["sparse"] = {{"observable", avg.observable}, {"zero_average", avg.zero_average}, {"warnings", avg.warnings}};
  }
  if (has("smoothing")) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = smoothing_comparison(cfg, cfg.delta);
    sum.timings["smoothing"] = seconds_since(t0);
    auto out = open("smoothing.csv");
    write_smoothing_csv(out, rows);
    bool all = true;
    for (const auto& r : rows) all = all && r.holds;
    results["smoothing"] = {{"all_hold", all}};
  }
  if (has("decay")) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto fits = decay_study(cfg, avg);
    sum.timings["decay"] = seconds_since(t0);
    auto out = open("decay.csv");
    write_decay_csv(out, fits);
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& f : fits) j[f.series] = {{"exponent", f.exponent}, {"reference", f.reference}, {"dropped", f.dropped}};
    results["decay"] = j;
  }
  if (has("gauss")) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = gauss_sum_survey(cfg);
    sum.timings["gauss"] = seconds_since(t0);
    auto out = open("gauss.csv");
    write_gauss_csv(out, rows);
    double worst = 0;
    for (const auto& g : rows) worst = std::max(worst, g.ratio);
    results["gauss"] = {{"rows", rows.size()}, {"max_ratio", worst}, {"all_hold", true}};
  }
  manifest["results"] = results;
  std::vector<std::string> names;
  for (const auto& f : sum.files) names.push_back(fs::path(f).filename().string());
  manifest["outputs"] = names;
  {
    auto out = open("manifest.json");
    out << manifest.dump(2) << '\n';
  }
  {
    nlohmann::ordered_json t(sum.timings);
    auto out = open("timings.json");
    out << t.dump(2) << '\n';
  }
  return sum;
}

}  // namespace quadric
