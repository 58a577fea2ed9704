#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "quadric/circle.hpp"
#include "quadric/enumerate.hpp"
#include "quadric/experiments.hpp"
#include "quadric/plot.hpp"
#include "quadric/verify.hpp"

using namespace quadric;

namespace {

std::array<double, 4> parse_base(const std::string& s) {
  std::array<double, 4> b{};
  std::istringstream in(s);
  std::string tok;
  std::size_t i = 0;
  while (std::getline(in, tok, ',')) {
    if (i == 4) throw InvalidArgument("base: expected a,b,c,d");
    b[i++] = std::stod(tok);
  }
  if (i != 4) throw InvalidArgument("base: expected a,b,c,d");
  return b;
}

int cmd_count(const std::string& form, double pmax, double pstep, const std::string& points) {
  const auto F = form_from_spec(form);
  if (!(pstep > 0) || !(pmax >= pstep)) throw InvalidArgument("count: need 0 < pstep <= pmax");
  std::cout << "P,N_F,seconds\n";
  QuadricPointSet last;
  for (double P = pstep; P <= pmax * (1 + 1e-12); P += pstep) {
    const auto t0 = std::chrono::steady_clock::now();
    last = enumerate_zeros(F, P);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << format_double(P) << ',' << last.count() << ',' << s << '\n';
  }
  if (!points.empty()) {
    std::ofstream out(points);
    if (!out) throw InvalidArgument("cannot write '" + points + "'");
    for (std::size_t i = 0; i < last.count(); ++i) {
      const auto x = last.point(i);
      for (std::size_t j = 0; j < x.size(); ++j) out << (j ? " " : "") << x[j];
      out << '\n';
    }
  }
  return 0;
}

int cmd_arcs(std::int64_t Q, const std::vector<double>& alphas, std::int64_t scan, double P, double eps0) {
  if (Q < 1) throw InvalidArgument("arcs: --q must be >= 1");
  std::vector<double> as = alphas;
  if (scan > 0)
    for (std::int64_t i = 0; i < scan; ++i) as.push_back(static_cast<double>(i) / static_cast<double>(scan));
  if (as.empty()) {
    // no query: list the arc centres
    std::cout << "a,q,radius\n";
    for (const auto& a : farey_cover(Q).arcs) std::cout << a.a << ',' << a.q << ',' << format_double(a.radius) << '\n';
    return 0;
  }
  std::cout << "alpha,a,q,region,dist\n";
  for (double x : as) {
    const double alpha = x - std::floor(x);
    const auto l = locate(alpha, Q);
    std::cout << format_double(alpha) << ',' << l.a << ',' << l.q << ',' << region_name(region_of(alpha, Q, P, eps0))
              << ',' << format_double(l.dist) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadric: sparse equidistribution on quadrics, exponential sums and the circle method"};
  app.require_subcommand(1);

  std::string form = "diag:1,1,1,1,-1";
  auto add_form = [&](CLI::App* c) { c->add_option("--form", form, "form file or diag:a,b,...")->capture_default_str(); };

  auto* count = app.add_subcommand("count", "N_F(P) for P = pstep, 2 pstep, ..., pmax as CSV");
  double pmax = 20, pstep = 5;
  std::string points;
  add_form(count);
  count->add_option("--pmax", pmax)->capture_default_str();
  count->add_option("--pstep", pstep)->capture_default_str();
  count->add_option("--points", points, "write the zeros at pmax, one per line");

  auto* report = app.add_subcommand("form", "determinant, Smith form and local solubility as JSON");
  add_form(report);

  auto* gauss = app.add_subcommand("gauss", "sampled Gauss sums against the exact bound as CSV");
  std::int64_t qmax = 30;
  std::size_t samples = 4;
  std::uint64_t seed = 1;
  add_form(gauss);
  gauss->add_option("--qmax", qmax)->capture_default_str();
  gauss->add_option("--samples", samples, "draws per modulus")->capture_default_str();
  gauss->add_option("--seed", seed)->capture_default_str();

  auto* expsum = app.add_subcommand("expsum", "S(alpha) as JSON");
  double alpha = 0, P = 10;
  std::string weight = "bump", observable = "bump", base;
  bool serial = false;
  add_form(expsum);
  expsum->add_option("--alpha", alpha)->required();
  expsum->add_option("--p", P)->required();
  expsum->add_option("--weight", weight, "bump | box | plateau:<delta>")->capture_default_str();
  expsum->add_option("--observable", observable, "bump | bump:m=<even> | const:<v>")->capture_default_str();
  expsum->add_option("--base", base, "base point a,b,c,d (default: the first built-in one)");
  expsum->add_flag("--serial", serial, "single-threaded reference loop");

  auto* arcs = app.add_subcommand("arcs", "locate alpha in the Farey cover and classify it");
  std::int64_t Q = 10, scan = 0;
  std::vector<double> alphas;
  double arcP = 100, eps0 = kDefaultEps0;
  arcs->add_option("--q", Q, "cover parameter Q")->required();
  arcs->add_option("--alpha", alphas, "points to locate");
  arcs->add_option("--scan", scan, "also locate i/RES for i < RES");
  arcs->add_option("--p", arcP, "P for the m1/m2 threshold")->capture_default_str();
  arcs->add_option("--eps0", eps0)->capture_default_str();

  auto* run = app.add_subcommand("run", "run the experiments described by a config file");
  std::string config;
  run->add_option("CONFIG", config)->required()->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "the acceptance suite, one line per criterion");
  std::vector<int> only;
  verify->add_option("--only", only, "criterion ids")->delimiter(',');

  auto* plot = app.add_subcommand("plot", "SVG of a result CSV");
  std::string csv, out, px, py, group;
  plot->add_option("CSV", csv)->required()->check(CLI::ExistingFile);
  plot->add_option("-o,--output", out, "default: CSV with .svg");
  plot->add_option("--x", px);
  plot->add_option("--y", py);
  plot->add_option("--group", group);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*count) return cmd_count(form, pmax, pstep, points);
    if (*report) {
      const auto F = form_from_spec(form);
      std::cout << form_report_json(F, local_solubility(F)) << '\n';
      return 0;
    }
    if (*gauss) {
      ExperimentConfig cfg;
      cfg.form = form;
      cfg.gauss_qmax = qmax;
      cfg.gauss_samples = samples;
      cfg.seed = seed;
      const auto rows = gauss_sum_survey(cfg);
      write_gauss_csv(std::cout, rows);
      for (const auto& r : rows)
        if (!r.holds) return 1;
      return 0;
    }
    if (*expsum) {
      const auto F = form_from_spec(form);
      const auto b = base.empty() ? default_bases().front() : parse_base(base);
      SumOptions opt;
      opt.parallel = !serial;
      std::cout << weighted_exp_sum(F, weight_by_name(weight), observable_by_name(observable),
                                    base_point(b[0], b[1], b[2], b[3]), P, alpha, opt)
                       .to_json()
                << '\n';
      return 0;
    }
    if (*arcs) return cmd_arcs(Q, alphas, scan, arcP, eps0);
    if (*run) {
      const auto summary = run_experiments(load_config(config));
      for (const auto& f : summary.files) std::cout << f << '\n';
      return 0;
    }
    if (*verify) {
      bool ok = true;
      for (int id : only)
        if (id < 1 || id > kCriterionCount) throw InvalidArgument("--only: ids are 1.." + std::to_string(kCriterionCount));
      std::vector<int> todo = only;
      if (todo.empty())
        for (int i = 1; i <= kCriterionCount; ++i) todo.push_back(i);
      for (int id : todo) {
        const auto r = run_criterion(id);
        std::cout << format_result(r) << std::endl;
        ok = ok && r.pass;
      }
      return ok ? 0 : 1;
    }
    if (*plot) {
      const auto t = read_csv_file(csv);
      auto spec = default_plot_spec(t);
      if (!px.empty()) spec.x = px;
      if (!py.empty()) spec.y = py;
      if (!group.empty()) spec.group = group;
      if (out.empty()) {
        out = csv;
        const auto dot = out.rfind('.');
        if (dot != std::string::npos && out.find('/', dot) == std::string::npos) out.resize(dot);
        out += ".svg";
      }
      std::ofstream o(out);
      if (!o) throw InvalidArgument("cannot write '" + out + "'");
      o << render_svg(t, spec);
      std::cout << out << '\n';
      return 0;
    }
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
