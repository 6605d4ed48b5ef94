// weinstock: command-line front end for the verification toolkit.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "weinstock/harness.hpp"

using namespace weinstock;
using namespace weinstock::harness;

namespace {

// Empty or "-" means stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw DomainError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct ShapeArgs {
  std::string shape = "sphere r0=1";
  std::string profile;
  std::size_t nodes = 64;
};

void add_shape_options(CLI::App* app, ShapeArgs& a) {
  app->add_option("--shape", a.shape, "shape, e.g. \"perturbed r0=1 P2=0.1\"")->capture_default_str();
  app->add_option("--profile", a.profile, "profile file; overrides --shape and --dim");
  app->add_option("--nodes", a.nodes, "collocation nodes for --shape")
      ->check(CLI::Range(5, 4096))
      ->capture_default_str();
}

RadialProfile load_shape(const ShapeArgs& a, int n) {
  if (!a.profile.empty()) return read_profile(a.profile).profile;
  return make_profile(Dimension(n), ShapeSpec::parse(a.shape), a.nodes);
}

int finish(const Report& report, const std::string& prefix) {
  const std::string out = prefix.empty() ? report.name : prefix;
  write_report(out, report);
  std::cout << report.name << ": " << report.passed() << "/" << report.rows.size() << " rows pass over "
            << report.cases << " cases; wrote " << out << ".csv, " << out << ".json\n";
  for (const auto& r : report.rows) {
    if (r.pass) continue;
    std::cout << "FAIL " << r.case_id << " " << r.check << " lhs=" << r.lhs << " rhs=" << r.rhs
              << " slack=" << r.slack << " [" << r.anchor << "]";
    if (!r.note.empty()) std::cout << " " << r.note;
    std::cout << "\n";
  }
  return report.ok() ? 0 : 1;
}

RunOptions run_options(const std::string& name, std::uint64_t seed, unsigned threads, bool quiet) {
  RunOptions o;
  o.name = name;
  o.seed = seed;
  o.threads = threads;
  if (!quiet) {
    o.progress = [](std::size_t done, std::size_t total, const std::string& id) {
      std::cerr << "[" << done << "/" << total << "] " << id << "\n";
    };
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steklov eigenvalue bounds for domains in H^n: computations and checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "weinstock 1.0");

  int dim = 4;
  std::string out;
  std::uint64_t seed = 1;
  std::string config;
  unsigned threads = 0;
  bool quiet = false;

  // gfun
  auto* gfun = app.add_subcommand("gfun", "tabulate g, its derivatives and ratios, or run the g/h suite");
  gfun->alias("dump-gfun");
  double r_min = 1e-3, r_max = 10.0;
  int points = 200;
  bool log_spacing = false, suite = false;
  gfun->add_option("--dim", dim, "dimension n")->check(CLI::Range(2, 40))->capture_default_str();
  gfun->add_option("--rmin", r_min)->capture_default_str();
  gfun->add_option("--rmax", r_max)->capture_default_str();
  gfun->add_option("--points", points)->check(CLI::Range(2, 1000000))->capture_default_str();
  gfun->add_flag("--log", log_spacing, "logarithmic spacing in r");
  gfun->add_flag("--check", suite, "run the g/h property suite (all n in 2..8 unless --dim is given)");
  gfun->add_option("--out", out, "CSV path, or report prefix with --check");

  // ball-table
  auto* ball_table = app.add_subcommand("ball-table", "geodesic ball volume, area, g and sigma_1 (exact and FEM)");
  std::vector<double> radii{0.5, 1.0, 2.0};
  std::vector<int> elements{48};
  ball_table->add_option("--dim", dim)->check(CLI::Range(2, 40))->capture_default_str();
  ball_table->add_option("--radii", radii)->delimiter(',')->capture_default_str();
  ball_table->add_option("--elements", elements, "FEM resolutions; 0 skips the FEM column")
      ->delimiter(',')
      ->capture_default_str();
  ball_table->add_option("--out", out, "CSV path");

  // steklov
  auto* steklov = app.add_subcommand("steklov", "Steklov spectrum of a radial-graph domain");
  ShapeArgs shape;
  std::vector<int> sectors{0, 1, 2};
  SteklovOptions fem;
  add_shape_options(steklov, shape);
  steklov->add_option("--dim", dim)->check(CLI::Range(3, 40))->capture_default_str();
  steklov->add_option("--sectors", sectors)->delimiter(',')->capture_default_str();
  steklov->add_option("--elements", fem.elements)->capture_default_str();
  steklov->add_option("--radial-elements", fem.radial_elements)->capture_default_str();
  steklov->add_option("--order", fem.order)->capture_default_str();
  steklov->add_option("--count", fem.count, "eigenvalues per sector")->capture_default_str();
  steklov->add_option("--out", out, "spectrum CSV path");

  // flow
  auto* flow = app.add_subcommand("flow", "inverse mean curvature flow of a radial graph");
  FlowOptions flow_options;
  bool no_filter = false;
  add_shape_options(flow, shape);
  flow->add_option("--dim", dim)->check(CLI::Range(3, 40))->capture_default_str();
  flow->add_option("--t-end", flow_options.t_end)->capture_default_str();
  flow->add_option("--dt", flow_options.dt)->capture_default_str();
  flow->add_option("--sample-dt", flow_options.sample_dt)->capture_default_str();
  flow->add_option("--cfl", flow_options.cfl)->capture_default_str();
  flow->add_option("--kappa-tol", flow_options.kappa_tolerance, "stop once curvatures are this close to 1")
      ->capture_default_str();
  flow->add_option("--checkpoint-dir", flow_options.checkpoint_dir);
  flow->add_option("--checkpoint-dt", flow_options.checkpoint_dt)->capture_default_str();
  flow->add_flag("--no-filter", no_filter, "disable the spectral filter");
  flow->add_option("--out", out, "trace CSV path");

  // verify
  auto* verify = app.add_subcommand("verify", "run the inequality checks listed in a config file or a built-in suite");
  std::string builtin;
  bool seed_given = false;
  verify->add_option("--config", config, "config file")->check(CLI::ExistingFile);
  verify->add_option("--suite", builtin, "built-in suite instead of a config")
      ->check(CLI::IsMember({"gfun", "flow", "transplant"}));
  verify->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) { seed_given = true; });
  verify->add_option("--threads", threads, "worker threads; 0 uses all cores");
  verify->add_option("--out", out, "report prefix (writes PREFIX.csv and PREFIX.json)");
  verify->add_flag("--quiet", quiet);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "random mean-convex family through the checks");
  FamilySpec family;
  family.n = 4;
  family.count = 50;
  std::string checks = "weinstock,lemma_chain";
  int sweep_elements = 48;
  sweep->add_option("--dim", family.n)->check(CLI::Range(3, 40))->capture_default_str();
  sweep->add_option("--count", family.count)->capture_default_str();
  sweep->add_option("--seed", seed)->capture_default_str();
  sweep->add_option("--checks", checks)->capture_default_str();
  sweep->add_option("--elements", sweep_elements, "FEM elements along theta")->capture_default_str();
  sweep->add_option("--r0-min", family.options.r0_min)->capture_default_str();
  sweep->add_option("--r0-max", family.options.r0_max)->capture_default_str();
  sweep->add_option("--eps", family.options.eps)->capture_default_str();
  sweep->add_option("--kmax", family.options.k_max)->capture_default_str();
  sweep->add_option("--threads", threads)->capture_default_str();
  sweep->add_option("--out", out, "report prefix");
  sweep->add_flag("--quiet", quiet);

  // n3-threshold
  auto* threshold = app.add_subcommand("n3-threshold", "the radius R0 with b(2 R0) = 5/2 for n = 3");
  threshold->add_option("--out", out, "JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gfun->parsed()) {
      if (suite) {
        GfunSuiteOptions o;
        if (gfun->count("--dim")) o.n_min = o.n_max = dim;
        return finish(gfun_suite(o), out);
      }
      const Dimension d(dim);
      const GFunction g(d);
      Output o(out);
      auto& os = o.stream();
      os << "r,g,g_prime,g_second,a,b,c,sigma1\n";
      os.precision(17);
      for (int i = 0; i < points; ++i) {
        const double u = static_cast<double>(i) / (points - 1);
        const double r = log_spacing ? r_min * std::pow(r_max / r_min, u) : r_min + (r_max - r_min) * u;
        const auto q = g.ratios(r);
        os << r << "," << g(r) << "," << g.prime(r) << "," << g.second(r) << "," << q.a << "," << q.b << ","
           << q.c << "," << sigma1_exact_ball(d, r) << "\n";
      }
      return 0;
    }

    if (ball_table->parsed()) {
      const Dimension d(dim);
      const GFunction g(d);
      Output o(out);
      auto& os = o.stream();
      os << "n,r,volume,area,g,sigma1_exact,elements,sigma1_fem,rel_error\n";
      os.precision(17);
      for (double r : radii) {
        const double exact = sigma1_exact_ball(d, r);
        for (int e : elements) {
          os << dim << "," << r << "," << hypgeo::ball_volume(d, r) << "," << hypgeo::sphere_area(d, r) << ","
             << g(r) << "," << exact << "," << e << ",";
          if (e > 0 && dim >= 3) {
            SteklovOptions so;
            so.elements = e;
            const double fem_value = solve(make_profile(d, ShapeSpec::sphere(r)), {0, 1}, so).sigma1();
            os << fem_value << "," << std::abs(fem_value / exact - 1.0);
          } else {
            os << ",";
          }
          os << "\n";
        }
      }
      return 0;
    }

    if (steklov->parsed()) {
      const auto profile = load_shape(shape, dim);
      const auto spectrum = solve(profile, sectors, fem);
      Output o(out);
      write_spectrum_csv(o.stream(), spectrum);
      if (!out.empty() && out != "-") {
        const auto geo = geometry(profile);
        std::cout << "sigma1 = " << spectrum.sigma1() << ", ball with equal area: "
                  << sigma1_exact_ball(profile.dim(), geo.area_radius) << "\n";
      }
      return 0;
    }

    if (flow->parsed()) {
      flow_options.filter = !no_filter;
      const auto trace = run(load_shape(shape, dim), flow_options);
      Output o(out);
      write_trace_csv(o.stream(), trace);
      if (!out.empty() && out != "-") {
        const auto& last = trace.samples.back();
        std::cout << trace.steps << " steps to t = " << last.t << ", A = " << last.A
                  << ", largest increase of A = " << trace.max_increase() << "\n";
      }
      return 0;
    }

    if (verify->parsed()) {
      if (config.empty() == builtin.empty()) {
        std::cerr << "verify: give exactly one of --config or --suite\n";
        return 2;
      }
      if (builtin == "gfun") return finish(gfun_suite(), out);
      if (builtin == "flow") return finish(flow_suite(default_flow_cases(), run_options("flow", seed, threads, quiet)), out);
      if (builtin == "transplant") {
        return finish(transplant_suite({}, run_options("transplant", seed, threads, quiet)), out);
      }
      Config cfg = load_config(config);
      if (seed_given) cfg.seed = seed;
      const unsigned t = verify->count("--threads") ? threads : cfg.threads;
      Report report = run_cases(cfg.expand(), run_options(cfg.name, cfg.seed, t, quiet));
      report.meta["config"] = config;
      return finish(report, out.empty() ? cfg.name : out);
    }

    if (sweep->parsed()) {
      family.name = "sweep-n" + std::to_string(family.n);
      family.checks = harness::detail::parse_checks(checks);
      VerificationCase base;
      base.fem.elements = sweep_elements;
      Report report = run_cases(expand_family(family, seed, base), run_options(family.name, seed, threads, quiet));
      report.meta["family"] = "r0 in [" + std::to_string(family.options.r0_min) + ", " +
                              std::to_string(family.options.r0_max) + "], |eps_k| <= " +
                              std::to_string(family.options.eps);
      return finish(report, out);
    }

    if (threshold->parsed()) {
      const double r0 = n3_threshold();
      const GFunction g(Dimension(3));
      nlohmann::json j{{"R0", r0}, {"b_at_2R0", g.ratios(2 * r0).b}, {"target", 2.5}};
      std::cout.precision(17);
      std::cout << "R0 = " << r0 << "\n";
      if (!out.empty()) {
        Output o(out);
        o.stream() << j.dump(2) << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
