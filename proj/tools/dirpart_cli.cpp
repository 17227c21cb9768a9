#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dirpart/continuum.hpp"
#include "dirpart/domain.hpp"
#include "dirpart/errors.hpp"
#include "dirpart/geograph.hpp"
#include "dirpart/harness.hpp"
#include "dirpart/kernels.hpp"
#include "dirpart/partitioner.hpp"
#include "dirpart/transport.hpp"

namespace {

using namespace dirpart;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string config;
  bool strict = false;
};

// Output sink: "-" is stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path == "-" || path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path);
  return is;
}

// Exit status for --strict: 3 on any numeric cell failure, 1 on other cell errors.
template <class Rows>
int strict_exit(const Rows& rows) {
  bool numeric = false, other = false;
  for (const auto& r : rows) {
    if (r.error.empty()) continue;
    (r.error.rfind("numeric:", 0) == 0 ? numeric : other) = true;
  }
  if (numeric) return kExitNumeric;
  return other ? kExitFailure : kExitOk;
}

Domain domain_arg(const std::string& text) {
  if (!text.empty() && text.front() == '{') return parse_domain(text);
  if (text == "interval") return Domain::interval(0.0, 1.0);
  if (text == "square") return Domain::square(0.0, 1.0);
  if (text == "disk") return Domain::disk({0.0, 0.0}, 1.0);
  if (text == "flower") return Domain::polar_star(1.0, 0.3, 3);
  if (text == "flower-box") return Domain::square(-1.5, 1.5);
  throw ConfigError("unknown domain '" + text + "' (interval|square|disk|flower|flower-box or a JSON object)");
}

void print_vector(std::ostream& os, const char* key, const std::vector<double>& v) {
  os << key;
  for (double x : v) os << " " << x;
  os << "\n";
}

void write_partition(std::ostream& os, const GeometricGraph& g, const SolverConfig& sc, const SolveResult& r) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "n " << g.size() << "\n";
  os << "k " << sc.k << "\n";
  os << "mode " << mode_name(sc.mode) << "\n";
  os << "objective " << r.best.objective << "\n";
  os << "converged " << (r.best.converged ? "true" : "false") << "\n";
  os << "iterations " << r.best.iterations << "\n";
  os << "best_restart " << r.best_restart << "\n";
  print_vector(os, "restart_objectives", r.restart_objectives);
  print_vector(os, "eigenvalues", r.best.eigenvalues());
  os << "labels";
  for (int l : r.best.labels) os << " " << (l + 1);
  os << "\n";
  os << "ground_state " << g.size() << " " << sc.k << "\n";
  const auto& f = r.ground_state.field;
  for (std::size_t i = 0; i < f.n; ++i) {
    for (std::size_t l = 0; l < f.k; ++l) os << (l ? " " : "") << f.at(i, l);
    os << "\n";
  }
}

// Options shared by subcommands that build a graph.
struct GraphOptions {
  std::string kernel = "exp";
  double eps = 0.0;
  double eps_c = 1.0;
  double eps_alpha = 0.3;
};

void add_graph_options(CLI::App* cmd, GraphOptions& o) {
  cmd->add_option("--kernel", o.kernel, "Kernel profile exp|gauss|ball")->capture_default_str();
  cmd->add_option("--eps", o.eps, "Fixed length scale; 0 uses eps = c n^-alpha")->capture_default_str();
  cmd->add_option("--eps-c", o.eps_c, "Length-scale constant c")->capture_default_str();
  cmd->add_option("--eps-alpha", o.eps_alpha, "Length-scale exponent alpha")->capture_default_str();
}

GeometricGraph graph_from_points(const SampleSet& samples, const GraphOptions& o) {
  const int d = samples.points.dim();
  const EpsilonRule rule{o.eps_c, o.eps_alpha, d};
  double eps = o.eps;
  if (eps <= 0.0) {
    const auto adm = is_admissible(rule);
    if (!adm.admissible) std::cerr << "warning: " << adm.message << "\n";
    eps = rule.at(samples.size());
  }
  return build_graph(samples, KernelProfile{parse_kernel(o.kernel)}, eps);
}

int run_main(int argc, char** argv) {
  CLI::App app{"Dirichlet and Zaremba partitions of geometric graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output file or directory ('-' for stdout)")->capture_default_str();
  app.add_option("--config", g.config, "JSON experiment config");
  app.add_flag("--strict", g.strict, "Exit 3 if any sweep or energy cell hits a numeric failure (1 for other cell errors)");

  // sample
  auto* sample = app.add_subcommand("sample", "Draw i.i.d. uniform points from a sampling domain");
  std::string domain = "square", outer;
  std::size_t n = 1000;
  std::string mode = "dirichlet";
  double margin = 0.3;
  sample->add_option("--domain", domain, "Domain U: interval|square|disk|flower or JSON")->capture_default_str();
  sample->add_option("--outer", outer, "Sampling domain Omega (default: U inflated by --margin)");
  sample->add_option("--margin", margin, "Omega margin as a fraction of diam(U)")->capture_default_str();
  sample->add_option("--mode", mode, "dirichlet|zaremba (zaremba samples U itself)")->capture_default_str();
  sample->add_option("-n,--n", n, "Number of points")->capture_default_str();

  // build-graph
  auto* bg = app.add_subcommand("build-graph", "Build an epsilon-neighbourhood graph from a point file");
  std::string points_file;
  GraphOptions go;
  bg->add_option("--points", points_file, "Point-cloud file")->required();
  add_graph_options(bg, go);

  // partition
  auto* part = app.add_subcommand("partition", "Partition a geometric graph by eigenvector rearrangement");
  std::string graph_file;
  std::size_t k = 2, restarts = 20, max_iterations = 300;
  std::string laplacian = "unnormalized";
  double eigen_tol = 1e-8;
  part->add_option("--points", points_file, "Point-cloud file")->required();
  part->add_option("--graph", graph_file, "Graph file (default: build from the points)");
  add_graph_options(part, go);
  part->add_option("-k,--k", k, "Number of parts")->capture_default_str();
  part->add_option("--mode", mode, "dirichlet|zaremba")->capture_default_str();
  part->add_option("--laplacian", laplacian, "unnormalized|normalized")->capture_default_str();
  part->add_option("--restarts", restarts, "Independent restarts")->capture_default_str();
  part->add_option("--max-iterations", max_iterations, "Rearrangement steps per restart")->capture_default_str();
  part->add_option("--eigen-tol", eigen_tol, "Eigensolver residual tolerance")->capture_default_str();

  // grid-partition
  auto* gp = app.add_subcommand("grid-partition", "Partition a five-point finite-difference grid");
  std::size_t grid_n = 200;
  std::string grid_domain = "square";
  std::string raster_file;
  gp->add_option("-n,--n", grid_n, "Grid cells per side")->capture_default_str();
  gp->add_option("-k,--k", k, "Number of parts")->capture_default_str();
  gp->add_option("--mode", mode, "dirichlet|zaremba")->capture_default_str();
  gp->add_option("--domain", grid_domain, "square (unit square) or a planar domain masked on its bounding box")
      ->capture_default_str();
  gp->add_option("--restarts", restarts, "Independent restarts")->capture_default_str();
  gp->add_option("--max-iterations", max_iterations, "Rearrangement steps per restart")->capture_default_str();
  gp->add_option("--raster", raster_file, "Write the label raster here instead of after the document");

  // tl2
  auto* tl2 = app.add_subcommand("tl2", "TL2 distance between two pair files");
  std::string a_file, b_file, method = "exact";
  tl2->add_option("--a", a_file, "First pair file")->required();
  tl2->add_option("--b", b_file, "Second pair file")->required();
  tl2->add_option("--method", method, "exact|entropic")->capture_default_str();

  // hausdorff
  auto* hd = app.add_subcommand("hausdorff", "Hausdorff distance between point sets or to a region");
  std::string region;
  double delta = 0.0;
  hd->add_option("--a", a_file, "Point-cloud file")->required();
  hd->add_option("--b", b_file, "Second point-cloud file");
  hd->add_option("--region", region, "Region (interval|square|disk|flower or JSON) instead of --b");
  hd->add_option("--delta", delta, "Region discretisation; 0 uses diam / 256")->capture_default_str();

  // sweep
  auto* sw = app.add_subcommand("sweep", "Run a (n, seed) sweep from --config and write CSV and text reports");
  std::size_t workers = 0;
  sw->add_option("--workers", workers, "Worker threads (0: use the config value, default 1)")->capture_default_str();

  // energy-convergence
  auto* ec = app.add_subcommand("energy-convergence", "Discrete vs continuum Dirichlet energy of a test field");
  std::string field = "sin";
  ec->add_option("--field", field, "Test field sin|const|bumps")->capture_default_str();

  // surface-tension
  auto* st = app.add_subcommand("surface-tension", "Surface tension of a kernel profile");
  std::string kernel = "gauss";
  int dim = 2;
  st->add_option("--kernel", kernel, "Kernel profile exp|gauss|ball")->capture_default_str();
  st->add_option("--dim", dim, "Dimension")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  std::optional<ExperimentConfig> config;
  if (!g.config.empty()) config = load_config(g.config);

  if (*sample) {
    SamplingSpace space = [&] {
      if (config && !sample->count("--domain")) return config->space();
      Domain u = domain_arg(domain);
      if (!outer.empty()) return SamplingSpace::make(domain_arg(outer), u);
      if (parse_mode(mode) == PartitionMode::kZaremba) return SamplingSpace::same(u);
      return SamplingSpace::with_margin(u, margin);
    }();
    const SampleSet s = sample_iid(space, n, g.seed);
    Sink sink(g.out);
    write_point_cloud(sink.os(), s);
    return kExitOk;
  }

  if (*bg) {
    auto is = open_input(points_file);
    const SampleSet s = read_point_cloud(is);
    if (config) {
      if (!bg->count("--kernel")) go.kernel = kernel_name(config->kernel);
      if (!bg->count("--eps-c")) go.eps_c = config->eps_c;
      if (!bg->count("--eps-alpha")) go.eps_alpha = config->eps_alpha;
    }
    const GeometricGraph graph = graph_from_points(s, go);
    Sink sink(g.out);
    write_graph(sink.os(), graph);
    return kExitOk;
  }

  if (*part) {
    auto is = open_input(points_file);
    const SampleSet s = read_point_cloud(is);
    SolverConfig sc;
    if (config) {
      sc = config->solver(g.seed);
      if (!part->count("--kernel")) go.kernel = kernel_name(config->kernel);
      if (!part->count("--eps-c")) go.eps_c = config->eps_c;
      if (!part->count("--eps-alpha")) go.eps_alpha = config->eps_alpha;
    }
    if (!config || part->count("--k")) sc.k = k;
    if (!config || part->count("--mode")) sc.mode = parse_mode(mode);
    if (!config || part->count("--laplacian")) {
      if (laplacian != "unnormalized" && laplacian != "normalized") throw ConfigError("unknown laplacian " + laplacian);
      sc.laplacian = laplacian == "normalized" ? LaplacianKind::kNormalized : LaplacianKind::kUnnormalized;
    }
    if (!config || part->count("--restarts")) sc.restarts = restarts;
    if (!config || part->count("--max-iterations")) sc.max_iterations = max_iterations;
    sc.seed = g.seed;
    sc.eigen_tol = eigen_tol;
    GeometricGraph graph;
    if (graph_file.empty()) {
      graph = graph_from_points(s, go);
    } else {
      auto gs = open_input(graph_file);
      graph = read_graph(gs).with_points(s.points);
    }
    const SolveResult r = solve(graph, sc);
    Sink sink(g.out);
    write_partition(sink.os(), graph, sc, r);
    return kExitOk;
  }

  if (*gp) {
    const GridBoundary b = parse_mode(mode) == PartitionMode::kDirichlet ? GridBoundary::kDirichlet
                                                                           : GridBoundary::kZaremba;
    GridProblem problem = GridProblem::unit_square(grid_n, b);
    if (grid_domain != "square") {
      const Domain d = domain_arg(grid_domain);
      problem = GridProblem::masked(d, d.bounding_box(), grid_n, b);
    }
    const GridGraph grid = grid_graph(problem);
    SolverConfig sc;
    sc.k = k;
    sc.mode = parse_mode(mode);
    sc.restarts = restarts;
    sc.max_iterations = max_iterations;
    sc.seed = g.seed;
    const SolveResult r = solve(grid.graph, sc);
    Sink sink(g.out);
    write_partition(sink.os(), grid.graph, sc, r);
    const auto raster = label_raster(grid, r.best.labels);
    std::unique_ptr<std::ofstream> rf;
    if (!raster_file.empty()) {
      rf = std::make_unique<std::ofstream>(raster_file);
      if (!*rf) throw std::runtime_error("cannot open " + raster_file + " for writing");
    }
    std::ostream& ro = rf ? *rf : sink.os();
    ro << "raster " << raster.size() << " " << (raster.empty() ? 0 : raster[0].size()) << "\n";
    for (const auto& row : raster) {
      for (std::size_t i = 0; i < row.size(); ++i) ro << (i ? " " : "") << row[i];
      ro << "\n";
    }
    return kExitOk;
  }

  if (*tl2) {
    auto ia = open_input(a_file);
    auto ib = open_input(b_file);
    const EmpiricalPair a = read_pair(ia);
    const EmpiricalPair b = read_pair(ib);
    if (method != "exact" && method != "entropic") throw ConfigError("unknown method " + method);
    const TransportResult r =
        tl2_distance(a, b, method == "exact" ? TransportMethod::kExact : TransportMethod::kEntropic);
    Sink sink(g.out);
    auto& os = sink.os();
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "tl2 " << r.distance << "\n";
    os << "method " << (r.method == TransportMethod::kExact ? "exact" : "entropic") << "\n";
    os << "approximate " << (r.approximate ? "true" : "false") << "\n";
    if (r.approximate) os << "regularization " << r.final_regularization << "\n";
    os << "plan_entries " << r.plan.entries.size() << "\n";
    return kExitOk;
  }

  if (*hd) {
    auto ia = open_input(a_file);
    const SampleSet a = read_point_cloud(ia);
    Sink sink(g.out);
    auto& os = sink.os();
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    if (!region.empty()) {
      const Domain d = domain_arg(region);
      const double dl = delta > 0.0 ? delta : d.diameter() / 256.0;
      const RegionDistance r = hausdorff_to_region(a.points, d, dl);
      os << "hausdorff " << r.distance << "\naccuracy " << r.accuracy << "\n";
    } else {
      if (b_file.empty()) throw ConfigError("hausdorff needs --b or --region");
      auto ib = open_input(b_file);
      const SampleSet b = read_point_cloud(ib);
      os << "hausdorff " << hausdorff_finite(a.points, b.points) << "\naccuracy 0\n";
    }
    return kExitOk;
  }

  if (*sw) {
    if (!config) throw ConfigError("sweep needs --config");
    if (workers > 0) config->workers = workers;
    std::string dir = config->output_dir;
    if (app.count("--out")) dir = g.out;
    const RunReport report = run_sweep(*config);
    emit_report_files(report, dir);
    if (!report.admissible) std::cerr << "warning: non-admissible length scale: " << report.admissibility << "\n";
    for (const auto& r : report.records) {
      if (!r.error.empty()) std::cerr << "cell n=" << r.n << " seed=" << r.seed << ": " << r.error << "\n";
    }
    return g.strict ? strict_exit(report.records) : kExitOk;
  }

  if (*ec) {
    if (!config) throw ConfigError("energy-convergence needs --config");
    const auto rows = run_energy_convergence(*config, test_field(field));
    Sink sink(g.out);
    write_energy_table(sink.os(), rows);
    for (const auto& [nn, med] : median_ratio(rows)) std::cerr << "n=" << nn << " median ratio " << med << "\n";
    return g.strict ? strict_exit(rows) : kExitOk;
  }

  if (*st) {
    const KernelProfile profile{parse_kernel(kernel)};
    Sink sink(g.out);
    auto& os = sink.os();
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "kernel " << kernel_name(profile.kind) << "\ndim " << dim << "\n";
    os << "closed_form " << surface_tension(profile, dim) << "\n";
    os << "quadrature " << surface_tension_quadrature(profile, dim) << "\n";
    return kExitOk;
  }
  return kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const dirpart::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dirpart::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dirpart::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
