#include "dirpart/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "dirpart/errors.hpp"
#include "dirpart/geograph.hpp"
#include "json.hpp"

namespace dirpart {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

std::array<double, 2> get_point2(const json& j, const char* key, std::array<double, 2> fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = get_as<std::vector<double>>(j, key);
  if (v.size() != 2) throw ConfigError(std::string("config: '") + key + "' must have two entries");
  return {v[0], v[1]};
}

Domain domain_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError("config: a domain needs a \"type\"");
  const auto type = get_as<std::string>(j, "type");
  try {
    if (type == "interval") {
      return Domain::interval(j.value("lo", 0.0), j.value("hi", 1.0));
    }
    if (type == "box") {
      return Domain::box(get_as<std::vector<double>>(j, "lo"), get_as<std::vector<double>>(j, "hi"));
    }
    if (type == "square") {
      return Domain::square(j.value("lo", 0.0), j.value("hi", 1.0), j.value("dim", 2));
    }
    if (type == "disk") {
      return Domain::disk(get_point2(j, "center", {0.0, 0.0}), j.value("radius", 1.0));
    }
    if (type == "polar_star" || type == "flower") {
      return Domain::polar_star(j.value("c0", 1.0), j.value("c1", 0.3), j.value("m", 3),
                                get_point2(j, "center", {0.0, 0.0}));
    }
  } catch (const InputError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad domain: ") + e.what());
  }
  throw ConfigError("config: unknown domain type '" + type + "'");
}

json domain_to_json(const Domain& d) {
  return std::visit(
      [&](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Interval>) {
          return {{"type", "interval"}, {"lo", s.lo}, {"hi", s.hi}};
        } else if constexpr (std::is_same_v<S, Box>) {
          return {{"type", "box"}, {"lo", s.lo}, {"hi", s.hi}};
        } else if constexpr (std::is_same_v<S, Disk>) {
          return {{"type", "disk"}, {"center", s.center}, {"radius", s.radius}};
        } else {
          return {{"type", "polar_star"}, {"c0", s.c0}, {"c1", s.c1}, {"m", s.m}, {"center", s.center}};
        }
      },
      d.shape());
}

LaplacianKind parse_laplacian(const std::string& name) {
  if (name == "unnormalized") return LaplacianKind::kUnnormalized;
  if (name == "normalized") return LaplacianKind::kNormalized;
  throw ConfigError("config: unknown laplacian '" + name + "' (expected unnormalized|normalized)");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Cell-centred points of the bounding box of Omega that fall inside Omega,
// about `target` of them.
PointCloud omega_points(const Domain& outer, std::size_t target) {
  const Box box = outer.bounding_box();
  const int d = outer.dim();
  double vol = 1.0;
  for (int c = 0; c < d; ++c) vol *= box.hi[c] - box.lo[c];
  const double fill = std::min(1.0, outer.area() / vol);
  const double per = std::pow(static_cast<double>(target) / fill, 1.0 / d);
  std::vector<std::size_t> counts(d);
  std::size_t total = 1;
  for (int c = 0; c < d; ++c) {
    counts[c] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(per)));
    total *= counts[c];
  }
  PointCloud out(d);
  std::vector<double> x(d);
  for (std::size_t t = 0; t < total; ++t) {
    std::size_t r = t;
    for (int c = 0; c < d; ++c) {
      const std::size_t i = r % counts[c];
      r /= counts[c];
      x[c] = box.lo[c] + (static_cast<double>(i) + 0.5) * (box.hi[c] - box.lo[c]) / static_cast<double>(counts[c]);
    }
    if (outer.contains(x)) out.push_back(x);
  }
  if (out.empty()) throw ConfigError("reference: sampling domain discretizes to an empty set");
  return out;
}

EmpiricalPair continuum_pair(PointCloud support, std::size_t k,
                             const std::function<void(std::span<const double>, std::span<double>)>& eval) {
  const std::size_t m = support.size();
  std::vector<double> values(m * k, 0.0);
  for (std::size_t i = 0; i < m; ++i) eval(support[i], std::span<double>(values.data() + i * k, k));
  return EmpiricalPair::uniform(std::move(support), std::move(values), k);
}

// --- grid reference cache -----------------------------------------------

struct GridCache {
  GridProblem problem;
  std::size_t k = 0;
  double objective = 0.0;
  // per raster node: label (0-based, -1 none) and ground-state value
  std::vector<int> label;
  std::vector<double> value;
  std::size_t mx = 0, my = 0;
};

void write_cache(const std::string& path, const std::string& key, const GridCache& c) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("cannot write grid reference cache " + tmp);
    os << std::setprecision(17);
    os << "dirpart-grid-reference 1\n" << key << "\n";
    os << c.problem.nx << " " << c.problem.ny << " " << c.problem.h << " " << c.problem.origin[0] << " "
       << c.problem.origin[1] << " " << (c.problem.boundary == GridBoundary::kDirichlet ? "dirichlet" : "zaremba")
       << "\n";
    os << c.k << " " << c.objective << "\n" << c.mx << " " << c.my << "\n";
    for (std::size_t v = 0; v < c.label.size(); ++v) {
      if (c.label[v] < 0) continue;
      os << v << " " << c.label[v] << " " << c.value[v] << "\n";
    }
    if (!os) throw std::runtime_error("cannot write grid reference cache " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::optional<GridCache> read_cache(const std::string& path, const std::string& key, const Domain& region) {
  std::ifstream is(path);
  if (!is) return std::nullopt;
  std::string magic, version, stored, boundary;
  GridCache c;
  is >> magic >> version >> stored;
  if (magic != "dirpart-grid-reference" || version != "1" || stored != key) return std::nullopt;
  is >> c.problem.nx >> c.problem.ny >> c.problem.h >> c.problem.origin[0] >> c.problem.origin[1] >> boundary;
  c.problem.boundary = boundary == "dirichlet" ? GridBoundary::kDirichlet : GridBoundary::kZaremba;
  c.problem.region = region;
  is >> c.k >> c.objective >> c.mx >> c.my;
  if (!is) return std::nullopt;
  c.label.assign(c.mx * c.my, -1);
  c.value.assign(c.mx * c.my, 0.0);
  std::size_t v;
  int l;
  double x;
  while (is >> v >> l >> x) {
    if (v >= c.label.size()) return std::nullopt;
    c.label[v] = l;
    c.value[v] = x;
  }
  return c;
}

GridCache solve_grid(const ExperimentConfig& config) {
  const GridBoundary b = config.mode == PartitionMode::kDirichlet ? GridBoundary::kDirichlet : GridBoundary::kZaremba;
  GridProblem problem = GridProblem::masked(config.inner, config.inner.bounding_box(), config.grid_n, b);
  const GridGraph grid = grid_graph(problem);
  SolverConfig sc;
  sc.k = config.k;
  sc.mode = config.mode;
  sc.laplacian = config.laplacian;
  sc.restarts = config.grid_restarts;
  sc.max_iterations = config.max_iterations;
  sc.seed = 0;
  const SolveResult r = solve(grid.graph, sc);
  GridCache c;
  c.problem = problem;
  c.k = config.k;
  c.objective = r.best.objective;
  c.mx = grid.nodes_x;
  c.my = grid.nodes_y;
  c.label.assign(c.mx * c.my, -1);
  c.value.assign(c.mx * c.my, 0.0);
  for (std::size_t v = 0; v < grid.cell.size(); ++v) {
    const int l = r.best.labels[v];
    if (l < 0) continue;
    const std::size_t idx = grid.cell[v][1] * c.mx + grid.cell[v][0];
    c.label[idx] = l;
    c.value[idx] = r.ground_state.field.at(v, static_cast<std::size_t>(l));
  }
  return c;
}

// --- report helpers -------------------------------------------------------

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return kNaN;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw InputError("report: bad number '" + s + "'");
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

ReferenceKind parse_reference(const std::string& name) {
  if (name == "auto") return ReferenceKind::kAuto;
  if (name == "interval") return ReferenceKind::kInterval;
  if (name == "grid") return ReferenceKind::kGrid;
  if (name == "none") return ReferenceKind::kNone;
  throw ConfigError("config: unknown reference '" + name + "' (expected auto|interval|grid|none)");
}

std::string reference_name(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::kAuto: return "auto";
    case ReferenceKind::kInterval: return "interval";
    case ReferenceKind::kGrid: return "grid";
    case ReferenceKind::kNone: return "none";
  }
  return "none";
}

SamplingSpace ExperimentConfig::space() const {
  try {
    if (outer) return SamplingSpace::make(*outer, inner);
    if (mode == PartitionMode::kZaremba) return SamplingSpace::same(inner);
    return SamplingSpace::with_margin(inner, 0.3);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

SolverConfig ExperimentConfig::solver(std::uint64_t seed) const {
  SolverConfig sc;
  sc.k = k;
  sc.mode = mode;
  sc.laplacian = laplacian;
  sc.restarts = restarts;
  sc.max_iterations = max_iterations;
  sc.seed = seed;
  return sc;
}

Domain parse_domain(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("domain: invalid JSON: ") + e.what());
  }
  return domain_from_json(j);
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::vector<std::string> known = {
      "name",         "domain",        "outer",     "kernel",          "epsilon",          "n",
      "k",            "mode",          "laplacian", "restarts",        "max_iterations",   "seeds",
      "reference",    "grid_n",        "grid_restarts", "reference_points", "cache_dir",     "output_dir",
      "entropic_above", "hausdorff_delta", "tl2",   "record_timing",   "workers"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  if (j.contains("name")) c.name = get_as<std::string>(j, "name");
  if (j.contains("domain")) c.inner = domain_from_json(j["domain"]);
  if (j.contains("outer") && !j["outer"].is_null()) c.outer = domain_from_json(j["outer"]);
  try {
    if (j.contains("kernel")) c.kernel = parse_kernel(get_as<std::string>(j, "kernel"));
    if (j.contains("mode")) c.mode = parse_mode(get_as<std::string>(j, "mode"));
  } catch (const InputError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (j.contains("epsilon")) {
    const auto& e = j["epsilon"];
    if (!e.is_object()) throw ConfigError("config: 'epsilon' must be an object {c, alpha}");
    if (e.contains("c")) c.eps_c = get_as<double>(e, "c");
    if (e.contains("alpha")) c.eps_alpha = get_as<double>(e, "alpha");
  }
  if (j.contains("n")) c.n_list = get_as<std::vector<std::size_t>>(j, "n");
  if (j.contains("k")) c.k = get_as<std::size_t>(j, "k");
  if (j.contains("laplacian")) c.laplacian = parse_laplacian(get_as<std::string>(j, "laplacian"));
  if (j.contains("restarts")) c.restarts = get_as<std::size_t>(j, "restarts");
  if (j.contains("max_iterations")) c.max_iterations = get_as<std::size_t>(j, "max_iterations");
  if (j.contains("seeds")) c.seeds = get_as<std::vector<std::uint64_t>>(j, "seeds");
  if (j.contains("reference")) c.reference = parse_reference(get_as<std::string>(j, "reference"));
  if (j.contains("grid_n")) c.grid_n = get_as<std::size_t>(j, "grid_n");
  if (j.contains("grid_restarts")) c.grid_restarts = get_as<std::size_t>(j, "grid_restarts");
  if (j.contains("reference_points")) c.reference_points = get_as<std::size_t>(j, "reference_points");
  if (j.contains("cache_dir")) c.cache_dir = get_as<std::string>(j, "cache_dir");
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir");
  if (j.contains("entropic_above")) c.entropic_above = get_as<std::size_t>(j, "entropic_above");
  if (j.contains("hausdorff_delta")) c.hausdorff_delta = get_as<double>(j, "hausdorff_delta");
  if (j.contains("tl2")) c.compute_tl2 = get_as<bool>(j, "tl2");
  if (j.contains("record_timing")) c.record_timing = get_as<bool>(j, "record_timing");
  if (j.contains("workers")) c.workers = get_as<std::size_t>(j, "workers");

  if (c.k < 1) throw ConfigError("config: k must be >= 1");
  if (c.restarts < 1 || c.grid_restarts < 1) throw ConfigError("config: restarts must be >= 1");
  if (!(c.eps_c > 0.0) || !(c.eps_alpha > 0.0)) throw ConfigError("config: epsilon c and alpha must be positive");
  if (c.hausdorff_delta < 0.0) throw ConfigError("config: hausdorff_delta must be >= 0");
  if (c.workers < 1) throw ConfigError("config: workers must be >= 1");
  if (c.grid_n < 2 || c.reference_points < 1) throw ConfigError("config: grid_n and reference_points too small");
  if (c.outer && c.outer->dim() != c.inner.dim()) throw ConfigError("config: outer/domain dimension mismatch");
  for (std::size_t n : c.n_list) {
    if (n < c.k) throw ConfigError("config: every n must be at least k");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["domain"] = domain_to_json(c.inner);
  j["outer"] = c.outer ? domain_to_json(*c.outer) : json(nullptr);
  j["kernel"] = kernel_name(c.kernel);
  j["epsilon"] = {{"c", c.eps_c}, {"alpha", c.eps_alpha}};
  j["n"] = c.n_list;
  j["k"] = c.k;
  j["mode"] = mode_name(c.mode);
  j["laplacian"] = c.laplacian == LaplacianKind::kUnnormalized ? "unnormalized" : "normalized";
  j["restarts"] = c.restarts;
  j["max_iterations"] = c.max_iterations;
  j["seeds"] = c.seeds;
  j["reference"] = reference_name(c.reference);
  j["grid_n"] = c.grid_n;
  j["grid_restarts"] = c.grid_restarts;
  j["reference_points"] = c.reference_points;
  j["cache_dir"] = c.cache_dir;
  j["output_dir"] = c.output_dir;
  j["entropic_above"] = c.entropic_above;
  j["hausdorff_delta"] = c.hausdorff_delta;
  j["tl2"] = c.compute_tl2;
  j["record_timing"] = c.record_timing;
  j["workers"] = c.workers;
  return j.dump(2);
}

std::size_t RunReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const RunRecord& r) { return !r.error.empty(); }));
}

// ---------------------------------------------------------------------------

ContinuumReference interval_reference(const ExperimentConfig& config) {
  const auto* iv = std::get_if<Interval>(&config.inner.shape());
  if (iv == nullptr) throw ConfigError("reference: interval reference needs an interval domain");
  const bool zaremba = config.mode == PartitionMode::kZaremba;
  const std::size_t k = config.k;
  const double a = iv->lo;
  const double len = iv->hi - iv->lo;
  IntervalPartition p;
  if (zaremba && k == 1) {
    p.k = 1;
    p.lengths = {1.0};
    p.degenerate = true;
  } else {
    p = zaremba ? interval_zaremba(k) : interval_dirichlet(k);
  }
  std::vector<double> starts(k + 1, 0.0);
  for (std::size_t l = 0; l < k; ++l) starts[l + 1] = starts[l] + p.lengths[l];

  ContinuumReference ref;
  ref.k = k;
  ref.objective = p.objective / (len * len);
  ref.accuracy = config.hausdorff_delta > 0.0 ? config.hausdorff_delta : config.inner.diameter() / 256.0;
  for (std::size_t l = 0; l < k; ++l) {
    const Domain part = Domain::interval(a + starts[l] * len, a + starts[l + 1] * len);
    ref.parts.push_back(discretize_closure(part, ref.accuracy));
  }

  const SamplingSpace space = config.space();
  const double omega = space.outer.area();
  auto eval = [&](std::span<const double> x, std::span<double> out) {
    const double s = (x[0] - a) / len;
    if (!(s > 0.0 && s < 1.0)) return;
    if (p.degenerate) {
      out[0] = std::sqrt(omega / len);
      return;
    }
    for (std::size_t l = 0; l < k; ++l) {
      if (s < starts[l] || s >= starts[l + 1]) continue;
      const double t = p.lengths[l];
      const double y = (s - starts[l]) / t;  // in [0, 1)
      const double amp = std::sqrt(2.0 * omega / (t * len));
      double shape;
      if (zaremba && l == 0) {
        shape = std::cos(0.5 * std::numbers::pi * y);
      } else if (zaremba && l + 1 == k) {
        shape = std::sin(0.5 * std::numbers::pi * y);
      } else {
        shape = std::sin(std::numbers::pi * y);
      }
      out[l] = amp * shape;
    }
  };
  ref.ground_state = continuum_pair(omega_points(space.outer, config.reference_points), k, eval);
  return ref;
}

std::string grid_reference_key(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "grid-reference|1|" << c.inner.describe() << "|" << mode_name(c.mode) << "|" << c.k << "|" << c.grid_n
     << "|" << c.grid_restarts << "|" << c.max_iterations << "|"
     << (c.laplacian == LaplacianKind::kUnnormalized ? "unnormalized" : "normalized");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

ContinuumReference grid_reference(const ExperimentConfig& config) {
  if (config.inner.dim() != 2) throw ConfigError("reference: grid references are planar");
  const std::string key = grid_reference_key(config);
  const std::string path = (std::filesystem::path(config.cache_dir) / ("grid-" + key + ".txt")).string();
  std::optional<GridCache> cache = read_cache(path, key, config.inner);
  if (!cache) {
    cache = solve_grid(config);
    write_cache(path, key, *cache);
  }
  const GridCache& c = *cache;
  const std::size_t k = c.k;

  ContinuumReference ref;
  ref.k = k;
  ref.objective = c.objective;
  ref.accuracy = c.problem.h;
  ref.parts.assign(k, PointCloud(2));
  for (std::size_t j = 0; j < c.my; ++j) {
    for (std::size_t i = 0; i < c.mx; ++i) {
      const int l = c.label[j * c.mx + i];
      if (l >= 0) ref.parts[l].push_back(c.problem.node(i, j));
    }
  }

  const SamplingSpace space = config.space();
  // Grid eigenvectors carry sum u^2 = 1; rescale to int u^2 rho dx = 1.
  const double scale = std::sqrt(space.outer.area()) / c.problem.h;
  const double off = c.problem.boundary == GridBoundary::kDirichlet ? 0.0 : 0.5;
  auto eval = [&](std::span<const double> x, std::span<double> out) {
    if (!config.inner.contains(x)) return;
    const double fi = (x[0] - c.problem.origin[0]) / c.problem.h - off;
    const double fj = (x[1] - c.problem.origin[1]) / c.problem.h - off;
    const auto i = static_cast<std::int64_t>(std::llround(fi));
    const auto j = static_cast<std::int64_t>(std::llround(fj));
    if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(c.mx) || j >= static_cast<std::int64_t>(c.my)) return;
    const std::size_t idx = static_cast<std::size_t>(j) * c.mx + static_cast<std::size_t>(i);
    if (c.label[idx] >= 0) out[c.label[idx]] = scale * c.value[idx];
  };
  ref.ground_state = continuum_pair(omega_points(space.outer, config.reference_points), k, eval);
  return ref;
}

RunReport run_sweep(const ExperimentConfig& config) {
  const SamplingSpace space = config.space();
  const EpsilonRule rule = config.epsilon_rule();
  const AdmissibilityReport adm = is_admissible(rule);

  RunReport report;
  report.name = config.name;
  report.k = config.k;
  report.admissible = adm.admissible;
  report.admissibility = adm.message;

  ReferenceKind kind = config.reference;
  if (kind == ReferenceKind::kAuto) {
    kind = std::holds_alternative<Interval>(config.inner.shape()) ? ReferenceKind::kInterval
           : config.inner.dim() == 2                               ? ReferenceKind::kGrid
                                                                   : ReferenceKind::kNone;
  }
  report.reference = reference_name(kind);
  if (config.n_list.empty() || config.seeds.empty()) return report;

  std::optional<ContinuumReference> ref;
  if (kind == ReferenceKind::kInterval) ref = interval_reference(config);
  if (kind == ReferenceKind::kGrid) ref = grid_reference(config);
  report.hausdorff_accuracy = ref ? ref->accuracy : 0.0;
  const PointCloud probe = ref && ref->ground_state ? ref->ground_state->support
                                                    : omega_points(space.outer, config.reference_points);

  struct Cell {
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t n : config.n_list) {
    for (std::uint64_t s : config.seeds) cells.push_back({n, s});
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return a.n != b.n ? a.n < b.n : a.seed < b.seed;
  });

  const std::size_t k = config.k;
  std::vector<RunRecord> records(cells.size());
  auto run_cell = [&](std::size_t idx) {
    RunRecord& rec = records[idx];
    rec.n = cells[idx].n;
    rec.seed = cells[idx].seed;
    rec.lambda.assign(k, kNaN);
    rec.hausdorff.assign(k, kNaN);
    rec.tl2 = rec.sup_dev = kNaN;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SampleSet samples = sample_iid(space, rec.n, rec.seed);
      const double eps = rule.at(rec.n);
      const GeometricGraph graph = build_graph(samples, KernelProfile{config.kernel}, eps);
      const SolveResult sol = solve(graph, config.solver(rec.seed));
      rec.objective = sol.best.objective;

      std::vector<PointCloud> parts(k, PointCloud(samples.points.dim()));
      for (std::size_t i = 0; i < rec.n; ++i) {
        const int l = sol.best.labels[i];
        if (l >= 0) parts[l].push_back(samples.points[i]);
      }
      std::vector<std::size_t> perm(k);
      for (std::size_t l = 0; l < k; ++l) perm[l] = l;
      if (ref) {
        const LabelMatch match = match_parts(parts, ref->parts);
        perm = match.permutation;
        for (std::size_t l = 0; l < k; ++l) rec.hausdorff[perm[l]] = match.distances[l];
      }
      for (std::size_t l = 0; l < k; ++l) rec.lambda[perm[l]] = sol.best.eigenpairs[l].value;

      rec.sup_dev = sup_deviation(nn_transport_map(probe, samples.points));

      if (ref && ref->ground_state && config.compute_tl2) {
        std::vector<double> values(rec.n * k, 0.0);
        for (std::size_t i = 0; i < rec.n; ++i) {
          for (std::size_t l = 0; l < k; ++l) values[i * k + perm[l]] = sol.ground_state.field.at(i, l);
        }
        const EmpiricalPair a = EmpiricalPair::uniform(samples.points, std::move(values), k);
        const TransportMethod method =
            rec.n > config.entropic_above ? TransportMethod::kEntropic : TransportMethod::kExact;
        const TransportResult t = tl2_distance(a, *ref->ground_state, method);
        rec.tl2 = t.distance;
        rec.tl2_approximate = t.approximate;
      }
    } catch (const NumericError& e) {
      rec.error = std::string("numeric: ") + e.what();
    } catch (const std::exception& e) {
      rec.error = std::string("error: ") + e.what();
    }
    if (config.record_timing) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };

  const std::size_t workers = std::min(config.workers, cells.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  report.records = std::move(records);
  return report;
}

// ---------------------------------------------------------------------------

ScalarField test_field(const std::string& name) {
  if (name == "sin") {
    return [](std::span<const double> x) { return std::sin(std::numbers::pi * x[0]); };
  }
  if (name == "const") {
    return [](std::span<const double>) { return 1.0; };
  }
  if (name == "bumps") {
    return [](std::span<const double> x) {
      auto bump = [&](double cx) {
        double r2 = (x[0] - cx) * (x[0] - cx);
        for (std::size_t c = 1; c < x.size(); ++c) r2 += (x[c] - 0.5) * (x[c] - 0.5);
        const double s = 1.0 - r2 / (0.15 * 0.15);
        return s > 0.0 ? s * s * s * s : 0.0;
      };
      return bump(0.3) + bump(0.7);
    };
  }
  throw ConfigError("unknown test field '" + name + "' (expected sin|const|bumps)");
}

std::vector<EnergyRow> run_energy_convergence(const ExperimentConfig& config, const ScalarField& u) {
  const SamplingSpace space = config.space();
  const EpsilonRule rule = config.epsilon_rule();
  const KernelProfile profile{config.kernel};
  const double rho = 1.0 / space.outer.area();
  const double limit = surface_tension(profile, config.inner.dim()) * continuum_energy(u, config.inner, rho);

  std::vector<std::size_t> ns = config.n_list;
  std::sort(ns.begin(), ns.end());
  std::vector<std::uint64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());
  std::vector<EnergyRow> rows;
  for (std::size_t n : ns) {
    for (std::uint64_t seed : seeds) {
      EnergyRow row;
      row.n = n;
      row.seed = seed;
      row.continuum = limit;
      try {
        const SampleSet samples = sample_iid(space, n, seed);
        row.eps = rule.at(n);
        const GeometricGraph graph = build_graph(samples, profile, row.eps);
        VertexField field(n, 1, graph.id());
        for (std::size_t i = 0; i < n; ++i) {
          const bool zero = config.mode == PartitionMode::kDirichlet && !samples.admissible[i];
          field.at(i, 0) = zero ? 0.0 : u(samples.points[i]);
        }
        row.discrete = dirichlet_energy(graph, field, row.eps);
        row.ratio = limit > 0.0 ? row.discrete / limit : 0.0;
      } catch (const NumericError& e) {
        row.error = std::string("numeric: ") + e.what();
        row.discrete = row.ratio = kNaN;
      } catch (const std::exception& e) {
        row.error = std::string("error: ") + e.what();
        row.discrete = row.ratio = kNaN;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<std::pair<std::size_t, double>> median_ratio(const std::vector<EnergyRow>& rows) {
  std::vector<std::pair<std::size_t, double>> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    const std::size_t n = rows[i].n;
    std::vector<double> r;
    for (; i < rows.size() && rows[i].n == n; ++i) {
      if (rows[i].error.empty()) r.push_back(rows[i].ratio);
    }
    double med = kNaN;
    if (!r.empty()) {
      std::sort(r.begin(), r.end());
      med = r.size() % 2 ? r[r.size() / 2] : 0.5 * (r[r.size() / 2 - 1] + r[r.size() / 2]);
    }
    out.emplace_back(n, med);
  }
  return out;
}

void write_energy_table(std::ostream& os, const std::vector<EnergyRow>& rows) {
  os << "n,seed,eps,discrete,continuum,ratio\n";
  for (const auto& r : rows) {
    os << r.n << "," << r.seed << "," << fmt(r.eps) << "," << fmt(r.discrete) << "," << fmt(r.continuum) << ","
       << fmt(r.ratio) << "\n";
  }
}

// ---------------------------------------------------------------------------

std::vector<std::string> csv_header(std::size_t k) {
  std::vector<std::string> h{"n", "seed", "objective"};
  for (std::size_t l = 1; l <= k; ++l) h.push_back("lambda_" + std::to_string(l));
  for (std::size_t l = 1; l <= k; ++l) h.push_back("hausdorff_" + std::to_string(l));
  h.insert(h.end(), {"tl2", "sup_dev", "wall_ms", "tl2_approximate"});
  return h;
}

void emit_report(std::ostream& os, const RunReport& report, ReportFormat format) {
  const std::size_t k = report.k;
  if (format == ReportFormat::kCsv) {
    const auto header = csv_header(k);
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << "\n";
    for (const auto& r : report.records) {
      os << r.n << "," << r.seed << "," << fmt(r.objective);
      for (std::size_t l = 0; l < k; ++l) os << "," << fmt(l < r.lambda.size() ? r.lambda[l] : kNaN);
      for (std::size_t l = 0; l < k; ++l) os << "," << fmt(l < r.hausdorff.size() ? r.hausdorff[l] : kNaN);
      os << "," << fmt(r.tl2) << "," << fmt(r.sup_dev) << "," << fmt(r.wall_ms) << ","
         << (r.tl2_approximate ? 1 : 0) << "\n";
    }
    return;
  }
  os << "schema_version " << report.schema_version << "\n";
  os << "name " << report.name << "\n";
  os << "k " << k << "\n";
  os << "admissible " << (report.admissible ? "true" : "false") << "\n";
  os << "admissibility " << report.admissibility << "\n";
  os << "reference " << report.reference << "\n";
  os << "hausdorff_accuracy " << fmt(report.hausdorff_accuracy) << "\n";
  os << "records " << report.records.size() << "\n";
  for (const auto& r : report.records) {
    os << "record n=" << r.n << " seed=" << r.seed << " objective=" << fmt(r.objective) << " lambda=";
    for (std::size_t l = 0; l < r.lambda.size(); ++l) os << (l ? "," : "") << fmt(r.lambda[l]);
    os << " hausdorff=";
    for (std::size_t l = 0; l < r.hausdorff.size(); ++l) os << (l ? "," : "") << fmt(r.hausdorff[l]);
    os << " tl2=" << fmt(r.tl2) << (r.tl2_approximate ? " tl2_method=entropic" : " tl2_method=exact")
       << " sup_dev=" << fmt(r.sup_dev) << " wall_ms=" << fmt(r.wall_ms);
    if (!r.error.empty()) os << " error=\"" << r.error << "\"";
    os << "\n";
  }
}

void emit_report_files(const RunReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [ext, format] : {std::pair{".csv", ReportFormat::kCsv}, std::pair{".txt", ReportFormat::kText}}) {
    const auto path = std::filesystem::path(dir) / (report.name + ext);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    emit_report(os, report, format);
    if (!os) throw std::runtime_error("write failed for " + path.string());
  }
}

RunReport parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("report: empty CSV");
  const auto header = split(line, ',');
  if (header.size() < 7 || (header.size() - 7) % 2 != 0) throw InputError("report: bad CSV header");
  RunReport report;
  report.k = (header.size() - 7) / 2;
  if (header != csv_header(report.k)) throw InputError("report: unexpected CSV columns");
  const std::size_t k = report.k;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw InputError("report: row has " + std::to_string(f.size()) + " fields");
    RunRecord r;
    r.n = std::stoull(f[0]);
    r.seed = std::stoull(f[1]);
    r.objective = parse_double(f[2]);
    for (std::size_t l = 0; l < k; ++l) r.lambda.push_back(parse_double(f[3 + l]));
    for (std::size_t l = 0; l < k; ++l) r.hausdorff.push_back(parse_double(f[3 + k + l]));
    r.tl2 = parse_double(f[3 + 2 * k]);
    r.sup_dev = parse_double(f[4 + 2 * k]);
    r.wall_ms = parse_double(f[5 + 2 * k]);
    r.tl2_approximate = f[6 + 2 * k] == "1";
    report.records.push_back(std::move(r));
  }
  return report;
}

}  // namespace dirpart
