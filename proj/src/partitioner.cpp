#include "dirpart/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "dirpart/errors.hpp"
#include "dirpart/random.hpp"

namespace dirpart {

namespace {

bool assignable(const GeometricGraph& g, const SolverConfig& config, std::size_t i) {
  return config.mode == PartitionMode::kZaremba || g.admissible(i);
}

EigenResult solve_part(const GeometricGraph& g, const SolverConfig& config,
                       std::vector<std::uint32_t> part, std::size_t index,
                       std::span<const double> guess) {
  RestrictedForm form{&g, std::move(part), config.laplacian, config.mode == PartitionMode::kDirichlet};
  EigenOptions opt;
  opt.tol = config.eigen_tol;
  opt.inner = config.inner;
  opt.initial_guess = guess;
  try {
    return smallest_eigenpair(form, opt);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("part " + std::to_string(index) + ": " + e.what(), e.achieved(),
                           e.best_value(), e.best_vector());
  }
}

// Vertex deepest inside its part: largest Euclidean path length (hop count if
// the graph carries no coordinates) to a vertex with a different label.
std::size_t deepest_vertex(const GeometricGraph& g, const std::vector<int>& labels,
                           const std::vector<std::size_t>& part_sizes) {
  const std::size_t n = g.size();
  const bool has_points = g.points().size() == n;
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == kUnassigned) continue;
    for (const auto& nb : g.neighbors(i)) {
      if (labels[nb.index] != labels[i]) {
        dist[i] = 0.0;
        queue.emplace(0.0, static_cast<std::uint32_t>(i));
        break;
      }
    }
  }
  while (!queue.empty()) {
    const auto [d, i] = queue.top();
    queue.pop();
    if (d > dist[i]) continue;
    for (const auto& nb : g.neighbors(i)) {
      const std::uint32_t j = nb.index;
      if (labels[j] == kUnassigned || labels[j] != labels[i]) continue;
      const double len = has_points ? distance(g.points()[i], g.points()[j]) : 1.0;
      if (d + len < dist[j]) {
        dist[j] = d + len;
        queue.emplace(dist[j], j);
      }
    }
  }
  std::size_t best = n;
  double best_d = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == kUnassigned || part_sizes[labels[i]] < 2) continue;
    // Unreached vertices sit in a part with no foreign neighbour at all.
    const double d = std::isinf(dist[i]) ? std::numeric_limits<double>::max() : dist[i];
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

PartitionMode parse_mode(const std::string& name) {
  if (name == "dirichlet") return PartitionMode::kDirichlet;
  if (name == "zaremba") return PartitionMode::kZaremba;
  throw InputError("unknown mode '" + name + "' (expected dirichlet|zaremba)");
}

std::string mode_name(PartitionMode mode) {
  return mode == PartitionMode::kDirichlet ? "dirichlet" : "zaremba";
}

std::vector<std::uint32_t> PartitionState::part(std::size_t l) const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == static_cast<int>(l)) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

std::vector<double> PartitionState::eigenvalues() const {
  std::vector<double> out;
  out.reserve(eigenpairs.size());
  for (const auto& e : eigenpairs) out.push_back(e.value);
  return out;
}

PartitionState make_state(const GeometricGraph& graph, const SolverConfig& config,
                          std::vector<int> labels, const PartitionState* previous) {
  if (labels.size() != graph.size()) throw InputError("make_state: label count mismatch");
  PartitionState state;
  state.labels = std::move(labels);
  std::vector<std::vector<std::uint32_t>> parts(config.k);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const int l = state.labels[i];
    if (l == kUnassigned) continue;
    if (l < 0 || l >= static_cast<int>(config.k)) throw InputError("make_state: label out of range");
    parts[l].push_back(static_cast<std::uint32_t>(i));
  }
  state.eigenpairs.resize(config.k);
  state.objective = 0.0;
  for (std::size_t l = 0; l < config.k; ++l) {
    bool unchanged = false;
    std::span<const double> guess;
    if (previous != nullptr && previous->eigenpairs.size() == config.k) {
      guess = previous->eigenpairs[l].vector;
      unchanged = true;
      for (std::size_t i = 0; i < graph.size() && unchanged; ++i) {
        unchanged = (previous->labels[i] == static_cast<int>(l)) == (state.labels[i] == static_cast<int>(l));
      }
    }
    if (unchanged) {
      state.eigenpairs[l] = previous->eigenpairs[l];
    } else {
      state.eigenpairs[l] = solve_part(graph, config, std::move(parts[l]), l, guess);
    }
    state.objective += state.eigenpairs[l].value;
  }
  return state;
}

PartitionState init_partition(const GeometricGraph& graph, const SolverConfig& config,
                              std::size_t restart) {
  if (config.k < 1) throw InputError("init_partition: k must be >= 1");
  const std::size_t n = graph.size();
  if (graph.points().size() != n) throw InputError("init_partition: graph has no vertex coordinates");
  std::vector<std::uint32_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (assignable(graph, config, i)) free.push_back(static_cast<std::uint32_t>(i));
  }
  if (free.size() < config.k) {
    throw InputError("init_partition: " + std::to_string(free.size()) +
                     " assignable vertices is fewer than k = " + std::to_string(config.k));
  }

  Rng rng(hash_combine(config.seed, restart));
  std::vector<double> min_d2(free.size(), std::numeric_limits<double>::infinity());
  std::vector<int> nearest(free.size(), 0);
  std::vector<std::uint8_t> is_seed(free.size(), 0);
  std::size_t seed_pos = static_cast<std::size_t>(rng.below(free.size()));
  for (std::size_t l = 0; l < config.k; ++l) {
    is_seed[seed_pos] = 1;
    const auto s = graph.points()[free[seed_pos]];
    for (std::size_t a = 0; a < free.size(); ++a) {
      const double d2 = squared_distance(graph.points()[free[a]], s);
      if (d2 < min_d2[a]) {
        min_d2[a] = d2;
        nearest[a] = static_cast<int>(l);
      }
    }
    min_d2[seed_pos] = 0.0;
    nearest[seed_pos] = static_cast<int>(l);
    double far = -1.0;
    for (std::size_t a = 0; a < free.size(); ++a) {
      if (!is_seed[a] && min_d2[a] > far) {
        far = min_d2[a];
        seed_pos = a;
      }
    }
  }
  std::vector<int> labels(n, kUnassigned);
  for (std::size_t a = 0; a < free.size(); ++a) labels[free[a]] = nearest[a];
  return make_state(graph, config, std::move(labels));
}

PartitionState rearrange_step(const GeometricGraph& graph, const SolverConfig& config,
                              const PartitionState& state) {
  const std::size_t n = graph.size();
  const std::size_t k = config.k;
  std::vector<int> labels = state.labels;
  std::vector<double> smooth(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (!assignable(graph, config, i)) continue;
    // u~_l = (D + I)^{-1} (W u_l + u_l)
    std::fill(smooth.begin(), smooth.end(), 0.0);
    for (const auto& nb : graph.neighbors(i)) {
      if (nb.index == i) continue;
      const int l = state.labels[nb.index];
      if (l != kUnassigned) smooth[l] += nb.weight * state.eigenpairs[l].vector[nb.index];
    }
    const int own = state.labels[i];
    if (own != kUnassigned) smooth[own] += state.eigenpairs[own].vector[i];
    const double denom = graph.degree(i) + 1.0;
    int arg = 0;
    double best = -1.0;
    for (std::size_t l = 0; l < k; ++l) {
      const double v = smooth[l] / denom;
      if (v > best) {
        best = v;
        arg = static_cast<int>(l);
      }
    }
    if (best > 0.0) labels[i] = arg;
  }

  if (labels == state.labels) {
    PartitionState same = state;
    same.converged = true;
    return same;
  }

  std::vector<std::size_t> sizes(k, 0);
  for (int l : labels) {
    if (l != kUnassigned) ++sizes[l];
  }
  for (std::size_t l = 0; l < k; ++l) {
    if (sizes[l] > 0) continue;
    const std::size_t v = deepest_vertex(graph, labels, sizes);
    if (v == n) throw InvariantError("rearrange_step: no vertex available to reseed an empty part");
    --sizes[labels[v]];
    labels[v] = static_cast<int>(l);
    sizes[l] = 1;
  }

  PartitionState next = make_state(graph, config, std::move(labels), &state);
  next.iterations = state.iterations + 1;
  if (next.objective > state.objective) {
    PartitionState keep = state;
    keep.converged = true;
    return keep;
  }
  next.converged = false;
  return next;
}

SolveResult solve(const GeometricGraph& graph, const SolverConfig& config) {
  if (config.restarts < 1) throw InputError("solve: restarts must be >= 1");
  SolveResult result;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < config.restarts; ++r) {
    PartitionState state = init_partition(graph, config, r);
    while (!state.converged && state.iterations < config.max_iterations) {
      const double before = state.objective;
      state = rearrange_step(graph, config, state);
      if (state.objective > before) throw InvariantError("solve: objective increased on an accepted step");
    }
    result.restart_objectives.push_back(state.objective);
    result.restart_iterations.push_back(state.iterations);
    if (state.objective < best || r == 0) {
      best = state.objective;
      result.best = std::move(state);
      result.best_restart = r;
    }
  }
  result.ground_state = assemble_ground_state(graph, result.best);
  return result;
}

GroundState assemble_ground_state(const GeometricGraph& graph, const PartitionState& state) {
  const std::size_t n = graph.size();
  const std::size_t k = state.eigenpairs.size();
  GroundState gs{VertexField(n, k, graph.id())};
  for (std::size_t l = 0; l < k; ++l) {
    const auto& v = state.eigenpairs[l].vector;
    if (v.size() != n) throw InvariantError("assemble_ground_state: eigenvector size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == 0.0) continue;
      if (state.labels[i] != static_cast<int>(l)) {
        throw InvariantError("assemble_ground_state: part " + std::to_string(l) +
                             " eigenvector is supported outside its part");
      }
      if (v[i] < 0.0) throw InvariantError("assemble_ground_state: negative ground-state entry");
      gs.field.at(i, l) = v[i];
    }
    const double nrm = nu_norm(graph, v);
    if (std::abs(nrm - 1.0) > 1e-10) {
      throw InvariantError("assemble_ground_state: column " + std::to_string(l) +
                           " has nu-norm " + std::to_string(nrm));
    }
  }
  if (!gs.field.in_sigma_k()) throw InvariantError("assemble_ground_state: overlapping supports");
  return gs;
}

}  // namespace dirpart
