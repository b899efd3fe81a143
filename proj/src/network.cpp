#include "zogt/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "zogt/rng.hpp"

namespace zogt {

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(m, 0);
  for (const auto& [i, j] : edges) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

bool Graph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

bool is_connected(int m, const std::vector<std::pair<int, int>>& edges) {
  if (m <= 0) return false;
  std::vector<std::vector<int>> adj(m);
  for (const auto& [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<char> seen(m, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == m;
}

namespace {

void normalize_edges(std::vector<std::pair<int, int>>& edges) {
  for (auto& e : edges) {
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

// Uniform random spanning tree of K_m (Wilson's loop-erased random walk).
std::vector<std::pair<int, int>> random_spanning_tree(int m, RngStream& rng) {
  std::vector<int> next(m, -1);
  std::vector<char> in_tree(m, 0);
  in_tree[0] = 1;
  for (int start = 1; start < m; ++start) {
    if (in_tree[start]) continue;
    int u = start;
    while (!in_tree[u]) {
      int v = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
      if (v == u) continue;
      next[u] = v;
      u = v;
    }
    u = start;
    while (!in_tree[u]) {
      in_tree[u] = 1;
      u = next[u];
    }
  }
  // next[] traces every non-root node one hop toward the root: m-1 edges.
  std::vector<std::pair<int, int>> tree;
  for (int v = 1; v < m; ++v) tree.emplace_back(v, next[v]);
  return tree;
}

}  // namespace

Graph build_topology(Topology kind, int m, const TopologyParams& params) {
  if (m < 2) throw std::invalid_argument("build_topology: m must be >= 2");
  Graph g;
  g.m = m;
  g.kind = kind;
  RngStream rng = make_stream(params.rng_seed, StreamPurpose::graph);

  switch (kind) {
    case Topology::complete:
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) g.edges.emplace_back(i, j);
      break;
    case Topology::ring:
      for (int i = 0; i < m; ++i) g.edges.emplace_back(i, (i + 1) % m);
      break;
    case Topology::tree:
      g.edges = random_spanning_tree(m, rng);
      break;
    case Topology::sparse: {
      g.edges = random_spanning_tree(m, rng);
      // Top up with random extra edges until average degree ~ sparse_degree.
      const long target =
          std::lround(params.sparse_degree * m / 2.0);
      const long max_edges = static_cast<long>(m) * (m - 1) / 2;
      std::set<std::pair<int, int>> pool;
      for (auto e : g.edges) {
        if (e.first > e.second) std::swap(e.first, e.second);
        pool.insert(e);
      }
      long guard = 0;
      while (static_cast<long>(pool.size()) < std::min(target, max_edges)) {
        if (++guard > 100000)
          throw std::runtime_error(
              "build_topology: sparse_degree unreachable for this m");
        int i = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
        int j = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        pool.insert({i, j});
      }
      g.edges.assign(pool.begin(), pool.end());
      break;
    }
    case Topology::erdos_renyi: {
      const double p = params.er_probability;
      if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument(
            "build_topology: er_probability must lie in (0,1]");
      bool ok = false;
      for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        g.edges.clear();
        for (int i = 0; i < m; ++i)
          for (int j = i + 1; j < m; ++j)
            if (rng.uniform() < p) g.edges.emplace_back(i, j);
        ok = is_connected(m, g.edges);
      }
      if (!ok)
        throw std::runtime_error(
            "build_topology: er_probability too small, no connected draw in "
            "1000 attempts");
      break;
    }
  }

  normalize_edges(g.edges);
  for (const auto& [i, j] : g.edges) {
    if (i == j) throw std::logic_error("build_topology: self-loop");
    if (i < 0 || j >= m) throw std::logic_error("build_topology: bad edge");
  }
  if (!is_connected(m, g.edges))
    throw std::runtime_error("build_topology: produced graph not connected");
  return g;
}

Topology topology_from_string(const std::string& name) {
  if (name == "complete") return Topology::complete;
  if (name == "ring") return Topology::ring;
  if (name == "sparse") return Topology::sparse;
  if (name == "tree") return Topology::tree;
  if (name == "erdos_renyi") return Topology::erdos_renyi;
  throw std::invalid_argument("unknown topology: " + name);
}

std::string topology_name(Topology kind) {
  switch (kind) {
    case Topology::complete: return "complete";
    case Topology::ring: return "ring";
    case Topology::sparse: return "sparse";
    case Topology::tree: return "tree";
    case Topology::erdos_renyi: return "erdos_renyi";
  }
  return "?";
}

MixingMatrix metropolis_weights(const Graph& g) {
  if (!is_connected(g.m, g.edges))
    throw std::invalid_argument("metropolis_weights: graph not connected");
  const auto deg = g.degrees();
  MixingMatrix mm;
  mm.w = Eigen::MatrixXd::Zero(g.m, g.m);
  for (const auto& [i, j] : g.edges) {
    const double wij = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    mm.w(i, j) = wij;
    mm.w(j, i) = wij;
  }
  for (int i = 0; i < g.m; ++i) {
    mm.w(i, i) = 1.0 - (mm.w.row(i).sum() - mm.w(i, i));
  }
  mm.lambda_w = spectral_gap(mm.w);
  return mm;
}

double spectral_gap(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols())
    throw std::invalid_argument("spectral_gap: matrix not square");
  const auto m = w.rows();
  const Eigen::MatrixXd d =
      w - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  // Largest singular value of d = sqrt of largest eigenvalue of d^T d,
  // via power iteration with a fixed deterministic start.
  const Eigen::MatrixXd s = d.transpose() * d;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
  v[0] += 0.5;  // break symmetry against the all-ones eigvector of W
  v.normalize();
  double lambda = 0.0;
  const int cap = 100000;
  for (int it = 0; it < cap; ++it) {
    Eigen::VectorXd u = s * v;
    const double norm = u.norm();
    if (norm < 1e-300) return 0.0;  // d^T d v vanished: zero matrix direction
    u /= norm;
    const double next = u.dot(s * u);
    const bool settled = std::abs(next - lambda) <= 1e-12 * std::max(1.0, next);
    lambda = next;
    v = u;
    if (settled && it > 2) return std::sqrt(std::max(0.0, lambda));
  }
  throw std::runtime_error("spectral_gap: power iteration did not converge");
}

Eigen::MatrixXd mix(const MixingMatrix& w, const Eigen::MatrixXd& x) {
  if (x.rows() != w.w.rows())
    throw std::invalid_argument("mix: row count of x must equal m");
  return w.w * x;
}

void dump_matrix(std::ostream& os, const Eigen::MatrixXd& a) {
  char buf[64];
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", a(i, j));
      os << (j ? " " : "") << buf;
    }
    os << "\n";
  }
}

void dump_graph(std::ostream& os, const Graph& g) {
  os << topology_name(g.kind) << " " << g.m << "\n";
  for (const auto& [i, j] : g.edges) os << i << " " << j << "\n";
}

}  // namespace zogt
