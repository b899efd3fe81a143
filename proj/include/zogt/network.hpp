#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace zogt {

enum class Topology { complete, ring, sparse, tree, erdos_renyi };

struct TopologyParams {
  double sparse_degree = 3.0;   // target average degree of the sparse family
  double er_probability = 0.2;  // edge probability for erdos_renyi
  std::uint64_t rng_seed = 0;
};

/// Undirected connected communication graph on {0,...,m-1}.
struct Graph {
  int m = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, sorted, no duplicates
  Topology kind = Topology::complete;

  std::vector<int> degrees() const;
  bool has_edge(int i, int j) const;
};

/// Doubly stochastic mixing matrix together with its spectral gap quantity
/// lambda_w = ||W - (1/m) 1 1^T||_2.
struct MixingMatrix {
  Eigen::MatrixXd w;
  double lambda_w = 0.0;

  int size() const { return static_cast<int>(w.rows()); }
};

/// Builds a connected graph of the requested family. erdos_renyi resamples
/// until connected (at most 1000 attempts); sparse adds random edges on top
/// of a random spanning tree until the average degree target is met.
Graph build_topology(Topology kind, int m, const TopologyParams& params = {});

Topology topology_from_string(const std::string& name);
std::string topology_name(Topology kind);

/// Metropolis-Hastings weights: w_ij = 1/(1+max(deg_i,deg_j)) on edges,
/// diagonal absorbs the remainder. Doubly stochastic for any connected
/// undirected graph.
MixingMatrix metropolis_weights(const Graph& g);

/// Spectral norm of w - (1/m) 1 1^T by power iteration on the symmetrized
/// product, tolerance 1e-12. Throws on non-convergence.
double spectral_gap(const Eigen::MatrixXd& w);

/// W * x. Throws on row-count mismatch.
Eigen::MatrixXd mix(const MixingMatrix& w, const Eigen::MatrixXd& x);

bool is_connected(int m, const std::vector<std::pair<int, int>>& edges);

/// Plain-text dump, one row per line, 17 significant digits.
void dump_matrix(std::ostream& os, const Eigen::MatrixXd& a);
void dump_graph(std::ostream& os, const Graph& g);

}  // namespace zogt
