#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "nodefeat/graph.hpp"
#include "nodefeat/rng.hpp"

namespace nodefeat::testing {

inline Graph make_graph(std::size_t n, std::vector<Edge> edges, int label = 0,
                        std::optional<std::vector<int>> node_labels = std::nullopt) {
  return Graph(n, std::move(edges), label, std::move(node_labels));
}

/// Erdos-Renyi graph with edge probability p.
inline Graph random_graph(Rng& rng, std::size_t n, double p, int label = 0) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.uniform() < p) edges.push_back({u, v});
    }
  }
  return Graph(n, std::move(edges), label);
}

inline std::vector<NodeId> random_permutation(Rng& rng, std::size_t n) {
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  rng.shuffle(std::span<NodeId>(perm));
  return perm;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("nodefeat_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

/// Two-class dataset whose node labels follow local structure.
///
/// Class 0 graphs are cycles with pendant chords, class 1 graphs are trees.
/// Node codes: 0/1 for degree 2/3 in class 0, and 2/3/4 for degree 1/2/3+
/// in class 1, so F = 5.
inline Dataset synthetic_dataset(std::size_t num_graphs, std::uint64_t seed, std::string name = "SYNTH") {
  Rng rng(seed);
  Dataset d;
  d.name = std::move(name);
  d.node_label_alphabet = 5;
  d.node_label_values = {0, 1, 2, 3, 4};
  d.class_values = {0, 1};
  for (std::size_t g = 0; g < num_graphs; ++g) {
    const int label = static_cast<int>(g % 2);
    const auto n = static_cast<NodeId>(6 + rng.uniform_index(8));
    std::vector<Edge> edges;
    if (label == 0) {
      for (NodeId u = 0; u < n; ++u) edges.push_back({u, static_cast<NodeId>((u + 1) % n)});
      for (NodeId u = 0; u + 2 < n; u += 3) {
        if (rng.uniform() < 0.5) edges.push_back({u, static_cast<NodeId>(u + 2)});
      }
    } else {
      for (NodeId u = 1; u < n; ++u) edges.push_back({static_cast<NodeId>(rng.uniform_index(u)), u});
    }
    for (auto& e : edges) {
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    Graph shape(n, edges, label);
    std::vector<int> codes(n);
    for (NodeId v = 0; v < n; ++v) {
      const int deg = static_cast<int>(shape.degree(v));
      codes[v] = label == 0 ? std::min(deg, 3) - 2 : 1 + std::min(deg, 3);
    }
    d.graphs.emplace_back(n, std::move(edges), label, std::move(codes), g + 1);
  }
  return d;
}

}  // namespace nodefeat::testing
