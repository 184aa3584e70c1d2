#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "nodefeat/error.hpp"
#include "nodefeat/structural.hpp"
#include "support.hpp"

using namespace nodefeat;
using namespace nodefeat::testing;

namespace {

// Brute-force reference over all node pairs and triples.
std::vector<double> oracle_row(const Graph& g, NodeId v) {
  const std::size_t n = g.num_nodes();
  const double deg = static_cast<double>(g.degree(v));

  double tri = 0;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (a != v && b != v && g.has_edge(v, a) && g.has_edge(v, b) && g.has_edge(a, b)) ++tri;
    }
  }
  const double clustering = deg < 2 ? 0.0 : 2.0 * tri / (deg * (deg - 1));

  std::vector<double> nd;
  for (NodeId u = 0; u < n; ++u) {
    if (g.has_edge(v, u)) nd.push_back(static_cast<double>(g.degree(u)));
  }
  double mean = 0, mn = 0, mx = 0, sd = 0;
  if (!nd.empty()) {
    mn = mx = nd[0];
    for (double x : nd) {
      mean += x;
      mn = std::min(mn, x);
      mx = std::max(mx, x);
    }
    mean /= static_cast<double>(nd.size());
    for (double x : nd) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(nd.size()));
  }

  std::vector<bool> ego(n, false);
  ego[v] = true;
  for (NodeId u = 0; u < n; ++u) {
    if (g.has_edge(v, u)) ego[u] = true;
  }
  double internal = 0, boundary = 0;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (!g.has_edge(a, b)) continue;
      if (ego[a] && ego[b]) ++internal;
      else if (ego[a] || ego[b]) ++boundary;
    }
  }
  return {deg, clustering, tri, mean, mn, mx, sd, internal, boundary};
}

void check_row(const Matrix& m, Eigen::Index r, const std::vector<double>& expected) {
  REQUIRE(m.cols() == static_cast<Eigen::Index>(expected.size()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    CHECK(m(r, c) == doctest::Approx(expected[static_cast<std::size_t>(c)]).epsilon(1e-12));
  }
}

}  // namespace

TEST_CASE("triangles and clustering on small graphs") {
  const Graph k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(clustering_coefficient(k3) == std::vector<double>{1, 1, 1});
  CHECK(triangle_counts(k3) == std::vector<std::size_t>{1, 1, 1});

  const Graph path = make_graph(3, {{0, 1}, {1, 2}});
  CHECK(clustering_coefficient(path) == std::vector<double>{0, 0, 0});

  // K4 without edge (2,3).
  const Graph k4e = make_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}});
  const auto c = clustering_coefficient(k4e);
  CHECK(c[0] == doctest::Approx(2.0 / 3.0));
  CHECK(c[1] == doctest::Approx(2.0 / 3.0));
  CHECK(c[2] == 1.0);
  CHECK(c[3] == 1.0);
}

TEST_CASE("egonet edge counts") {
  const Graph k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(egonet_edge_counts(k3, 1) == EgonetCounts{3, 0});

  const Graph star = make_graph(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(egonet_edge_counts(star, 2) == EgonetCounts{1, 2});

  const Graph lone = make_graph(1, {});
  CHECK(egonet_edge_counts(lone, 0) == EgonetCounts{0, 0});

  CHECK_THROWS_AS(egonet_edge_counts(k3, 3), Error);
}

TEST_CASE("feature rows by hand") {
  const Graph path = make_graph(3, {{0, 1}, {1, 2}});
  check_row(structural_feature_matrix(path).values, 1, {2, 0, 0, 1, 1, 1, 0, 2, 0});

  const Graph k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  check_row(structural_feature_matrix(k3).values, 0, {2, 1, 1, 2, 2, 2, 0, 3, 0});

  const Graph lone = make_graph(1, {});
  check_row(structural_feature_matrix(lone).values, 0, std::vector<double>(9, 0.0));
}

TEST_CASE("feature matrix matches brute force on small random graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(6);
    const Graph g = random_graph(rng, n, rng.uniform(0.2, 0.9));
    const Matrix m = structural_feature_matrix(g).values;
    REQUIRE(m.rows() == static_cast<Eigen::Index>(n));
    for (NodeId v = 0; v < n; ++v) check_row(m, v, oracle_row(g, v));
  }
}

TEST_CASE("features are permutation equivariant") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = random_graph(rng, 10, 0.3);
    const auto perm = random_permutation(rng, 10);
    const Matrix x = structural_feature_matrix(g).values;
    const Matrix y = structural_feature_matrix(g.permuted(perm)).values;
    for (NodeId k = 0; k < 10; ++k) CHECK((y.row(k) - x.row(perm[k])).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("z-score normalization") {
  SUBCASE("one column") {
    std::vector<StructuralFeatureMatrix> in(1);
    in[0].values = Matrix(3, 2);
    in[0].values << 1, 5, 2, 5, 3, 5;
    const auto out = zscore_normalize(in);
    CHECK(out[0].values(0, 0) == doctest::Approx(-1.224744871391589));
    CHECK(out[0].values(1, 0) == doctest::Approx(0.0));
    CHECK(out[0].values(2, 0) == doctest::Approx(1.224744871391589));
    CHECK(out[0].values.col(1).isZero());
  }
  SUBCASE("pooled over graphs and idempotent") {
    const Dataset d = synthetic_dataset(10, 1);
    const auto once = zscore_normalize(structural_features(d));
    const auto twice = zscore_normalize(once);
    Eigen::Index rows = 0;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(9);
    for (std::size_t g = 0; g < once.size(); ++g) {
      CHECK((once[g].values - twice[g].values).cwiseAbs().maxCoeff() < 1e-9);
      sum += once[g].values.colwise().sum().transpose();
      rows += once[g].values.rows();
    }
    CHECK((sum / static_cast<double>(rows)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(zscore_normalize({}), Error);
    std::vector<StructuralFeatureMatrix> bad(2);
    bad[0].values = Matrix::Zero(2, 3);
    bad[1].values = Matrix::Zero(2, 4);
    CHECK_THROWS_AS(zscore_normalize(bad), Error);
  }
}
