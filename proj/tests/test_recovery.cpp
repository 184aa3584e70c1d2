#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "doctest.h"
#include "nodefeat/error.hpp"
#include "nodefeat/log.hpp"
#include "nodefeat/recovery.hpp"
#include "support.hpp"

using namespace nodefeat;
using namespace nodefeat::testing;

namespace {

// Embedding set from explicit graph-level and node-level rows.
EmbeddingSet embeddings_of(std::vector<Vector> graphs, std::vector<Matrix> nodes = {}) {
  EmbeddingSet e;
  e.dim = static_cast<std::size_t>(graphs.front().size());
  e.graphs = std::move(graphs);
  e.nodes = std::move(nodes);
  if (e.nodes.empty()) e.nodes.assign(e.graphs.size(), Matrix::Zero(1, static_cast<Eigen::Index>(e.dim)));
  return e;
}

Vector vec1(double v) { return Vector::Constant(1, v); }

Matrix one_hot_rows(std::initializer_list<int> codes, int width) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(codes.size()), width);
  Eigen::Index r = 0;
  for (int c : codes) m(r++, c) = 1.0;
  return m;
}

double sq(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

// Sort all (distance, index) pairs and keep the first `count`.
std::vector<std::size_t> brute_select(std::vector<std::pair<double, std::size_t>> ranked, std::size_t count) {
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < std::min(count, ranked.size()); ++k) out.push_back(ranked[k].second);
  return out;
}

}  // namespace

TEST_CASE("nearest graphs") {
  log::set_level(log::Level::Quiet);
  SUBCASE("closest same-label donor") {
    const auto e = embeddings_of({vec1(0), vec1(1), vec1(2), vec1(3)});
    const std::vector<int> labels{0, 0, 0, 0};
    const std::vector<std::size_t> cand{1, 2, 3};
    const auto d = nearest_graphs(0, e, labels, cand, 1);
    REQUIRE(d.size() == 1);
    CHECK(d[0].graph == 1);
    CHECK(d[0].distance == 1.0);
  }
  SUBCASE("different label is skipped") {
    const auto e = embeddings_of({vec1(0), vec1(1), vec1(2), vec1(3)});
    const std::vector<int> labels{0, 1, 0, 0};
    const std::vector<std::size_t> cand{1, 2, 3};
    CHECK(nearest_graphs(0, e, labels, cand, 1)[0].graph == 2);
  }
  SUBCASE("fewer donors than requested") {
    const auto e = embeddings_of({vec1(0), vec1(1), vec1(2), vec1(3)});
    const std::vector<int> labels{0, 1, 0, 0};
    const std::vector<std::size_t> cand{1, 2, 3};
    const auto d = nearest_graphs(0, e, labels, cand, 3);
    REQUIRE(d.size() == 2);
    CHECK(d[0].graph == 2);
    CHECK(d[1].graph == 3);
  }
  SUBCASE("no same-label donor") {
    const auto e = embeddings_of({vec1(0), vec1(1)});
    const std::vector<int> labels{0, 1};
    const std::vector<std::size_t> cand{1};
    CHECK(nearest_graphs(0, e, labels, cand, 1, true)[0].graph == 1);
    CHECK_THROWS_AS(nearest_graphs(0, e, labels, cand, 1, false), Error);
  }
  SUBCASE("recipient is never its own donor") {
    const auto e = embeddings_of({vec1(0), vec1(5)});
    const std::vector<int> labels{0, 0};
    const std::vector<std::size_t> cand{0, 1};
    CHECK(nearest_graphs(0, e, labels, cand, 1)[0].graph == 1);
  }
  log::set_level(log::Level::Warn);
}

TEST_CASE("nearest nodes") {
  Matrix zi(1, 1);
  zi << 0.0;
  Matrix zj(3, 1);
  zj << 0.1, 0.5, 0.2;
  CHECK(nearest_nodes(0, zi, zj, 2) == std::vector<std::size_t>{0, 2});
  CHECK(nearest_nodes(0, zi, zj, 10) == std::vector<std::size_t>{0, 2, 1});

  Matrix tie(3, 1);
  tie << 0.0, 1.0, -1.0;
  Matrix origin = Matrix::Constant(1, 1, 0.0);
  Matrix far(3, 1);
  far << 5.0, 1.0, 1.0;
  // Nodes 1 and 2 tie at the cutoff; the lower index wins.
  CHECK(nearest_nodes(0, origin, far, 1) == std::vector<std::size_t>{1});
  CHECK(nearest_nodes(0, origin, tie, 2) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("transfer matrix") {
  const std::vector<std::vector<std::size_t>> sets{{0, 1}, {1, 2}};
  const TransferMatrix c = transfer_matrix(sets, 3);
  Matrix expected(2, 3);
  expected << 0.5, 0.5, 0, 0, 0.5, 0.5;
  CHECK(c.values == expected);

  const std::vector<std::vector<std::size_t>> singles{{2}, {0}, {2}};
  const Matrix s = transfer_matrix(singles, 3).values;
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    CHECK(s.row(r).sum() == 1.0);
    CHECK((s.row(r).array() == 1.0).count() == 1);
  }

  const std::vector<std::vector<std::size_t>> empty{{}};
  CHECK_THROWS_AS(transfer_matrix(empty, 3), Error);
}

TEST_CASE("nearest-node estimate") {
  SUBCASE("hand product") {
    NeighborPlan plan;
    plan.donors = {{1, 0.0}};
    plan.node_sets = {{{0, 1}, {1, 2}}};
    const std::vector<Matrix> x{Matrix(), one_hot_rows({0, 1, 2}, 3)};
    Matrix expected(2, 3);
    expected << 0.5, 0.5, 0, 0, 0.5, 0.5;
    CHECK(lse_nn_estimate(plan, x) == expected);
  }
  SUBCASE("constant donor rows") {
    NeighborPlan plan;
    plan.donors = {{1, 0.0}};
    plan.node_sets = {{{0, 2}, {1}, {0, 1, 2}}};
    Matrix donor(3, 2);
    donor << 0.3, 0.7, 0.3, 0.7, 0.3, 0.7;
    const std::vector<Matrix> x{Matrix(), donor};
    const Matrix est = lse_nn_estimate(plan, x);
    for (Eigen::Index r = 0; r < est.rows(); ++r) CHECK((est.row(r) - donor.row(0)).norm() < 1e-15);
  }
  SUBCASE("two donors average") {
    NeighborPlan plan;
    plan.donors = {{1, 0.0}, {2, 0.0}};
    plan.node_sets = {{{0}, {1}}, {{0}, {1}}};
    const std::vector<Matrix> x{Matrix(), one_hot_rows({0, 1}, 3), one_hot_rows({2, 1}, 3)};
    Matrix expected(2, 3);
    expected << 0.5, 0, 0.5, 0, 1, 0;
    CHECK(lse_nn_estimate(plan, x) == expected);
  }
}

TEST_CASE("random-node estimate") {
  const std::vector<Matrix> x{Matrix(), one_hot_rows({0, 1, 2, 1}, 3), one_hot_rows({2, 2}, 3)};
  const std::vector<Donor> one{{1, 0.0}};
  const Matrix a = lse_ng_estimate(5, one, x, 9);
  CHECK(a == lse_ng_estimate(5, one, x, 9));
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    bool found = false;
    for (Eigen::Index k = 0; k < x[1].rows(); ++k) found = found || a.row(r) == x[1].row(k);
    CHECK(found);
  }
  const std::vector<Donor> two{{1, 0.0}, {2, 0.0}};
  const Matrix b = lse_ng_estimate(5, two, x, 3);
  for (Eigen::Index r = 0; r < b.rows(); ++r) CHECK(b.row(r).sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("baselines") {
  const Graph path = make_graph(3, {{0, 1}, {1, 2}});
  CHECK(baseline_features(Baseline::Zeros, path, 7, 0).isZero());
  CHECK(baseline_features(Baseline::Ones, path, 7, 0) == Matrix::Ones(3, 7));
  const Matrix deg = baseline_features(Baseline::Degree, path, 7, 0);
  CHECK(deg == one_hot_rows({1, 2, 1}, 7));
  const Graph star = make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  CHECK(baseline_features(Baseline::Degree, star, 3, 0).row(0) == one_hot_rows({2}, 3).row(0));
  const Matrix r = baseline_features(Baseline::Random, path, 7, 4);
  CHECK(r == baseline_features(Baseline::Random, path, 7, 4));
  CHECK(r.minCoeff() >= 0.0);
  CHECK(r.maxCoeff() < 1.0);
  CHECK(to_string(Baseline::Degree) == "degree");
}

TEST_CASE("recovery error") {
  const Matrix x = one_hot_rows({0, 3, 6, 2}, 7);
  CHECK(recovery_error(x, x) == 0.0);
  CHECK(recovery_error(x, Matrix::Zero(4, 7)) == 1.0);
  CHECK(recovery_error(x, Matrix::Ones(4, 7)) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-15));
  CHECK_THROWS_AS(recovery_error(Matrix::Zero(2, 2), Matrix::Ones(2, 2)), Error);
  CHECK_THROWS_AS(recovery_error(x, Matrix::Ones(3, 7)), Error);
}

TEST_CASE("matching agrees with brute force on small instances") {
  log::set_level(log::Level::Quiet);
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t num_graphs = 2 + rng.uniform_index(4);
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.uniform_index(3));
    EmbeddingSet e;
    e.dim = static_cast<std::size_t>(dim);
    std::vector<int> labels;
    std::vector<Matrix> x;
    for (std::size_t g = 0; g < num_graphs; ++g) {
      const auto n = static_cast<Eigen::Index>(1 + rng.uniform_index(6));
      Matrix z(n, dim);
      // Small integers so that ties are common.
      for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = static_cast<double>(rng.uniform_index(3));
      e.graphs.push_back(z.colwise().mean().transpose());
      e.nodes.push_back(z);
      labels.push_back(static_cast<int>(rng.uniform_index(2)));
      Matrix f = Matrix::Zero(n, 4);
      for (Eigen::Index r = 0; r < n; ++r) f(r, static_cast<Eigen::Index>(rng.uniform_index(4))) = 1.0;
      x.push_back(f);
    }
    const std::size_t recipient = rng.uniform_index(num_graphs);
    std::vector<std::size_t> cand;
    for (std::size_t g = 0; g < num_graphs; ++g) {
      if (g != recipient && rng.uniform() < 0.8) cand.push_back(g);
    }
    const std::size_t q = 1 + rng.uniform_index(3);
    const std::size_t nbar = 1 + rng.uniform_index(4);

    std::vector<std::pair<double, std::size_t>> graph_rank;
    for (std::size_t g : cand) {
      if (labels[g] == labels[recipient]) graph_rank.emplace_back(sq(e.graphs[g], e.graphs[recipient]), g);
    }
    if (graph_rank.empty()) {
      for (std::size_t g : cand) graph_rank.emplace_back(sq(e.graphs[g], e.graphs[recipient]), g);
    }
    if (graph_rank.empty()) {
      CHECK_THROWS_AS(build_neighbor_plan(recipient, e, labels, cand, q, nbar), Error);
      continue;
    }
    const auto donors = brute_select(graph_rank, q);
    const NeighborPlan plan = build_neighbor_plan(recipient, e, labels, cand, q, nbar);
    REQUIRE(plan.donors.size() == donors.size());
    for (std::size_t d = 0; d < donors.size(); ++d) {
      CHECK(plan.donors[d].graph == donors[d]);
      const Matrix& zi = e.nodes[recipient];
      const Matrix& zj = e.nodes[donors[d]];
      for (Eigen::Index n = 0; n < zi.rows(); ++n) {
        std::vector<std::pair<double, std::size_t>> node_rank;
        for (Eigen::Index l = 0; l < zj.rows(); ++l) {
          node_rank.emplace_back(sq(zi.row(n), zj.row(l)), static_cast<std::size_t>(l));
        }
        CHECK(plan.node_sets[d][static_cast<std::size_t>(n)] == brute_select(node_rank, nbar));
      }
    }

    const Matrix est = lse_nn_estimate(plan, x);
    for (std::size_t d = 0; d < plan.donors.size(); ++d) {
      const Matrix c = transfer_matrix(plan, d, static_cast<std::size_t>(x[plan.donors[d].graph].rows())).values;
      for (Eigen::Index r = 0; r < c.rows(); ++r) CHECK(c.row(r).sum() == 1.0);
    }
    CHECK(est.minCoeff() >= 0.0);
    CHECK(est.maxCoeff() <= 1.0);
    for (Eigen::Index r = 0; r < est.rows(); ++r) CHECK(std::abs(est.row(r).sum() - 1.0) <= 1e-12);
  }
  log::set_level(log::Level::Warn);
}

TEST_CASE("neighbor plan dump") {
  NeighborPlan plan;
  plan.recipient = 0;
  plan.max_donors = 1;
  plan.max_nodes = 2;
  plan.donors = {{3, 0.5}};
  plan.node_sets = {{{0, 1}}};
  std::ostringstream out;
  write_neighbor_plan(plan, out);
  CHECK(out.str().find("donor 4") != std::string::npos);
  CHECK(out.str().find("node 0: 0 1") != std::string::npos);
}
