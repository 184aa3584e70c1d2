#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "doctest.h"
#include "nodefeat/error.hpp"
#include "nodefeat/gae.hpp"
#include "nodefeat/nn/gradcheck.hpp"
#include "support.hpp"

using namespace nodefeat;
using namespace nodefeat::testing;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

GaeConfig small_config(std::size_t epochs) {
  GaeConfig c;
  c.encoder_widths = {16, 4};
  c.decoder_hidden = {16};
  c.epochs = epochs;
  return c;
}

std::vector<std::vector<double>> sorted_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.emplace_back(m.row(r).data(), m.row(r).data() + m.cols());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST_CASE("model layout") {
  const GaeModel m = GaeModel::init(9, GaeConfig{}, 1);
  CHECK(m.encoder_layers == 2);
  CHECK(m.embedding_dim == 16);
  CHECK(m.params.at("gcn.0.weight").rows() == 9);
  CHECK(m.params.at("gcn.0.weight").cols() == 64);
  CHECK(m.params.at("gcn.1.weight").cols() == 16);
  CHECK(m.params.at("dec.0.weight").rows() == 16);
  CHECK(m.params.at("dec.1.weight").cols() == 9);
  CHECK(m.params.at("dec.1.bias").isZero());
  CHECK_FALSE(m.params.contains("gcn.0.bias"));
}

TEST_CASE("composite gradient matches central differences") {
  const std::vector<Graph> g{make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 2}})};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed * 101);
    std::vector<StructuralFeatureMatrix> x(1);
    x[0].values = random_matrix(rng, 4, 9);
    const GaeBatch batch = make_gae_batch(g, x);
    GaeModel model = GaeModel::init(9, GaeConfig{}, seed);
    // Nonzero biases so every parameter affects the loss.
    for (auto& p : model.params) {
      if (p.name.ends_with(".bias")) p.value = 0.1 * random_matrix(rng, 1, p.value.cols());
    }
    const auto loss = [&](const nn::ParamSet& p) {
      GaeModel probe = model;
      probe.params = p;
      return gae_objective(probe, batch);
    };
    const auto grad = [&](const nn::ParamSet& p) {
      GaeModel probe = model;
      probe.params = p;
      nn::ParamSet out = p.zeros_like();
      gae_objective(probe, batch, &out);
      return out;
    };
    CHECK(nn::finite_difference_check(loss, grad, model.params) < 1e-4);
  }
}

TEST_CASE("training lowers the loss and is deterministic") {
  const Dataset d = synthetic_dataset(20, 3);
  const auto f = zscore_normalize(structural_features(d));
  const GaeTrainResult a = train_gae(d.graphs, f, small_config(60), 5);
  const GaeTrainResult b = train_gae(d.graphs, f, small_config(60), 5);
  REQUIRE(a.loss_history.size() == 60);
  CHECK(a.loss_history.back() < a.loss_history.front());
  CHECK(a.model.params == b.model.params);
  CHECK(a.loss_history == b.loss_history);

  CHECK_THROWS_AS(train_gae(d.graphs, std::span(f).first(3), small_config(1), 0), Error);
}

TEST_CASE("node embeddings are permutation equivariant") {
  Rng rng(41);
  const GaeModel model = GaeModel::init(9, GaeConfig{}, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(10);
    const Graph g = random_graph(rng, n, 0.35);
    const auto perm = random_permutation(rng, n);
    const Graph p = g.permuted(perm);
    const Matrix fg = structural_feature_matrix(g).values;
    const Matrix fp = structural_feature_matrix(p).values;
    const Matrix zg = node_embeddings(model, g, fg);
    const Matrix zp = node_embeddings(model, p, fp);
    REQUIRE(zg.rows() == static_cast<Eigen::Index>(n));
    REQUIRE(zg.cols() == 16);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      worst = std::max(worst, (zp.row(static_cast<Eigen::Index>(k)) - zg.row(perm[k])).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-9);
    CHECK((graph_embedding(zp) - graph_embedding(zg)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("isomorphic graphs give the same multiset of embedding rows") {
  // A 5-cycle with one chord, written with two different node orders.
  const Graph a = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {0, 2}});
  const Graph b = make_graph(5, {{3, 1}, {1, 4}, {4, 0}, {0, 2}, {2, 3}, {3, 4}});
  const GaeModel model = GaeModel::init(9, GaeConfig{}, 8);
  const auto ra = sorted_rows(node_embeddings(model, a, structural_feature_matrix(a).values));
  const auto rb = sorted_rows(node_embeddings(model, b, structural_feature_matrix(b).values));
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    for (std::size_t j = 0; j < ra[i].size(); ++j) CHECK(std::abs(ra[i][j] - rb[i][j]) <= 1e-9);
  }
}

TEST_CASE("graph embedding is the row mean") {
  Matrix z(2, 2);
  z << 0, 2, 2, 0;
  CHECK(graph_embedding(z) == Vector::Ones(2));
  const Matrix same = Matrix::Constant(4, 3, 0.25);
  CHECK(graph_embedding(same) == Vector::Constant(3, 0.25));
  CHECK_THROWS_AS(graph_embedding(Matrix(0, 3)), Error);
}

TEST_CASE("embed_graphs shapes") {
  const Dataset d = synthetic_dataset(6, 4);
  const auto f = zscore_normalize(structural_features(d));
  const GaeModel model = GaeModel::init(9, small_config(1), 0);
  const EmbeddingSet e = embed_graphs(model, d.graphs, f);
  CHECK(e.dim == 4);
  REQUIRE(e.nodes.size() == d.size());
  for (std::size_t g = 0; g < d.size(); ++g) {
    CHECK(e.nodes[g].rows() == static_cast<Eigen::Index>(d.graphs[g].num_nodes()));
    CHECK(e.graphs[g].size() == 4);
  }
  CHECK(stack_node_embeddings(e).rows() == static_cast<Eigen::Index>(d.total_nodes()));
}

TEST_CASE("2D projection") {
  Rng rng(17);
  SUBCASE("collinear points") {
    const Vector dir = Vector::Random(6).normalized();
    Matrix pts(30, 6);
    for (Eigen::Index r = 0; r < 30; ++r) pts.row(r) = (3.0 + rng.uniform(-2.0, 2.0)) * dir.transpose();
    const std::vector<int> labels(30, 1);
    const auto proj = project_2d(pts, labels);
    REQUIRE(proj.size() == 30);
    for (const auto& p : proj) {
      CHECK(std::abs(p.y) < 1e-9);
      CHECK(p.label == 1);
    }
  }
  SUBCASE("rotation keeps pairwise distances") {
    Matrix pts(40, 5);
    const double scales[] = {5.0, 3.0, 1.0, 0.5, 0.2};
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      for (Eigen::Index c = 0; c < 5; ++c) pts(r, c) = scales[c] * rng.uniform(-1.0, 1.0);
    }
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(5, 5)).householderQ();
    const Matrix rotated = pts * q;
    const std::vector<int> labels(40, 0);
    const auto a = project_2d(pts, labels);
    const auto b = project_2d(rotated, labels);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        const double da = std::hypot(a[i].x - a[j].x, a[i].y - a[j].y);
        const double db = std::hypot(b[i].x - b[j].x, b[i].y - b[j].y);
        worst = std::max(worst, std::abs(da - db));
      }
    }
    CHECK(worst < 1e-9);
  }
  SUBCASE("degenerate cloud") {
    const std::vector<int> labels(3, 0);
    CHECK_THROWS_AS(project_2d(Matrix::Constant(3, 4, 2.0), labels), Error);
  }
}
