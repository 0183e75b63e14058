#include "paracap/error.hpp"
#include "paracap/model/gnn.hpp"

#include "testing.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace paracap;
using namespace paracap::model;
using nn::Rng;

namespace {

constexpr Index kIn = 4;
constexpr Index kOut = 3;

Adjacency adjacency(const testkit::FixtureGraph& g)
{
  return Adjacency::from_edges(g.n, g.edges);
}

Matrix oracle(Variant v, GraphConv& conv, const testkit::FixtureGraph& g, const Matrix& h)
{
  const auto p = conv.params();
  switch (v) {
  case Variant::Gcn: return testkit::dense_gcn(g, h, p[0]->value, p[1]->value);
  case Variant::SageMean: return testkit::dense_sage_mean(g, h, p[0]->value, p[1]->value);
  case Variant::SagePool:
    return testkit::dense_sage_pool(g, h, p[0]->value, p[1]->value, p[2]->value, p[3]->value);
  case Variant::Gat:
    return testkit::dense_gat(g, h, p[0]->value, p[1]->value, p[2]->value, p[3]->value);
  case Variant::None: break;
  }
  return {};
}

const Variant kVariants[] = {Variant::Gcn, Variant::SageMean, Variant::SagePool, Variant::Gat};

} // namespace

TEST(Adjacency, SymmetricSortedCsr)
{
  const Adjacency a = Adjacency::from_edges(5, {{3, 1}, {0, 1}, {1, 4}});
  EXPECT_EQ(a.degree(1), 3);
  EXPECT_EQ(std::vector<int>(a.begin(1), a.end(1)), (std::vector<int>{0, 3, 4}));
  EXPECT_EQ(a.degree(2), 0);
  EXPECT_EQ(std::vector<int>(a.begin(3), a.end(3)), (std::vector<int>{1}));
  EXPECT_THROW(Adjacency::from_edges(3, {{0, 5}}), DataError);
  EXPECT_THROW(Adjacency::from_edges(3, {{0, 1}, {1, 0}}), DataError);
}

TEST(Variants, NamesAndDefaults)
{
  for (Variant v : {Variant::None, Variant::Gcn, Variant::Gat, Variant::SageMean, Variant::SagePool})
    EXPECT_EQ(variant_from_name(variant_name(v)), v);
  EXPECT_THROW(variant_from_name("mpnn"), UsageError);
  EXPECT_EQ(default_layers(Variant::Gcn), 3);
  EXPECT_EQ(default_layers(Variant::Gat), 3);
  EXPECT_EQ(default_layers(Variant::SageMean), 2);
  EXPECT_EQ(default_layers(Variant::SagePool), 2);
  EXPECT_EQ(default_norm(Variant::Gat), nn::Norm::Layer);
  EXPECT_EQ(default_norm(Variant::SageMean), nn::Norm::Batch);
}

TEST(ConvOracle, MatchesDenseFormulaOnFixtureSuite)
{
  const auto graphs = testkit::fixture_graphs();
  ASSERT_EQ(graphs.size(), 20u);
  for (Variant v : kVariants) {
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      const auto& g = graphs[i];
      SCOPED_TRACE(std::string(variant_name(v)) + " on " + g.name);
      Rng rng(100 + i);
      auto conv = make_conv(v, kIn, kOut, rng, "c");
      testkit::randomize(conv->params(), rng);
      const Matrix h = nn::uniform_matrix(g.n, kIn, -1, 1, rng);
      const Adjacency adj = adjacency(g);
      EXPECT_LE(testkit::max_abs_diff(conv->forward(adj, h), oracle(v, *conv, g, h)), 1e-10);
    }
  }
}

TEST(ConvGrad, FiniteDifferencesOnRandomGraphs)
{
  for (Variant v : kVariants) {
    for (std::uint64_t s = 0; s < 6; ++s) {
      Rng rng(s * 31 + 7);
      const auto g = testkit::random_graph(3 + static_cast<int>(s), 0.5, rng);
      auto conv = make_conv(v, kIn, kOut, rng, "c");
      testkit::randomize(conv->params(), rng);
      const Matrix h = nn::uniform_matrix(g.n, kIn, -1, 1, rng);
      const Adjacency adj = adjacency(g);
      for (const auto& c : testkit::check_conv(*conv, adj, h, s))
        EXPECT_LT(c.error, 1e-4) << variant_name(v) << " seed " << s << " " << c.what;
    }
  }
}

TEST(Gcn, NoEdgesIdentityWeightIsRelu)
{
  Rng rng(1);
  GcnConv conv(4, 4, rng, "gcn");
  conv.weight().value = Matrix::Identity(4, 4);
  const Matrix h = nn::uniform_matrix(6, 4, -1, 1, rng);
  const Adjacency adj = Adjacency::from_edges(6, {});
  nn::ReLU relu;
  EXPECT_LE(testkit::max_abs_diff(relu.forward(conv.forward(adj, h), false), h.cwiseMax(0.0)),
            1e-15);
}

TEST(Gat, EqualKeysGiveUniformAttention)
{
  Rng rng(2);
  GatConv conv(3, 5, rng, "gat");
  testkit::randomize(conv.params(), rng);
  const auto g = testkit::fixture_graphs()[7];
  const Adjacency adj = adjacency(g);
  Matrix h(g.n, 3);
  for (Index r = 0; r < h.rows(); ++r)
    h.row(r) << 0.3, -0.7, 1.1;
  conv.forward(adj, h);
  for (Index u = 0; u < g.n; ++u) {
    const auto a = conv.attention(u);
    ASSERT_EQ(static_cast<Index>(a.size()), adj.degree(u) + 1);
    for (double w : a)
      EXPECT_NEAR(w, 1.0 / static_cast<double>(a.size()), 1e-15);
  }
}

TEST(Gat, AttentionIsADistribution)
{
  Rng rng(3);
  GatConv conv(4, 4, rng, "gat");
  testkit::randomize(conv.params(), rng);
  const auto g = testkit::fixture_graphs()[11];
  const Adjacency adj = adjacency(g);
  conv.forward(adj, nn::uniform_matrix(g.n, 4, -1, 1, rng));
  for (Index u = 0; u < g.n; ++u) {
    const auto a = conv.attention(u);
    EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-14);
  }
}

TEST(Conv, PermutationEquivariance)
{
  for (Variant v : kVariants) {
    Rng rng(9);
    const auto g = testkit::random_graph(9, 0.4, rng);
    auto conv = make_conv(v, kIn, kOut, rng, "c");
    testkit::randomize(conv->params(), rng);
    const Matrix h = nn::uniform_matrix(g.n, kIn, -1, 1, rng);
    const Matrix y = conv->forward(adjacency(g), h);

    std::vector<int> perm(static_cast<std::size_t>(g.n));
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[0], perm[4]);
    testkit::FixtureGraph pg{g.name, g.n, {}};
    for (auto [a, b] : g.edges)
      pg.edges.emplace_back(perm[a], perm[b]);
    Matrix ph(g.n, kIn);
    for (int i = 0; i < g.n; ++i)
      ph.row(perm[i]) = h.row(i);
    const Matrix py = conv->forward(adjacency(pg), ph);
    for (int i = 0; i < g.n; ++i)
      EXPECT_LE((py.row(perm[i]) - y.row(i)).cwiseAbs().maxCoeff(), 1e-12) << variant_name(v);
  }
}

TEST(Conv, RejectsMismatchedRows)
{
  Rng rng(4);
  for (Variant v : kVariants) {
    auto conv = make_conv(v, 2, 2, rng, "c");
    EXPECT_THROW(conv->forward(Adjacency::from_edges(3, {}), Matrix::Zero(4, 2)), DataError);
  }
}
