#pragma once

#include "paracap/nn/layers.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace paracap::model {

/// Symmetric CSR adjacency without self-loops; neighbour lists are sorted.
struct Adjacency {
  Index n = 0;
  std::vector<Index> offsets;
  std::vector<int> neighbors;

  static Adjacency from_edges(Index n, const std::vector<std::pair<int, int>>& edges);

  Index degree(Index u) const { return offsets[u + 1] - offsets[u]; }
  const int* begin(Index u) const { return neighbors.data() + offsets[u]; }
  const int* end(Index u) const { return neighbors.data() + offsets[u + 1]; }
};

enum class Variant { None, Gcn, Gat, SageMean, SagePool };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);
int default_layers(Variant v);
/// Layer norm for GAT, batch norm otherwise.
nn::Norm default_norm(Variant v);

/// Message-passing layer over a fixed adjacency.
class GraphConv {
public:
  virtual ~GraphConv() = default;
  virtual Matrix forward(const Adjacency& adj, const Matrix& h) = 0;
  virtual Matrix backward(const Matrix& dy) = 0;
  virtual std::vector<nn::Param*> params() = 0;
};

/// H' = D^-1/2 (A + I) D^-1/2 H W + b.
class GcnConv : public GraphConv {
public:
  GcnConv(Index in, Index out, nn::Rng& rng, const std::string& name);
  Matrix forward(const Adjacency& adj, const Matrix& h) override;
  Matrix backward(const Matrix& dy) override;
  std::vector<nn::Param*> params() override { return {&w_, &b_}; }

  nn::Param& weight() { return w_; }

private:
  Matrix propagate(const Matrix& x) const;

  nn::Param w_;
  nn::Param b_;
  const Adjacency* adj_ = nullptr;
  Matrix h_;
};

/// H' = [h_u || mean_{v in N(u)} h_v] W + b; an isolated node aggregates 0.
class SageMeanConv : public GraphConv {
public:
  SageMeanConv(Index in, Index out, nn::Rng& rng, const std::string& name);
  Matrix forward(const Adjacency& adj, const Matrix& h) override;
  Matrix backward(const Matrix& dy) override;
  std::vector<nn::Param*> params() override { return {&w_, &b_}; }

  nn::Param& weight() { return w_; }

private:
  nn::Param w_;
  nn::Param b_;
  const Adjacency* adj_ = nullptr;
  Matrix h_;
  Matrix agg_;
};

/// z_v = ReLU(h_v W_pool + b_pool); H' = [h_u || max_{v in N(u)} z_v] W + b.
class SagePoolConv : public GraphConv {
public:
  SagePoolConv(Index in, Index out, nn::Rng& rng, const std::string& name);
  Matrix forward(const Adjacency& adj, const Matrix& h) override;
  Matrix backward(const Matrix& dy) override;
  std::vector<nn::Param*> params() override { return {&wp_, &bp_, &w_, &b_}; }

  nn::Param& pool_weight() { return wp_; }
  nn::Param& pool_bias() { return bp_; }
  nn::Param& weight() { return w_; }

private:
  nn::Param wp_;
  nn::Param bp_;
  nn::Param w_;
  nn::Param b_;
  const Adjacency* adj_ = nullptr;
  Matrix h_;
  Matrix z_;
  Matrix agg_;
  std::vector<int> arg_;
};

/// Single-head attention: e_uv = LeakyReLU(a_dst . Wh_u + a_src . Wh_v),
/// softmax over N(u) and u itself, H'_u = sum_v alpha_uv Wh_v + b.
class GatConv : public GraphConv {
public:
  GatConv(Index in, Index out, nn::Rng& rng, const std::string& name, double slope = 0.2);
  Matrix forward(const Adjacency& adj, const Matrix& h) override;
  Matrix backward(const Matrix& dy) override;
  std::vector<nn::Param*> params() override { return {&w_, &a_dst_, &a_src_, &b_}; }

  nn::Param& weight() { return w_; }
  nn::Param& att_dst() { return a_dst_; }
  nn::Param& att_src() { return a_src_; }
  /// Attention weights of the last forward pass for node u: self first,
  /// then neighbours in adjacency order.
  std::vector<double> attention(Index u) const;

private:
  nn::Param w_;
  nn::Param a_dst_;
  nn::Param a_src_;
  nn::Param b_;
  double slope_;
  const Adjacency* adj_ = nullptr;
  Matrix h_;
  Matrix wh_;
  std::vector<double> alpha_;
  std::vector<unsigned char> positive_;
};

std::unique_ptr<GraphConv> make_conv(Variant v, Index in, Index out, nn::Rng& rng,
                                     const std::string& name);

} // namespace paracap::model
