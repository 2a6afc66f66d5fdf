// Copyright 2026 The polarcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POLARCAST__MODEL__RET_HPP_
#define POLARCAST__MODEL__RET_HPP_

#include <string>
#include <vector>

#include "polarcast/model/features.hpp"
#include "polarcast/numcore/nn.hpp"

namespace polarcast::model
{

// Features of U elements with one keypoint and validity flag each.
struct KeyedFeatures
{
  nc::Var features;  // [U x C]
  std::vector<PolarPoint> keypoints;
  nc::Mask mask;
  // Optional differentiable copy of `keypoints`; used for relative
  // embeddings when set.
  KeypointVars points;

  std::size_t size() const { return keypoints.size(); }
  // Throws ShapeError if row count, keypoint count and mask length differ.
  void check(const char * who) const;
};

struct RetOptions
{
  std::size_t hidden = 64;
  std::size_t heads = 1;
  CoordinateMode coords = CoordinateMode::kPolar;
  bool relative = true;       // relative embeddings in cross-attention
  bool relative_self = true;  // relative embeddings in self-attention
  double dropout = 0.0;
};

// Attention weights recorded during a forward pass, [heads x U x V].
struct RetTrace
{
  nc::Tensor cross;
  nc::Tensor self;
};

/**
 * @brief One attention block whose keys and values are augmented with
 * relative keypoint embeddings.
 *
 * Pre-norm: q = LN(x) W_q; each key element is repeated along the query
 * axis, concatenated with the relative embedding of the (query, key) pair and
 * mapped by an MLP to a key and a value. Without relative embeddings the
 * block is plain attention over LN(kv). Queries with no valid key receive a
 * zero update.
 */
struct RelativeAttention
{
  nc::LayerNorm query_norm;
  nc::LayerNorm key_norm;
  nc::Linear query;
  nc::Linear aug_key;       // C -> C, key half of the augmentation input
  nc::Linear aug_relation;  // C -> C, relation half, no bias
  nc::Linear aug_k;         // C -> C key projection, no bias
  nc::Linear aug_v;         // C -> C value projection
  nc::Linear output;
  bool relative = true;
  std::size_t heads = 1;
  double dropout = 0.0;

  static RelativeAttention create(
    nc::ParameterStore & store, const std::string & name, const RetOptions & opt, bool relative, nc::Rng & rng);

  // `relation` is the [U x V x C] relative embedding (ignored when not
  // relative); `mask` is [U x V].
  nc::Var operator()(
    nc::Graph & g, nc::Var x, nc::Var kv, nc::Var relation, const nc::Mask & mask, nc::Tensor * probs) const;
};

/**
 * @brief Relative Embedding Transformer layer: cross-attention from queries
 * to keys, self-attention among queries, then a feedforward block, each with
 * a pre-norm residual.
 */
struct RetLayer
{
  nc::Mlp relation;  // c_rel -> C -> C, shared by both attentions
  RelativeAttention cross;
  RelativeAttention self;
  nc::LayerNorm ffn_norm;
  nc::Mlp ffn;
  RetOptions options;

  static RetLayer create(nc::ParameterStore & store, const std::string & name, const RetOptions & opt, nc::Rng & rng);

  // [U x V x C] embedding of the pairwise relative keypoint features.
  nc::Var relative_embedding(nc::Graph & g, const KeyedFeatures & queries, const KeyedFeatures & keys) const;

  // Returns the updated query features [U x C].
  nc::Var operator()(
    nc::Graph & g, const KeyedFeatures & queries, const KeyedFeatures & keys, RetTrace * trace = nullptr) const;
};

}  // namespace polarcast::model

#endif  // POLARCAST__MODEL__RET_HPP_
