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

#include "polarcast/model/ret.hpp"

#include "polarcast/error.hpp"

namespace polarcast::model
{

using nc::Var;

void KeyedFeatures::check(const char * who) const
{
  const auto & s = features.shape();
  if (s.size() != 2 || s[0] != keypoints.size() || mask.size() != keypoints.size()) {
    throw ShapeError(
      std::string(who) + ": features " + nc::shape_str(s) + " with " + std::to_string(keypoints.size()) +
      " keypoints and " + std::to_string(mask.size()) + " mask entries");
  }
}

RelativeAttention RelativeAttention::create(
  nc::ParameterStore & store, const std::string & name, const RetOptions & opt, bool relative, nc::Rng & rng)
{
  const std::size_t c = opt.hidden;
  RelativeAttention a;
  a.relative = relative;
  a.heads = opt.heads;
  a.dropout = opt.dropout;
  a.query_norm = nc::LayerNorm::create(store, name + ".query_norm", c);
  a.key_norm = nc::LayerNorm::create(store, name + ".key_norm", c);
  a.query = nc::Linear::create(store, name + ".query", c, c, rng, false);
  if (relative) {
    a.aug_key = nc::Linear::create(store, name + ".aug_key", c, c, rng);
    a.aug_relation = nc::Linear::create(store, name + ".aug_relation", c, c, rng, false);
  }
  a.aug_k = nc::Linear::create(store, name + ".aug_k", c, c, rng, false);
  a.aug_v = nc::Linear::create(store, name + ".aug_v", c, c, rng);
  a.output = nc::Linear::create(store, name + ".output", c, c, rng);
  return a;
}

Var RelativeAttention::operator()(
  nc::Graph & g, Var x, Var kv, Var relation, const nc::Mask & mask, nc::Tensor * probs) const
{
  const std::size_t nu = x.shape()[0];
  const std::size_t nv = kv.shape()[0];
  Var q = query(g, query_norm(g, x));
  Var kn = key_norm(g, kv);
  Var att;
  if (relative) {
    Var hidden = nc::gelu(nc::add_broadcast(aug_relation(g, relation), aug_key(g, kn)));
    att = nc::attention(q, aug_k(g, hidden), aug_v(g, hidden), mask, heads, probs);
  } else {
    att = nc::dense_attention(q, aug_k(g, kn), aug_v(g, kn), mask, heads);
    if (probs) {
      *probs = nc::Tensor();
    }
  }
  std::vector<double> any(nu, 0.0);
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t v = 0; v < nv; ++v) {
      if (mask[u * nv + v]) {
        any[u] = 1.0;
        break;
      }
    }
  }
  return nc::scale_rows(nc::dropout(output(g, att), dropout), any);
}

RetLayer RetLayer::create(nc::ParameterStore & store, const std::string & name, const RetOptions & opt, nc::Rng & rng)
{
  RetLayer l;
  l.options = opt;
  const std::size_t c = opt.hidden;
  if (opt.relative || opt.relative_self) {
    l.relation = nc::Mlp::create(store, name + ".relation", {relation_channels(opt.coords), c, c}, rng);
  }
  l.cross = RelativeAttention::create(store, name + ".cross", opt, opt.relative, rng);
  l.self = RelativeAttention::create(store, name + ".self", opt, opt.relative_self, rng);
  l.ffn_norm = nc::LayerNorm::create(store, name + ".ffn_norm", c);
  l.ffn = nc::Mlp::create(store, name + ".ffn", {c, 2 * c, c}, rng, opt.dropout);
  return l;
}

Var RetLayer::relative_embedding(nc::Graph & g, const KeyedFeatures & queries, const KeyedFeatures & keys) const
{
  if (relation.layers.empty()) {
    throw ConfigError("relative_embedding: layer built without relative embeddings");
  }
  if (queries.points.valid() || keys.points.valid()) {
    const KeypointVars qp = queries.points.valid() ? queries.points : constant_keypoints(g, queries.keypoints);
    const KeypointVars kp = keys.points.valid() ? keys.points : constant_keypoints(g, keys.keypoints);
    return relation(g, relative_features(qp, kp, options.coords));
  }
  return relation(g, g.constant(relative_features(queries.keypoints, keys.keypoints, options.coords)));
}

Var RetLayer::operator()(nc::Graph & g, const KeyedFeatures & queries, const KeyedFeatures & keys, RetTrace * trace) const
{
  queries.check("ret_layer queries");
  keys.check("ret_layer keys");
  if (queries.features.shape()[1] != options.hidden || keys.features.shape()[1] != options.hidden) {
    throw ShapeError(
      "ret_layer: expected " + std::to_string(options.hidden) + " channels, got queries " +
      nc::shape_str(queries.features.shape()) + " and keys " + nc::shape_str(keys.features.shape()));
  }
  // In the encoder queries and keys are the same elements, so one relative
  // embedding serves both attentions.
  const bool same = queries.keypoints == keys.keypoints && queries.mask == keys.mask;
  Var cross_rel;
  if (options.relative) {
    cross_rel = relative_embedding(g, queries, keys);
  }
  Var x = queries.features;
  x = nc::add(
    x, cross(g, x, keys.features, cross_rel, pair_mask(queries.mask, keys.mask), trace ? &trace->cross : nullptr));

  Var self_rel;
  if (options.relative_self) {
    self_rel = same && options.relative ? cross_rel : relative_embedding(g, queries, queries);
  }
  x = nc::add(x, self(g, x, x, self_rel, pair_mask(queries.mask, queries.mask), trace ? &trace->self : nullptr));
  return nc::add(x, nc::dropout(ffn(g, ffn_norm(g, x)), options.dropout));
}

}  // namespace polarcast::model
