/* Copyright 2026 The Trackcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Vectorized map encoding: each lane segment (endpoints, attribute, ordinal)
// is embedded by a seeded two-layer map and pooled per polyline with a
// coordinate-wise max; the pooled features fuse into agent queries through
// cross attention.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "trackcast/attention.hpp"
#include "trackcast/common.hpp"
#include "trackcast/scenario.hpp"

namespace trackcast {

inline constexpr int kSegmentInputSize = 6;  // x0, y0, x1, y1, attribute, ordinal

struct MapFeatureSet {
  std::vector<Eigen::VectorXd> features;  // one per non-empty polyline
  int skipped = 0;                        // empty polylines dropped

  Eigen::MatrixXd as_matrix(int d_h) const {
    Eigen::MatrixXd m(static_cast<int>(features.size()), d_h);
    for (std::size_t i = 0; i < features.size(); ++i) {
      m.row(static_cast<int>(i)) = features[i].transpose();
    }
    return m;
  }
};

struct MapEncoderParams {
  Mlp segment_embed;          // kSegmentInputSize -> d_h
  AttentionParams fusion;     // map features into queries

  static MapEncoderParams seeded(int d_h, int d_k, std::uint64_t seed) {
    MapEncoderParams p;
    SeededRng rng(derive_seed(seed, 200));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_h));
    p.segment_embed = Mlp::seeded(kSegmentInputSize, d_h, d_h, scale, rng);
    p.fusion = AttentionParams::seeded(d_h, d_k, derive_seed(seed, 201));
    return p;
  }
};

inline Eigen::VectorXd embed_segment(const MapSegment& segment,
                                     const MapEncoderParams& params) {
  Eigen::VectorXd input(kSegmentInputSize);
  input << segment.start.x, segment.start.y, segment.end.x, segment.end.y,
      static_cast<double>(segment.attribute),
      static_cast<double>(segment.ordinal);
  return params.segment_embed.apply(input);
}

// Per-polyline feature: coordinate-wise max over its segment embeddings.
inline MapFeatureSet encode_polylines(const std::vector<MapPolyline>& polylines,
                                      const MapEncoderParams& params) {
  MapFeatureSet out;
  for (const MapPolyline& polyline : polylines) {
    if (polyline.segments.empty()) {
      ++out.skipped;
      continue;
    }
    Eigen::VectorXd pooled = embed_segment(polyline.segments[0], params);
    for (std::size_t s = 1; s < polyline.segments.size(); ++s) {
      pooled = pooled.cwiseMax(embed_segment(polyline.segments[s], params));
    }
    out.features.push_back(std::move(pooled));
  }
  return out;
}

// Q' = Attention(Q, M) with the usual FFN update; identity when the scene has
// no map features.
inline Eigen::MatrixXd fuse_map(const Eigen::MatrixXd& queries,
                                const MapFeatureSet& map_features,
                                const AttentionParams& params) {
  if (map_features.features.empty()) return queries;
  const Eigen::MatrixXd keys =
      map_features.as_matrix(static_cast<int>(queries.cols()));
  return cross_attention_update(queries, keys, params).updated;
}

}  // namespace trackcast
