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

// Scaled dot-product cross attention and the FFN update used to refresh agent
// queries. All parameters are seeded constants drawn uniformly from
// [-1/sqrt(d_h), +1/sqrt(d_h)] via SeededRng; nothing here is trained.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "trackcast/common.hpp"

namespace trackcast {

inline Eigen::MatrixXd seeded_matrix(int rows, int cols, double scale,
                                     SeededRng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(-scale, scale);
    }
  }
  return m;
}

inline Eigen::VectorXd seeded_vector(int n, double scale, SeededRng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

// Numerically stable softmax (max subtraction), rows sum to 1 exactly up to
// rounding.
inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  if (logits.size() == 0) {
    throw InvalidInputError("softmax: empty logits");
  }
  const double max_logit = logits.maxCoeff();
  Eigen::VectorXd exps = (logits.array() - max_logit).exp();
  return exps / exps.sum();
}

inline constexpr double kLayerNormEpsilon = 1e-12;

// Normalizes to per-vector mean 0 and variance 1 (population variance); gain
// and bias are applied by the caller.
inline Eigen::VectorXd layer_norm(const Eigen::VectorXd& x) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  return (x.array() - mean) / std::sqrt(var + kLayerNormEpsilon);
}

// Plain two-layer feedforward map with a ReLU hidden layer.
struct Mlp {
  Eigen::MatrixXd w1;  // in x hidden
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // hidden x out
  Eigen::VectorXd b2;

  static Mlp seeded(int in, int hidden, int out, double scale, SeededRng& rng) {
    Mlp mlp;
    mlp.w1 = seeded_matrix(in, hidden, scale, rng);
    mlp.b1 = seeded_vector(hidden, scale, rng);
    mlp.w2 = seeded_matrix(hidden, out, scale, rng);
    mlp.b2 = seeded_vector(out, scale, rng);
    return mlp;
  }

  int input_size() const { return static_cast<int>(w1.rows()); }
  int output_size() const { return static_cast<int>(w2.cols()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (x.size() != w1.rows()) {
      throw InvalidInputError("Mlp: input dimension mismatch");
    }
    const Eigen::VectorXd hidden =
        ((w1.transpose() * x + b1).array().max(0.0)).matrix();
    return w2.transpose() * hidden + b2;
  }
};

// Projection matrices and the residual FFN of one attention block. w_query
// and w_key map d_h -> d_k; w_value maps d_h -> d_h so the attended vector
// can be added back onto the query.
struct AttentionParams {
  Eigen::MatrixXd w_query;  // d_h x d_k
  Eigen::MatrixXd w_key;    // d_h x d_k
  Eigen::MatrixXd w_value;  // d_h x d_h
  Mlp ffn;                  // d_h -> d_h
  Eigen::VectorXd ln_gain;
  Eigen::VectorXd ln_bias;
  std::uint64_t seed = 0;

  static AttentionParams seeded(int d_h, int d_k, std::uint64_t seed) {
    if (d_h <= 0 || d_k <= 0) {
      throw ConfigError("AttentionParams: dimensions must be positive");
    }
    SeededRng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_h));
    AttentionParams p;
    p.seed = seed;
    p.w_query = seeded_matrix(d_h, d_k, scale, rng);
    p.w_key = seeded_matrix(d_h, d_k, scale, rng);
    p.w_value = seeded_matrix(d_h, d_h, scale, rng);
    p.ffn = Mlp::seeded(d_h, d_h, d_h, scale, rng);
    p.ln_gain =
        (seeded_vector(d_h, scale, rng).array() + 1.0).matrix();
    p.ln_bias = seeded_vector(d_h, scale, rng);
    return p;
  }

  int d_model() const { return static_cast<int>(w_query.rows()); }
  int d_key() const { return static_cast<int>(w_query.cols()); }
};

// FFN(z) = gain .* LayerNorm(z + mlp(z)) + bias.
inline Eigen::VectorXd ffn_update(const Eigen::VectorXd& z,
                                  const AttentionParams& params) {
  const Eigen::VectorXd normed = layer_norm(z + params.ffn.apply(z));
  return (params.ln_gain.array() * normed.array() + params.ln_bias.array())
      .matrix();
}

struct AttentionResult {
  Eigen::MatrixXd updated;  // n_queries x d_h
  Eigen::MatrixXd weights;  // n_queries x n_keys, rows sum to 1
};

// Q_tilde = softmax(Q W^Q (L W^K)^T / sqrt(d_k)) (L W^V); output rows are
// FFN(Q + Q_tilde). Queries and key-value features are rows of d_h.
inline AttentionResult cross_attention_update(const Eigen::MatrixXd& queries,
                                              const Eigen::MatrixXd& keys_values,
                                              const AttentionParams& params) {
  if (keys_values.rows() == 0) {
    throw InvalidInputError("cross_attention_update: empty key-value set");
  }
  if (queries.cols() != params.d_model() ||
      keys_values.cols() != params.d_model()) {
    throw InvalidInputError("cross_attention_update: dimension mismatch");
  }
  const Eigen::MatrixXd q_proj = queries * params.w_query;        // n_q x d_k
  const Eigen::MatrixXd k_proj = keys_values * params.w_key;      // n_l x d_k
  const Eigen::MatrixXd v_proj = keys_values * params.w_value;    // n_l x d_h
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(params.d_key()));
  const Eigen::MatrixXd logits = q_proj * k_proj.transpose() * inv_sqrt_dk;

  AttentionResult result;
  result.weights.resize(queries.rows(), keys_values.rows());
  result.updated.resize(queries.rows(), queries.cols());
  for (int i = 0; i < queries.rows(); ++i) {
    const Eigen::VectorXd w = softmax(logits.row(i).transpose());
    result.weights.row(i) = w.transpose();
    const Eigen::VectorXd attended = v_proj.transpose() * w;
    result.updated.row(i) =
        ffn_update(queries.row(i).transpose() + attended, params).transpose();
  }
  return result;
}

}  // namespace trackcast
