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

#include "trackcast/attention.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numeric>
#include <random>

using namespace trackcast;

namespace {

Eigen::MatrixXd random_rows(SeededRng& rng, int rows, int cols, double range) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-range, range);
  }
  return m;
}

}  // namespace

TEST_CASE("softmax is a shifted-invariant distribution") {
  SeededRng rng(11);
  for (int it = 0; it < 100; ++it) {
    const int n = 1 + static_cast<int>(rng.uniform(0.0, 8.0));
    Eigen::VectorXd logits(n);
    for (int i = 0; i < n; ++i) logits[i] = rng.uniform(-30.0, 30.0);
    const Eigen::VectorXd p = softmax(logits);
    CHECK(std::abs(p.sum() - 1.0) < 1e-9);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() <= 1.0);

    const double shift = rng.uniform(-100.0, 100.0);
    const Eigen::VectorXd shifted =
        softmax((logits.array() + shift).matrix());
    CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK_THROWS_AS(softmax(Eigen::VectorXd()), InvalidInputError);
}

TEST_CASE("layer norm has zero mean and unit variance before gain and bias") {
  SeededRng rng(12);
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd x =
        random_rows(rng, 1, 32, 10.0).row(0).transpose();
    const Eigen::VectorXd y = layer_norm(x);
    CHECK(std::abs(y.mean()) < 1e-6);
    const double var = (y.array() - y.mean()).square().mean();
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("single key-value feature receives weight exactly 1") {
  const int d_h = 16;
  const AttentionParams params = AttentionParams::seeded(d_h, 8, 42);
  SeededRng rng(13);
  const Eigen::MatrixXd q = random_rows(rng, 1, d_h, 1.0);
  const Eigen::MatrixXd kv = random_rows(rng, 1, d_h, 1.0);

  const AttentionResult result = cross_attention_update(q, kv, params);
  CHECK(result.weights(0, 0) == 1.0);

  // output = FFN(q + v-projection of the single feature)
  const Eigen::VectorXd attended =
      (kv * params.w_value).row(0).transpose();
  const Eigen::VectorXd want =
      ffn_update(q.row(0).transpose() + attended, params);
  CHECK((result.updated.row(0).transpose() - want).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("duplicate features receive uniform weights") {
  const int d_h = 16;
  const AttentionParams params = AttentionParams::seeded(d_h, 8, 43);
  SeededRng rng(14);
  const Eigen::MatrixXd q = random_rows(rng, 2, d_h, 1.0);
  const Eigen::VectorXd feature = random_rows(rng, 1, d_h, 1.0).row(0);
  Eigen::MatrixXd kv(3, d_h);
  kv.row(0) = feature;
  kv.row(1) = feature;
  kv.row(2) = feature;

  const AttentionResult result = cross_attention_update(q, kv, params);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(result.weights(i, j) == Catch::Approx(1.0 / 3.0).margin(1e-12));
    }
  }
}

TEST_CASE("seeded case matches a step-by-step arithmetic oracle") {
  const int d_h = 12;
  const int d_k = 4;
  const AttentionParams params = AttentionParams::seeded(d_h, d_k, 7);
  SeededRng rng(15);
  const Eigen::MatrixXd queries = random_rows(rng, 2, d_h, 1.0);
  const Eigen::MatrixXd features = random_rows(rng, 3, d_h, 1.0);

  const AttentionResult result =
      cross_attention_update(queries, features, params);

  // Oracle: explicit loops, no shared code path with the implementation.
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd logits(3);
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int a = 0; a < d_k; ++a) {
        double qa = 0.0;
        double ka = 0.0;
        for (int b = 0; b < d_h; ++b) {
          qa += queries(i, b) * params.w_query(b, a);
          ka += features(j, b) * params.w_key(b, a);
        }
        dot += qa * ka;
      }
      logits[j] = dot / std::sqrt(static_cast<double>(d_k));
    }
    double max_logit = logits.maxCoeff();
    Eigen::VectorXd weights(3);
    double norm = 0.0;
    for (int j = 0; j < 3; ++j) {
      weights[j] = std::exp(logits[j] - max_logit);
      norm += weights[j];
    }
    weights /= norm;

    Eigen::VectorXd attended = Eigen::VectorXd::Zero(d_h);
    for (int j = 0; j < 3; ++j) {
      for (int b = 0; b < d_h; ++b) {
        double vb = 0.0;
        for (int a = 0; a < d_h; ++a) vb += features(j, a) * params.w_value(a, b);
        attended[b] += weights[j] * vb;
      }
    }

    Eigen::VectorXd z = queries.row(i).transpose() + attended;
    Eigen::VectorXd hidden = params.ffn.w1.transpose() * z + params.ffn.b1;
    for (int a = 0; a < hidden.size(); ++a) hidden[a] = std::max(0.0, hidden[a]);
    Eigen::VectorXd mlp_out = params.ffn.w2.transpose() * hidden + params.ffn.b2;
    Eigen::VectorXd pre_norm = z + mlp_out;
    const double mean = pre_norm.mean();
    double var = 0.0;
    for (int a = 0; a < d_h; ++a) var += (pre_norm[a] - mean) * (pre_norm[a] - mean);
    var /= d_h;
    Eigen::VectorXd want(d_h);
    for (int a = 0; a < d_h; ++a) {
      const double normed = (pre_norm[a] - mean) / std::sqrt(var + 1e-12);
      want[a] = params.ln_gain[a] * normed + params.ln_bias[a];
    }

    CHECK((result.weights.row(i).transpose() - weights).cwiseAbs().maxCoeff() <
          1e-9);
    CHECK((result.updated.row(i).transpose() - want).cwiseAbs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("attention invariants on seeded cases") {
  SeededRng rng(16);
  const int d_h = 24;
  const AttentionParams params = AttentionParams::seeded(d_h, 8, 99);
  for (int it = 0; it < 100; ++it) {
    const int n_q = 1 + static_cast<int>(rng.uniform(0.0, 4.0));
    const int n_l = 1 + static_cast<int>(rng.uniform(0.0, 6.0));
    const Eigen::MatrixXd q = random_rows(rng, n_q, d_h, 2.0);
    const Eigen::MatrixXd kv = random_rows(rng, n_l, d_h, 2.0);
    const AttentionResult base = cross_attention_update(q, kv, params);

    for (int i = 0; i < n_q; ++i) {
      CHECK(std::abs(base.weights.row(i).sum() - 1.0) < 1e-9);
      CHECK(base.weights.row(i).minCoeff() >= 0.0);
      CHECK(base.weights.row(i).maxCoeff() <= 1.0);
    }

    // Permuting the key-value features leaves the output unchanged.
    std::vector<int> perm(n_l);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n_l - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform(0.0, i + 1.0));
      std::swap(perm[i], perm[j]);
    }
    Eigen::MatrixXd shuffled(n_l, d_h);
    for (int i = 0; i < n_l; ++i) shuffled.row(i) = kv.row(perm[i]);
    const AttentionResult permuted = cross_attention_update(q, shuffled, params);
    CHECK((permuted.updated - base.updated).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("dimension mismatches and empty key sets are rejected") {
  const AttentionParams params = AttentionParams::seeded(8, 4, 1);
  SeededRng rng(17);
  const Eigen::MatrixXd q8 = random_rows(rng, 1, 8, 1.0);
  const Eigen::MatrixXd q9 = random_rows(rng, 1, 9, 1.0);
  const Eigen::MatrixXd kv8 = random_rows(rng, 2, 8, 1.0);
  CHECK_THROWS_AS(cross_attention_update(q9, kv8, params), InvalidInputError);
  CHECK_THROWS_AS(cross_attention_update(q8, Eigen::MatrixXd(0, 8), params),
                  InvalidInputError);
  CHECK_THROWS_AS(params.ffn.apply(Eigen::VectorXd::Zero(9)), InvalidInputError);
}

TEST_CASE("seeded parameters are deterministic") {
  const AttentionParams a = AttentionParams::seeded(16, 8, 1234);
  const AttentionParams b = AttentionParams::seeded(16, 8, 1234);
  CHECK(a.w_query == b.w_query);
  CHECK(a.w_key == b.w_key);
  CHECK(a.w_value == b.w_value);
  CHECK(a.ffn.w1 == b.ffn.w1);
  CHECK(a.ln_gain == b.ln_gain);

  const AttentionParams c = AttentionParams::seeded(16, 8, 1235);
  CHECK(a.w_query != c.w_query);

  // Uniform range scales as 1/sqrt(d_h).
  const double bound = 1.0 / std::sqrt(16.0);
  CHECK(a.w_query.cwiseAbs().maxCoeff() <= bound);
  CHECK(a.ffn.w2.cwiseAbs().maxCoeff() <= bound);
}
