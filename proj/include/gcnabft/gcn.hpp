#pragma once

#include <utility>
#include <vector>

#include "gcnabft/checker.hpp"
#include "gcnabft/graph.hpp"

namespace gcnabft {

// One graph-convolution layer: H_out = sigma(S * H_in * W). The per-row
// weight checksum w_r = W*e is part of the layer state, computed during
// weight loading.
struct GcnLayer {
  DenseMatrix weight;
  DenseMatrix weight_row_checksum;  // W*e, length f_in
  bool apply_activation = true;
};

inline GcnLayer make_layer(DenseMatrix weight, bool apply_activation) {
  OpCounter offline;
  DenseMatrix w_r = row_checksum(weight, offline);
  return GcnLayer{std::move(weight), std::move(w_r), apply_activation};
}

// Loader-side constructor for externally supplied check state (e.g. fixtures
// exercising a corrupted w_r). Shape-checked only.
inline GcnLayer make_layer_with_checksum(DenseMatrix weight,
                                         DenseMatrix weight_row_checksum,
                                         bool apply_activation) {
  if (weight_row_checksum.rows() != weight.rows() ||
      weight_row_checksum.cols() != 1)
    throw DimensionMismatch("weight checksum must be f_in x 1");
  return GcnLayer{std::move(weight), std::move(weight_row_checksum),
                  apply_activation};
}

struct GcnModel {
  NormalizedAdjacency adjacency;
  std::vector<GcnLayer> layers;

  std::size_t num_nodes() const { return adjacency.matrix.rows(); }
};

// Builds a model from per-layer weights; ReLU between layers, none after the
// last (logits are returned raw).
inline GcnModel make_model(NormalizedAdjacency adjacency,
                           std::vector<DenseMatrix> weights) {
  if (weights.empty())
    throw DimensionMismatch("model needs at least one layer");
  GcnModel model{std::move(adjacency), {}};
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (k > 0 && weights[k - 1].cols() != weights[k].rows())
      throw DimensionMismatch("layer dimensions do not chain");
    const bool last = k + 1 == weights.size();
    model.layers.push_back(make_layer(std::move(weights[k]), !last));
  }
  return model;
}

// Forward pass of one layer: X = H_in*W, H_pre = S*X, checker verdicts on
// H_pre before the activation, then ReLU if the layer applies one.
// Activation operations are not counted.
struct LayerForwardResult {
  DenseMatrix h_out;
  std::vector<CheckVerdict> verdicts;
};

inline LayerForwardResult layer_forward(const GcnModel& model,
                                        std::size_t layer_index, MatrixView h_in,
                                        CheckerKind checker, double tau,
                                        LayerCheckCounters& counters,
                                        LayerHooks hooks = {}) {
  const GcnLayer& layer = model.layers.at(layer_index);
  if (h_in.cols() != layer.weight.rows())
    throw DimensionMismatch("layer_forward: H_in.cols != layer f_in");
  LayerCheckResult check = run_check_layer(
      checker, model.adjacency.matrix, model.adjacency.col_checksum_s_c, h_in,
      layer.weight, layer.weight_row_checksum, tau, counters, hooks);
  DenseMatrix h_out = std::move(*check.h_pre);
  if (layer.apply_activation) h_out = relu(std::move(h_out));
  return LayerForwardResult{std::move(h_out), std::move(check.verdicts)};
}

struct InferenceResult {
  DenseMatrix logits;
  std::vector<std::vector<CheckVerdict>> verdicts;  // per layer
};

// Folds layer_forward across the model. Input features may be sparse (first
// layer only); intermediate activations stay dense.
inline InferenceResult infer(const GcnModel& model, MatrixView features,
                             CheckerKind checker, double tau,
                             std::vector<LayerCheckCounters>& counters,
                             const std::vector<LayerHooks>* hooks = nullptr) {
  if (features.rows() != model.num_nodes())
    throw DimensionMismatch("infer: feature rows != graph nodes");
  counters.resize(model.layers.size());

  InferenceResult out{DenseMatrix(1, 1), {}};
  DenseMatrix current(1, 1);
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    MatrixView input = k == 0 ? features : MatrixView(current);
    LayerHooks layer_hooks = hooks ? (*hooks)[k] : LayerHooks{};
    LayerForwardResult step = layer_forward(model, k, input, checker, tau,
                                            counters[k], layer_hooks);
    current = std::move(step.h_out);
    out.verdicts.push_back(std::move(step.verdicts));
  }
  out.logits = std::move(current);
  return out;
}

// Per-row argmax with ties broken toward the lowest class index.
inline std::vector<std::size_t> classify(const DenseMatrix& logits) {
  std::vector<std::size_t> labels(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    labels[i] = best;
  }
  return labels;
}

}  // namespace gcnabft
