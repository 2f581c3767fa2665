#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "treesynth/features.hpp"

namespace treesynth {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { Policy, Value };
const char* model_kind_name(ModelKind k);

struct GbtParams {
  int max_depth = 20;
  int rounds = 100;
  double learning_rate = 0.3;
  /// L2 penalty on leaf weights.
  double lambda = 1.0;
  std::size_t min_child_rows = 1;
  /// Recorded for reproducibility; the exact greedy learner draws no randomness.
  std::uint64_t seed = 0;

  static GbtParams for_kind(ModelKind k) {
    GbtParams p;
    p.max_depth = k == ModelKind::Policy ? 25 : 20;
    return p;
  }
};

struct TreeNode {
  /// -1 marks a leaf.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  /// Leaf score, already scaled by the learning rate.
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double eval(const FeatureVector& v) const;
};

/// Gradient-boosted regression trees. Immutable once trained.
class Model {
 public:
  Model() = default;
  Model(ModelKind kind, std::size_t input_length, double base_score)
      : kind_(kind), input_length_(input_length), base_score_(base_score) {}

  ModelKind kind() const { return kind_; }
  std::size_t input_length() const { return input_length_; }
  double base_score() const { return base_score_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  const GbtParams& params() const { return params_; }
  const std::vector<int>& iterations() const { return iterations_; }

  void set_params(const GbtParams& p) { params_ = p; }
  void set_iterations(std::vector<int> its) { iterations_ = std::move(its); }
  void add_tree(RegressionTree t) { trees_.push_back(std::move(t)); }

  /// base + sum of leaf scores, clamped to [0, 1].
  /// Throws ModelError when the input length differs from the trained length.
  double predict(const FeatureVector& v) const;
  /// Same without clamping.
  double raw(const FeatureVector& v) const;

  std::string to_json() const;
  static Model from_json(const std::string& text);
  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  ModelKind kind_ = ModelKind::Value;
  std::size_t input_length_ = 0;
  double base_score_ = 0.0;
  std::vector<RegressionTree> trees_;
  GbtParams params_;
  std::vector<int> iterations_;
};

/// A model with its leading input block fixed, for repeated predictions that
/// share a prefix (one search shares the constraint's features). Splits on the
/// prefix are resolved once; predict(tail) equals model.predict(prefix ++ tail)
/// bit for bit.
class BoundModel {
 public:
  BoundModel(const Model& model, const FeatureVector& prefix);

  std::size_t input_length() const { return input_length_; }
  double predict(const FeatureVector& tail) const;

 private:
  struct Node {
    /// -1 marks a leaf, whose `left` indexes values_.
    std::int32_t feature;
    /// Counts below the cut go left.
    std::uint32_t cut;
    std::uint32_t left;
    std::uint32_t right;
  };
  std::uint32_t bind(const RegressionTree& t, std::int32_t i, const FeatureVector& prefix);

  std::size_t input_length_ = 0;
  double base_score_ = 0.0;
  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<std::uint32_t> roots_;
};

/// Squared-error boosting with exact greedy splits (x < threshold goes left).
/// Throws ModelError on an empty dataset or mismatched vector lengths.
Model train_gbt(const std::vector<FeatureVector>& inputs, const std::vector<double>& targets,
                ModelKind kind, const GbtParams& params);

}  // namespace treesynth
