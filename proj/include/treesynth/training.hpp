#pragma once

#include <string>
#include <vector>

#include "treesynth/features.hpp"
#include "treesynth/gbt.hpp"
#include "treesynth/trace.hpp"

namespace treesynth {

struct TrainingRow {
  ModelKind kind = ModelKind::Value;
  FeatureVector input;
  double target = 0.0;
  int iteration = 0;
  /// Provenance: source problem and the split it belongs to ("train"/"test").
  std::string problem;
  std::string split = "train";
};

struct RowTags {
  int iteration = 0;
  std::string problem;
  std::string split = "train";
};

/// Value rows for every path state (0.9^D from the last node when solved,
/// 0 otherwise) and, for solved searches, one policy row per child of each
/// non-final path state, with the child's share of the visits as target.
std::vector<TrainingRow> extract_training_data(const SearchTrace& trace, bool solved, const RowTags& tags = {},
                                               std::size_t n = kDefaultHashBase);

/// Trains on the rows of the model's kind. Throws ModelError if there are none.
Model train(const std::vector<TrainingRow>& rows, ModelKind kind, const GbtParams& params);

/// CSV with header kind,iteration,split,problem,target,length,features.
/// Features are run-length encoded: "z<k>" is a run of k zeros, other tokens
/// are single counts.
std::string rows_to_csv(const std::vector<TrainingRow>& rows);
std::vector<TrainingRow> rows_from_csv(const std::string& text);
std::string rle_encode(const FeatureVector& v);
FeatureVector rle_decode(const std::string& text, std::size_t length);

}  // namespace treesynth
