#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sopt/features.hpp"
#include "sopt/io.hpp"
#include "sopt/semantics.hpp"
#include "sopt/synth.hpp"

namespace sopt {

// Labeled (pattern, candidate) feature rows plus the tabular plumbing around
// them: class balancing, stratified splitting, mutual-information scoring,
// feature selection and standardization.

struct DatasetRow {
  FeatureVector features{};
  int label = 0;      // 1 when the candidate is equivalent to the pattern
  bool sampled = false;
  std::string lhs_id;
  std::string rhs_id;
};

struct GenerateConfig {
  SynthConfig synth;
  OracleConfig oracle;
  FeatureConfig features;
  CostModel costs = CostModel::standard();
};

struct GenerateStats {
  long lhs_count = 0;
  long candidates = 0;
  long unknown_dropped = 0;  // timeouts are excluded from the dataset
};

// Enumerate candidates per pattern, label each with the equivalence oracle
// and extract features. Candidates whose verdict stays Unknown are dropped.
// The per-pattern oracle budget is shared across that pattern's candidates.
std::vector<DatasetRow> generate_rows(
    const std::vector<std::pair<std::string, LhsPattern>>& patterns,
    const GenerateConfig& cfg, GenerateStats* stats = nullptr);

CsvTable rows_to_csv(const std::vector<DatasetRow>& rows);
std::vector<DatasetRow> rows_from_csv(const CsvTable& table);

// Undersample the majority class down to the minority count by replacing it
// with k-means centroids (k = minority size) computed in standardized
// feature space and mapped back. Returns minority rows first, centroid rows
// after. Balanced or single-class inputs pass through unchanged.
std::vector<DatasetRow> balance_cluster_centroids(
    const std::vector<DatasetRow>& rows, uint64_t seed);

struct SplitResult {
  std::vector<DatasetRow> train;
  std::vector<DatasetRow> test;
};

// Per-class shuffle and cut: each class contributes round(train_ratio * n)
// rows to the train side. Classes are processed in label order off one RNG
// stream, so results are reproducible for a given seed.
SplitResult stratified_split(const std::vector<DatasetRow>& rows,
                             double train_ratio, uint64_t seed);

// Mutual information (nats) between each feature and the label, estimated
// with equal-width binning. Constant features score 0.
std::vector<double> mutual_information(const std::vector<DatasetRow>& rows,
                                       int bins = 10);

// Indices of the k highest scores (ties broken by lower index), ascending.
std::vector<int> select_k_best(const std::vector<double>& scores, int k);

struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;  // population; constant columns get 1 to stay finite

  static Scaler fit(const std::vector<std::vector<double>>& x);
  std::vector<double> transform(const std::vector<double>& v) const;
};

// Column subset of each row's features per the selection mask.
std::vector<std::vector<double>> feature_matrix(
    const std::vector<DatasetRow>& rows, const std::vector<int>& mask);
std::vector<int> label_vector(const std::vector<DatasetRow>& rows);

}  // namespace sopt
