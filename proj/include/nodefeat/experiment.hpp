#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "nodefeat/gae.hpp"
#include "nodefeat/gin.hpp"
#include "nodefeat/graph.hpp"
#include "nodefeat/recovery.hpp"

namespace nodefeat {

/// Everything one experiment needs. `load_config` documents the file keys.
struct ExperimentConfig {
  std::string dataset = "MUTAG";
  std::filesystem::path data_dir = "data";
  SplitRatios ratios;
  std::size_t num_realizations = 15;
  std::uint64_t seed = 0;
  std::vector<std::size_t> qbar{1, 3};
  std::size_t nbar = 3;
  GaeConfig gae;
  GinConfig gin;
  /// Method ids to run; empty means every method of the experiment.
  std::vector<std::string> methods;
  std::filesystem::path out_dir = "results";
  std::size_t jobs = 1;
  bool plot = false;
};

/// Flat `key = value` file; `#` starts a comment; lists are comma separated.
///
///   dataset, data_dir, out_dir            strings / paths
///   split            val,test,full,miss ratios (sum 1)
///   realizations     >= 1
///   seed             master seed; realization r uses seed + r
///   qbar             list of donor-graph counts, each >= 1
///   nbar             donor nodes per recipient node, >= 1
///   gae_encoder      encoder widths, last one is the embedding size
///   gae_decoder      decoder hidden widths (may be empty)
///   gae_lr, gae_epochs
///   gin_layers, gin_hidden, gin_mlp_depth, gin_epsilon, gin_lr, gin_epochs
///   methods          method ids (see method_ids())
///   jobs             concurrent realizations, >= 1
///   plot             true/false: also write embeddings_2d.svg
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);
void validate(const ExperimentConfig& config);

/// Located as `<data_dir>/<name>/` or directly `<data_dir>/`.
Dataset load_dataset(const ExperimentConfig& config);

/// Recovery methods: zeros, ones, random, degree, lse-ng-q<k>, lse-nn-q<k>.
/// Classification adds true-features and not-using-tmiss.
std::vector<std::string> recovery_method_ids(const std::vector<std::size_t>& qbar);
std::vector<std::string> classification_method_ids(const std::vector<std::size_t>& qbar);

struct ResultRow {
  std::string method;
  std::string dataset;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over realizations
  std::vector<double> values;
};

struct ResultsTable {
  std::vector<std::uint64_t> seeds;
  std::vector<ResultRow> rows;

  const ResultRow& row(const std::string& method) const;
};

/// Per-run record of the classification experiment.
struct RunRecord {
  std::string method;
  std::string dataset;
  std::uint64_t seed = 0;
  std::size_t best_epoch = 0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Structure-derived state shared by both experiments for one realization.
struct Realization {
  std::uint64_t seed = 0;
  SplitPlan split;
  GaeTrainResult gae;
  EmbeddingSet embeddings;
};

/// Split, GAE training and embedding for realization seed `seed`. With no
/// structural features only the split is drawn.
Realization prepare_realization(const Dataset& dataset,
                                std::span<const StructuralFeatureMatrix> normalized_features,
                                const ExperimentConfig& config, std::uint64_t seed);

/// Feature estimates for every T_miss graph (indexed by dataset index; other
/// entries are left empty) for one recovery method id.
std::vector<Matrix> estimate_missing(const std::string& method, const Dataset& dataset,
                                     std::span<const Matrix> true_features, const Realization& realization,
                                     const ExperimentConfig& config);

struct RecoveryOutcome {
  ResultsTable table;
  Realization first;  // realization 0, kept for embedding plots
};

ResultsTable run_recovery_experiment(const ExperimentConfig& config);
RecoveryOutcome run_recovery_experiment(const Dataset& dataset, const ExperimentConfig& config);

struct ClassificationOutcome {
  ResultsTable table;  // test accuracy x 100
  std::vector<RunRecord> runs;
};

ResultsTable run_classification_experiment(const ExperimentConfig& config);
ClassificationOutcome run_classification_experiment(const Dataset& dataset, const ExperimentConfig& config);

/// Writes results.csv (method,dataset,mean,std,r1..rK) and realizations.csv
/// (realization,seed).
void write_results(const ResultsTable& table, const std::filesystem::path& out_dir);
void write_run_records(std::span<const RunRecord> runs, const std::filesystem::path& path);

/// embeddings_2d.csv (graph_id,node_id,x,y,class) and, when `svg` is set,
/// embeddings_2d.svg colored by class.
void write_embedding_projection(const EmbeddingSet& embeddings, const Dataset& dataset,
                                const std::filesystem::path& out_dir, bool svg);

/// Results table plus the embedding projection of `embeddings`.
void emit_outputs(const ResultsTable& table, const EmbeddingSet& embeddings, const Dataset& dataset,
                  const std::filesystem::path& out_dir, bool svg);

}  // namespace nodefeat
