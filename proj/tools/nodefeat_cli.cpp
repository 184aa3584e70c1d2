#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nodefeat/error.hpp"
#include "nodefeat/experiment.hpp"
#include "nodefeat/log.hpp"
#include "nodefeat/nn/params.hpp"
#include "nodefeat/runtime.hpp"
#include "nodefeat/structural.hpp"

namespace fs = std::filesystem;
using namespace nodefeat;

namespace {

struct GlobalOptions {
  std::optional<fs::path> config;
  std::optional<std::string> dataset;
  std::optional<fs::path> data_dir;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<std::size_t> jobs;
  bool verbose = false;
  bool quiet = false;
};

ExperimentConfig resolve(const GlobalOptions& g) {
  ExperimentConfig c = g.config ? load_config(*g.config) : ExperimentConfig{};
  if (g.dataset) c.dataset = *g.dataset;
  if (g.data_dir) c.data_dir = *g.data_dir;
  if (g.seed) c.seed = *g.seed;
  if (g.out) c.out_dir = *g.out;
  if (g.jobs) c.jobs = *g.jobs;
  validate(c);
  return c;
}

GaeModel model_from_checkpoint(const fs::path& path) {
  GaeModel model;
  model.params = nn::load_params(path);
  while (model.params.contains("gcn." + std::to_string(model.encoder_layers) + ".weight")) ++model.encoder_layers;
  if (model.encoder_layers == 0 || !model.params.contains("dec.0.weight")) {
    throw Error(ErrorKind::InvalidValue, path.string() + " is not a GAE checkpoint");
  }
  model.input_dim = static_cast<std::size_t>(model.params.at("gcn.0.weight").rows());
  model.embedding_dim = static_cast<std::size_t>(
      model.params.at("gcn." + std::to_string(model.encoder_layers - 1) + ".weight").cols());
  return model;
}

void print_table(const ResultsTable& table) {
  std::cout << std::left << std::setw(18) << "method" << std::right << std::setw(12) << "mean" << std::setw(12)
            << "std" << '\n'
            << std::fixed << std::setprecision(4);
  for (const auto& row : table.rows) {
    std::cout << std::left << std::setw(18) << row.method << std::right << std::setw(12) << row.mean
              << std::setw(12) << row.std << '\n';
  }
}

std::vector<int> labels_of(const Dataset& d) {
  std::vector<int> out;
  for (const auto& g : d.graphs) out.push_back(g.label());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  nodefeat::tune_allocator();
  CLI::App app{"Node feature recovery for attribute-missing graphs"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "key = value experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--dataset", g.dataset, "dataset name, e.g. MUTAG");
  app.add_option("--data-dir", g.data_dir, "directory holding <name>/<name>_A.txt");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--jobs", g.jobs, "concurrent realizations");
  app.add_flag("-v,--verbose", g.verbose, "progress messages");
  app.add_flag("-q,--quiet", g.quiet, "suppress warnings");

  auto* parse = app.add_subcommand("parse", "parse a dataset and print its summary");
  std::optional<fs::path> rewrite_dir;
  parse->add_option("--write", rewrite_dir, "write the parsed dataset back in TUDataset format");

  auto* features = app.add_subcommand("features", "write per-node structural features");
  bool normalized = false;
  features->add_flag("--normalized", normalized, "z-score over all nodes of the dataset");

  auto* train = app.add_subcommand("train-gae", "train the graph autoencoder and save a checkpoint");

  auto* embed = app.add_subcommand("embed", "write node and graph embeddings");
  std::optional<fs::path> checkpoint;
  embed->add_option("--model", checkpoint, "checkpoint from train-gae (trained afresh if absent)")
      ->check(CLI::ExistingFile);

  auto* recover = app.add_subcommand("recover", "recover T_miss features for one realization");
  std::string method = "lse-nn-q1";
  std::optional<std::size_t> show_plan;
  recover->add_option("--method", method, "recovery method id");
  recover->add_option("--plan", show_plan, "print the neighbor plan of this graph id (1-based)");

  auto* classify = app.add_subcommand("classify", "train and test GIN for one realization");
  std::string cls_method = "true-features";
  classify->add_option("--method", cls_method, "classification method id");

  auto* experiment = app.add_subcommand("experiment", "run a full experiment over all realizations");
  experiment->require_subcommand(1);
  auto* exp_recovery = experiment->add_subcommand("recovery", "recovery error table");
  auto* exp_class = experiment->add_subcommand("classification", "test accuracy table");
  bool plot = false;
  exp_recovery->add_flag("--plot", plot, "also write embeddings_2d.svg");

  auto* plot_cmd = app.add_subcommand("plot-embeddings", "2D projection of node embeddings");
  bool svg = false;
  plot_cmd->add_flag("--svg", svg, "also write embeddings_2d.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << to_string(ErrorKind::InvalidArgument) << ": " << e.what() << '\n';
    return 2;
  }

  log::set_level(g.quiet ? log::Level::Quiet : g.verbose ? log::Level::Info : log::Level::Warn);

  try {
    ExperimentConfig config = resolve(g);

    if (*exp_recovery || *exp_class) {
      const Dataset dataset = load_dataset(config);
      if (*exp_recovery) {
        const RecoveryOutcome outcome = run_recovery_experiment(dataset, config);
        emit_outputs(outcome.table, outcome.first.embeddings, dataset, config.out_dir, config.plot || plot);
        print_table(outcome.table);
      } else {
        const ClassificationOutcome outcome = run_classification_experiment(dataset, config);
        write_results(outcome.table, config.out_dir);
        fs::remove(config.out_dir / "runs.csv");
        write_run_records(outcome.runs, config.out_dir / "runs.csv");
        print_table(outcome.table);
      }
      return 0;
    }

    const Dataset dataset = load_dataset(config);

    if (*parse) {
      std::size_t edges = 0;
      for (const auto& graph : dataset.graphs) edges += graph.num_edges();
      std::cout << "dataset " << dataset.name << "\ngraphs " << dataset.size() << "\nnodes "
                << dataset.total_nodes() << "\nedges " << edges << "\nnode_features "
                << dataset.node_label_alphabet << "\nclasses " << dataset.num_classes() << '\n';
      if (rewrite_dir) write_tudataset(dataset, *rewrite_dir);
      return 0;
    }

    fs::create_directories(config.out_dir);
    if (*features) {
      auto x = structural_features(dataset);
      if (normalized) x = zscore_normalize(x);
      write_structural_csv(x, config.out_dir / "structural.csv");
      return 0;
    }

    const auto structural = zscore_normalize(structural_features(dataset));
    if (*train) {
      const GaeTrainResult result = train_gae(dataset.graphs, structural, config.gae, config.seed);
      nn::save_params(result.model.params, config.out_dir / "gae.params");
      std::ofstream loss(config.out_dir / "gae_loss.csv");
      loss << "epoch,loss\n" << std::setprecision(17);
      for (std::size_t e = 0; e < result.loss_history.size(); ++e) loss << e << ',' << result.loss_history[e] << '\n';
      std::cout << "loss " << result.loss_history.front() << " -> " << result.loss_history.back() << '\n';
      return 0;
    }

    if (*embed) {
      const GaeModel model = checkpoint ? model_from_checkpoint(*checkpoint)
                                        : train_gae(dataset.graphs, structural, config.gae, config.seed).model;
      const EmbeddingSet e = embed_graphs(model, dataset.graphs, structural);
      write_embeddings_csv(e, config.out_dir / "node_embeddings.csv");
      std::ofstream out(config.out_dir / "graph_embeddings.csv");
      out << "graph_id";
      for (std::size_t k = 1; k <= e.dim; ++k) out << ",z" << k;
      out << '\n' << std::setprecision(17);
      for (std::size_t i = 0; i < e.graphs.size(); ++i) {
        out << i + 1;
        for (double v : e.graphs[i]) out << ',' << v;
        out << '\n';
      }
      return 0;
    }

    if (*plot_cmd) {
      const Realization r = prepare_realization(dataset, structural, config, config.seed);
      write_embedding_projection(r.embeddings, dataset, config.out_dir, svg || config.plot);
      return 0;
    }

    if (*recover) {
      const auto true_features = one_hot_features(dataset);
      const Realization r = prepare_realization(dataset, structural, config, config.seed);
      const auto estimates = estimate_missing(method, dataset, true_features, r, config);
      write_features_csv(r.split.miss, estimates, config.out_dir / "recovered.csv");
      double total = 0.0;
      for (std::size_t i : r.split.miss) total += recovery_error(true_features[i], estimates[i]);
      std::cout << method << " mean recovery error " << std::setprecision(6)
                << total / static_cast<double>(r.split.miss.size()) << '\n';
      if (show_plan) {
        if (*show_plan < 1 || *show_plan > dataset.size()) {
          throw Error(ErrorKind::IndexOutOfRange, "graph id " + std::to_string(*show_plan));
        }
        const auto plan = build_neighbor_plan(*show_plan - 1, r.embeddings, labels_of(dataset), r.split.full,
                                              config.qbar.front(), config.nbar);
        write_neighbor_plan(plan, std::cout);
      }
      return 0;
    }

    if (*classify) {
      ExperimentConfig single = config;
      single.num_realizations = 1;
      single.methods = {cls_method};
      const ClassificationOutcome outcome = run_classification_experiment(dataset, single);
      const RunRecord& run = outcome.runs.front();
      std::cout << cls_method << " best_epoch " << run.best_epoch << " val_accuracy " << run.val_accuracy
                << " test_accuracy " << run.test_accuracy << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
