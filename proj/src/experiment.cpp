#include "nodefeat/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "nodefeat/error.hpp"
#include "nodefeat/log.hpp"
#include "nodefeat/rng.hpp"
#include "nodefeat/structural.hpp"

namespace nodefeat {

namespace {

// Seed streams derived from a realization seed.
constexpr std::uint64_t kGaeStream = 1;
constexpr std::uint64_t kRandomStream = 2;
constexpr std::uint64_t kGinStream = 3;
constexpr std::uint64_t kRandomTransferStream = 100;  // + qbar

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

[[noreturn]] void invalid(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorKind::InvalidValue, key + " = '" + value + "': " + why);
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) invalid(key, value, "expected a non-negative integer");
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(out)) invalid(key, value, "expected a finite number");
    return out;
  } catch (const std::logic_error&) {
    invalid(key, value, "expected a number");
  }
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(value)) out.push_back(static_cast<std::size_t>(to_unsigned(key, item)));
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  invalid(key, value, "expected true or false");
}

double population_std(const std::vector<double>& values, double mean) {
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

ResultRow summarize(std::string method, std::string dataset, std::vector<double> values) {
  ResultRow row{std::move(method), std::move(dataset), 0.0, 0.0, std::move(values)};
  row.mean = std::accumulate(row.values.begin(), row.values.end(), 0.0) / static_cast<double>(row.values.size());
  row.std = population_std(row.values, row.mean);
  return row;
}

/// Runs `body(r)` for r in [0, count) on up to `jobs` threads.
void for_each_realization(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::mutex mutex;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        std::size_t r = 0;
        {
          std::lock_guard lock(mutex);
          if (next >= count || failure) return;
          r = next++;
        }
        try {
          body(r);
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::string> selected_methods(const ExperimentConfig& config, const std::vector<std::string>& all) {
  if (config.methods.empty()) return all;
  for (const auto& m : config.methods) {
    if (std::find(all.begin(), all.end(), m) == all.end()) {
      throw Error(ErrorKind::InvalidValue, "unknown method '" + m + "' for this experiment");
    }
  }
  // Keep the canonical order.
  std::vector<std::string> out;
  for (const auto& m : all) {
    if (std::find(config.methods.begin(), config.methods.end(), m) != config.methods.end()) out.push_back(m);
  }
  return out;
}

std::vector<int> graph_labels(const Dataset& dataset) {
  std::vector<int> labels;
  labels.reserve(dataset.size());
  for (const auto& g : dataset.graphs) labels.push_back(g.label());
  return labels;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidValue, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));

    if (key == "dataset") {
      config.dataset = value;
    } else if (key == "data_dir") {
      config.data_dir = value;
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else if (key == "split") {
      const auto parts = split_list(value);
      if (parts.size() != 4) invalid(key, value, "expected four ratios val,test,full,miss");
      config.ratios = {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2]),
                       to_double(key, parts[3])};
    } else if (key == "realizations") {
      config.num_realizations = to_unsigned(key, value);
    } else if (key == "seed") {
      config.seed = to_unsigned(key, value);
    } else if (key == "qbar") {
      config.qbar = to_size_list(key, value);
    } else if (key == "nbar") {
      config.nbar = to_unsigned(key, value);
    } else if (key == "gae_encoder") {
      config.gae.encoder_widths = to_size_list(key, value);
    } else if (key == "gae_decoder") {
      config.gae.decoder_hidden = to_size_list(key, value);
    } else if (key == "gae_lr") {
      config.gae.learning_rate = to_double(key, value);
    } else if (key == "gae_epochs") {
      config.gae.epochs = to_unsigned(key, value);
    } else if (key == "gin_layers") {
      config.gin.layers = to_unsigned(key, value);
    } else if (key == "gin_hidden") {
      config.gin.hidden = to_unsigned(key, value);
    } else if (key == "gin_mlp_depth") {
      config.gin.mlp_depth = to_unsigned(key, value);
    } else if (key == "gin_epsilon") {
      config.gin.epsilon = to_double(key, value);
    } else if (key == "gin_lr") {
      config.gin.learning_rate = to_double(key, value);
    } else if (key == "gin_epochs") {
      config.gin.epochs = to_unsigned(key, value);
    } else if (key == "methods") {
      config.methods = split_list(value);
    } else if (key == "jobs") {
      config.jobs = to_unsigned(key, value);
    } else if (key == "plot") {
      config.plot = to_bool(key, value);
    } else {
      throw Error(ErrorKind::UnknownKey, "'" + key + "' at line " + std::to_string(line_no));
    }
  }
  validate(config);
  return config;
}

void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidValue, what); };
  const double ratios[] = {c.ratios.val, c.ratios.test, c.ratios.full, c.ratios.miss};
  for (double r : ratios) {
    if (!(r > 0.0)) fail("split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] + ratios[3] - 1.0) > 1e-9) fail("split ratios must sum to 1");
  if (c.num_realizations < 1) fail("realizations must be >= 1");
  if (c.qbar.empty()) fail("qbar list must not be empty");
  for (auto q : c.qbar) {
    if (q < 1) fail("qbar entries must be >= 1");
  }
  if (c.nbar < 1) fail("nbar must be >= 1");
  if (c.gae.encoder_widths.empty()) fail("gae_encoder needs at least one width");
  for (auto w : c.gae.encoder_widths) {
    if (w < 1) fail("gae_encoder widths must be >= 1");
  }
  for (auto w : c.gae.decoder_hidden) {
    if (w < 1) fail("gae_decoder widths must be >= 1");
  }
  if (!(c.gae.learning_rate > 0.0) || c.gae.epochs < 1) fail("gae_lr must be > 0 and gae_epochs >= 1");
  if (c.gin.layers < 1 || c.gin.hidden < 1 || c.gin.mlp_depth < 1) fail("gin sizes must be >= 1");
  if (!(c.gin.learning_rate > 0.0) || c.gin.epochs < 1) fail("gin_lr must be > 0 and gin_epochs >= 1");
  if (c.jobs < 1) fail("jobs must be >= 1");
  if (c.dataset.empty()) fail("dataset must be set");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UnreadableFile, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

Dataset load_dataset(const ExperimentConfig& config) {
  const auto nested = config.data_dir / config.dataset;
  if (std::filesystem::exists(nested / (config.dataset + "_A.txt"))) {
    return parse_tudataset(nested, config.dataset);
  }
  return parse_tudataset(config.data_dir, config.dataset);
}

std::vector<std::string> recovery_method_ids(const std::vector<std::size_t>& qbar) {
  std::vector<std::string> ids{"zeros", "ones", "random", "degree"};
  for (auto q : qbar) ids.push_back("lse-ng-q" + std::to_string(q));
  for (auto q : qbar) ids.push_back("lse-nn-q" + std::to_string(q));
  return ids;
}

std::vector<std::string> classification_method_ids(const std::vector<std::size_t>& qbar) {
  std::vector<std::string> ids{"true-features", "zeros", "ones", "random", "degree", "not-using-tmiss"};
  for (auto q : qbar) ids.push_back("lse-ng-q" + std::to_string(q));
  for (auto q : qbar) ids.push_back("lse-nn-q" + std::to_string(q));
  return ids;
}

const ResultRow& ResultsTable::row(const std::string& method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  throw Error(ErrorKind::InvalidArgument, "no result row for " + method);
}

Realization prepare_realization(const Dataset& dataset,
                                std::span<const StructuralFeatureMatrix> normalized_features,
                                const ExperimentConfig& config, std::uint64_t seed) {
  Realization r;
  r.seed = seed;
  r.split = split_dataset(dataset, config.ratios, seed);
  if (normalized_features.empty()) return r;
  // Structure only: one shared GAE over every graph of the dataset.
  r.gae = train_gae(dataset.graphs, normalized_features, config.gae, derive_seed(seed, kGaeStream));
  r.embeddings = embed_graphs(r.gae.model, dataset.graphs, normalized_features);
  return r;
}

std::vector<Matrix> estimate_missing(const std::string& method, const Dataset& dataset,
                                     std::span<const Matrix> true_features, const Realization& realization,
                                     const ExperimentConfig& config) {
  const std::size_t f = dataset.node_label_alphabet;
  std::vector<Matrix> out(dataset.size());
  const auto& miss = realization.split.miss;

  const auto baseline = [&](Baseline kind) {
    const std::uint64_t stream = derive_seed(realization.seed, kRandomStream);
    for (std::size_t g : miss) out[g] = baseline_features(kind, dataset.graphs[g], f, derive_seed(stream, g));
  };
  if (method == "zeros") {
    baseline(Baseline::Zeros);
    return out;
  }
  if (method == "ones") {
    baseline(Baseline::Ones);
    return out;
  }
  if (method == "random") {
    baseline(Baseline::Random);
    return out;
  }
  if (method == "degree") {
    baseline(Baseline::Degree);
    return out;
  }

  const bool nearest_nodes_variant = method.rfind("lse-nn-q", 0) == 0;
  const bool random_nodes_variant = method.rfind("lse-ng-q", 0) == 0;
  if (!nearest_nodes_variant && !random_nodes_variant) {
    throw Error(ErrorKind::InvalidValue, "unknown recovery method '" + method + "'");
  }
  const std::size_t q = to_unsigned("method", method.substr(8));
  if (q < 1) throw Error(ErrorKind::InvalidValue, "method '" + method + "' needs qbar >= 1");

  const auto labels = graph_labels(dataset);
  const auto& donors_pool = realization.split.full;
  const std::uint64_t stream = derive_seed(realization.seed, kRandomTransferStream + q);
  for (std::size_t g : miss) {
    if (nearest_nodes_variant) {
      const NeighborPlan plan =
          build_neighbor_plan(g, realization.embeddings, labels, donors_pool, q, config.nbar);
      out[g] = lse_nn_estimate(plan, true_features);
    } else {
      const auto donors = nearest_graphs(g, realization.embeddings, labels, donors_pool, q);
      out[g] = lse_ng_estimate(dataset.graphs[g].num_nodes(), donors, true_features, derive_seed(stream, g));
    }
  }
  return out;
}

RecoveryOutcome run_recovery_experiment(const Dataset& dataset, const ExperimentConfig& config) {
  validate(config);
  const auto true_features = one_hot_features(dataset);
  const auto structural = zscore_normalize(structural_features(dataset));
  const auto methods = selected_methods(config, recovery_method_ids(config.qbar));
  const bool needs_embeddings = std::any_of(methods.begin(), methods.end(), [](const std::string& m) {
    return m.rfind("lse-", 0) == 0;
  });

  const std::size_t k = config.num_realizations;
  std::vector<std::vector<double>> values(methods.size(), std::vector<double>(k, 0.0));
  RecoveryOutcome outcome;
  outcome.table.seeds.resize(k);

  for_each_realization(k, config.jobs, [&](std::size_t r) {
    const std::uint64_t seed = config.seed + r;
    // Realization 0 always gets embeddings for the projection output.
    const bool embed = needs_embeddings || r == 0;
    Realization realization =
        prepare_realization(dataset, embed ? std::span(structural) : std::span<const StructuralFeatureMatrix>(),
                            config, seed);
    if (embed) {
      log::info(dataset.name + " realization " + std::to_string(r) + " seed " + std::to_string(seed) +
                ": GAE loss " + std::to_string(realization.gae.loss_history.front()) + " -> " +
                std::to_string(realization.gae.loss_history.back()));
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto estimates = estimate_missing(methods[m], dataset, true_features, realization, config);
      double total = 0.0;
      for (std::size_t g : realization.split.miss) total += recovery_error(true_features[g], estimates[g]);
      values[m][r] = total / static_cast<double>(realization.split.miss.size());
    }
    outcome.table.seeds[r] = seed;
    if (r == 0) outcome.first = std::move(realization);
  });

  for (std::size_t m = 0; m < methods.size(); ++m) {
    outcome.table.rows.push_back(summarize(methods[m], dataset.name, std::move(values[m])));
  }
  return outcome;
}

ResultsTable run_recovery_experiment(const ExperimentConfig& config) {
  return run_recovery_experiment(load_dataset(config), config).table;
}

ClassificationOutcome run_classification_experiment(const Dataset& dataset, const ExperimentConfig& config) {
  validate(config);
  const auto true_features = one_hot_features(dataset);
  const auto methods = selected_methods(config, classification_method_ids(config.qbar));
  const bool needs_embeddings = std::any_of(methods.begin(), methods.end(), [](const std::string& m) {
    return m.rfind("lse-", 0) == 0;
  });
  std::vector<StructuralFeatureMatrix> structural;
  if (needs_embeddings) structural = zscore_normalize(structural_features(dataset));

  const std::size_t k = config.num_realizations;
  std::vector<std::vector<double>> values(methods.size(), std::vector<double>(k, 0.0));
  std::vector<std::vector<RunRecord>> records(k);
  ClassificationOutcome outcome;
  outcome.table.seeds.resize(k);

  for_each_realization(k, config.jobs, [&](std::size_t r) {
    const std::uint64_t seed = config.seed + r;
    const Realization realization = prepare_realization(dataset, structural, config, seed);
    const auto& split = realization.split;

    const auto samples_of = [&](std::span<const std::size_t> indices, std::span<const Matrix> features) {
      std::vector<GraphSample> samples;
      samples.reserve(indices.size());
      for (std::size_t g : indices) {
        samples.push_back({&dataset.graphs[g], &features[g], dataset.graphs[g].label()});
      }
      return samples;
    };
    const auto val = samples_of(split.val, true_features);
    const auto test = samples_of(split.test, true_features);

    for (std::size_t m = 0; m < methods.size(); ++m) {
      const std::string& method = methods[m];
      std::vector<Matrix> features;
      std::vector<std::size_t> train_indices = split.full;
      if (method == "true-features") {
        features.assign(true_features.begin(), true_features.end());
        train_indices.insert(train_indices.end(), split.miss.begin(), split.miss.end());
      } else if (method == "not-using-tmiss") {
        features.assign(true_features.begin(), true_features.end());
      } else {
        features = estimate_missing(method, dataset, true_features, realization, config);
        for (std::size_t g : split.full) features[g] = true_features[g];
        train_indices.insert(train_indices.end(), split.miss.begin(), split.miss.end());
      }
      const auto train = samples_of(train_indices, features);
      const GinTrainResult trained =
          train_gin(train, val, dataset.num_classes(), config.gin, derive_seed(seed, kGinStream));
      const double test_acc = evaluate_accuracy(trained.model, test);
      values[m][r] = 100.0 * test_acc;
      records[r].push_back({method, dataset.name, seed, trained.best_epoch, trained.best_val_accuracy, test_acc});
      log::info(dataset.name + " realization " + std::to_string(r) + " " + method + ": test accuracy " +
                std::to_string(100.0 * test_acc));
    }
    outcome.table.seeds[r] = seed;
  });

  for (std::size_t m = 0; m < methods.size(); ++m) {
    outcome.table.rows.push_back(summarize(methods[m], dataset.name, std::move(values[m])));
  }
  for (auto& per_realization : records) {
    outcome.runs.insert(outcome.runs.end(), per_realization.begin(), per_realization.end());
  }
  return outcome;
}

ResultsTable run_classification_experiment(const ExperimentConfig& config) {
  return run_classification_experiment(load_dataset(config), config).table;
}

void write_results(const ResultsTable& table, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "results.csv");
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + (out_dir / "results.csv").string());
    out << "method,dataset,mean,std";
    for (std::size_t r = 1; r <= table.seeds.size(); ++r) out << ",r" << r;
    out << '\n' << std::setprecision(12);
    for (const auto& row : table.rows) {
      out << row.method << ',' << row.dataset << ',' << row.mean << ',' << row.std;
      for (double v : row.values) out << ',' << v;
      out << '\n';
    }
    if (!out) throw Error(ErrorKind::IoFailure, "write failed: results.csv");
  }
  std::ofstream seeds(out_dir / "realizations.csv");
  if (!seeds) throw Error(ErrorKind::IoFailure, "cannot write realizations.csv");
  seeds << "realization,seed\n";
  for (std::size_t r = 0; r < table.seeds.size(); ++r) seeds << r + 1 << ',' << table.seeds[r] << '\n';
}

void write_run_records(std::span<const RunRecord> runs, const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  if (fresh) out << "method,dataset,seed,best_epoch,val_accuracy,test_accuracy\n";
  out << std::setprecision(12);
  for (const auto& r : runs) {
    out << r.method << ',' << r.dataset << ',' << r.seed << ',' << r.best_epoch << ',' << r.val_accuracy << ','
        << r.test_accuracy << '\n';
  }
}

void write_embedding_projection(const EmbeddingSet& embeddings, const Dataset& dataset,
                                const std::filesystem::path& out_dir, bool svg) {
  std::filesystem::create_directories(out_dir);
  const Matrix points = stack_node_embeddings(embeddings);
  std::vector<int> labels;
  std::vector<std::pair<std::size_t, std::size_t>> ids;
  labels.reserve(static_cast<std::size_t>(points.rows()));
  for (std::size_t g = 0; g < dataset.size(); ++g) {
    for (std::size_t n = 0; n < dataset.graphs[g].num_nodes(); ++n) {
      labels.push_back(dataset.graphs[g].label());
      ids.emplace_back(g + 1, n);
    }
  }
  const auto projected = project_2d(points, labels);

  std::ofstream out(out_dir / "embeddings_2d.csv");
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write embeddings_2d.csv");
  out << "graph_id,node_id,x,y,class\n" << std::setprecision(12);
  for (std::size_t k = 0; k < projected.size(); ++k) {
    out << ids[k].first << ',' << ids[k].second << ',' << projected[k].x << ',' << projected[k].y << ','
        << projected[k].label << '\n';
  }
  if (!out) throw Error(ErrorKind::IoFailure, "write failed: embeddings_2d.csv");
  if (!svg) return;

  double x0 = projected[0].x, x1 = x0, y0 = projected[0].y, y1 = y0;
  for (const auto& p : projected) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double size = 600.0, margin = 20.0;
  const double sx = (size - 2 * margin) / std::max(x1 - x0, 1e-12);
  const double sy = (size - 2 * margin) / std::max(y1 - y0, 1e-12);
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ofstream img(out_dir / "embeddings_2d.svg");
  if (!img) throw Error(ErrorKind::IoFailure, "cannot write embeddings_2d.svg");
  img << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" << std::setprecision(6);
  for (const auto& p : projected) {
    img << "<circle cx=\"" << margin + (p.x - x0) * sx << "\" cy=\"" << size - margin - (p.y - y0) * sy
        << "\" r=\"1.5\" fill-opacity=\"0.5\" fill=\"" << kColors[static_cast<std::size_t>(p.label) % 10]
        << "\"/>\n";
  }
  img << "</svg>\n";
}

void emit_outputs(const ResultsTable& table, const EmbeddingSet& embeddings, const Dataset& dataset,
                  const std::filesystem::path& out_dir, bool svg) {
  write_results(table, out_dir);
  write_embedding_projection(embeddings, dataset, out_dir, svg);
}

}  // namespace nodefeat
