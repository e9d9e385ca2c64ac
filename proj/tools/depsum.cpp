// depsum: transcript summarization, lexicon induction and depression
// classification pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "depsum/error.hpp"
#include "depsum/kernels.hpp"
#include "depsum/pipeline.hpp"

namespace {

using depsum::pipeline::Context;
using depsum::pipeline::PipelineConfig;

void add_options(CLI::App& app, PipelineConfig& c, std::vector<double>& weights, int& threads) {
  app.add_option("--corpus", c.corpus_dir, "corpus root (transcripts/ and *_split.csv)");
  app.add_option("--transcripts", c.transcripts_dir, "transcripts directory");
  app.add_option("--train-labels", c.train_labels, "train label CSV");
  app.add_option("--dev-labels", c.dev_labels, "dev label CSV");
  app.add_option("--test-labels", c.test_labels, "test label CSV");
  app.add_option("--out", c.out_dir, "work directory for outputs");
  app.add_option("--vectors", c.vectors_file, "vectors JSONL (import source / file backend)");

  app.add_option("--n", c.n, "n-gram size (6..9)");
  app.add_flag("--allow-any-n", c.allow_any_n, "accept n outside 6..9");
  app.add_option("--lambda", c.lambda, "MMR relevance/diversity trade-off");
  app.add_option("--budget", c.budget, "summary token budget");
  app.add_option("--chunk-tokens", c.chunk_tokens, "max tokens per chunk");
  app.add_option("--backend", c.backend, "embedding backend: hashed | file");
  app.add_option("--dim", c.dim, "hashed embedding dimension");
  app.add_option("--seed", c.seed, "root seed");

  app.add_option("--fc-dims", c.net.fc_dims, "expansion widths")->delimiter(',');
  app.add_option("--conv1-kernel", c.net.conv1.kernel);
  app.add_option("--conv1-channels", c.net.conv1.channels);
  app.add_option("--conv2-kernel", c.net.conv2.kernel);
  app.add_option("--conv2-channels", c.net.conv2.channels);
  app.add_option("--head-dims", c.net.head_dims, "hidden head widths")->delimiter(',');
  app.add_option("--dropout", c.net.dropout_p);
  app.add_option("--gamma", c.train.gamma, "focal loss gamma");
  app.add_option("--class-weights", weights, "NotDepressed,Depressed")->delimiter(',')->expected(2);
  app.add_option("--lr", c.train.learning_rate);
  app.add_option("--weight-decay", c.train.weight_decay);
  app.add_option("--epochs", c.train.epochs);
  app.add_option("--batch-size", c.train.batch_size);
  app.add_option("--logistic-l2", c.logistic_l2);

  app.add_option("--lexicon-k", c.lexicon_k, "candidate pool size");
  app.add_option("--aggregate", c.aggregate, "category similarity: mean | sum");
  app.add_option("--kind", c.export_kind, "export-texts kind: candidates | summaries | lexicon");
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depsum: interview summarization, lexicon and depression classifier"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file");

  PipelineConfig cfg;
  std::vector<double> weights{cfg.train.class_weights[0], cfg.train.class_weights[1]};
  int threads = 0;
  add_options(app, cfg, weights, threads);

  using Runner = std::function<void(const Context&)>;
  const std::vector<std::pair<std::string, std::pair<std::string, Runner>>> commands{
      {"synth", {"write a synthetic corpus to --corpus", [](const Context& c) { depsum::pipeline::run_synth(c); }}},
      {"ingest", {"transcripts + labels -> documents.jsonl", [](const Context& c) { depsum::pipeline::run_ingest(c); }}},
      {"export-texts", {"texts.jsonl for an external encoder", [](const Context& c) { depsum::pipeline::run_export_texts(c); }}},
      {"import-vectors", {"validate --vectors into vectors.jsonl", [](const Context& c) { depsum::pipeline::run_import_vectors(c); }}},
      {"summarize", {"documents -> summaries.jsonl", [](const Context& c) { depsum::pipeline::run_summarize(c); }}},
      {"lexicon", {"lexicon.csv, wordscores.csv, coverage", [](const Context& c) { depsum::pipeline::run_lexicon(c); }}},
      {"train", {"train, evaluate, write report.csv", [](const Context& c) { depsum::pipeline::run_train(c); }}},
      {"eval", {"evaluate params.bin on dev/test", [](const Context& c) { depsum::pipeline::run_eval(c); }}},
      {"report", {"print report.csv", [](const Context& c) { depsum::pipeline::run_report(c); }}},
  };
  std::map<const CLI::App*, const Runner*> runners;
  for (const auto& [name, entry] : commands) runners[app.add_subcommand(name, entry.first)] = &entry.second;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (weights.size() != 2) throw depsum::Error(depsum::ErrorCode::ArgumentError, "--class-weights takes two values");
    cfg.train.class_weights = {weights[0], weights[1]};
    if (threads > 0) depsum::kernels::set_threads(threads);
    cfg.validate();

    std::cerr << "# depsum configuration\n";
    cfg.print(std::cerr);
    const Context ctx{cfg, &std::cout};
    for (const auto* sub : app.get_subcommands()) (*runners.at(sub))(ctx);
  } catch (const depsum::Error& e) {
    std::cerr << "depsum: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "depsum: internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
