#pragma once

// End-to-end commands over a work directory: synth, ingest, embedding
// exchange, summarize, lexicon, train/eval and report. Used by the depsum
// tool and by the acceptance suite.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "depsum/corpus.hpp"
#include "depsum/embed.hpp"
#include "depsum/metrics.hpp"
#include "depsum/nn.hpp"
#include "depsum/summarize.hpp"
#include "depsum/train.hpp"

namespace depsum::pipeline {

namespace fs = std::filesystem;

struct PipelineConfig {
  // Input corpus: <corpus_dir>/transcripts and <corpus_dir>/{train,dev,test}_split.csv
  // unless the explicit paths below are set.
  fs::path corpus_dir = "corpus";
  fs::path transcripts_dir;
  fs::path train_labels;
  fs::path dev_labels;
  fs::path test_labels;
  fs::path out_dir = "work";
  fs::path vectors_file;  // default <out_dir>/vectors.jsonl

  int n = 7;
  bool allow_any_n = false;
  double lambda = 0.7;
  std::size_t budget = summarize::kDefaultBudget;
  std::size_t chunk_tokens = summarize::kDefaultChunkTokens;

  std::string backend = "hashed";  // hashed | file
  std::size_t dim = embed::kDefaultDim;
  std::uint64_t seed = 0;  // root of every random stream

  model::FeatureExtractorConfig net;
  model::TrainConfig train;  // train.seed is derived from `seed`
  double logistic_l2 = 1e-2;

  std::size_t lexicon_k = 2000;
  std::string aggregate = "mean";       // mean | sum
  std::string export_kind = "candidates";  // candidates | summaries | lexicon

  // Throws ArgumentError.
  void validate() const;
  // key=value lines, one per setting.
  void print(std::ostream& out) const;

  fs::path resolved_transcripts() const;
  fs::path resolved_labels(corpus::Split split) const;
  fs::path resolved_vectors() const;
  fs::path work(const std::string& name) const { return out_dir / name; }
};

// Messages go to `log`; results to files under out_dir.
struct Context {
  PipelineConfig config;
  std::ostream* log = nullptr;
};

std::unique_ptr<embed::EmbeddingBackend> make_backend(const PipelineConfig& config);

struct ReportRow {
  int ngram = 0;
  std::string method;  // ours | logistic
  corpus::Split split = corpus::Split::Dev;
  model::EvalReport report;
};
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

struct IngestResult {
  std::vector<corpus::Session> sessions;
  corpus::SplitCounts counts{};
};
struct LexiconResult {
  std::size_t rows = 0;
  double coverage = 0.0;
};
struct TrainEvalResult {
  std::vector<ReportRow> rows;
  int best_epoch = 0;
};

void run_synth(const Context& ctx);
IngestResult run_ingest(const Context& ctx);
std::size_t run_export_texts(const Context& ctx);
std::size_t run_import_vectors(const Context& ctx);
std::vector<summarize::Summary> run_summarize(const Context& ctx);
LexiconResult run_lexicon(const Context& ctx);
TrainEvalResult run_train(const Context& ctx);
std::vector<ReportRow> run_eval(const Context& ctx);
void run_report(const Context& ctx);

// Features for the classifier: one embedded summary per labelled session.
struct SplitData {
  model::Dataset train;
  model::Dataset dev;
  std::optional<model::Dataset> test;
};
SplitData build_datasets(const std::vector<corpus::Session>& sessions,
                         const std::vector<summarize::Summary>& summaries,
                         const embed::EmbeddingBackend& backend);

}  // namespace depsum::pipeline
