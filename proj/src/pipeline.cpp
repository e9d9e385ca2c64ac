#include "depsum/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "depsum/error.hpp"
#include "depsum/lexicon.hpp"
#include "depsum/logistic.hpp"
#include "depsum/rng.hpp"
#include "depsum/synth.hpp"
#include "format_util.hpp"
#include "parallel_util.hpp"
#include "text_util.hpp"

namespace depsum::pipeline {

using corpus::Split;

namespace {

constexpr double kReferenceCoverage = 0.75;

std::ostream& log_of(const Context& ctx) {
  static std::ostream null_stream(nullptr);
  return ctx.log ? *ctx.log : null_stream;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + p.string());
  return out;
}

std::string join_dims(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<corpus::Session> load_documents(const PipelineConfig& cfg) {
  auto in = open_in(cfg.work("documents.jsonl"));
  return corpus::read_sessions_jsonl(in);
}

std::vector<summarize::Summary> load_summaries(const PipelineConfig& cfg) {
  auto in = open_in(cfg.work("summaries.jsonl"));
  return summarize::read_summaries_jsonl(in);
}

lexicon::Aggregate parse_aggregate(const std::string& s) {
  if (s == "mean") return lexicon::Aggregate::Mean;
  if (s == "sum") return lexicon::Aggregate::Sum;
  throw Error(ErrorCode::ArgumentError, "aggregate must be mean or sum, got '" + s + "'");
}

model::TrainConfig train_config(const PipelineConfig& cfg) {
  model::TrainConfig t = cfg.train;
  t.seed = derive_seed(cfg.seed, "train");
  return t;
}

summarize::SummarizeConfig summarize_config(const PipelineConfig& cfg) {
  summarize::SummarizeConfig s;
  s.n = cfg.n;
  s.lambda = cfg.lambda;
  s.budget = cfg.budget;
  s.chunk_tokens = cfg.chunk_tokens;
  return s;
}

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ArgumentError, m); };
  if (!allow_any_n && (n < 6 || n > 9))
    fail("n must lie in 6..9 (got " + std::to_string(n) + "); pass --allow-any-n to override");
  if (n < 1) fail("n must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must lie in [0, 1]");
  if (budget < static_cast<std::size_t>(n)) fail("budget must be >= n");
  if (chunk_tokens < 1) fail("chunk_tokens must be >= 1");
  if (backend != "hashed" && backend != "file") fail("backend must be hashed or file, got '" + backend + "'");
  if (dim < 8) fail("dim must be >= 8");
  if (lexicon_k < 1) fail("lexicon_k must be >= 1");
  if (!(logistic_l2 >= 0.0)) fail("logistic_l2 must be >= 0");
  if (export_kind != "candidates" && export_kind != "summaries" && export_kind != "lexicon")
    fail("export kind must be candidates, summaries or lexicon");
  parse_aggregate(aggregate);
  train.validate();
  auto net_check = net;
  net_check.input_dim = dim;
  net_check.validate();
}

void PipelineConfig::print(std::ostream& out) const {
  out << "corpus_dir=" << corpus_dir.string() << '\n'
      << "transcripts_dir=" << resolved_transcripts().string() << '\n'
      << "train_labels=" << resolved_labels(Split::Train).string() << '\n'
      << "dev_labels=" << resolved_labels(Split::Dev).string() << '\n'
      << "test_labels=" << resolved_labels(Split::Test).string() << '\n'
      << "out_dir=" << out_dir.string() << '\n'
      << "vectors=" << resolved_vectors().string() << '\n'
      << "n=" << n << '\n'
      << "allow_any_n=" << (allow_any_n ? "true" : "false") << '\n'
      << "lambda=" << detail::fmt_g(lambda) << '\n'
      << "budget=" << budget << '\n'
      << "chunk_tokens=" << chunk_tokens << '\n'
      << "backend=" << backend << '\n'
      << "dim=" << dim << '\n'
      << "seed=" << seed << '\n'
      << "fc_dims=" << join_dims(net.fc_dims) << '\n'
      << "conv1=" << net.conv1.kernel << 'x' << net.conv1.channels << '\n'
      << "conv2=" << net.conv2.kernel << 'x' << net.conv2.channels << '\n'
      << "head_dims=" << join_dims(net.head_dims) << '\n'
      << "dropout=" << detail::fmt_g(net.dropout_p) << '\n'
      << "gamma=" << detail::fmt_g(train.gamma) << '\n'
      << "class_weights=" << detail::fmt_g(train.class_weights[0]) << ','
      << detail::fmt_g(train.class_weights[1]) << '\n'
      << "lr=" << detail::fmt_g(train.learning_rate) << '\n'
      << "weight_decay=" << detail::fmt_g(train.weight_decay) << '\n'
      << "epochs=" << train.epochs << '\n'
      << "batch_size=" << train.batch_size << '\n'
      << "logistic_l2=" << detail::fmt_g(logistic_l2) << '\n'
      << "lexicon_k=" << lexicon_k << '\n'
      << "aggregate=" << aggregate << '\n'
      << "export_kind=" << export_kind << '\n';
}

fs::path PipelineConfig::resolved_transcripts() const {
  return transcripts_dir.empty() ? corpus_dir / "transcripts" : transcripts_dir;
}

fs::path PipelineConfig::resolved_labels(Split split) const {
  const fs::path& explicit_path =
      split == Split::Train ? train_labels : split == Split::Dev ? dev_labels : test_labels;
  if (!explicit_path.empty()) return explicit_path;
  return corpus_dir / (std::string(corpus::to_string(split)) + "_split.csv");
}

fs::path PipelineConfig::resolved_vectors() const {
  return vectors_file.empty() ? out_dir / "vectors.jsonl" : vectors_file;
}

std::unique_ptr<embed::EmbeddingBackend> make_backend(const PipelineConfig& cfg) {
  if (cfg.backend == "hashed")
    return std::make_unique<embed::HashedBackend>(cfg.dim, derive_seed(cfg.seed, "embed"));
  if (cfg.backend == "file") {
    auto in = open_in(cfg.resolved_vectors());
    return std::make_unique<embed::LookupBackend>(embed::load_vectors(in));
  }
  throw Error(ErrorCode::ArgumentError, "unknown backend '" + cfg.backend + "'");
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "ngram,method,split,f1,recall,precision\n";
  for (const auto& r : rows)
    out << r.ngram << ',' << r.method << ',' << corpus::to_string(r.split) << ','
        << detail::fmt_f(r.report.f1, 4) << ',' << detail::fmt_f(r.report.recall, 4) << ','
        << detail::fmt_f(r.report.precision, 4) << '\n';
}

// --- synth -----------------------------------------------------------------

void run_synth(const Context& ctx) {
  const auto& cfg = ctx.config;
  synth::SynthConfig sc;
  sc.seed = derive_seed(cfg.seed, "synth");
  const auto corpus = synth::generate(sc);
  synth::write_corpus(corpus, cfg.corpus_dir);
  auto& log = log_of(ctx);
  log << "synth: " << corpus.sessions.size() << " sessions written to " << cfg.corpus_dir.string()
      << '\n';
  for (Split s : corpus::kAllSplits) {
    const auto& c = corpus.counts[static_cast<std::size_t>(s)];
    log << "  " << corpus::to_string(s) << ": " << c.depressed << " depressed, " << c.not_depressed
        << " not depressed\n";
  }
}

// --- ingest ----------------------------------------------------------------

IngestResult run_ingest(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto& log = log_of(ctx);
  const fs::path dir = cfg.resolved_transcripts();
  if (!fs::is_directory(dir)) throw Error(ErrorCode::FileNotFound, "no transcripts directory " + dir.string());

  static const std::regex name_re(R"(^(\d+)_TRANSCRIPT\.csv$)");
  std::map<int, fs::path> transcripts;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, name_re)) transcripts[std::stoi(m[1].str())] = entry.path();
  }

  IngestResult result;
  if (transcripts.empty()) {
    log << "warning: no *_TRANSCRIPT.csv files in " << dir.string() << "; writing an empty document set\n";
    auto out = open_out(cfg.work("documents.jsonl"));
    return result;
  }

  std::map<int, corpus::SessionMeta> labels;
  bool any_labels = false;
  for (Split s : corpus::kAllSplits) {
    const fs::path p = cfg.resolved_labels(s);
    if (!fs::exists(p)) {
      log << "notice: no " << corpus::to_string(s) << " label file (" << p.string() << ")\n";
      continue;
    }
    any_labels = true;
    auto in = open_in(p);
    for (auto& [id, meta] : corpus::load_labels(in, s)) {
      if (!labels.emplace(id, meta).second)
        throw Error(ErrorCode::DuplicateId, "session " + std::to_string(id) + " appears in two label files");
    }
  }
  if (!any_labels) throw Error(ErrorCode::FileNotFound, "no label files found");

  std::vector<std::pair<int, fs::path>> todo;
  std::size_t unlabeled = 0;
  for (const auto& [id, path] : transcripts) {
    if (labels.count(id)) todo.emplace_back(id, path);
    else ++unlabeled;
  }
  if (unlabeled) log << "warning: skipped " << unlabeled << " transcripts without labels\n";
  std::size_t missing = 0;
  for (const auto& [id, meta] : labels)
    if (!transcripts.count(id)) ++missing;
  if (missing) log << "warning: " << missing << " labelled sessions have no transcript\n";

  result.sessions.resize(todo.size());
  detail::parallel_for(todo.size(), [&](std::size_t i) {
    auto in = open_in(todo[i].second);
    std::vector<corpus::Turn> turns;
    try {
      turns = corpus::parse_transcript(in);
    } catch (const Error& e) {
      throw Error(e.code(), todo[i].second.filename().string() + ": " + e.message());
    }
    result.sessions[i].document = corpus::make_document(todo[i].first, turns);
    result.sessions[i].meta = labels.at(todo[i].first);
  });

  std::vector<corpus::SessionMeta> metas;
  for (const auto& s : result.sessions) metas.push_back(s.meta);
  result.counts = corpus::class_distribution(metas);

  auto out = open_out(cfg.work("documents.jsonl"));
  corpus::write_sessions_jsonl(out, result.sessions);
  log << "ingest: " << result.sessions.size() << " documents -> " << cfg.work("documents.jsonl").string()
      << '\n';
  for (Split s : corpus::kAllSplits) {
    const auto& c = result.counts[static_cast<std::size_t>(s)];
    log << "  " << corpus::to_string(s) << ": " << c.depressed << " depressed / " << c.total()
        << " (" << detail::fmt_f(100.0 * c.depressed_ratio(), 1) << "%)\n";
  }
  return result;
}

// --- embedding exchange ----------------------------------------------------

std::size_t run_export_texts(const Context& ctx) {
  const auto& cfg = ctx.config;
  std::set<std::string, std::less<>> texts;
  if (cfg.export_kind == "candidates") {
    for (const auto& s : load_documents(cfg)) {
      for (const auto& chunk : summarize::chunk_document(s.document.sentences, cfg.chunk_tokens)) {
        texts.insert(chunk);
        for (auto& g : text::ngrams(text::tweet_tokenize(chunk), cfg.n)) texts.insert(std::move(g));
      }
    }
  } else if (cfg.export_kind == "summaries") {
    for (const auto& s : load_summaries(cfg)) texts.insert(s.text());
  } else {
    const auto stats = lexicon::CorpusStats::build(load_documents(cfg), text::StopwordPolicy::standard());
    for (const auto& w : lexicon::candidate_words(stats, cfg.lexicon_k)) texts.insert(w.word);
    for (const auto& cat : lexicon::AlertingLexicon::bundled().words)
      for (const auto& w : cat) texts.insert(w);
  }
  std::vector<embed::TextItem> items;
  items.reserve(texts.size());
  for (const auto& t : texts) items.push_back({t, t});
  auto out = open_out(cfg.work("texts.jsonl"));
  embed::write_texts(out, items);
  log_of(ctx) << "export-texts: " << items.size() << " " << cfg.export_kind << " texts -> "
              << cfg.work("texts.jsonl").string() << '\n';
  return items.size();
}

std::size_t run_import_vectors(const Context& ctx) {
  const auto& cfg = ctx.config;
  if (cfg.vectors_file.empty()) throw Error(ErrorCode::ArgumentError, "import-vectors needs --vectors");
  embed::VectorMap vectors;
  {
    auto in = open_in(cfg.vectors_file);
    vectors = embed::load_vectors(in);
  }
  const fs::path dest = cfg.work("vectors.jsonl");
  auto out = open_out(dest);
  embed::save_vectors(out, vectors);
  const std::size_t dim = vectors.empty() ? 0 : vectors.begin()->second.dim();
  log_of(ctx) << "import-vectors: " << vectors.size() << " vectors of dim " << dim << " -> "
              << dest.string() << '\n';
  return vectors.size();
}

// --- summarize -------------------------------------------------------------

std::vector<summarize::Summary> run_summarize(const Context& ctx) {
  const auto& cfg = ctx.config;
  cfg.validate();
  const auto sessions = load_documents(cfg);
  const auto backend = make_backend(cfg);
  const auto sc = summarize_config(cfg);
  std::vector<summarize::Summary> summaries(sessions.size());
  detail::parallel_for(sessions.size(), [&](std::size_t i) {
    summaries[i] = summarize::summarize_document(sessions[i].document, sc, *backend);
  });
  auto out = open_out(cfg.work("summaries.jsonl"));
  summarize::write_summaries_jsonl(out, summaries);

  std::size_t longest = 0, sum = 0;
  for (const auto& s : summaries) {
    longest = std::max(longest, s.token_count);
    sum += s.token_count;
  }
  log_of(ctx) << "summarize: " << summaries.size() << " summaries (n=" << cfg.n << ", lambda="
              << detail::fmt_g(cfg.lambda) << ", backend=" << backend->name() << "), mean "
              << detail::fmt_f(summaries.empty() ? 0.0 : static_cast<double>(sum) / summaries.size(), 1)
              << " tokens, max " << longest << " of " << cfg.budget << '\n';
  return summaries;
}

// --- lexicon ---------------------------------------------------------------

LexiconResult run_lexicon(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto& log = log_of(ctx);
  const auto sessions = load_documents(cfg);
  const auto summaries = load_summaries(cfg);
  const auto backend = make_backend(cfg);
  const auto stats = lexicon::CorpusStats::build(sessions, text::StopwordPolicy::standard());
  const auto& alerting = lexicon::AlertingLexicon::bundled();
  const auto rows =
      lexicon::build_lexicon(stats, alerting, *backend, cfg.lexicon_k, parse_aggregate(cfg.aggregate));
  {
    auto out = open_out(cfg.work("lexicon.csv"));
    lexicon::write_lexicon_csv(out, rows);
  }
  {
    auto out = open_out(cfg.work("wordscores.csv"));
    const auto ranked = lexicon::word_scores(stats);
    lexicon::write_word_scores_csv(out, ranked);
  }
  {
    auto out = open_out(cfg.work("alerting_check.csv"));
    const auto cmp = lexicon::comparison_words(stats, alerting);
    lexicon::write_comparison_csv(out, cmp);
  }
  LexiconResult result;
  result.rows = rows.size();
  result.coverage = lexicon::coverage(rows, summaries);

  log << "lexicon: " << rows.size() << " words from " << stats.num_documents() << " scored documents -> "
      << cfg.work("lexicon.csv").string() << '\n';
  std::array<std::size_t, 3> per{};
  for (const auto& r : rows) ++per[static_cast<std::size_t>(r.category)];
  for (auto c : lexicon::kLexiconCategories)
    log << "  " << lexicon::to_string(c) << ": " << per[static_cast<std::size_t>(c)] << '\n';
  log << "coverage: " << detail::fmt_f(result.coverage, 4) << " (reference value "
      << detail::fmt_f(kReferenceCoverage, 2) << ")\n";
  return result;
}

// --- train / eval ----------------------------------------------------------

SplitData build_datasets(const std::vector<corpus::Session>& sessions,
                         const std::vector<summarize::Summary>& summaries,
                         const embed::EmbeddingBackend& backend) {
  std::map<int, const summarize::Summary*> by_id;
  for (const auto& s : summaries) by_id[s.source_session] = &s;
  std::array<std::vector<const corpus::Session*>, 3> members;
  for (const auto& s : sessions) {
    if (!by_id.count(s.document.session_id))
      throw Error(ErrorCode::MalformedFile,
                  "no summary for session " + std::to_string(s.document.session_id));
    members[static_cast<std::size_t>(s.meta.split)].push_back(&s);
  }
  auto make = [&](const std::vector<const corpus::Session*>& list) {
    model::Dataset d;
    d.features = Matrix(list.size(), backend.dim());
    d.labels.resize(list.size());
    d.ids.resize(list.size());
    detail::parallel_for(list.size(), [&](std::size_t i) {
      const auto& s = *list[i];
      const auto v = backend.embed(by_id.at(s.document.session_id)->text());
      if (v.dim() != backend.dim()) throw Error(ErrorCode::DimMismatch, "embedding width changed");
      std::copy(v.values().begin(), v.values().end(), d.features.row(i).begin());
      d.labels[i] = static_cast<int>(s.meta.binary_label);
      d.ids[i] = s.document.session_id;
    });
    return d;
  };
  SplitData out;
  out.train = make(members[0]);
  out.dev = make(members[1]);
  if (!members[2].empty()) out.test = make(members[2]);
  return out;
}

TrainEvalResult run_train(const Context& ctx) {
  const auto& cfg = ctx.config;
  cfg.validate();
  auto& log = log_of(ctx);
  const auto sessions = load_documents(cfg);
  const auto summaries = load_summaries(cfg);
  const auto backend = make_backend(cfg);
  const auto data = build_datasets(sessions, summaries, *backend);

  model::FeatureExtractorConfig net = cfg.net;
  net.input_dim = backend->dim();
  const auto tc = train_config(cfg);
  log << "train: " << data.train.size() << " train / " << data.dev.size() << " dev sessions, "
      << tc.epochs << " epochs\n";
  const auto trained = model::train(data.train, data.dev, net, tc);
  model::save_params(trained.params, cfg.work("params.bin"));
  {
    auto out = open_out(cfg.work("history.csv"));
    model::write_history_csv(out, trained.history);
  }
  const auto logistic = model::fit_logistic(data.train, {cfg.logistic_l2});

  TrainEvalResult result;
  result.best_epoch = trained.best_epoch;
  auto add = [&](Split split, const model::Dataset& d) {
    result.rows.push_back({cfg.n, "ours", split, model::evaluate(trained.params, d)});
    result.rows.push_back({cfg.n, "logistic", split, model::evaluate(logistic, d)});
  };
  add(Split::Dev, data.dev);
  if (data.test) add(Split::Test, *data.test);
  else log << "notice: no labelled test sessions; test metrics omitted\n";

  auto out = open_out(cfg.work("report.csv"));
  write_report_csv(out, result.rows);
  log << "train: best dev F1 at epoch " << trained.best_epoch << "; logistic converged after "
      << logistic.iterations << " iterations\n";
  write_report_csv(log, result.rows);
  return result;
}

std::vector<ReportRow> run_eval(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto& log = log_of(ctx);
  const auto params = model::load_params(cfg.work("params.bin"));
  const auto sessions = load_documents(cfg);
  const auto summaries = load_summaries(cfg);
  const auto backend = make_backend(cfg);
  if (params.config.input_dim != backend->dim())
    throw Error(ErrorCode::DimMismatch, "params expect input dim " + std::to_string(params.config.input_dim) +
                                            ", backend gives " + std::to_string(backend->dim()));
  const auto data = build_datasets(sessions, summaries, *backend);
  std::vector<ReportRow> rows;
  rows.push_back({cfg.n, "ours", Split::Dev, model::evaluate(params, data.dev)});
  if (data.test) rows.push_back({cfg.n, "ours", Split::Test, model::evaluate(params, *data.test)});
  else log << "notice: no labelled test sessions; test metrics omitted\n";
  auto out = open_out(cfg.work("eval.csv"));
  write_report_csv(out, rows);
  for (const auto& r : rows) {
    const auto& c = r.report.confusion;
    log << corpus::to_string(r.split) << ": TP=" << c.tp << " FP=" << c.fp << " FN=" << c.fn
        << " TN=" << c.tn << "  precision " << detail::fmt_f(r.report.precision, 4) << " recall "
        << detail::fmt_f(r.report.recall, 4) << " F1 " << detail::fmt_f(r.report.f1, 4) << '\n';
  }
  return rows;
}

void run_report(const Context& ctx) {
  auto in = open_in(ctx.config.work("report.csv"));
  auto& log = log_of(ctx);
  std::string line;
  std::getline(in, line);
  if (detail::trim(line) != "ngram,method,split,f1,recall,precision")
    throw Error(ErrorCode::MalformedFile, "report.csv has an unexpected header");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %-9s %-6s %8s %8s %10s\n", "ngram", "method", "split", "F1",
                "recall", "precision");
  log << buf;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 6) throw Error(ErrorCode::MalformedFile, "report.csv row: " + line);
    std::snprintf(buf, sizeof buf, "%-6s %-9s %-6s %8s %8s %10s\n", std::string(f[0]).c_str(),
                  std::string(f[1]).c_str(), std::string(f[2]).c_str(), std::string(f[3]).c_str(),
                  std::string(f[4]).c_str(), std::string(f[5]).c_str());
    log << buf;
  }
}

}  // namespace depsum::pipeline
