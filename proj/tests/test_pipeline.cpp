#include <doctest.h>

#include <fstream>
#include <sstream>

#include "depsum/corpus.hpp"
#include "depsum/embed.hpp"
#include "depsum/lexicon.hpp"
#include "depsum/pipeline.hpp"
#include "depsum/synth.hpp"
#include "test_util.hpp"
#include <json.hpp>

using namespace depsum;
using namespace depsum::pipeline;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

Context small_context(const fs::path& root) {
  Context ctx;
  ctx.config.corpus_dir = root / "corpus";
  ctx.config.out_dir = root / "work";
  ctx.config.dim = 64;
  ctx.config.train.epochs = 3;
  ctx.config.net.fc_dims = {32};
  ctx.config.net.head_dims = {16};
  return ctx;
}

// One reduced end-to-end run shared by the cases below.
struct SharedRun {
  testing::TempDir dir{"pipeline"};
  Context ctx = small_context(dir.path());
  std::ostringstream log;
  IngestResult ingest;
  std::vector<summarize::Summary> summaries;
  LexiconResult lexicon;
  TrainEvalResult trained;

  SharedRun() {
    ctx.log = &log;
    run_synth(ctx);
    ingest = run_ingest(ctx);
    summaries = run_summarize(ctx);
    lexicon = run_lexicon(ctx);
    trained = run_train(ctx);
  }

  static SharedRun& get() {
    static SharedRun run;
    return run;
  }
};

std::map<std::string, double> read_word_scores(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> out;
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    out[line.substr(0, a)] = std::stod(line.substr(a + 1, b - a - 1));
  }
  return out;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  c.n = 5;
  CHECK_ERROR_CODE(c.validate(), ErrorCode::ArgumentError);
  c.allow_any_n = true;
  CHECK_NOTHROW(c.validate());
  c = {};
  c.backend = "bert";
  CHECK_ERROR_CODE(c.validate(), ErrorCode::ArgumentError);
  c = {};
  c.out_dir = "w";
  CHECK(c.resolved_vectors() == fs::path("w") / "vectors.jsonl");
  CHECK(c.resolved_labels(corpus::Split::Test) == fs::path("corpus") / "test_split.csv");
}

TEST_CASE("synth is deterministic and matches the split sizes") {
  testing::TempDir a("synth_a"), b("synth_b");
  Context ca, cb;
  std::ostringstream sink;
  ca.log = cb.log = &sink;
  ca.config.corpus_dir = a.path();
  cb.config.corpus_dir = b.path();
  run_synth(ca);
  run_synth(cb);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), a.path());
    CHECK(slurp(e.path()) == slurp(b.path() / rel));
  }
  CHECK(files == 189 + 4);

  auto labels = [&](const char* file, corpus::Split split) {
    std::ifstream in(a.path() / file);
    return corpus::load_labels(in, split);
  };
  const auto train = labels("train_split.csv", corpus::Split::Train);
  const auto dev = labels("dev_split.csv", corpus::Split::Dev);
  const auto test = labels("test_split.csv", corpus::Split::Test);
  CHECK(train.size() == 107);
  CHECK(dev.size() == 35);
  CHECK(test.size() == 47);
  auto depressed = [](const std::map<int, corpus::SessionMeta>& v) {
    return std::count_if(v.begin(), v.end(),
                         [](const auto& kv) { return kv.second.binary_label == corpus::Label::Depressed; });
  };
  CHECK(depressed(train) == 30);
  CHECK(depressed(dev) == 12);
  CHECK(depressed(test) == 14);
  for (const auto& [id, m] : train) {
    REQUIRE(m.phq8_score);
    CHECK((*m.phq8_score >= 10) == (m.binary_label == corpus::Label::Depressed));
  }

  synth::SynthConfig other;
  other.seed = 99;
  const auto g1 = synth::generate(other), g2 = synth::generate(other);
  CHECK(g1.sessions.size() == 189);
  CHECK(g1.sessions[5].turns.size() == g2.sessions[5].turns.size());
}

TEST_CASE("ingest") {
  auto& run = SharedRun::get();
  CHECK(run.ingest.sessions.size() == 189);
  CHECK(line_count(run.ctx.config.work("documents.jsonl")) == 189);
  const auto& c = run.ingest.counts;
  CHECK(c[0].depressed == 30);
  CHECK(c[0].not_depressed == 77);
  CHECK(c[1].depressed + c[1].not_depressed == 35);
  CHECK(c[2].depressed + c[2].not_depressed == 47);
  for (const auto& s : run.ingest.sessions) CHECK(!s.document.sentences.empty());

  testing::TempDir empty("ingest_empty");
  fs::create_directories(empty.path() / "corpus" / "transcripts");
  std::ofstream(empty.path() / "corpus" / "train_split.csv") << "Participant_ID,PHQ8_Binary,PHQ8_Score\n";
  auto ctx = small_context(empty.path());
  std::ostringstream log;
  ctx.log = &log;
  CHECK(run_ingest(ctx).sessions.empty());
  CHECK(fs::exists(ctx.config.work("documents.jsonl")));
  CHECK(line_count(ctx.config.work("documents.jsonl")) == 0);
  CHECK(log.str().find("warning") != std::string::npos);

  auto none = small_context(empty.path() / "nowhere");
  none.log = &log;
  CHECK_ERROR_CODE(run_ingest(none), ErrorCode::FileNotFound);
}

TEST_CASE("summaries respect the budget") {
  auto& run = SharedRun::get();
  REQUIRE(run.summaries.size() == 189);
  for (const auto& s : run.summaries) {
    CHECK(s.token_count <= 512);
    CHECK(s.token_count > 0);
  }
  CHECK(line_count(run.ctx.config.work("summaries.jsonl")) == 189);
}

TEST_CASE("lexicon ranks planted words as depression-associated") {
  auto& run = SharedRun::get();
  CHECK(run.lexicon.rows > 0);
  CHECK(run.lexicon.rows <= 2000);
  CHECK(run.lexicon.coverage >= 0.0);
  CHECK(run.lexicon.coverage <= 1.0);
  CHECK(run.log.str().find("reference value 0.75") != std::string::npos);

  const auto ws = read_word_scores(run.ctx.config.work("wordscores.csv"));
  for (const auto& w : synth::planted_depressed_words()) {
    REQUIRE(ws.count(w) == 1);
    CHECK(ws.at(w) < 0.0);
  }
  for (const auto& w : synth::planted_positive_words()) {
    REQUIRE(ws.count(w) == 1);
    CHECK(ws.at(w) > 0.0);
  }

  std::vector<corpus::Session> sessions = run.ingest.sessions;
  const auto stats = lexicon::CorpusStats::build(sessions, text::StopwordPolicy::standard());
  const auto top = lexicon::top_words_report(stats, 30);
  bool saw_i = false;
  for (const auto& e : top.lowest) saw_i |= e.word == "i";
  CHECK(saw_i);

  const auto before = slurp(run.ctx.config.work("lexicon.csv"));
  std::ostringstream sink;
  Context again = run.ctx;
  again.log = &sink;
  run_lexicon(again);
  CHECK(slurp(run.ctx.config.work("lexicon.csv")) == before);
}

TEST_CASE("lexicon without summaries is a FileNotFound") {
  testing::TempDir dir("nosum");
  auto ctx = small_context(dir.path());
  std::ostringstream log;
  ctx.log = &log;
  run_synth(ctx);
  run_ingest(ctx);
  CHECK_ERROR_CODE(run_lexicon(ctx), ErrorCode::FileNotFound);
  CHECK_ERROR_CODE(run_train(ctx), ErrorCode::FileNotFound);
  ctx.config.n = 5;
  CHECK_ERROR_CODE(run_summarize(ctx), ErrorCode::ArgumentError);
}

TEST_CASE("train, eval and report") {
  auto& run = SharedRun::get();
  const auto& cfg = run.ctx.config;
  REQUIRE(run.trained.rows.size() == 4);
  CHECK(run.trained.rows[0].method == "ours");
  CHECK(run.trained.rows[1].method == "logistic");
  CHECK(run.trained.rows[2].split == corpus::Split::Test);
  CHECK(line_count(cfg.work("history.csv")) == 1 + 3);
  const auto report = slurp(cfg.work("report.csv"));
  CHECK(report.rfind("ngram,method,split,f1,recall,precision\n7,ours,dev,", 0) == 0);

  std::ostringstream log;
  Context ctx = run.ctx;
  ctx.log = &log;
  const auto rows = run_eval(ctx);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].report.f1 == run.trained.rows[0].report.f1);
  CHECK(rows[1].report.f1 == run.trained.rows[2].report.f1);
  CHECK(log.str().find("TP=") != std::string::npos);

  std::ostringstream pretty;
  ctx.log = &pretty;
  run_report(ctx);
  CHECK(pretty.str().find("logistic") != std::string::npos);

  Context wrong_dim = ctx;
  wrong_dim.config.dim = 32;
  CHECK_ERROR_CODE(run_eval(wrong_dim), ErrorCode::DimMismatch);
}

TEST_CASE("embedding exchange through files") {
  auto& run = SharedRun::get();
  testing::TempDir dir("exchange");
  std::ostringstream log;
  Context ctx = run.ctx;
  ctx.log = &log;
  ctx.config.out_dir = dir.path();
  fs::copy_file(run.ctx.config.work("documents.jsonl"), ctx.config.work("documents.jsonl"));
  fs::copy_file(run.ctx.config.work("summaries.jsonl"), ctx.config.work("summaries.jsonl"));

  ctx.config.export_kind = "summaries";
  const auto count = run_export_texts(ctx);
  CHECK(count <= 189);
  CHECK(line_count(ctx.config.work("texts.jsonl")) == count);

  // Stand in for an external encoder: embed every exported text with the hashed backend.
  embed::HashedBackend hashed(16, 3);
  embed::VectorMap vectors;
  {
    std::ifstream in(ctx.config.work("texts.jsonl"));
    for (std::string line; std::getline(in, line);) {
      const auto key = nlohmann::json::parse(line).at("key").get<std::string>();
      vectors.emplace(key, hashed.embed(key));
    }
  }
  const auto external = dir.path() / "external.jsonl";
  {
    std::ofstream out(external);
    embed::save_vectors(out, vectors);
  }
  CHECK_ERROR_CODE(run_import_vectors(ctx), ErrorCode::ArgumentError);
  ctx.config.vectors_file = external;
  CHECK(run_import_vectors(ctx) == count);
  ctx.config.vectors_file.clear();
  ctx.config.backend = "file";
  const auto backend = make_backend(ctx.config);
  CHECK(backend->dim() == 16);
  const auto data = build_datasets(run.ingest.sessions, run.summaries, *backend);
  CHECK(data.train.size() == 107);
  CHECK(data.dev.size() == 35);
  REQUIRE(data.test);
  CHECK(data.test->size() == 47);
  CHECK(data.train.features.cols == 16);
}

TEST_CASE("report csv format") {
  std::ostringstream out;
  model::EvalReport r;
  r.f1 = 0.81481;
  r.recall = 11.0 / 12.0;
  r.precision = 11.0 / 15.0;
  write_report_csv(out, {{7, "ours", corpus::Split::Dev, r}});
  CHECK(out.str() == "ngram,method,split,f1,recall,precision\n7,ours,dev,0.8148,0.9167,0.7333\n");
}

}
