#pragma once

// Synthetic interview corpus in the transcript/label file layout the
// ingester reads, with a planted depression vocabulary and a ground-truth
// manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "depsum/corpus.hpp"

namespace depsum::synth {

struct SynthConfig {
  std::uint64_t seed = 0;
  // Target class counts per split, indexed by Split.
  corpus::SplitCounts targets{{{30, 77}, {12, 23}, {14, 33}}};
  int first_id = 300;
  std::vector<int> no_interviewer_ids{451, 458, 480};
  int min_exchanges = 25;
  int max_exchanges = 45;
};

struct SynthSession {
  corpus::SessionMeta meta;
  std::vector<corpus::Turn> turns;
};

struct SynthCorpus {
  std::vector<SynthSession> sessions;  // ascending id
  std::vector<std::string> planted_depressed;
  std::vector<std::string> planted_pronouns;
  std::vector<std::string> planted_positive;
  corpus::SplitCounts counts{};
};

const std::vector<std::string>& planted_depressed_words();
const std::vector<std::string>& planted_positive_words();

SynthCorpus generate(const SynthConfig& config);

// Writes <dir>/transcripts/<id>_TRANSCRIPT.csv, <dir>/{train,dev,test}_split.csv
// and <dir>/manifest.json.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace depsum::synth
