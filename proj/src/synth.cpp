#include "depsum/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "depsum/error.hpp"
#include "depsum/lexicon.hpp"
#include "depsum/rng.hpp"
#include "depsum/tokenize.hpp"
#include "format_util.hpp"

namespace depsum::synth {

using corpus::Split;
using corpus::Speaker;

namespace {

const std::vector<std::string> kQuestions{
    "how are you doing today",
    "where are you from originally",
    "what do you do for a living",
    "how do you like your living situation",
    "what do you enjoy most about your work",
    "how easy is it for you to get a good night's sleep",
    "how have you been feeling lately",
    "what are you like when you don't get enough sleep",
    "tell me about your relationship with your family",
    "when was the last time you felt really happy",
    "what's one of your most memorable experiences",
    "how would your best friend describe you",
    "have you been diagnosed with depression",
    "have you ever been diagnosed with ptsd",
    "what advice would you give to yourself ten years ago",
    "what are some things that make you really mad",
    "tell me about the last time you argued with someone",
    "what do you do to relax",
    "is there anything you regret",
    "what are you most proud of in your life",
    "how are you at controlling your temper",
    "do you travel a lot",
    "tell me more about that",
    "can you give me an example of that",
};

const std::vector<std::string> kBackchannel{"okay", "i see", "mhm", "that's good", "i'm sorry to hear that",
                                            "really", "nice", "uh huh"};

// Function words mixed into every answer; mostly stopwords.
const std::vector<std::string> kFunction{
    "the", "and", "to", "a", "of", "that", "it", "in", "was", "is", "so", "but", "you", "just",
    "like", "um", "uh", "yeah", "with", "for", "at", "on", "know", "kind", "really", "they",
    "we", "there", "about", "be", "have", "this", "or", "do", "when", "then", "not", "all"};

const std::vector<std::string> kContractions{"i'm", "don't", "it's", "can't", "that's", "didn't",
                                             "i've", "wasn't"};

std::vector<std::string> neutral_vocabulary(std::uint64_t seed, std::size_t size) {
  static const std::string onsets = "bdfgklmnprstvz";
  static const std::string vowels = "aeiou";
  std::set<std::string, std::less<>> banned;
  for (const auto& w : text::bundled_stopwords()) banned.insert(w);
  for (const auto& cat : lexicon::AlertingLexicon::bundled().words)
    for (const auto& w : cat) banned.insert(w);
  for (const auto& w : planted_depressed_words()) banned.insert(w);
  for (const auto& w : planted_positive_words()) banned.insert(w);
  for (const auto& w : kFunction) banned.insert(w);

  Rng rng(derive_seed(seed, "synth-vocabulary"));
  std::set<std::string, std::less<>> seen;
  std::vector<std::string> out;
  while (out.size() < size) {
    const int syllables = rng.range(2, 3);
    std::string w;
    for (int s = 0; s < syllables; ++s) {
      w += onsets[rng.below(onsets.size())];
      w += vowels[rng.below(vowels.size())];
    }
    if (rng.bernoulli(0.3)) w += onsets[rng.below(onsets.size())];
    if (banned.count(w) || !seen.insert(w).second) continue;
    out.push_back(std::move(w));
  }
  return out;
}

// Inverse-CDF sampler over Zipf-Mandelbrot weights 1/(rank+8).
class ZipfSampler {
 public:
  explicit ZipfSampler(std::size_t n) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) cdf_[i] = acc += 1.0 / static_cast<double>(i + 8);
    for (auto& c : cdf_) c /= acc;
  }
  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform();
    return static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin()) %
           cdf_.size();
  }

 private:
  std::vector<double> cdf_;
};

struct Voice {
  double planted_rate;
  double pronoun_rate;
  double positive_rate;
};

Voice voice_for(int phq8) {
  if (phq8 >= corpus::kDepressedThreshold) {
    const double severity = static_cast<double>(phq8 - corpus::kDepressedThreshold) / 13.0;
    return {0.02 + 0.03 * severity, 0.07, 0.01};
  }
  // Milder scores leak a little of the same vocabulary.
  return {0.002 + 0.001 * phq8, 0.04, 0.03};
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.below(v.size())];
}

std::string make_answer(const Voice& voice, const std::vector<std::string>& neutral,
                        const ZipfSampler& zipf, Rng& rng) {
  const int len = rng.range(5, 22);
  std::string out;
  for (int i = 0; i < len; ++i) {
    std::string w;
    const double u = rng.uniform();
    if (u < voice.planted_rate) {
      w = pick(planted_depressed_words(), rng);
    } else if (u < voice.planted_rate + voice.pronoun_rate) {
      static const std::vector<std::string> pronouns{"i", "me", "my", "myself"};
      w = pick(pronouns, rng);
    } else if (u < voice.planted_rate + voice.pronoun_rate + voice.positive_rate) {
      w = pick(planted_positive_words(), rng);
    } else if (u < 0.45) {
      w = rng.bernoulli(0.08) ? pick(kContractions, rng) : pick(kFunction, rng);
    } else {
      w = neutral[zipf.draw(rng)];
    }
    if (!out.empty()) out += ' ';
    if (i == 0 && rng.bernoulli(0.5)) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    out += w;
    if (i + 1 < len && rng.bernoulli(0.04)) out += ',';
  }
  if (rng.bernoulli(0.05)) out += " <laughter>";
  if (rng.bernoulli(0.3)) out += '.';
  return out;
}

}  // namespace

const std::vector<std::string>& planted_depressed_words() {
  static const std::vector<std::string> words{
      "depression", "anxiety", "insomnia", "fatigue",   "exhaustion", "pain",     "sadness",
      "stress",     "isolation", "restless", "medication", "doctor",    "therapy",  "pills",
      "diagnosis",  "lonely",   "hate",     "fear",       "despair",    "worthless", "lost",
      "dark",       "unhappy",  "broken",   "helpless",   "suffer",     "tired",    "hopeless",
      "crying",     "empty",    "numb",     "awful"};
  return words;
}

const std::vector<std::string>& planted_positive_words() {
  static const std::vector<std::string> words{"happy",   "great", "fun",     "friends", "travel",
                                              "enjoy",   "excited", "proud", "relaxed", "love",
                                              "beach",   "hiking"};
  return words;
}

SynthCorpus generate(const SynthConfig& config) {
  std::size_t total = 0;
  for (const auto& c : config.targets) total += c.total();
  if (total == 0) throw Error(ErrorCode::ArgumentError, "synthetic corpus needs at least one session");

  SynthCorpus out;
  out.planted_depressed = planted_depressed_words();
  out.planted_pronouns = {"i", "me", "my", "myself"};
  out.planted_positive = planted_positive_words();

  Rng assign_rng(derive_seed(config.seed, "synth-assign"));
  std::vector<int> ids(total);
  std::iota(ids.begin(), ids.end(), config.first_id);
  assign_rng.shuffle(ids);

  std::vector<corpus::SessionMeta> metas;
  std::size_t at = 0;
  for (Split split : corpus::kAllSplits) {
    const auto& target = config.targets[static_cast<std::size_t>(split)];
    for (std::size_t i = 0; i < target.total(); ++i, ++at) {
      corpus::SessionMeta m;
      m.session_id = ids[at];
      m.split = split;
      const bool depressed = i < target.depressed;
      m.phq8_score = depressed ? assign_rng.range(10, 23) : assign_rng.range(0, 9);
      m.binary_label = corpus::label_for_score(*m.phq8_score);
      metas.push_back(m);
    }
  }
  std::sort(metas.begin(), metas.end(),
            [](const auto& a, const auto& b) { return a.session_id < b.session_id; });

  const auto neutral = neutral_vocabulary(config.seed, 3200);
  const ZipfSampler zipf(neutral.size());
  const std::set<int> no_interviewer(config.no_interviewer_ids.begin(), config.no_interviewer_ids.end());

  for (const auto& meta : metas) {
    Rng rng(derive_seed(config.seed, "synth-session-" + std::to_string(meta.session_id)));
    const Voice voice = voice_for(*meta.phq8_score);
    const bool interviewer = !no_interviewer.count(meta.session_id);
    SynthSession s;
    s.meta = meta;
    double clock = rng.uniform(5.0, 40.0);
    auto add = [&](Speaker who, std::string text) {
      const double dur = 0.5 + 0.3 * static_cast<double>(text::count_tokens(text)) + rng.uniform();
      s.turns.push_back({clock, clock + dur, who, std::move(text)});
      clock += dur + rng.uniform(0.1, 1.5);
    };
    if (interviewer) add(Speaker::Interviewer, "hi i'm ellie thanks for coming in today");
    const int exchanges = rng.range(config.min_exchanges, config.max_exchanges);
    for (int e = 0; e < exchanges; ++e) {
      if (interviewer) add(Speaker::Interviewer, pick(kQuestions, rng));
      const int parts = rng.range(1, 3);
      for (int p = 0; p < parts; ++p) {
        add(Speaker::Participant, make_answer(voice, neutral, zipf, rng));
        if (interviewer && p + 1 < parts && rng.bernoulli(0.3)) add(Speaker::Interviewer, pick(kBackchannel, rng));
      }
      if (rng.bernoulli(0.03)) add(Speaker::Participant, " ");
    }
    if (interviewer) add(Speaker::Interviewer, "thank you for sharing your thoughts with me goodbye");
    out.sessions.push_back(std::move(s));
  }
  for (const auto& s : out.sessions) {
    auto& c = out.counts[static_cast<std::size_t>(s.meta.split)];
    (s.meta.binary_label == corpus::Label::Depressed ? c.depressed : c.not_depressed)++;
  }
  return out;
}

namespace {

std::string_view speaker_name(Speaker s) { return s == Speaker::Interviewer ? "Ellie" : "Participant"; }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + p.string());
  return out;
}

}  // namespace

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "transcripts");
  for (const auto& s : corpus.sessions) {
    auto out = open_out(dir / "transcripts" / (std::to_string(s.meta.session_id) + "_TRANSCRIPT.csv"));
    out << "start_time\tstop_time\tspeaker\tvalue\n";
    for (const auto& t : s.turns)
      out << detail::fmt_f(t.start_time, 3) << '\t' << detail::fmt_f(t.stop_time, 3) << '\t'
          << speaker_name(t.speaker) << '\t' << t.text << '\n';
  }
  for (Split split : corpus::kAllSplits) {
    auto out = open_out(dir / (std::string(corpus::to_string(split)) + "_split.csv"));
    // The released test split names its columns without the "8".
    out << (split == Split::Test ? "Participant_ID,PHQ_Binary,PHQ_Score\n"
                                 : "Participant_ID,PHQ8_Binary,PHQ8_Score\n");
    for (const auto& s : corpus.sessions)
      if (s.meta.split == split)
        out << s.meta.session_id << ',' << static_cast<int>(s.meta.binary_label) << ','
            << *s.meta.phq8_score << '\n';
  }
  nlohmann::json m;
  m["planted_depressed"] = corpus.planted_depressed;
  m["planted_pronouns"] = corpus.planted_pronouns;
  m["planted_positive"] = corpus.planted_positive;
  m["counts"] = nlohmann::json::object();
  for (Split split : corpus::kAllSplits) {
    const auto& c = corpus.counts[static_cast<std::size_t>(split)];
    m["counts"][std::string(corpus::to_string(split))] = {{"depressed", c.depressed},
                                                          {"not_depressed", c.not_depressed}};
  }
  m["sessions"] = nlohmann::json::array();
  for (const auto& s : corpus.sessions)
    m["sessions"].push_back({{"id", s.meta.session_id},
                             {"split", corpus::to_string(s.meta.split)},
                             {"phq8", *s.meta.phq8_score},
                             {"label", static_cast<int>(s.meta.binary_label)}});
  auto out = open_out(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace depsum::synth
