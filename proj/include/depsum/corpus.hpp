#pragma once

// Interview transcript ingestion: turns, label files and per-session documents.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace depsum::corpus {

enum class Speaker { Interviewer, Participant };

struct Turn {
  double start_time = 0.0;
  double stop_time = 0.0;
  Speaker speaker = Speaker::Participant;
  std::string text;
};

enum class Label { NotDepressed = 0, Depressed = 1 };
enum class Split { Train = 0, Dev = 1, Test = 2 };

inline constexpr std::array<Split, 3> kAllSplits{Split::Train, Split::Dev, Split::Test};

std::string_view to_string(Split split);
Split parse_split(std::string_view name);  // "train" | "dev" | "test"

inline constexpr int kDepressedThreshold = 10;
inline constexpr int kMaxPhq8 = 24;

Label label_for_score(int phq8);

struct SessionMeta {
  int session_id = 0;
  std::optional<int> phq8_score;  // test-split label files may omit it
  Label binary_label = Label::NotDepressed;
  Split split = Split::Train;
};

struct Document {
  int session_id = 0;
  std::vector<std::string> sentences;

  std::string full_text() const;
};

// A document together with its labels, as exchanged in documents.jsonl.
struct Session {
  Document document;
  SessionMeta meta;
};

// Reads the `start_time stop_time speaker value` TSV. Whitespace-only
// participant turns are dropped. Throws MalformedRow / UnknownSpeaker.
std::vector<Turn> parse_transcript(std::istream& in);

// Each maximal run of participant turns becomes one sentence. A transcript
// with no interviewer turns at all keeps every participant turn separate.
std::vector<std::string> merge_turns(std::span<const Turn> turns);

Document make_document(int session_id, std::span<const Turn> turns);

// Reads a `Participant_ID,PHQ8_Binary,PHQ8_Score` CSV (extra columns ignored,
// score column optional). Throws LabelMismatch, DuplicateId, MalformedRow.
std::map<int, SessionMeta> load_labels(std::istream& in, Split split);

struct ClassCounts {
  std::size_t depressed = 0;
  std::size_t not_depressed = 0;

  std::size_t total() const { return depressed + not_depressed; }
  double depressed_ratio() const {
    return total() == 0 ? 0.0 : static_cast<double>(depressed) / static_cast<double>(total());
  }
  bool operator==(const ClassCounts&) const = default;
};

// Indexed by static_cast<size_t>(Split).
using SplitCounts = std::array<ClassCounts, 3>;

SplitCounts class_distribution(std::span<const SessionMeta> sessions);

void write_sessions_jsonl(std::ostream& out, std::span<const Session> sessions);
std::vector<Session> read_sessions_jsonl(std::istream& in);

}  // namespace depsum::corpus
