#include "depsum/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "depsum/error.hpp"
#include "json_util.hpp"
#include "text_util.hpp"

namespace depsum::corpus {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "dev") return Split::Dev;
  if (name == "test") return Split::Test;
  throw Error(ErrorCode::ArgumentError, "unknown split '" + std::string(name) + "'");
}

Label label_for_score(int phq8) {
  return phq8 >= kDepressedThreshold ? Label::Depressed : Label::NotDepressed;
}

std::string Document::full_text() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

namespace {

bool parse_double(std::string_view s, double& out) {
  s = detail::trim(s);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_int(std::string_view s, int& out) {
  s = detail::trim(s);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::string row_error(std::size_t line_no, std::string_view what) {
  return "line " + std::to_string(line_no) + ": " + std::string(what);
}

}  // namespace

std::vector<Turn> parse_transcript(std::istream& in) {
  std::vector<Turn> turns;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split(line, '\t');
    if (!seen_header) {
      if (cols.size() != 4 || detail::trim(cols[0]) != "start_time" ||
          detail::trim(cols[1]) != "stop_time" || detail::trim(cols[2]) != "speaker" ||
          detail::trim(cols[3]) != "value")
        throw Error(ErrorCode::MalformedRow, row_error(line_no, "expected transcript header"));
      seen_header = true;
      continue;
    }
    if (cols.size() != 4)
      throw Error(ErrorCode::MalformedRow,
                  row_error(line_no, "expected 4 columns, got " + std::to_string(cols.size())));
    Turn t;
    if (!parse_double(cols[0], t.start_time) || !parse_double(cols[1], t.stop_time))
      throw Error(ErrorCode::MalformedRow, row_error(line_no, "unparseable time"));
    if (t.start_time < 0.0 || t.stop_time < t.start_time)
      throw Error(ErrorCode::MalformedRow, row_error(line_no, "invalid time interval"));
    const auto speaker = detail::trim(cols[2]);
    if (speaker == "Ellie") {
      t.speaker = Speaker::Interviewer;
    } else if (speaker == "Participant") {
      t.speaker = Speaker::Participant;
    } else {
      throw Error(ErrorCode::UnknownSpeaker,
                  row_error(line_no, "speaker '" + std::string(speaker) + "'"));
    }
    t.text = std::string(detail::trim(cols[3]));
    if (t.speaker == Speaker::Participant && t.text.empty()) continue;
    turns.push_back(std::move(t));
  }
  return turns;
}

std::vector<std::string> merge_turns(std::span<const Turn> turns) {
  const bool has_interviewer = std::any_of(turns.begin(), turns.end(), [](const Turn& t) {
    return t.speaker == Speaker::Interviewer;
  });
  std::vector<std::string> sentences;
  bool in_run = false;
  for (const auto& t : turns) {
    if (t.speaker == Speaker::Interviewer) {
      in_run = false;
      continue;
    }
    if (t.text.empty()) continue;
    if (in_run && has_interviewer) {
      sentences.back() += ' ';
      sentences.back() += t.text;
    } else {
      sentences.push_back(t.text);
      in_run = true;
    }
  }
  return sentences;
}

Document make_document(int session_id, std::span<const Turn> turns) {
  return Document{session_id, merge_turns(turns)};
}

std::map<int, SessionMeta> load_labels(std::istream& in, Split split) {
  std::map<int, SessionMeta> out;
  std::string line;
  std::size_t line_no = 0;
  int id_col = -1, binary_col = -1, score_col = -1;
  std::size_t width = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split(line, ',');
    if (!seen_header) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const auto name = detail::trim(cols[i]);
        const int idx = static_cast<int>(i);
        if (name == "Participant_ID") id_col = idx;
        else if (name == "PHQ8_Binary" || name == "PHQ_Binary") binary_col = idx;
        else if (name == "PHQ8_Score" || name == "PHQ_Score") score_col = idx;
      }
      if (id_col < 0 || (binary_col < 0 && score_col < 0))
        throw Error(ErrorCode::MalformedRow,
                    row_error(line_no, "label header needs Participant_ID and PHQ8_Binary/PHQ8_Score"));
      width = cols.size();
      seen_header = true;
      continue;
    }
    if (cols.size() != width)
      throw Error(ErrorCode::MalformedRow, row_error(line_no, "column count differs from header"));

    SessionMeta meta;
    meta.split = split;
    if (!parse_int(cols[id_col], meta.session_id) || meta.session_id <= 0)
      throw Error(ErrorCode::MalformedRow, row_error(line_no, "bad Participant_ID"));

    std::optional<int> binary;
    if (binary_col >= 0) {
      int b = 0;
      if (!parse_int(cols[binary_col], b) || (b != 0 && b != 1))
        throw Error(ErrorCode::MalformedRow, row_error(line_no, "bad PHQ8_Binary"));
      binary = b;
    }
    if (score_col >= 0 && !detail::trim(cols[score_col]).empty()) {
      int score = 0;
      if (!parse_int(cols[score_col], score) || score < 0 || score > kMaxPhq8)
        throw Error(ErrorCode::MalformedRow, row_error(line_no, "bad PHQ8_Score"));
      meta.phq8_score = score;
    }
    if (meta.phq8_score) {
      meta.binary_label = label_for_score(*meta.phq8_score);
      if (binary && *binary != static_cast<int>(meta.binary_label))
        throw Error(ErrorCode::LabelMismatch,
                    row_error(line_no, "session " + std::to_string(meta.session_id) +
                                           ": PHQ8_Binary contradicts PHQ8_Score"));
    } else if (binary) {
      meta.binary_label = static_cast<Label>(*binary);
    } else {
      throw Error(ErrorCode::MalformedRow, row_error(line_no, "no label value"));
    }
    if (!out.emplace(meta.session_id, meta).second)
      throw Error(ErrorCode::DuplicateId,
                  row_error(line_no, "session " + std::to_string(meta.session_id)));
  }
  return out;
}

SplitCounts class_distribution(std::span<const SessionMeta> sessions) {
  SplitCounts counts{};
  for (const auto& s : sessions) {
    auto& c = counts[static_cast<std::size_t>(s.split)];
    if (s.binary_label == Label::Depressed) ++c.depressed;
    else ++c.not_depressed;
  }
  return counts;
}

void write_sessions_jsonl(std::ostream& out, std::span<const Session> sessions) {
  for (const auto& s : sessions) {
    json j;
    j["id"] = s.document.session_id;
    j["sentences"] = s.document.sentences;
    j["phq8"] = s.meta.phq8_score ? json(*s.meta.phq8_score) : json(nullptr);
    j["split"] = to_string(s.meta.split);
    j["label"] = static_cast<int>(s.meta.binary_label);
    out << detail::dump_line(j) << '\n';
  }
}

std::vector<Session> read_sessions_jsonl(std::istream& in) {
  std::vector<Session> out;
  std::set<int> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      Session s;
      s.document.session_id = j.at("id").get<int>();
      s.document.sentences = j.at("sentences").get<std::vector<std::string>>();
      s.meta.session_id = s.document.session_id;
      s.meta.split = parse_split(j.at("split").get<std::string>());
      if (!j.at("phq8").is_null()) {
        s.meta.phq8_score = j.at("phq8").get<int>();
        s.meta.binary_label = label_for_score(*s.meta.phq8_score);
      } else if (j.contains("label") && !j.at("label").is_null()) {
        s.meta.binary_label = static_cast<Label>(j.at("label").get<int>() != 0 ? 1 : 0);
      }
      if (!seen.insert(s.meta.session_id).second)
        throw Error(ErrorCode::DuplicateId, "session " + std::to_string(s.meta.session_id));
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedLine, row_error(line_no, e.what()));
    }
  }
  return out;
}

}  // namespace depsum::corpus
