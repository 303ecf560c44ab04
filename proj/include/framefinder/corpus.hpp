#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "framefinder/errors.hpp"

namespace framefinder {

struct Document {
  std::string id;
  std::string text;
  std::size_t ordinal = 0;

  friend bool operator==(const Document&, const Document&) = default;
};

enum class SplitMode { lines, whole, preidentified };

inline std::string_view to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::lines: return "lines";
    case SplitMode::whole: return "whole";
    case SplitMode::preidentified: return "preidentified";
  }
  return "lines";
}

inline SplitMode split_mode_from_string(std::string_view s) {
  if (s == "lines") return SplitMode::lines;
  if (s == "whole") return SplitMode::whole;
  if (s == "preidentified") return SplitMode::preidentified;
  throw ConfigError("unknown split mode '" + std::string(s) + "'");
}

/// Ordered documents plus a provenance label. Ordinals are contiguous from 0
/// and ids are unique.
struct Corpus {
  std::vector<Document> documents;
  std::string source_name;
  SplitMode split_mode = SplitMode::lines;

  std::size_t size() const noexcept { return documents.size(); }
  bool empty() const noexcept { return documents.empty(); }
};

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace detail

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && detail::is_space(s[b])) ++b;
  while (e > b && detail::is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

/// Returns the byte offset of the first invalid UTF-8 sequence, or npos.
inline std::size_t find_invalid_utf8(std::string_view s) {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = p[i];
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    // overlong encodings, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return i;
    }
    i += len;
  }
  return std::string_view::npos;
}

inline std::string normalize_line_endings(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
    } else {
      out.push_back(raw[i]);
    }
  }
  return out;
}

inline std::string document_id(std::string_view source_name, std::size_t ordinal) {
  std::string id(source_name);
  id += ':';
  id += std::to_string(ordinal);
  return id;
}

/// Splits raw text into documents. With `split_on_newlines` every non-blank
/// line becomes one trimmed document; otherwise the whole trimmed text is a
/// single document. Throws EmptyCorpus when nothing but whitespace remains.
inline Corpus split_into_documents(std::string_view raw, bool split_on_newlines,
                                   std::string source_name = "input") {
  if (const auto bad = find_invalid_utf8(raw); bad != std::string_view::npos) {
    throw EncodingError("invalid UTF-8 at byte " + std::to_string(bad));
  }
  const std::string text = normalize_line_endings(raw);

  Corpus corpus;
  corpus.source_name = std::move(source_name);
  corpus.split_mode = split_on_newlines ? SplitMode::lines : SplitMode::whole;

  auto push = [&](std::string_view piece) {
    const std::string_view t = trim(piece);
    if (t.empty()) return;
    const std::size_t ordinal = corpus.documents.size();
    corpus.documents.push_back({document_id(corpus.source_name, ordinal), std::string(t), ordinal});
  };

  if (split_on_newlines) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t end = text.find('\n', start);
      if (end == std::string::npos) {
        push(std::string_view(text).substr(start));
        break;
      }
      push(std::string_view(text).substr(start, end - start));
      start = end + 1;
    }
  } else {
    push(text);
  }

  if (corpus.empty()) throw EmptyCorpus("no non-blank content in '" + corpus.source_name + "'");
  return corpus;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return buf.str();
}

inline Corpus load_corpus_file(const std::filesystem::path& path, bool split_on_newlines) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError("not a readable file: '" + path.string() + "'");
  }
  return split_into_documents(read_file(path), split_on_newlines, path.filename().string());
}

/// Pre-identified corpus: one {"id": ..., "text": ...} object per line.
/// Blank lines are skipped; ids must be unique and texts non-blank.
inline Corpus load_jsonl_corpus(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  if (const auto bad = find_invalid_utf8(raw); bad != std::string_view::npos) {
    throw EncodingError("invalid UTF-8 at byte " + std::to_string(bad) + " of '" +
                        path.string() + "'");
  }
  Corpus corpus;
  corpus.source_name = path.filename().string();
  corpus.split_mode = SplitMode::preidentified;
  std::unordered_set<std::string> seen;

  std::istringstream lines(normalize_line_endings(raw));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto where = [&] { return path.filename().string() + ":" + std::to_string(line_no) + ": "; };
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusFormatError(where() + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
        !rec.contains("text") || !rec["text"].is_string()) {
      throw CorpusFormatError(where() + "expected {\"id\": string, \"text\": string}");
    }
    std::string id = rec["id"].get<std::string>();
    const std::string_view text = trim(rec["text"].get_ref<const std::string&>());
    if (id.empty()) throw CorpusFormatError(where() + "empty id");
    if (text.empty()) throw CorpusFormatError(where() + "blank text for '" + id + "'");
    if (!seen.insert(id).second) throw CorpusFormatError(where() + "duplicate id '" + id + "'");
    const std::size_t ordinal = corpus.documents.size();
    corpus.documents.push_back({std::move(id), std::string(text), ordinal});
  }
  if (corpus.empty()) throw EmptyCorpus("no documents in '" + path.string() + "'");
  return corpus;
}

/// Texts supplied as an explicit list: each non-blank entry is one document.
inline Corpus corpus_from_texts(const std::vector<std::string>& texts, std::string source_name) {
  Corpus corpus;
  corpus.source_name = std::move(source_name);
  corpus.split_mode = SplitMode::preidentified;
  for (const auto& t : texts) {
    if (find_invalid_utf8(t) != std::string_view::npos) throw EncodingError("invalid UTF-8 in text");
    const std::string_view trimmed = trim(t);
    if (trimmed.empty()) continue;
    const std::size_t ordinal = corpus.documents.size();
    corpus.documents.push_back(
        {document_id(corpus.source_name, ordinal), std::string(trimmed), ordinal});
  }
  if (corpus.empty()) throw EmptyCorpus("no non-blank texts");
  return corpus;
}

}  // namespace framefinder
