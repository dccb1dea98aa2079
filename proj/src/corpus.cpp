#include "mwe/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace mwe {

namespace {

constexpr std::size_t kCuptColumns = 11;
constexpr std::size_t kMiscColumns = 6;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<int> parse_positive_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || value < 1) return std::nullopt;
  return value;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

std::string_view comment_value(std::string_view line, std::string_view key) {
  // "# key = value"
  auto body = line.substr(1);
  while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
  if (body.substr(0, key.size()) != key) return {};
  body.remove_prefix(key.size());
  while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
  if (body.empty() || body.front() != '=') return {};
  body.remove_prefix(1);
  while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
  return body;
}

void validate_mwe_structure(const Sentence& sentence, std::size_t line) {
  std::map<int, int> category_bearers;
  for (const auto& token : sentence.tokens) {
    for (const auto& m : token.mwe_tags) {
      auto& count = category_bearers[m.mwe_id];
      if (m.category) ++count;
    }
  }
  int expected = 1;
  for (const auto& [id, bearers] : category_bearers) {
    if (id != expected) {
      throw CuptError(CuptError::Kind::NonContiguousIds, line,
                      "MWE ids are not contiguous from 1 (found " + std::to_string(id) + ")");
    }
    ++expected;
    if (bearers == 0) {
      throw CuptError(CuptError::Kind::DanglingMweId, line,
                      "MWE " + std::to_string(id) + " has no category-bearing component");
    }
    if (bearers > 1) {
      throw CuptError(CuptError::Kind::BadMweColumn, line,
                      "MWE " + std::to_string(id) + " carries its category on more than one token");
    }
  }
}

// Minimal UTF-8 codec. Malformed bytes are passed through one at a time.
char32_t fold_codepoint(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  if (c < 0x80) return c;
  if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 0x20;
  if (c == 0x130) return U'i';
  if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
  if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x218 && c <= 0x21B) return (c % 2 == 0) ? c + 1 : c;  // Ș Ț
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  return c;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

}  // namespace

VmweCategory VmweCategory::parse(std::string_view code) {
  if (code == "VID") return {Kind::VID, "VID"};
  if (code == "LVC.full") return {Kind::LVCFull, "LVC.full"};
  if (code == "LVC.cause") return {Kind::LVCCause, "LVC.cause"};
  if (code == "IRV") return {Kind::IRV, "IRV"};
  return {Kind::Other, std::string(code)};
}

CuptError::CuptError(Kind kind, std::size_t line, const std::string& what)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), kind_(kind), line_(line) {}

const char* to_string(CuptError::Kind kind) {
  switch (kind) {
    case CuptError::Kind::MalformedLine: return "MalformedLine";
    case CuptError::Kind::BadMweColumn: return "BadMweColumn";
    case CuptError::Kind::DanglingMweId: return "DanglingMweId";
    case CuptError::Kind::NonContiguousIds: return "NonContiguousIds";
    case CuptError::Kind::DuplicateLanguageCode: return "DuplicateLanguageCode";
  }
  return "?";
}

std::vector<MweMembership> parse_mwe_column(std::string_view column) {
  std::vector<MweMembership> out;
  if (column == "*" || column == "_") return out;
  for (auto part : split(column, ';')) {
    const auto colon = part.find(':');
    const auto id_text = part.substr(0, colon);
    const auto id = parse_positive_int(id_text);
    if (!id) throw CuptError(CuptError::Kind::BadMweColumn, 0, "bad MWE id '" + std::string(part) + "'");
    MweMembership m{*id, std::nullopt};
    if (colon != std::string_view::npos) {
      const auto cat = part.substr(colon + 1);
      if (cat.empty()) throw CuptError(CuptError::Kind::BadMweColumn, 0, "empty MWE category in '" + std::string(part) + "'");
      m.category = VmweCategory::parse(cat);
    }
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const MweMembership& o) { return o.mwe_id == m.mwe_id; });
    if (duplicate) throw CuptError(CuptError::Kind::BadMweColumn, 0, "MWE id repeated in '" + std::string(column) + "'");
    out.push_back(std::move(m));
  }
  return out;
}

std::string format_mwe_column(const Token& token) {
  if (token.mwe_tags.empty()) return token.mwe_unannotated ? "_" : "*";
  std::string out;
  for (const auto& m : token.mwe_tags) {
    if (!out.empty()) out += ';';
    out += std::to_string(m.mwe_id);
    if (m.category) {
      out += ':';
      out += m.category->code();
    }
  }
  return out;
}

Corpus parse_cupt(std::string_view text, const std::string& language, const std::string& source) {
  Corpus corpus;
  if (!source.empty()) corpus.source_files.push_back(source);

  Sentence current;
  std::size_t first_line = 0;
  bool open = false;

  auto flush = [&](std::size_t line_no) {
    if (!open) return;
    if (current.tokens.empty()) {
      throw CuptError(CuptError::Kind::MalformedLine, line_no, "sentence block without tokens");
    }
    validate_mwe_structure(current, first_line);
    current.language = language;
    corpus.sentences.push_back(std::move(current));
    current = Sentence{};
    open = false;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (end == text.size() && line.empty()) break;

    if (is_blank(line)) {
      flush(line_no);
      continue;
    }
    if (!open) {
      open = true;
      first_line = line_no;
    }
    if (line.front() == '#') {
      current.comments.emplace_back(line);
      if (auto v = comment_value(line, "sent_id"); !v.empty()) {
        current.sent_id = v;
      } else if (auto sv = comment_value(line, "source_sent_id"); !sv.empty() && current.sent_id.empty()) {
        current.sent_id = sv;
      } else if (auto t = comment_value(line, "text"); !t.empty()) {
        current.text = t;
      }
      continue;
    }

    const auto fields = split(line, '\t');
    if (fields.size() != kCuptColumns) {
      throw CuptError(CuptError::Kind::MalformedLine, line_no,
                      "expected " + std::to_string(kCuptColumns) + " columns, got " + std::to_string(fields.size()));
    }
    const auto id_field = fields[0];
    if (id_field.find('-') != std::string_view::npos || id_field.find('.') != std::string_view::npos) {
      current.raw_lines.push_back({current.tokens.size(), std::string(line)});
      continue;
    }
    const auto id = parse_positive_int(id_field);
    if (!id) throw CuptError(CuptError::Kind::MalformedLine, line_no, "bad token id '" + std::string(id_field) + "'");
    if (*id != static_cast<int>(current.tokens.size()) + 1) {
      throw CuptError(CuptError::Kind::NonContiguousIds, line_no,
                      "token id " + std::to_string(*id) + " follows " + std::to_string(current.tokens.size()));
    }

    Token token;
    token.id = *id;
    token.form = fields[1];
    token.lemma = fields[2];
    token.upos = fields[3];
    for (std::size_t c = 4; c < 4 + kMiscColumns; ++c) token.misc_columns.emplace_back(fields[c]);
    try {
      token.mwe_tags = parse_mwe_column(fields[10]);
    } catch (const CuptError& e) {
      throw CuptError(e.kind(), line_no, e.what());
    }
    token.mwe_unannotated = fields[10] == "_";
    current.tokens.push_back(std::move(token));
  }
  flush(line_no);
  return corpus;
}

Corpus read_cupt_file(const std::string& path, const std::string& language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_cupt(buf.str(), language, path);
}

std::string serialize_sentence(const Sentence& sentence) {
  std::string out;
  for (const auto& c : sentence.comments) {
    out += c;
    out += '\n';
  }
  auto emit_raw = [&](std::size_t index) {
    for (const auto& raw : sentence.raw_lines) {
      if (raw.before_token == index) {
        out += raw.line;
        out += '\n';
      }
    }
  };
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    emit_raw(i);
    const auto& t = sentence.tokens[i];
    out += std::to_string(t.id);
    out += '\t' + t.form + '\t' + t.lemma + '\t' + t.upos;
    for (std::size_t c = 0; c < kMiscColumns; ++c) {
      out += '\t';
      out += c < t.misc_columns.size() ? t.misc_columns[c] : "_";
    }
    out += '\t';
    out += format_mwe_column(t);
    out += '\n';
  }
  emit_raw(sentence.tokens.size());
  out += '\n';
  return out;
}

std::string serialize_cupt(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus.sentences) out += serialize_sentence(s);
  return out;
}

std::string case_fold(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  while (i < utf8.size()) {
    const auto b0 = static_cast<unsigned char>(utf8[i]);
    std::size_t len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
    bool valid = len > 0 && i + len <= utf8.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      valid = (static_cast<unsigned char>(utf8[i + k]) & 0xC0) == 0x80;
    }
    if (!valid) {
      out.push_back(utf8[i++]);
      continue;
    }
    char32_t c = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    for (std::size_t k = 1; k < len; ++k) c = (c << 6) | (static_cast<unsigned char>(utf8[i + k]) & 0x3F);
    append_utf8(out, fold_codepoint(c));
    i += len;
  }
  return out;
}

LemmaKey make_lemma_key(std::span<const std::string> lemmas) {
  LemmaKey key;
  key.reserve(lemmas.size());
  for (const auto& l : lemmas) key.push_back(case_fold(l));
  std::sort(key.begin(), key.end());
  return key;
}

std::vector<MweInstance> extract_mwes(const Sentence& sentence) {
  std::map<int, MweInstance> by_id;
  std::map<int, bool> has_category;
  for (const auto& token : sentence.tokens) {
    for (const auto& m : token.mwe_tags) {
      auto& inst = by_id[m.mwe_id];
      inst.mwe_id = m.mwe_id;
      inst.token_indices.push_back(token.id);
      if (m.category) {
        inst.category = *m.category;
        has_category[m.mwe_id] = true;
      }
    }
  }
  std::vector<MweInstance> out;
  out.reserve(by_id.size());
  for (auto& [id, inst] : by_id) {
    if (!has_category[id]) {
      throw CuptError(CuptError::Kind::DanglingMweId, 0, "MWE " + std::to_string(id) + " has no category-bearing component");
    }
    std::vector<std::string> lemmas;
    for (int idx : inst.token_indices) lemmas.push_back(sentence.tokens[static_cast<std::size_t>(idx - 1)].lemma);
    inst.lemma_key = make_lemma_key(lemmas);
    out.push_back(std::move(inst));
  }
  return out;
}

TagEncoding encode_tags(const Sentence& sentence) {
  auto instances = extract_mwes(sentence);
  std::sort(instances.begin(), instances.end(), [](const MweInstance& a, const MweInstance& b) {
    if (a.token_indices.front() != b.token_indices.front()) return a.token_indices.front() < b.token_indices.front();
    return a.mwe_id < b.mwe_id;
  });

  TagEncoding enc;
  enc.tags.assign(sentence.tokens.size(), "O");
  std::vector<bool> owned(sentence.tokens.size(), false);
  std::vector<const MweInstance*> accepted;

  for (const auto& inst : instances) {
    const bool shares_token = std::any_of(inst.token_indices.begin(), inst.token_indices.end(),
                                          [&](int idx) { return owned[static_cast<std::size_t>(idx - 1)]; });
    const bool interleaves = std::any_of(accepted.begin(), accepted.end(), [&](const MweInstance* other) {
      return other->category == inst.category && other->token_indices.back() >= inst.token_indices.front() &&
             inst.token_indices.back() >= other->token_indices.front();
    });
    if (shares_token || interleaves) {
      enc.dropped_mwe_ids.push_back(inst.mwe_id);
      continue;
    }
    accepted.push_back(&inst);
    bool first = true;
    for (int idx : inst.token_indices) {
      const auto i = static_cast<std::size_t>(idx - 1);
      owned[i] = true;
      enc.tags[i] = (first ? "B-" : "I-") + inst.category.code();
      first = false;
    }
  }
  std::sort(enc.dropped_mwe_ids.begin(), enc.dropped_mwe_ids.end());
  return enc;
}

std::vector<MweInstance> decode_tags(std::span<const std::string> tags) {
  std::vector<MweInstance> out;
  std::map<std::string, std::size_t, std::less<>> open;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string_view tag = tags[i];
    if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) continue;
    const auto cat = tag.substr(2);
    const int token_id = static_cast<int>(i) + 1;
    if (tag[0] == 'I') {
      if (auto it = open.find(cat); it != open.end()) {
        out[it->second].token_indices.push_back(token_id);
        continue;
      }
    }
    MweInstance inst;
    inst.mwe_id = static_cast<int>(out.size()) + 1;
    inst.category = VmweCategory::parse(cat);
    inst.token_indices.push_back(token_id);
    open[std::string(cat)] = out.size();
    out.push_back(std::move(inst));
  }
  return out;
}

Sentence with_mwes(const Sentence& sentence, std::span<const MweInstance> instances) {
  Sentence out = sentence;
  for (auto& t : out.tokens) {
    t.mwe_tags.clear();
    t.mwe_unannotated = false;
  }
  for (const auto& inst : instances) {
    bool first = true;
    for (int idx : inst.token_indices) {
      if (idx < 1 || static_cast<std::size_t>(idx) > out.tokens.size()) {
        throw std::out_of_range("MWE token index " + std::to_string(idx) + " outside sentence");
      }
      MweMembership m{inst.mwe_id, std::nullopt};
      if (first) m.category = inst.category;
      first = false;
      out.tokens[static_cast<std::size_t>(idx - 1)].mwe_tags.push_back(std::move(m));
    }
  }
  return out;
}

Corpus merge_corpora(const std::vector<std::pair<Corpus, std::string>>& parts) {
  Corpus merged;
  std::map<std::string, std::string> language_of_source;
  for (const auto& [corpus, language] : parts) {
    for (const auto& src : corpus.source_files) {
      auto [it, inserted] = language_of_source.emplace(src, language);
      if (!inserted && it->second != language) {
        throw CuptError(CuptError::Kind::DuplicateLanguageCode, 0,
                        "source " + src + " given as both " + it->second + " and " + language);
      }
      merged.source_files.push_back(src);
    }
    for (const auto& s : corpus.sentences) {
      merged.sentences.push_back(s);
      merged.sentences.back().language = language;
    }
  }
  return merged;
}

std::set<LemmaKey> unseen_keys(const Corpus& train) {
  std::set<LemmaKey> keys;
  for (const auto& s : train.sentences) {
    for (auto& inst : extract_mwes(s)) keys.insert(std::move(inst.lemma_key));
  }
  return keys;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  for (const auto& s : corpus.sentences) {
    auto& lang = stats.by_language[s.language];
    for (auto* target : {&stats.total, &lang}) {
      target->sentences += 1;
      target->tokens += s.tokens.size();
    }
    for (const auto& inst : extract_mwes(s)) {
      for (auto* target : {&stats.total, &lang}) {
        target->mwes += 1;
        target->mwes_by_category[inst.category.code()] += 1;
      }
    }
  }
  return stats;
}

}  // namespace mwe
