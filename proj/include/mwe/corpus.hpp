#pragma once

// CUPT (CoNLL-U Plus with a PARSEME:MWE column) corpus model, parser and
// writer, plus the span <-> IOB2 tag conversions used by the tagger.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mwe {

/// Verbal MWE category. The four Romanian codes get their own kind; any
/// other code (VPC.full, IAV, MVC, LVC.cause variants of other languages...)
/// is kept verbatim as `Kind::Other`.
class VmweCategory {
 public:
  enum class Kind { VID, LVCFull, LVCCause, IRV, Other };

  VmweCategory() = default;
  static VmweCategory parse(std::string_view code);

  Kind kind() const { return kind_; }
  const std::string& code() const { return code_; }

  friend bool operator==(const VmweCategory& a, const VmweCategory& b) { return a.code_ == b.code_; }
  friend auto operator<=>(const VmweCategory& a, const VmweCategory& b) { return a.code_ <=> b.code_; }

 private:
  VmweCategory(Kind kind, std::string code) : kind_(kind), code_(std::move(code)) {}
  Kind kind_ = Kind::Other;
  std::string code_;
};

struct MweMembership {
  int mwe_id = 0;
  std::optional<VmweCategory> category;  // set only on the category-bearing component

  friend bool operator==(const MweMembership&, const MweMembership&) = default;
};

struct Token {
  int id = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::vector<std::string> misc_columns;  // XPOS FEATS HEAD DEPREL DEPS MISC, verbatim
  std::vector<MweMembership> mwe_tags;
  bool mwe_unannotated = false;  // MWE column was "_" rather than "*"

  friend bool operator==(const Token&, const Token&) = default;
};

/// A raw line that is not a tagging token: multiword-token range ("3-4") or
/// empty node ("5.1"). Kept so the sentence serializes back unchanged.
struct RawTokenLine {
  std::size_t before_token = 0;  // index into Sentence::tokens it precedes
  std::string line;

  friend bool operator==(const RawTokenLine&, const RawTokenLine&) = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::string sent_id;
  std::string text;
  std::string language;
  std::vector<std::string> comments;  // verbatim, including the leading '#'
  std::vector<RawTokenLine> raw_lines;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Case-folded lemma multiset, sorted.
using LemmaKey = std::vector<std::string>;

struct MweInstance {
  int mwe_id = 0;
  VmweCategory category;
  std::vector<int> token_indices;  // 1-based, strictly increasing
  LemmaKey lemma_key;

  friend bool operator==(const MweInstance&, const MweInstance&) = default;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::vector<std::string> source_files;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

class CuptError : public std::runtime_error {
 public:
  enum class Kind { MalformedLine, BadMweColumn, DanglingMweId, NonContiguousIds, DuplicateLanguageCode };

  CuptError(Kind kind, std::size_t line, const std::string& what);

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }  // 1-based; 0 when not tied to a line

 private:
  Kind kind_;
  std::size_t line_;
};

const char* to_string(CuptError::Kind kind);

/// Parses CUPT text. Accepts LF or CRLF line endings. Every sentence is
/// stamped with `language`; `source` is recorded as provenance.
Corpus parse_cupt(std::string_view text, const std::string& language, const std::string& source = {});
Corpus read_cupt_file(const std::string& path, const std::string& language);

std::string serialize_cupt(const Corpus& corpus);
std::string serialize_sentence(const Sentence& sentence);
std::string format_mwe_column(const Token& token);
std::vector<MweMembership> parse_mwe_column(std::string_view column);

/// Unicode-aware lower-casing for Latin, Greek and Cyrillic letters; other
/// code points pass through unchanged.
std::string case_fold(std::string_view utf8);
LemmaKey make_lemma_key(std::span<const std::string> lemmas);

std::vector<MweInstance> extract_mwes(const Sentence& sentence);

struct TagEncoding {
  std::vector<std::string> tags;
  std::vector<int> dropped_mwe_ids;  // unrepresentable in flat IOB2; empty when overlap-free
};

/// IOB2-with-category. When two MWEs cannot both be represented (shared
/// token, or same-category MWEs whose spans interleave) the one starting
/// later is dropped (ties: larger mwe_id) and reported in `dropped_mwe_ids`.
TagEncoding encode_tags(const Sentence& sentence);

/// Lenient inverse of encode_tags. Instances are numbered 1.. in order of
/// their first token; lemma keys are left empty.
std::vector<MweInstance> decode_tags(std::span<const std::string> tags);

/// Rewrites the MWE column of every token from `instances`.
Sentence with_mwes(const Sentence& sentence, std::span<const MweInstance> instances);

Corpus merge_corpora(const std::vector<std::pair<Corpus, std::string>>& parts);

std::set<LemmaKey> unseen_keys(const Corpus& train);

struct LanguageStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t mwes = 0;
  std::map<std::string, std::size_t> mwes_by_category;

  friend bool operator==(const LanguageStats&, const LanguageStats&) = default;
};

struct CorpusStats {
  LanguageStats total;
  std::map<std::string, LanguageStats> by_language;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace mwe
