#pragma once

// Tagger with three parts sharing one feature extractor:
//   F  - windowed embedding + feed-forward feature extractor,
//   C  - tag classifier, optionally behind a lateral inhibition layer,
//   LG - language discriminator fed through a gradient reversal node.

#include "mwe/autodiff.hpp"
#include "mwe/corpus.hpp"
#include "mwe/lateral_inhibition.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mwe {

enum class LanguagePooling { Sentence, Token };

struct ModelConfig {
  int embedding_dim = 16;
  int window = 1;  // tokens on each side
  int hidden_dim = 32;
  int discriminator_dim = 16;
  double steepness = LateralInhibitionLayer::kDefaultSteepness;
  bool use_lateral_inhibition = true;
  bool use_adversarial = true;
  double lambda = 1.0;
  std::uint64_t seed = 1;
  LanguagePooling pooling = LanguagePooling::Sentence;
  double init_range = 0.1;
  double li_bias_init = 0.1;

  void validate() const;
};

/// Form -> id. Id 0 is the boundary padding symbol, id 1 the unknown form.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();
  static Vocabulary build(const Corpus& corpus);
  static Vocabulary from_forms(const std::vector<std::string>& forms);  // forms after PAD and UNK

  int id(const std::string& form) const;
  int size() const { return static_cast<int>(forms_.size()); }
  const std::vector<std::string>& forms() const { return forms_; }

 private:
  std::vector<std::string> forms_;
  std::map<std::string, int, std::less<>> ids_;
};

/// "O" first, then B-/I- pairs for each category in code order.
std::vector<std::string> build_tagset(const Corpus& corpus);
/// Language codes in order of first appearance.
std::vector<std::string> build_language_set(const Corpus& corpus);

struct ForwardOptions {
  double lambda = 1.0;
  /// false replaces the reversal by an identity backward (adjoint times +1).
  bool reverse_gradient = true;
};

class Model {
 public:
  struct Bound {
    ad::Var embedding, hidden_w, hidden_b;
    ad::Var li_w, li_b;
    ad::Var head_w, head_b;
    ad::Var lg_w1, lg_b1, lg_w2, lg_b2;
  };

  struct Output {
    ad::Var features;         // n x hidden
    ad::Var tag_logits;       // n x |tagset|
    ad::Var language_logits;  // 1 x |languages| (n x |languages| with token pooling); unset without LG
    bool has_language = false;
  };

  Model(ModelConfig config, Vocabulary vocab, std::vector<std::string> tagset, std::vector<std::string> languages);
  static Model build(const Corpus& train, const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<std::string>& tagset() const { return tagset_; }
  const std::vector<std::string>& languages() const { return languages_; }
  bool has_lateral_inhibition() const { return li_.has_value(); }
  const LateralInhibitionLayer* lateral_inhibition() const { return li_ ? &*li_ : nullptr; }

  std::vector<ad::Parameter*> feature_parameters();
  std::vector<ad::Parameter*> classifier_parameters();
  std::vector<ad::Parameter*> discriminator_parameters();
  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;
  std::size_t parameter_count() const;

  Bound bind(ad::Tape& tape);
  Bound bind_frozen(ad::Tape& tape) const;

  std::vector<int> window_ids(const Sentence& s) const;
  ad::Var extract_features(const Bound& bound, const Sentence& s) const;
  Output forward(const Bound& bound, const Sentence& s, const ForwardOptions& options) const;

  std::vector<std::string> predict_tags(const Sentence& s) const;
  std::vector<int> gold_tag_ids(const Sentence& s) const;
  int language_id(const std::string& language) const;
  int tag_id(const std::string& tag) const;

  ad::Parameter* find_parameter(const std::string& name);

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  std::vector<std::string> tagset_;
  std::vector<std::string> languages_;

  ad::Parameter embedding_;
  ad::Parameter hidden_w_, hidden_b_;
  std::optional<LateralInhibitionLayer> li_;
  ad::Parameter head_w_, head_b_;
  ad::Parameter lg_w1_, lg_b1_, lg_w2_, lg_b2_;
};

/// Index of the largest entry of each row; ties go to the lowest index.
std::vector<int> argmax_rows(const ad::Matrix& m);

class UnknownLanguageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mwe
