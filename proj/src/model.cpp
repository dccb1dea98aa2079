#include "mwe/model.hpp"

#include "mwe/rng.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace mwe {

namespace {

ad::Matrix uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double range) {
  ad::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-range, range);
  return m;
}

}  // namespace

void ModelConfig::validate() const {
  if (embedding_dim < 1 || hidden_dim < 1 || discriminator_dim < 1) throw std::invalid_argument("model dimensions must be >= 1");
  if (window < 0) throw std::invalid_argument("window radius must be >= 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(steepness > 0.0)) throw std::invalid_argument("surrogate steepness must be positive");
  if (!(init_range > 0.0)) throw std::invalid_argument("init range must be positive");
}

Vocabulary::Vocabulary() : forms_{"<pad>", "<unk>"} {
  ids_.emplace("<pad>", kPad);
  ids_.emplace("<unk>", kUnk);
}

Vocabulary Vocabulary::from_forms(const std::vector<std::string>& forms) {
  Vocabulary v;
  for (const auto& f : forms) {
    if (v.ids_.emplace(f, v.size()).second) v.forms_.push_back(f);
  }
  return v;
}

Vocabulary Vocabulary::build(const Corpus& corpus) {
  std::set<std::string> forms;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) forms.insert(t.form);
  }
  forms.erase("<pad>");
  forms.erase("<unk>");
  return from_forms({forms.begin(), forms.end()});
}

int Vocabulary::id(const std::string& form) const {
  auto it = ids_.find(form);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<std::string> build_tagset(const Corpus& corpus) {
  std::set<std::string> categories;
  for (const auto& s : corpus.sentences) {
    for (const auto& inst : extract_mwes(s)) categories.insert(inst.category.code());
  }
  std::vector<std::string> tags{"O"};
  for (const auto& c : categories) {
    tags.push_back("B-" + c);
    tags.push_back("I-" + c);
  }
  return tags;
}

std::vector<std::string> build_language_set(const Corpus& corpus) {
  std::vector<std::string> langs;
  for (const auto& s : corpus.sentences) {
    if (std::find(langs.begin(), langs.end(), s.language) == langs.end()) langs.push_back(s.language);
  }
  return langs;
}

Model::Model(ModelConfig config, Vocabulary vocab, std::vector<std::string> tagset, std::vector<std::string> languages)
    : config_(config), vocab_(std::move(vocab)), tagset_(std::move(tagset)), languages_(std::move(languages)) {
  config_.validate();
  if (tagset_.empty()) throw std::invalid_argument("empty tagset");
  if (config_.use_adversarial && languages_.empty()) throw std::invalid_argument("adversarial training needs languages");

  const auto e = config_.embedding_dim;
  const auto h = config_.hidden_dim;
  const auto window_width = (2 * config_.window + 1) * e;
  const auto r = config_.init_range;
  const auto tags = static_cast<Eigen::Index>(tagset_.size());

  // Draw order is fixed: F, then C, then LG. A model without LG therefore
  // shares its F and C initialization with the same-seed model that has one.
  Rng rng(config_.seed);
  embedding_ = ad::Parameter("F.embedding", uniform_matrix(rng, vocab_.size(), e, r));
  hidden_w_ = ad::Parameter("F.hidden.W", uniform_matrix(rng, window_width, h, r));
  hidden_b_ = ad::Parameter("F.hidden.b", ad::Matrix::Zero(1, h));
  if (config_.use_lateral_inhibition) li_.emplace(h, config_.steepness, config_.li_bias_init);
  head_w_ = ad::Parameter("C.head.W", uniform_matrix(rng, h, tags, r));
  head_b_ = ad::Parameter("C.head.b", ad::Matrix::Zero(1, tags));
  if (config_.use_adversarial) {
    const auto d = config_.discriminator_dim;
    const auto langs = static_cast<Eigen::Index>(languages_.size());
    lg_w1_ = ad::Parameter("LG.W1", uniform_matrix(rng, h, d, r));
    lg_b1_ = ad::Parameter("LG.b1", ad::Matrix::Zero(1, d));
    lg_w2_ = ad::Parameter("LG.W2", uniform_matrix(rng, d, langs, r));
    lg_b2_ = ad::Parameter("LG.b2", ad::Matrix::Zero(1, langs));
  }
}

Model Model::build(const Corpus& train, const ModelConfig& config) {
  return Model(config, Vocabulary::build(train), build_tagset(train), build_language_set(train));
}

std::vector<ad::Parameter*> Model::feature_parameters() { return {&embedding_, &hidden_w_, &hidden_b_}; }

std::vector<ad::Parameter*> Model::classifier_parameters() {
  std::vector<ad::Parameter*> out;
  if (li_) {
    out.push_back(&li_->weight());
    out.push_back(&li_->bias());
  }
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

std::vector<ad::Parameter*> Model::discriminator_parameters() {
  if (!config_.use_adversarial) return {};
  return {&lg_w1_, &lg_b1_, &lg_w2_, &lg_b2_};
}

std::vector<ad::Parameter*> Model::parameters() {
  auto out = feature_parameters();
  for (auto* p : classifier_parameters()) out.push_back(p);
  for (auto* p : discriminator_parameters()) out.push_back(p);
  return out;
}

std::vector<const ad::Parameter*> Model::parameters() const {
  auto mutable_params = const_cast<Model*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += static_cast<std::size_t>(p->value().size());
  return n;
}

ad::Parameter* Model::find_parameter(const std::string& name) {
  for (auto* p : parameters()) {
    if (p->name() == name) return p;
  }
  return nullptr;
}

Model::Bound Model::bind(ad::Tape& tape) {
  Bound b;
  b.embedding = tape.parameter(embedding_);
  b.hidden_w = tape.parameter(hidden_w_);
  b.hidden_b = tape.parameter(hidden_b_);
  if (li_) {
    b.li_w = tape.parameter(li_->weight());
    b.li_b = tape.parameter(li_->bias());
  }
  b.head_w = tape.parameter(head_w_);
  b.head_b = tape.parameter(head_b_);
  if (config_.use_adversarial) {
    b.lg_w1 = tape.parameter(lg_w1_);
    b.lg_b1 = tape.parameter(lg_b1_);
    b.lg_w2 = tape.parameter(lg_w2_);
    b.lg_b2 = tape.parameter(lg_b2_);
  }
  return b;
}

Model::Bound Model::bind_frozen(ad::Tape& tape) const {
  Bound b;
  b.embedding = tape.constant(embedding_.value());
  b.hidden_w = tape.constant(hidden_w_.value());
  b.hidden_b = tape.constant(hidden_b_.value());
  if (li_) {
    b.li_w = tape.constant(li_->weight().value());
    b.li_b = tape.constant(li_->bias().value());
  }
  b.head_w = tape.constant(head_w_.value());
  b.head_b = tape.constant(head_b_.value());
  if (config_.use_adversarial) {
    b.lg_w1 = tape.constant(lg_w1_.value());
    b.lg_b1 = tape.constant(lg_b1_.value());
    b.lg_w2 = tape.constant(lg_w2_.value());
    b.lg_b2 = tape.constant(lg_b2_.value());
  }
  return b;
}

std::vector<int> Model::window_ids(const Sentence& s) const {
  const int n = static_cast<int>(s.tokens.size());
  const int w = config_.window;
  std::vector<int> token_ids;
  token_ids.reserve(s.tokens.size());
  for (const auto& t : s.tokens) token_ids.push_back(vocab_.id(t.form));

  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(n * (2 * w + 1)));
  for (int i = 0; i < n; ++i) {
    for (int j = i - w; j <= i + w; ++j) ids.push_back(j < 0 || j >= n ? Vocabulary::kPad : token_ids[static_cast<std::size_t>(j)]);
  }
  return ids;
}

ad::Var Model::extract_features(const Bound& bound, const Sentence& s) const {
  if (s.tokens.empty()) throw std::invalid_argument("cannot extract features of an empty sentence");
  const auto ids = window_ids(s);
  const auto n = static_cast<Eigen::Index>(s.tokens.size());
  const auto width = (2 * config_.window + 1) * config_.embedding_dim;
  const auto windows = ad::reshape(ad::embedding_lookup(bound.embedding, ids), n, width);
  return ad::relu(ad::add(ad::matmul(windows, bound.hidden_w), bound.hidden_b));
}

Model::Output Model::forward(const Bound& bound, const Sentence& s, const ForwardOptions& options) const {
  Output out;
  out.features = extract_features(bound, s);

  auto tag_input = out.features;
  if (li_) tag_input = li_->forward(out.features, bound.li_w, bound.li_b);
  out.tag_logits = ad::add(ad::matmul(tag_input, bound.head_w), bound.head_b);

  if (config_.use_adversarial) {
    auto lg_input = config_.pooling == LanguagePooling::Sentence ? ad::mean_rows(out.features) : out.features;
    lg_input = options.reverse_gradient ? ad::grad_reverse(lg_input, options.lambda) : ad::gradient_scale(lg_input, 1.0);
    const auto hidden = ad::relu(ad::add(ad::matmul(lg_input, bound.lg_w1), bound.lg_b1));
    out.language_logits = ad::add(ad::matmul(hidden, bound.lg_w2), bound.lg_b2);
    out.has_language = true;
  }
  return out;
}

std::vector<int> argmax_rows(const ad::Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()), 0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<std::string> Model::predict_tags(const Sentence& s) const {
  if (s.tokens.empty()) return {};
  ad::Tape tape;
  const auto bound = bind_frozen(tape);
  const auto out = forward(bound, s, ForwardOptions{config_.lambda, true});
  std::vector<std::string> tags;
  for (int idx : argmax_rows(out.tag_logits.value())) tags.push_back(tagset_[static_cast<std::size_t>(idx)]);
  return tags;
}

int Model::tag_id(const std::string& tag) const {
  auto it = std::find(tagset_.begin(), tagset_.end(), tag);
  if (it == tagset_.end()) throw std::invalid_argument("tag '" + tag + "' is not in the model tagset");
  return static_cast<int>(it - tagset_.begin());
}

std::vector<int> Model::gold_tag_ids(const Sentence& s) const {
  std::vector<int> ids;
  for (const auto& tag : encode_tags(s).tags) ids.push_back(tag_id(tag));
  return ids;
}

int Model::language_id(const std::string& language) const {
  auto it = std::find(languages_.begin(), languages_.end(), language);
  if (it == languages_.end()) throw UnknownLanguageError("language '" + language + "' is not known to the discriminator");
  return static_cast<int>(it - languages_.begin());
}

}  // namespace mwe
