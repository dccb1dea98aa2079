#include "mwe/checkpoint.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mwe {

namespace {

using nlohmann::json;

const char* pooling_name(LanguagePooling p) { return p == LanguagePooling::Sentence ? "sentence" : "token"; }

LanguagePooling pooling_from(const std::string& s) {
  if (s == "sentence") return LanguagePooling::Sentence;
  if (s == "token") return LanguagePooling::Token;
  throw std::invalid_argument("unknown language pooling '" + s + "'");
}

}  // namespace

json model_config_to_json(const ModelConfig& c) {
  return json{{"embedding_dim", c.embedding_dim},
              {"window", c.window},
              {"hidden_dim", c.hidden_dim},
              {"discriminator_dim", c.discriminator_dim},
              {"steepness", c.steepness},
              {"use_lateral_inhibition", c.use_lateral_inhibition},
              {"use_adversarial", c.use_adversarial},
              {"lambda", c.lambda},
              {"seed", c.seed},
              {"pooling", pooling_name(c.pooling)},
              {"init_range", c.init_range},
              {"li_bias_init", c.li_bias_init}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.window = j.at("window").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.discriminator_dim = j.at("discriminator_dim").get<int>();
  c.steepness = j.at("steepness").get<double>();
  c.use_lateral_inhibition = j.at("use_lateral_inhibition").get<bool>();
  c.use_adversarial = j.at("use_adversarial").get<bool>();
  c.lambda = j.at("lambda").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.pooling = pooling_from(j.at("pooling").get<std::string>());
  c.init_range = j.at("init_range").get<double>();
  c.li_bias_init = j.at("li_bias_init").get<double>();
  return c;
}

std::string checkpoint_to_string(const Model& model) {
  json params = json::object();
  for (const auto* p : model.parameters()) {
    const auto& v = p->value();
    params[p->name()] = json{{"rows", v.rows()},
                             {"cols", v.cols()},
                             {"data", std::vector<double>(v.data(), v.data() + v.size())}};
  }
  const auto& forms = model.vocabulary().forms();
  const json doc{{"format", kCheckpointFormat},
                 {"version", kCheckpointVersion},
                 {"config", model_config_to_json(model.config())},
                 {"vocabulary", std::vector<std::string>(forms.begin() + 2, forms.end())},
                 {"tagset", model.tagset()},
                 {"languages", model.languages()},
                 {"parameters", params}};
  return doc.dump(1) + "\n";
}

Model checkpoint_from_string(const std::string& text) {
  const auto doc = json::parse(text);
  if (doc.at("format").get<std::string>() != kCheckpointFormat) throw std::runtime_error("not a tagger checkpoint");
  if (doc.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + doc.at("version").dump());
  }
  Model model(model_config_from_json(doc.at("config")),
              Vocabulary::from_forms(doc.at("vocabulary").get<std::vector<std::string>>()),
              doc.at("tagset").get<std::vector<std::string>>(), doc.at("languages").get<std::vector<std::string>>());

  const auto& params = doc.at("parameters");
  for (auto* p : model.parameters()) {
    const auto& entry = params.at(p->name());
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    const auto data = entry.at("data").get<std::vector<double>>();
    if (rows != p->value().rows() || cols != p->value().cols() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw std::runtime_error("checkpoint parameter " + p->name() + " has the wrong shape");
    }
    p->value() = Eigen::Map<const ad::Matrix>(data.data(), rows, cols);
    p->zero_grad();
  }
  if (params.size() != model.parameters().size()) throw std::runtime_error("checkpoint has unexpected parameters");
  return model;
}

void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << checkpoint_to_string(model);
  if (!out) throw std::runtime_error("failed writing " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace mwe
