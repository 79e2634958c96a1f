#pragma once

// Checkpoint text format:
//
//   line 1   JSON header {format_version, model_type, config, representation,
//            half_width, embeddings, params: [{name, shape}]}
//   param NAME v...     one line per parameter, row-major
//   unk v...            vector used for out-of-vocabulary words
//   override WORD v...  fine-tuned word vectors, if any
//
// Values are printed with 17 significant digits so a reload is exact.

#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "evchain/error.hpp"
#include "evchain/harness.hpp"
#include "evchain/models.hpp"

namespace evchain {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline void append_values(std::string& out, std::span<const double> values) {
  char buf[40];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    out += buf;
  }
}

}  // namespace detail

inline std::string save_checkpoint(const TrainedModel& tm, const std::string& embeddings_source = "") {
  const nn::ModelConfig& mc = tm.model.config();
  nlohmann::ordered_json header;
  header["format_version"] = kCheckpointVersion;
  header["model_type"] = nn::model_type_name(mc.type);
  header["config"] = {{"input_dim", mc.input_dim},
                      {"hidden", mc.hidden},
                      {"filter_width", mc.filter_width},
                      {"dropout", mc.dropout},
                      {"activation", mc.activation == nn::Activation::kRelu ? "relu" : "tanh"},
                      {"readout", mc.readout == nn::TreeReadout::kRoot ? "root" : "target"},
                      {"init_scale", mc.init_scale}};
  header["representation"] = representation_name(tm.representation);
  header["half_width"] = tm.half_width;
  header["embeddings"] = embeddings_source;
  header["params"] = nlohmann::ordered_json::array();
  for (const auto& p : tm.model.params()) header["params"].push_back({{"name", p.name}, {"shape", p.value.shape()}});

  std::string out = header.dump() + "\n";
  for (const auto& p : tm.model.params()) {
    out += "param " + p.name;
    detail::append_values(out, p.value.values());
    out += '\n';
  }
  out += "unk";
  detail::append_values(out, tm.unk);
  out += '\n';
  for (const auto& [word, v] : tm.overrides) {
    out += "override " + word;
    detail::append_values(out, v);
    out += '\n';
  }
  return out;
}

struct CheckpointHeader {
  nlohmann::json json;
  std::string embeddings_source;
};

inline CheckpointHeader read_checkpoint_header(std::string_view text) {
  const auto nl = text.find('\n');
  try {
    CheckpointHeader h{nlohmann::json::parse(text.substr(0, nl)), {}};
    h.embeddings_source = h.json.value("embeddings", "");
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint: malformed header: ") + e.what());
  }
}

// `table` supplies the base word vectors; the checkpoint's unk vector and
// overrides take precedence.
inline TrainedModel load_checkpoint(std::string_view text, std::shared_ptr<const nn::EmbeddingTable> table) {
  const auto header = read_checkpoint_header(text).json;
  if (header.value("format_version", 0) != kCheckpointVersion) throw Error("checkpoint: unsupported format_version");
  if (!table) throw Error("checkpoint: no embedding table");
  nn::ModelConfig mc;
  try {
    const auto& c = header.at("config");
    mc.type = nn::parse_model_type(header.at("model_type").get<std::string>());
    mc.input_dim = c.at("input_dim").get<size_t>();
    mc.hidden = c.at("hidden").get<size_t>();
    mc.filter_width = c.at("filter_width").get<size_t>();
    mc.dropout = c.at("dropout").get<double>();
    mc.activation = c.at("activation").get<std::string>() == "relu" ? nn::Activation::kRelu : nn::Activation::kTanh;
    mc.readout = c.at("readout").get<std::string>() == "root" ? nn::TreeReadout::kRoot : nn::TreeReadout::kTarget;
    mc.init_scale = c.at("init_scale").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint: incomplete header: ") + e.what());
  }
  if (mc.input_dim != table->dim())
    throw Error("checkpoint expects " + std::to_string(mc.input_dim) + "-dimensional embeddings, table has " +
                std::to_string(table->dim()));

  TrainedModel tm{nn::Model(mc, 0), table, {}, table->unk(),
                  parse_representation(header.at("representation").get<std::string>()),
                  header.at("half_width").get<int>()};
  nn::ParamSet& params = tm.model.params();
  std::vector<char> loaded(params.size(), 0);

  std::istringstream in{std::string(text.substr(text.find('\n') + 1))};
  std::string line;
  int line_no = 1;
  auto read_values = [&](std::istringstream& ls, std::span<double> dst) {
    for (double& v : dst)
      if (!(ls >> v)) throw Error("checkpoint line " + std::to_string(line_no) + ": too few values");
    std::string extra;
    if (ls >> extra) throw Error("checkpoint line " + std::to_string(line_no) + ": too many values");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "param") {
      std::string name;
      ls >> name;
      nn::Param& p = params.at(name);
      read_values(ls, p.value.values());
      loaded[static_cast<size_t>(&p - &params[0])] = 1;
    } else if (kind == "unk") {
      tm.unk.assign(mc.input_dim, 0.0);
      read_values(ls, tm.unk);
    } else if (kind == "override") {
      std::string word;
      ls >> word;
      nn::Vec v(mc.input_dim);
      read_values(ls, v);
      tm.overrides[word] = std::move(v);
    } else {
      throw Error("checkpoint line " + std::to_string(line_no) + ": unknown record '" + kind + "'");
    }
  }
  for (size_t i = 0; i < params.size(); ++i)
    if (!loaded[i]) throw Error("checkpoint: missing parameter '" + params[i].name + "'");
  return tm;
}

}  // namespace evchain
