// Checkpoint container: "ACP1" magic, a JSON header (form, model config,
// epoch, metrics, parameter-name index) and a float32 little-endian payload.
// Training-form files carry trainable parameters plus batch-norm running
// statistics; fused-form files carry the re-parameterized weights.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "beamloc/common.hpp"
#include "beamloc/nn/model.hpp"

namespace beamloc::nn {

inline constexpr char kCheckpointMagic[4] = {'A', 'C', 'P', '1'};

struct CheckpointData {
  std::string form;  // "train" or "fused"
  int epoch = 0;
  nlohmann::json metrics;
  ModelConfig config;
  std::map<std::string, std::vector<double>> arrays;
};

inline void save_checkpoint(const std::string& path, const std::string& form,
                            const ModelConfig& config, int epoch, const nlohmann::json& metrics,
                            const std::vector<std::pair<std::string, const std::vector<double>*>>& arrays) {
  nlohmann::json header;
  header["form"] = form;
  header["epoch"] = epoch;
  header["metrics"] = metrics;
  header["model"] = model_config_json(config);
  nlohmann::json index = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, value] : arrays) {
    index.push_back({{"name", name}, {"offset", offset}, {"count", value->size()}});
    offset += value->size();
  }
  header["params"] = index;
  const std::string hs = header.dump();

  auto os = io::open_out(path, true);
  os.write(kCheckpointMagic, 4);
  io::write_u32(os, static_cast<std::uint32_t>(hs.size()));
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  std::vector<float> payload;
  payload.reserve(offset);
  for (const auto& [name, value] : arrays)
    for (double v : *value) payload.push_back(static_cast<float>(v));
  io::write_f32_array(os, payload.data(), payload.size());
  if (!os) throw IoError("failed writing checkpoint " + path);
}

inline CheckpointData load_checkpoint(const std::string& path) {
  auto is = io::open_in(path, true);
  io::expect_magic(is, kCheckpointMagic, path);
  std::uint32_t hlen = 0;
  try {
    hlen = io::read_u32(is);
  } catch (const FormatError&) {
    throw FormatError(path + ": truncated checkpoint header");
  }
  std::string hs(hlen, '\0');
  is.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw FormatError(path + ": truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": bad checkpoint header: " + e.what());
  }
  CheckpointData out;
  try {
    out.form = header.at("form").get<std::string>();
    out.epoch = header.at("epoch").get<int>();
    out.metrics = header.value("metrics", nlohmann::json::object());
    out.config = model_config_from_json(header.at("model"));

    std::size_t total = 0;
    for (const auto& entry : header.at("params"))
      total += entry.at("count").get<std::size_t>();
    std::vector<float> payload(total);
    try {
      io::read_f32_array(is, payload.data(), payload.size());
    } catch (const FormatError&) {
      throw FormatError(path + ": truncated checkpoint payload");
    }
    char extra;
    if (is.read(&extra, 1)) throw FormatError(path + ": trailing bytes after checkpoint payload");

    for (const auto& entry : header.at("params")) {
      const auto name = entry.at("name").get<std::string>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto count = entry.at("count").get<std::size_t>();
      if (offset + count > total) throw FormatError(path + ": parameter index out of range");
      std::vector<double> v(count);
      for (std::size_t i = 0; i < count; ++i) v[i] = payload[offset + i];
      out.arrays.emplace(name, std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": bad checkpoint header: " + e.what());
  }
  if (out.form != "train" && out.form != "fused")
    throw FormatError(path + ": unknown checkpoint form '" + out.form + "'");
  return out;
}

inline void save_model_checkpoint(const std::string& path, AcousticNet& model, int epoch,
                                  const nlohmann::json& metrics) {
  std::vector<std::pair<std::string, const std::vector<double>*>> arrays;
  for (const auto& p : model.params()) arrays.emplace_back(p.name, p.value);
  for (const auto& s : model.state()) arrays.emplace_back(s.name, s.value);
  save_checkpoint(path, "train", model.config(), epoch, metrics, arrays);
}

inline void save_fused_checkpoint(const std::string& path, FusedAcousticNet& model, int epoch,
                                  const nlohmann::json& metrics) {
  std::vector<std::pair<std::string, const std::vector<double>*>> arrays;
  for (const auto& p : model.params()) arrays.emplace_back(p.name, p.value);
  save_checkpoint(path, "fused", model.config(), epoch, metrics, arrays);
}

namespace detail {

template <typename Net>
void fill_from_arrays(Net& net, const CheckpointData& ckpt, const std::string& path) {
  auto assign = [&](const std::string& name, std::vector<double>* dst) {
    const auto it = ckpt.arrays.find(name);
    if (it == ckpt.arrays.end()) throw FormatError(path + ": checkpoint missing array " + name);
    if (it->second.size() != dst->size())
      throw FormatError(path + ": checkpoint array " + name + " has wrong size");
    *dst = it->second;
  };
  for (auto& p : net.params()) assign(p.name, p.value);
  if constexpr (std::is_same_v<Net, AcousticNet>) {
    for (auto& s : net.state()) assign(s.name, s.value);
  }
}

}  // namespace detail

inline AcousticNet model_from_checkpoint(const CheckpointData& ckpt,
                                         const std::string& path = "checkpoint") {
  if (ckpt.form != "train")
    throw FormatError(path + ": expected a training-form checkpoint, got " + ckpt.form);
  AcousticNet model(ckpt.config);
  detail::fill_from_arrays(model, ckpt, path);
  return model;
}

inline FusedAcousticNet fused_from_checkpoint(const CheckpointData& ckpt,
                                              const std::string& path = "checkpoint") {
  if (ckpt.form != "fused")
    throw FormatError(path + ": expected a fused-form checkpoint, got " + ckpt.form);
  FusedAcousticNet model(ckpt.config);
  detail::fill_from_arrays(model, ckpt, path);
  return model;
}

}  // namespace beamloc::nn
