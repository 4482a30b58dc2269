#include "fewshot/model_io.h"

#include <cstring>
#include <fstream>
#include <map>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fewshot/errors.h"

namespace fewshot {
namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

uint32_t get_u32(const std::string& in, size_t pos) {
  uint32_t v = 0;
  for (int k = 0; k < 4; ++k) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[pos + k])) << (8 * k);
  }
  return v;
}

void put_f32_array(std::string& out, std::span<const double> values) {
  for (double d : values) {
    const float f = static_cast<float>(d);
    uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
  }
}

struct ArraySpec {
  std::string name;
  std::vector<uint64_t> shape;
  uint64_t byte_length = 0;
};

nlohmann::json normalization_json(const NormalizationOptions& o) {
  return {{"compose", o.compose},
          {"fold_alif", o.fold_alif},
          {"strip_punctuation", o.strip_punctuation},
          {"collapse_whitespace", o.collapse_whitespace},
          {"fold_hamza_carriers", o.fold_hamza_carriers},
          {"strip_diacritics", o.strip_diacritics}};
}

}  // namespace

std::string serialize_model_to_string(const ModelArtifact& artifact,
                                      const SerializeOptions& options) {
  const HeadParams& head = artifact.head;
  nlohmann::json header;
  header["format_version"] = kModelFormatVersion;

  std::vector<ArraySpec> arrays;
  std::string payload;
  if (artifact.encoder) {
    const EncoderConfig& c = artifact.encoder->config;
    header["encoder"] = {{"ngram_min", c.ngram_min},
                         {"ngram_max", c.ngram_max},
                         {"buckets", c.buckets},
                         {"dim", c.dim},
                         {"seed", c.seed}};
    const Matrix& m = artifact.encoder->matrix;
    arrays.push_back({"encoder.matrix", {m.rows(), m.cols()}, m.size() * 4});
    put_f32_array(payload, m.data());
  } else {
    header["encoder"] = nullptr;
  }
  arrays.push_back({"head.weights",
                    {head.weights.rows(), head.weights.cols()},
                    head.weights.size() * 4});
  put_f32_array(payload, head.weights.data());
  arrays.push_back({"head.bias", {head.bias.size()}, head.bias.size() * 4});
  put_f32_array(payload, head.bias);

  header["head"] = {{"class_order", head.class_order},
                    {"normalize_inputs", head.normalize_inputs},
                    {"final_loss", head.final_loss}};
  header["dialect_set"] = artifact.dialect_set;
  header["normalization"] = normalization_json(artifact.normalization);

  const TrainingMetadata& meta = artifact.metadata;
  header["metadata"] = {{"global_seed", meta.global_seed},
                        {"shots_per_class", meta.shots_per_class},
                        {"training_shots", meta.training_shots},
                        {"epoch_losses", meta.epoch_losses}};
  if (options.include_timings) {
    header["metadata"]["stage1_seconds"] = meta.stage1_seconds;
    header["metadata"]["stage2_seconds"] = meta.stage2_seconds;
    header["metadata"]["total_seconds"] = meta.total_seconds;
  }

  nlohmann::json array_list = nlohmann::json::array();
  for (const ArraySpec& a : arrays) {
    array_list.push_back({{"name", a.name},
                          {"shape", a.shape},
                          {"dtype", "float32"},
                          {"byte_length", a.byte_length}});
  }
  header["arrays"] = array_list;

  const std::string header_text = header.dump();
  std::string out(kModelMagic.begin(), kModelMagic.end());
  put_u32(out, kModelFormatVersion);
  put_u32(out, static_cast<uint32_t>(header_text.size()));
  out += header_text;
  out += payload;
  return out;
}

void serialize_model(const ModelArtifact& artifact, std::ostream& out,
                     const SerializeOptions& options) {
  const std::string bytes = serialize_model_to_string(artifact, options);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void save_model_file(const std::string& path, const ModelArtifact& artifact,
                     const SerializeOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write model file '" + path + "'");
  serialize_model(artifact, out, options);
  if (!out) throw Error("failed writing model file '" + path + "'");
}

ModelArtifact deserialize_model_from_string(const std::string& bytes) {
  if (bytes.size() < 4) {
    throw TruncatedError("model container is shorter than its magic number");
  }
  if (std::memcmp(bytes.data(), kModelMagic.data(), 4) != 0) {
    throw BadMagicError("not a model container (bad magic)");
  }
  if (bytes.size() < 12) throw TruncatedError("model container header is cut off");
  const uint32_t version = get_u32(bytes, 4);
  if (version != kModelFormatVersion) {
    throw UnsupportedVersionError("unsupported model format version " +
                                  std::to_string(version) + " (expected " +
                                  std::to_string(kModelFormatVersion) + ")");
  }
  const uint64_t header_length = get_u32(bytes, 8);
  if (bytes.size() < 12 + header_length) {
    throw TruncatedError("model container JSON header is cut off");
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 12,
                                   bytes.begin() + 12 + header_length);
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("model header is not valid JSON: ") +
                           e.what());
  }

  ModelArtifact artifact;
  size_t pos = 12 + header_length;
  try {
    artifact.format_version = header.at("format_version").get<uint32_t>();

    // Reads every declared array, checking shape against byte length first.
    std::map<std::string, std::pair<std::vector<uint64_t>, std::vector<double>>>
        arrays;
    for (const auto& a : header.at("arrays")) {
      const std::string name = a.at("name").get<std::string>();
      const auto shape = a.at("shape").get<std::vector<uint64_t>>();
      const uint64_t byte_length = a.at("byte_length").get<uint64_t>();
      uint64_t elements = 1;
      for (uint64_t s : shape) elements *= s;
      if (elements * 4 != byte_length) {
        throw ArraySizeError("array '" + name + "' declares " +
                             std::to_string(elements) + " elements but " +
                             std::to_string(byte_length) + " payload bytes");
      }
      if (bytes.size() - pos < byte_length) {
        throw TruncatedError("array '" + name + "' is truncated");
      }
      std::vector<double> values(elements);
      for (uint64_t k = 0; k < elements; ++k) {
        const uint32_t bits = get_u32(bytes, pos + 4 * k);
        float f;
        std::memcpy(&f, &bits, sizeof f);
        values[k] = f;
      }
      pos += byte_length;
      arrays[name] = {shape, std::move(values)};
    }
    if (pos != bytes.size()) {
      throw ArraySizeError(std::to_string(bytes.size() - pos) +
                           " payload bytes beyond the declared arrays");
    }

    auto take = [&](const std::string& name, size_t rank)
        -> std::pair<std::vector<uint64_t>, std::vector<double>>& {
      auto it = arrays.find(name);
      if (it == arrays.end()) {
        throw ModelFormatError("model container lacks array '" + name + "'");
      }
      if (it->second.first.size() != rank) {
        throw ArraySizeError("array '" + name + "' has rank " +
                             std::to_string(it->second.first.size()) +
                             ", expected " + std::to_string(rank));
      }
      return it->second;
    };

    if (!header.at("encoder").is_null()) {
      const auto& e = header.at("encoder");
      EncoderParams params;
      params.config.ngram_min = e.at("ngram_min").get<int>();
      params.config.ngram_max = e.at("ngram_max").get<int>();
      params.config.buckets = e.at("buckets").get<uint64_t>();
      params.config.dim = e.at("dim").get<int>();
      params.config.seed = e.at("seed").get<uint64_t>();
      params.config.validate();
      auto& [shape, values] = take("encoder.matrix", 2);
      if (shape[0] != params.config.buckets ||
          shape[1] != static_cast<uint64_t>(params.config.dim)) {
        throw ArraySizeError(
            "array 'encoder.matrix' shape does not match the encoder config");
      }
      params.matrix = Matrix(shape[0], shape[1]);
      params.matrix.data() = std::move(values);
      artifact.encoder = std::move(params);
    }

    const auto& h = header.at("head");
    HeadParams& head = artifact.head;
    head.class_order = h.at("class_order").get<std::vector<Label>>();
    head.normalize_inputs = h.at("normalize_inputs").get<bool>();
    head.final_loss = h.at("final_loss").get<double>();
    {
      auto& [shape, values] = take("head.weights", 2);
      if (shape[0] != head.class_order.size()) {
        throw ArraySizeError("array 'head.weights' has " +
                             std::to_string(shape[0]) + " rows for " +
                             std::to_string(head.class_order.size()) +
                             " classes");
      }
      head.weights = Matrix(shape[0], shape[1]);
      head.weights.data() = std::move(values);
    }
    {
      auto& [shape, values] = take("head.bias", 1);
      if (shape[0] != head.class_order.size()) {
        throw ArraySizeError("array 'head.bias' length does not match classes");
      }
      head.bias = std::move(values);
    }
    if (artifact.encoder &&
        head.weights.cols() != artifact.encoder->matrix.cols()) {
      throw ArraySizeError(
          "array 'head.weights' width does not match the encoder dimension");
    }

    artifact.dialect_set = header.at("dialect_set").get<std::vector<std::string>>();
    const auto& n = header.at("normalization");
    NormalizationOptions& o = artifact.normalization;
    o.compose = n.at("compose").get<bool>();
    o.fold_alif = n.at("fold_alif").get<bool>();
    o.strip_punctuation = n.at("strip_punctuation").get<bool>();
    o.collapse_whitespace = n.at("collapse_whitespace").get<bool>();
    o.fold_hamza_carriers = n.at("fold_hamza_carriers").get<bool>();
    o.strip_diacritics = n.at("strip_diacritics").get<bool>();

    const auto& m = header.at("metadata");
    TrainingMetadata& meta = artifact.metadata;
    meta.global_seed = m.at("global_seed").get<uint64_t>();
    meta.shots_per_class = m.at("shots_per_class").get<size_t>();
    meta.training_shots = m.at("training_shots").get<size_t>();
    meta.epoch_losses = m.at("epoch_losses").get<std::vector<double>>();
    meta.stage1_seconds = m.value("stage1_seconds", 0.0);
    meta.stage2_seconds = m.value("stage2_seconds", 0.0);
    meta.total_seconds = m.value("total_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("model header is malformed: ") +
                           e.what());
  }
  return artifact;
}

ModelArtifact deserialize_model(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return deserialize_model_from_string(bytes);
}

ModelArtifact load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open model file '" + path + "'");
  return deserialize_model(in);
}

}  // namespace fewshot
