//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "lipidlm/error.hpp"

namespace lipidlm::model {
namespace {

constexpr const char *kManifest = "manifest.json";
constexpr const char *kVocab = "vocab.json";
constexpr const char *kBlob = "params.bin";

std::string encode_le(const Mat<float> &t) {
  std::string out(static_cast<std::size_t>(t.size()) * 4, '\0');
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(t.data()[i]);
    for (int b = 0; b < 4; ++b)
      out[static_cast<std::size_t>(i) * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  return out;
}

void decode_le(const char *bytes, Mat<float> &t) {
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b]))
              << (8 * b);
    t.data()[i] = std::bit_cast<float>(bits);
  }
}

std::uint32_t crc(const char *data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef *>(data), static_cast<uInt>(n)));
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw Error(Errc::IoFailure, "cannot write " + path.string());
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::IoFailure, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

void save_checkpoint(const std::filesystem::path &dir, const Checkpoint &ckpt) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw Error(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  std::string blob;
  auto index = nlohmann::ordered_json::array();
  ckpt.params.visit([&](const std::string &name, const Mat<float> &t, ParamKind) {
    const std::string bytes = encode_le(t);
    nlohmann::ordered_json entry;
    entry["name"] = name;
    entry["shape"] = { t.rows(), t.cols() };
    entry["offset"] = blob.size();
    entry["crc32"] = crc(bytes.data(), bytes.size());
    index.push_back(std::move(entry));
    blob += bytes;
  });

  nlohmann::ordered_json manifest;
  manifest["format"] = "lipidlm-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["config"] = to_json(ckpt.config);
  manifest["vocab"] = kVocab;
  manifest["blob"] = kBlob;
  manifest["tensors"] = std::move(index);
  manifest["meta"] = ckpt.meta;

  write_file(dir / kBlob, blob);
  ckpt.vocab.save(dir / kVocab);
  write_file(dir / kManifest, manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path &dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / kManifest));
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::IoFailure, (dir / kManifest).string() + ": " + e.what());
  }

  Checkpoint ckpt;
  try {
    if (manifest.value("format", std::string()) != "lipidlm-checkpoint")
      throw Error(Errc::IoFailure, dir.string() + " is not a checkpoint directory");
    const int version = manifest.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw Error(Errc::VersionMismatch, "checkpoint format version "
                                             + std::to_string(version) + ", expected "
                                             + std::to_string(kCheckpointVersion));
    ckpt.config = model_config_from_json(manifest.at("config"));
    ckpt.vocab = tok::Vocab::load(dir / manifest.at("vocab").get<std::string>());
    ckpt.meta = manifest.value("meta", nlohmann::json::object());
    const std::string blob = read_file(dir / manifest.at("blob").get<std::string>());
    const auto &index = manifest.at("tensors");

    if (ckpt.vocab.size() != ckpt.config.vocab_size)
      throw Error(Errc::VersionMismatch, "vocabulary size does not match the model config");
    ckpt.params = allocate_params<float>(ckpt.config);
    std::size_t i = 0;
    ckpt.params.visit([&](const std::string &name, Mat<float> &t, ParamKind) {
      if (i >= index.size())
        throw Error(Errc::VersionMismatch, "checkpoint lacks tensor " + name);
      const auto &entry = index[i++];
      const auto shape = entry.at("shape").get<std::vector<long>>();
      if (entry.at("name").get<std::string>() != name || shape.size() != 2
          || shape[0] != t.rows() || shape[1] != t.cols())
        throw Error(Errc::VersionMismatch, "tensor index entry "
                                               + entry.at("name").get<std::string>()
                                               + " does not match " + name
                                               + " of the configured model");
      const auto offset = entry.at("offset").get<std::size_t>();
      const std::size_t bytes = static_cast<std::size_t>(t.size()) * 4;
      if (offset + bytes > blob.size())
        throw Error(Errc::ChecksumMismatch, "tensor " + name + " extends past the blob");
      if (crc(blob.data() + offset, bytes) != entry.at("crc32").get<std::uint32_t>())
        throw Error(Errc::ChecksumMismatch, "checksum mismatch in tensor " + name);
      decode_le(blob.data() + offset, t);
    });
    if (i != index.size())
      throw Error(Errc::VersionMismatch, "checkpoint has tensors the config does not declare");
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::IoFailure, (dir / kManifest).string() + ": " + e.what());
  } catch (const Error &e) {
    if (e.code() == Errc::ConfigError)
      throw Error(Errc::IoFailure, (dir / kManifest).string() + ": " + e.what());
    throw;
  }
  return ckpt;
}

void require_max_len(const Checkpoint &ckpt, int max_len) {
  if (ckpt.config.max_len == max_len)
    return;
  throw Error(Errc::VersionMismatch,
              "checkpoint encodes sequences of " + std::to_string(ckpt.config.max_len)
                  + " tokens" + (ckpt.config.max_len > max_len ? " (pair model)" : "")
                  + " but this task needs max_len " + std::to_string(max_len));
}

}  // namespace lipidlm::model
