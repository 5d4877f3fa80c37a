#include "fedkgc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "fedkgc/errors.hpp"

namespace fedkgc {
namespace {

constexpr char kMagic[8] = {'F', 'K', 'G', 'C', 'K', 'P', 'T', '1'};

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const ModelWeights& w, const std::filesystem::path& path) {
  nlohmann::json manifest;
  manifest["format"] = "fedkgc-checkpoint";
  manifest["version"] = 1;
  auto tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : w) {
    tensors.push_back({{"name", name},
                       {"rows", t.rows},
                       {"cols", t.cols},
                       {"dtype", "float64"},
                       {"offset", offset}});
    offset += t.data.size() * 8;
  }
  manifest["tensors"] = std::move(tensors);
  std::string mbytes = manifest.dump();

  std::string out;
  out.reserve(16 + mbytes.size() + offset);
  out.append(kMagic, sizeof kMagic);
  put_u64_le(out, mbytes.size());
  out += mbytes;
  for (const auto& [name, t] : w) {
    for (double x : t.data) put_u64_le(out, std::bit_cast<std::uint64_t>(x));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open '" + path.string() + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("write failed for '" + path.string() + "'");
}

ModelWeights load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

  auto fail = [&](const std::string& why) -> DataError {
    return DataError("checkpoint '" + path.string() + "': " + why);
  };
  if (bytes.size() < 16 || std::memcmp(p, kMagic, sizeof kMagic) != 0) {
    throw fail("bad magic");
  }
  std::uint64_t mlen = get_u64_le(p + 8);
  if (16 + mlen > bytes.size()) throw fail("truncated manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + mlen);
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("manifest parse error: ") + e.what());
  }
  const unsigned char* data = p + 16 + mlen;
  std::uint64_t data_len = bytes.size() - 16 - mlen;

  ModelWeights w;
  try {
    if (manifest.at("format").get<std::string>() != "fedkgc-checkpoint" ||
        manifest.at("version").get<int>() != 1) {
      throw fail("unsupported format or version");
    }
    for (const auto& entry : manifest.at("tensors")) {
      auto name = entry.at("name").get<std::string>();
      int rows = entry.at("rows").get<int>();
      int cols = entry.at("cols").get<int>();
      std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
      if (entry.at("dtype").get<std::string>() != "float64") throw fail("unsupported dtype");
      if (rows < 0 || cols < 0) throw fail("negative shape for '" + name + "'");
      std::uint64_t n = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols);
      if (offset % 8 != 0 || offset + n * 8 > data_len) {
        throw fail("payload of '" + name + "' out of bounds");
      }
      Tensor t(rows, cols);
      for (std::uint64_t i = 0; i < n; ++i) {
        t.data[i] = std::bit_cast<double>(get_u64_le(data + offset + i * 8));
      }
      if (!w.emplace(std::move(name), std::move(t)).second) {
        throw fail("duplicate tensor name");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed manifest: ") + e.what());
  }
  if (!all_finite(w)) throw fail("non-finite values");
  return w;
}

void validate_weights(const ModelWeights& w, const EncoderConfig& cfg) {
  auto it = w.find("tok_emb");
  if (it == w.end()) throw DataError("weights: missing tok_emb");
  if (it->second.rows != static_cast<int>(cfg.tokenizer.buckets) || it->second.cols != cfg.dim) {
    throw DataError("weights: tok_emb shape [" + std::to_string(it->second.rows) + ", " +
                    std::to_string(it->second.cols) + "] does not match config [" +
                    std::to_string(cfg.tokenizer.buckets) + ", " + std::to_string(cfg.dim) + "]");
  }
  for (const auto& [name, t] : w) {
    if (name == "tok_emb") continue;
    if (!name.starts_with("rel_prefix/")) throw DataError("weights: unknown parameter '" + name + "'");
    if (cfg.relation_mode != RelationMode::parameterized) {
      throw DataError("weights: relation prefixes present but relation mode is textual");
    }
    try {
      parse_relation_key(name.substr(std::string_view("rel_prefix/").size()));
    } catch (const ConfigError&) {
      throw DataError("weights: relation parameter '" + name + "' lacks a direction suffix");
    }
    if (t.rows != cfg.rel_prefix_len || t.cols != cfg.dim) {
      throw DataError("weights: '" + name + "' shape does not match config [" +
                      std::to_string(cfg.rel_prefix_len) + ", " + std::to_string(cfg.dim) + "]");
    }
  }
}

}  // namespace fedkgc
