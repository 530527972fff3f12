#include "hateclf/safetensors.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "hateclf/error.hpp"
#include "json.hpp"

namespace hateclf {
namespace {

float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = (h & 0x8000u) << 16;
  const std::uint32_t exp = (h >> 10) & 0x1Fu;
  std::uint32_t mant = h & 0x3FFu;
  std::uint32_t bits;
  if (exp == 0) {
    if (mant == 0) {
      bits = sign;
    } else {
      int e = -1;
      do {
        ++e;
        mant <<= 1;
      } while ((mant & 0x400u) == 0);
      bits = sign | static_cast<std::uint32_t>(127 - 15 - e) << 23 | (mant & 0x3FFu) << 13;
    }
  } else if (exp == 0x1F) {
    bits = sign | 0x7F800000u | mant << 13;
  } else {
    bits = sign | (exp + 127 - 15) << 23 | mant << 13;
  }
  return std::bit_cast<float>(bits);
}

float bf16_to_float(std::uint16_t h) { return std::bit_cast<float>(static_cast<std::uint32_t>(h) << 16); }

}  // namespace

std::map<std::string, StoredTensor> read_safetensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Load, "cannot open '" + path.string() + "'");
  std::uint64_t header_len = 0;
  if (!in.read(reinterpret_cast<char*>(&header_len), 8) || header_len > (1ULL << 31)) {
    throw Error(ErrorKind::Load, "'" + path.string() + "' is not a safetensors file");
  }
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len))) {
    throw Error(ErrorKind::Load, "truncated safetensors header in '" + path.string() + "'");
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Load, "bad safetensors header: " + std::string(e.what()));
  }
  const std::streamoff data_start = static_cast<std::streamoff>(8 + header_len);

  std::map<std::string, StoredTensor> out;
  for (const auto& [name, info] : meta.items()) {
    if (name == "__metadata__") continue;
    const std::string dtype = info.at("dtype").get<std::string>();
    const auto offsets = info.at("data_offsets").get<std::vector<std::uint64_t>>();
    StoredTensor t;
    t.shape = info.at("shape").get<std::vector<std::int64_t>>();
    std::int64_t count = 1;
    for (auto d : t.shape) count *= d;
    const std::uint64_t nbytes = offsets.at(1) - offsets.at(0);
    std::size_t width;
    if (dtype == "F32") {
      width = 4;
    } else if (dtype == "F16" || dtype == "BF16") {
      width = 2;
    } else {
      throw Error(ErrorKind::Load, "tensor '" + name + "' has unsupported dtype " + dtype);
    }
    if (nbytes != static_cast<std::uint64_t>(count) * width) {
      throw Error(ErrorKind::Load, "tensor '" + name + "' size does not match its shape");
    }
    std::vector<char> raw(nbytes);
    in.seekg(data_start + static_cast<std::streamoff>(offsets[0]));
    if (!in.read(raw.data(), static_cast<std::streamsize>(nbytes))) {
      throw Error(ErrorKind::Load, "truncated payload for tensor '" + name + "'");
    }
    t.values.resize(static_cast<std::size_t>(count));
    if (width == 4) {
      std::memcpy(t.values.data(), raw.data(), nbytes);
    } else {
      for (std::int64_t i = 0; i < count; ++i) {
        std::uint16_t h;
        std::memcpy(&h, raw.data() + 2 * i, 2);
        t.values[static_cast<std::size_t>(i)] = dtype == "F16" ? half_to_float(h) : bf16_to_float(h);
      }
    }
    out.emplace(name, std::move(t));
  }
  return out;
}

void write_safetensors(const std::filesystem::path& path,
                       const std::map<std::string, StoredTensor>& tensors) {
  nlohmann::json meta = nlohmann::json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    const std::uint64_t nbytes = t.values.size() * 4;
    meta[name] = {{"dtype", "F32"}, {"shape", t.shape}, {"data_offsets", {offset, offset + nbytes}}};
    offset += nbytes;
  }
  std::string header = meta.dump();
  while (header.size() % 8 != 0) header.push_back(' ');
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  const std::uint64_t len = header.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& [name, t] : tensors) {
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * 4));
  }
}

}  // namespace hateclf
