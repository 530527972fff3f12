#include "hateclf/nn/param_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "hateclf/error.hpp"

namespace hateclf::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "param archives assume little-endian");

constexpr char kMagic[8] = {'H', 'C', 'L', 'F', 'P', 'R', 'M', '1'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw Error(ErrorKind::Format, "truncated parameter file '" + path.string() + "'");
  }
  return v;
}

}  // namespace

void save_params(const std::filesystem::path& path, const std::vector<Param*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->shape.size()));
    for (int d : p->shape) put<std::int64_t>(out, d);
    put<std::int64_t>(out, p->value.rows());
    put<std::int64_t>(out, p->value.cols());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

void load_params(const std::filesystem::path& path, const std::vector<Param*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(ErrorKind::Format, "'" + path.string() + "' is not a parameter archive");
  }
  std::map<std::string, Param*> by_name;
  for (Param* p : params) by_name[p->name] = p;

  const auto count = get<std::uint32_t>(in, path);
  std::size_t matched = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw Error(ErrorKind::Format, "truncated parameter name");
    const auto ndim = get<std::uint32_t>(in, path);
    for (std::uint32_t d = 0; d < ndim; ++d) (void)get<std::int64_t>(in, path);
    const auto rows = get<std::int64_t>(in, path);
    const auto cols = get<std::int64_t>(in, path);
    Matrix value(rows, cols);
    if (!in.read(reinterpret_cast<char*>(value.data()),
                 static_cast<std::streamsize>(value.size() * sizeof(float)))) {
      throw Error(ErrorKind::Format, "truncated payload for parameter '" + name + "'");
    }
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw Error(ErrorKind::Format, "unexpected parameter '" + name + "' in " + path.string());
    }
    Param& p = *it->second;
    if (p.value.rows() != rows || p.value.cols() != cols) {
      throw Error(ErrorKind::Format, "shape mismatch for parameter '" + name + "'");
    }
    p.value = std::move(value);
    p.zero_grad();
    ++matched;
  }
  if (matched != params.size()) {
    throw Error(ErrorKind::Format, "parameter archive '" + path.string() + "' has " +
                                       std::to_string(matched) + " of " +
                                       std::to_string(params.size()) + " expected entries");
  }
}

}  // namespace hateclf::nn
