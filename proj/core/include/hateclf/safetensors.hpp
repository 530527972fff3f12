#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hateclf {

struct StoredTensor {
  std::vector<std::int64_t> shape;
  std::vector<float> values;  // converted to float32, row-major
};

// Reads a .safetensors file (F32, F16 and BF16 payloads).
std::map<std::string, StoredTensor> read_safetensors(const std::filesystem::path& path);

// Writes float32 tensors; used for test fixtures and exports.
void write_safetensors(const std::filesystem::path& path,
                       const std::map<std::string, StoredTensor>& tensors);

}  // namespace hateclf
