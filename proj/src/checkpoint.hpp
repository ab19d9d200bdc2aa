// Binary persistence for models and datasets: named float32 tensors behind an
// eight-byte magic, integrity-checked by a trailing CRC32 and written
// atomically (temp file + rename).
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gan.hpp"
#include "nn.hpp"

namespace ganlink::checkpoint {

inline constexpr char kMagic[8] = {'G', 'A', 'N', 'A', 'E', '0', '0', '1'};
inline constexpr uint32_t kVersion = 1;

struct Tensor {
  std::string name;
  std::vector<uint32_t> dims;
  std::vector<float> values;

  size_t element_count() const;
};

struct TensorFile {
  std::vector<Tensor> tensors;

  const Tensor* find(const std::string& name) const;
  const Tensor& require(const std::string& name) const;  // throws IoError
};

// poly 0xEDB88320, standard reflected CRC-32.
uint32_t crc32(std::span<const uint8_t> data);

void save_tensor_file(const std::string& path, const TensorFile& file);
TensorFile load_tensor_file(const std::string& path);

// A DenseNet becomes "<prefix>.spec" (rows of input width, output width,
// activation code) plus "<prefix>.w<i>" / "<prefix>.b<i>" per layer.
void append_net(TensorFile& file, const std::string& prefix, const nn::DenseNet& net);
nn::DenseNet net_from(const TensorFile& file, const std::string& prefix);

void save_nets(const std::string& path,
               std::span<const std::pair<std::string, const nn::DenseNet*>> nets);
std::map<std::string, nn::DenseNet> load_nets(const std::string& path);

void append_matrix(TensorFile& file, const std::string& name, const nn::Matrix& m);
nn::Matrix matrix_from(const TensorFile& file, const std::string& name);

// Dataset dumps for the standalone train-gan entry point.
void append_dataset(TensorFile& file, const gan::ConditioningDataset& data);
gan::ConditioningDataset dataset_from(const TensorFile& file);

}  // namespace ganlink::checkpoint
