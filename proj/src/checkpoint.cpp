#include "checkpoint.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "errors.hpp"

namespace ganlink::checkpoint {

size_t Tensor::element_count() const {
  size_t n = 1;
  for (uint32_t d : dims) n *= d;
  return n;
}

const Tensor* TensorFile::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const Tensor& TensorFile::require(const std::string& name) const {
  const Tensor* t = find(name);
  if (t == nullptr) throw IoError("checkpoint is missing tensor '" + name + "'");
  return *t;
}

namespace {

std::array<uint32_t, 256> crc_table() {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int bit = 0; bit < 8; ++bit) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

}  // namespace

uint32_t crc32(std::span<const uint8_t> data) {
  static const std::array<uint32_t, 256> table = crc_table();
  uint32_t c = 0xFFFFFFFFu;
  for (uint8_t byte : data) c = table[(c ^ byte) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

namespace {

// Byte-level payload assembly. Stored little-endian; this writes the host
// representation directly and the loader checks it, which is exact on every
// platform this project targets.
void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  const size_t at = out.size();
  out.resize(at + 4);
  std::memcpy(out.data() + at, &v, 4);
}

void put_bytes(std::vector<uint8_t>& out, const void* data, size_t size) {
  const size_t at = out.size();
  out.resize(at + size);
  std::memcpy(out.data() + at, data, size);
}

struct Reader {
  std::span<const uint8_t> data;
  size_t at = 0;

  uint32_t u32() {
    if (at + 4 > data.size()) throw IoError("checkpoint truncated");
    uint32_t v;
    std::memcpy(&v, data.data() + at, 4);
    at += 4;
    return v;
  }
  void bytes(void* dst, size_t size) {
    if (at + size > data.size()) throw IoError("checkpoint truncated");
    std::memcpy(dst, data.data() + at, size);
    at += size;
  }
};

}  // namespace

void save_tensor_file(const std::string& path, const TensorFile& file) {
  std::vector<uint8_t> body;  // everything after the magic, covered by the CRC
  put_u32(body, kVersion);
  put_u32(body, static_cast<uint32_t>(file.tensors.size()));
  for (const auto& t : file.tensors) {
    if (t.values.size() != t.element_count())
      throw UsageError("tensor '" + t.name + "' value count does not match its dims");
    put_u32(body, static_cast<uint32_t>(t.name.size()));
    put_bytes(body, t.name.data(), t.name.size());
    put_u32(body, static_cast<uint32_t>(t.dims.size()));
    for (uint32_t d : t.dims) put_u32(body, d);
    put_bytes(body, t.values.data(), t.values.size() * sizeof(float));
  }
  const uint32_t crc = crc32(body);
  put_u32(body, crc);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(body.data()),
              static_cast<std::streamsize>(body.size()));
    if (!out) throw IoError("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move '" + tmp + "' into place");
  }
}

TensorFile load_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (raw.size() < sizeof(kMagic) + 12) throw IoError("checkpoint truncated");
  if (std::memcmp(raw.data(), kMagic, 5) != 0)  // "GANAE"
    throw IoError("not a checkpoint file (bad magic)");
  if (std::memcmp(raw.data(), kMagic, sizeof(kMagic)) != 0)
    throw IoError("unsupported checkpoint version (magic '" +
                  std::string(reinterpret_cast<const char*>(raw.data()), sizeof(kMagic)) + "')");

  const std::span<const uint8_t> body(raw.data() + sizeof(kMagic),
                                      raw.size() - sizeof(kMagic) - 4);
  uint32_t stored_crc;
  std::memcpy(&stored_crc, raw.data() + raw.size() - 4, 4);
  if (crc32(body) != stored_crc) throw IoError("checkpoint CRC mismatch");

  Reader r{body};
  if (r.u32() != kVersion) throw IoError("unsupported checkpoint version field");
  const uint32_t count = r.u32();
  TensorFile file;
  file.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    Tensor t;
    const uint32_t name_len = r.u32();
    t.name.resize(name_len);
    r.bytes(t.name.data(), name_len);
    const uint32_t rank = r.u32();
    if (rank > 8) throw IoError("tensor '" + t.name + "' has implausible rank");
    t.dims.resize(rank);
    for (auto& d : t.dims) d = r.u32();
    t.values.resize(t.element_count());
    r.bytes(t.values.data(), t.values.size() * sizeof(float));
    file.tensors.push_back(std::move(t));
  }
  if (r.at != body.size()) throw IoError("checkpoint has trailing bytes");
  return file;
}

void append_net(TensorFile& file, const std::string& prefix, const nn::DenseNet& net) {
  Tensor spec;
  spec.name = prefix + ".spec";
  spec.dims = {static_cast<uint32_t>(net.layer_count()), 3};
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto& s = net.layer_spec(l);
    spec.values.push_back(static_cast<float>(s.input_width));
    spec.values.push_back(static_cast<float>(s.output_width));
    spec.values.push_back(static_cast<float>(static_cast<int>(s.activation)));
  }
  file.tensors.push_back(std::move(spec));

  for (int l = 0; l < net.layer_count(); ++l) {
    const auto w = net.weights(l);
    Tensor tw;
    tw.name = prefix + ".w" + std::to_string(l);
    tw.dims = {static_cast<uint32_t>(w.rows()), static_cast<uint32_t>(w.cols())};
    tw.values.reserve(static_cast<size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) tw.values.push_back(static_cast<float>(w(r, c)));
    }
    file.tensors.push_back(std::move(tw));

    const auto b = net.biases(l);
    Tensor tb;
    tb.name = prefix + ".b" + std::to_string(l);
    tb.dims = {static_cast<uint32_t>(b.size())};
    for (Eigen::Index i = 0; i < b.size(); ++i) tb.values.push_back(static_cast<float>(b(i)));
    file.tensors.push_back(std::move(tb));
  }
}

nn::DenseNet net_from(const TensorFile& file, const std::string& prefix) {
  const Tensor& spec = file.require(prefix + ".spec");
  if (spec.dims.size() != 2 || spec.dims[1] != 3)
    throw IoError("tensor '" + spec.name + "' is not a layer spec");
  std::vector<nn::LayerSpec> specs(spec.dims[0]);
  for (size_t l = 0; l < specs.size(); ++l) {
    specs[l].input_width = static_cast<int>(spec.values[3 * l]);
    specs[l].output_width = static_cast<int>(spec.values[3 * l + 1]);
    const int code = static_cast<int>(spec.values[3 * l + 2]);
    if (code < 0 || code > static_cast<int>(nn::Activation::kBoundedUnit))
      throw IoError("tensor '" + spec.name + "' names an unknown activation");
    specs[l].activation = static_cast<nn::Activation>(code);
  }
  nn::DenseNet net = nn::DenseNet::create_zero(specs);
  for (int l = 0; l < net.layer_count(); ++l) {
    const Tensor& tw = file.require(prefix + ".w" + std::to_string(l));
    auto w = net.weights(l);
    if (tw.dims.size() != 2 || static_cast<Eigen::Index>(tw.dims[0]) != w.rows() ||
        static_cast<Eigen::Index>(tw.dims[1]) != w.cols())
      throw IoError("tensor '" + tw.name + "' shape does not match the layer spec");
    size_t at = 0;
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = tw.values[at++];
    }
    const Tensor& tb = file.require(prefix + ".b" + std::to_string(l));
    auto b = net.biases(l);
    if (tb.dims.size() != 1 || static_cast<Eigen::Index>(tb.dims[0]) != b.size())
      throw IoError("tensor '" + tb.name + "' shape does not match the layer spec");
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = tb.values[static_cast<size_t>(i)];
  }
  return net;
}

void save_nets(const std::string& path,
               std::span<const std::pair<std::string, const nn::DenseNet*>> nets) {
  TensorFile file;
  for (const auto& [name, net] : nets) append_net(file, name, *net);
  save_tensor_file(path, file);
}

std::map<std::string, nn::DenseNet> load_nets(const std::string& path) {
  const TensorFile file = load_tensor_file(path);
  std::map<std::string, nn::DenseNet> nets;
  for (const auto& t : file.tensors) {
    const std::string suffix = ".spec";
    if (t.name.size() > suffix.size() &&
        t.name.compare(t.name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      const std::string prefix = t.name.substr(0, t.name.size() - suffix.size());
      nets.emplace(prefix, net_from(file, prefix));
    }
  }
  return nets;
}

void append_matrix(TensorFile& file, const std::string& name, const nn::Matrix& m) {
  Tensor t;
  t.name = name;
  t.dims = {static_cast<uint32_t>(m.rows()), static_cast<uint32_t>(m.cols())};
  t.values.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.values.push_back(static_cast<float>(m(r, c)));
  }
  file.tensors.push_back(std::move(t));
}

nn::Matrix matrix_from(const TensorFile& file, const std::string& name) {
  const Tensor& t = file.require(name);
  if (t.dims.size() != 2) throw IoError("tensor '" + name + "' is not a matrix");
  nn::Matrix m(t.dims[0], t.dims[1]);
  size_t at = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.values[at++];
  }
  return m;
}

void append_dataset(TensorFile& file, const gan::ConditioningDataset& data) {
  append_matrix(file, "dataset.windows", data.windows);
  append_matrix(file, "dataset.targets", data.targets);
  append_matrix(file, "dataset.received", data.received);
  Tensor msgs;
  msgs.name = "dataset.messages";
  msgs.dims = {static_cast<uint32_t>(data.messages.size())};
  for (int m : data.messages) msgs.values.push_back(static_cast<float>(m));
  file.tensors.push_back(std::move(msgs));
}

gan::ConditioningDataset dataset_from(const TensorFile& file) {
  gan::ConditioningDataset data;
  data.windows = matrix_from(file, "dataset.windows");
  data.targets = matrix_from(file, "dataset.targets");
  data.received = matrix_from(file, "dataset.received");
  const Tensor& msgs = file.require("dataset.messages");
  data.messages.reserve(msgs.values.size());
  for (float v : msgs.values) data.messages.push_back(static_cast<int>(v));
  if (data.windows.rows() != data.targets.rows())
    throw IoError("dataset tensors disagree on row count");
  return data;
}

}  // namespace ganlink::checkpoint
