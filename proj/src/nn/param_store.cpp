#include "ballbot/nn/param_store.hpp"

#include <cstring>
#include <fstream>

#include "ballbot/errors.hpp"

namespace ballbot::nn {

namespace {

constexpr char kMagic[4] = {'B', 'B', 'C', 'K'};

std::uint64_t fnv1a(const unsigned char* data, std::size_t n, std::uint64_t h) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
void write_pod(std::ostream& out, const T& v, std::uint64_t& hash) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  hash = fnv1a(reinterpret_cast<const unsigned char*>(&v), sizeof(T), hash);
}

template <typename T>
void read_pod(std::istream& in, T& v, std::uint64_t& hash) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("corrupt checkpoint: truncated file");
  hash = fnv1a(reinterpret_cast<const unsigned char*>(&v), sizeof(T), hash);
}

}  // namespace

void ParameterStore::put(const std::string& name, std::vector<std::int64_t> shape,
                         std::vector<double> data) {
  if (static_cast<std::int64_t>(data.size()) != Tensor<double>::count(shape))
    throw CheckpointError("parameter store: shape/data mismatch for '" + name + "'");
  auto it = entries_.find(name);
  if (it != entries_.end() && it->second.shape != shape)
    throw CheckpointError("parameter store: shape of '" + name + "' is immutable");
  entries_[name] = Entry{std::move(shape), std::move(data)};
}

const ParameterStore::Entry& ParameterStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw CheckpointError("parameter store: missing tensor '" + name + "'");
  return it->second;
}

const ParameterStore::Entry& ParameterStore::checked(
    const std::string& name, const std::vector<std::int64_t>& shape) const {
  const Entry& e = get(name);
  if (e.shape != shape) {
    std::string want = "[", have = "[";
    for (auto d : shape) want += std::to_string(d) + ",";
    for (auto d : e.shape) have += std::to_string(d) + ",";
    throw CheckpointError("shape mismatch for tensor '" + name + "': checkpoint has " +
                          have + "], model needs " + want + "]");
  }
  return e;
}

void ParameterStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open for writing: " + path);
  std::uint64_t hash = 1469598103934665603ull;
  out.write(kMagic, 4);
  hash = fnv1a(reinterpret_cast<const unsigned char*>(kMagic), 4, hash);
  write_pod(out, kFormatVersion, hash);
  write_pod(out, step, hash);
  write_pod(out, config_hash, hash);
  write_pod(out, static_cast<std::uint32_t>(entries_.size()), hash);
  for (const auto& [name, e] : entries_) {
    write_pod(out, static_cast<std::uint16_t>(name.size()), hash);
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    hash = fnv1a(reinterpret_cast<const unsigned char*>(name.data()), name.size(), hash);
    write_pod(out, static_cast<std::uint8_t>(e.shape.size()), hash);
    for (auto d : e.shape) write_pod(out, static_cast<std::uint32_t>(d), hash);
    for (double v : e.data) write_pod(out, v, hash);
  }
  out.write(reinterpret_cast<const char*>(&hash), sizeof(hash));
  if (!out) throw CheckpointError("write failure: " + path);
}

ParameterStore ParameterStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  std::uint64_t hash = 1469598103934665603ull;
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointError("corrupt checkpoint: bad magic in " + path);
  hash = fnv1a(reinterpret_cast<const unsigned char*>(magic), 4, hash);

  ParameterStore store;
  std::uint32_t version = 0;
  read_pod(in, version, hash);
  if (version != kFormatVersion)
    throw CheckpointError("checkpoint version mismatch: file has v" +
                          std::to_string(version) + ", expected v" +
                          std::to_string(kFormatVersion));
  read_pod(in, store.step, hash);
  read_pod(in, store.config_hash, hash);
  std::uint32_t count = 0;
  read_pod(in, count, hash);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint16_t name_len = 0;
    read_pod(in, name_len, hash);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw CheckpointError("corrupt checkpoint: truncated file");
    hash = fnv1a(reinterpret_cast<const unsigned char*>(name.data()), name.size(), hash);
    std::uint8_t ndim = 0;
    read_pod(in, ndim, hash);
    std::vector<std::int64_t> shape(ndim);
    for (auto& d : shape) {
      std::uint32_t dim = 0;
      read_pod(in, dim, hash);
      d = dim;
    }
    std::vector<double> data(static_cast<std::size_t>(Tensor<double>::count(shape)));
    for (double& v : data) read_pod(in, v, hash);
    store.entries_[name] = Entry{std::move(shape), std::move(data)};
  }
  std::uint64_t stored_hash = 0;
  in.read(reinterpret_cast<char*>(&stored_hash), sizeof(stored_hash));
  if (!in || stored_hash != hash)
    throw CheckpointError("corrupt checkpoint: payload hash mismatch in " + path);
  return store;
}

}  // namespace ballbot::nn
