#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ballbot/nn/tensor.hpp"

namespace ballbot::nn {

// Named flat arrays with shapes plus run metadata. The on-disk format is a
// little-endian container (see docs/checkpoint_format.md); round-trips are
// byte identical.
class ParameterStore {
 public:
  struct Entry {
    std::vector<std::int64_t> shape;
    std::vector<double> data;  // stored widest; narrowed on load into float nets
  };

  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint64_t step = 0;
  std::uint64_t config_hash = 0;

  bool has(const std::string& name) const { return entries_.count(name) > 0; }

  void put(const std::string& name, std::vector<std::int64_t> shape,
           std::vector<double> data);

  const Entry& get(const std::string& name) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }

  template <typename T>
  void put_tensor(const std::string& name, const Tensor<T>& t) {
    std::vector<double> data(static_cast<std::size_t>(t.size()));
    for (std::int64_t i = 0; i < t.size(); ++i) data[static_cast<std::size_t>(i)] = t[i];
    put(name, t.shape(), std::move(data));
  }

  // Strict: throws CheckpointError naming the tensor on missing name or
  // shape mismatch.
  template <typename T>
  void load_tensor(const std::string& name, Tensor<T>& t) const {
    const Entry& e = checked(name, t.shape());
    for (std::int64_t i = 0; i < t.size(); ++i)
      t[i] = static_cast<T>(e.data[static_cast<std::size_t>(i)]);
  }

  void save(const std::string& path) const;
  static ParameterStore load(const std::string& path);

 private:
  const Entry& checked(const std::string& name,
                       const std::vector<std::int64_t>& shape) const;
  std::map<std::string, Entry> entries_;
};

// Convenience: move every Param of a model in/out of a store.
template <typename T, typename ParamRange>
void store_params(ParameterStore& store, const ParamRange& params) {
  for (const auto* p : params) store.put_tensor(p->name, p->value);
}

template <typename T, typename ParamRange>
void load_params(const ParameterStore& store, const ParamRange& params) {
  for (auto* p : params) store.load_tensor(p->name, p->value);
}

}  // namespace ballbot::nn
