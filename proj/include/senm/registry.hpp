#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <absl/container/flat_hash_set.h>
#include <absl/hash/hash.h>

#include "senm/core.hpp"

namespace senm {

/// Interns strings into dense ids. Names live in one contiguous arena and the
/// lookup set stores only 32-bit ids, which keeps ~10M record ids well under
/// half a gigabyte.
template <class IdT>
class NameRegistry {
 public:
  NameRegistry() : storage_(std::make_unique<Storage>()), index_(0, Hash{storage_.get()}, Eq{storage_.get()}) {}

  NameRegistry(NameRegistry&&) noexcept = default;
  NameRegistry& operator=(NameRegistry&&) noexcept = default;
  NameRegistry(const NameRegistry&) = delete;
  NameRegistry& operator=(const NameRegistry&) = delete;

  void reserve(std::size_t n, std::size_t bytes = 0) {
    storage_->offsets.reserve(n + 1);
    if (bytes) storage_->arena.reserve(bytes);
    index_.reserve(n);
  }

  /// Returns the id for `name`, creating it if needed. `inserted` reports which.
  IdT intern(std::string_view name, bool* inserted = nullptr) {
    if (auto it = index_.find(name); it != index_.end()) {
      if (inserted) *inserted = false;
      return IdT{*it};
    }
    const auto id = static_cast<std::uint32_t>(storage_->offsets.size() - 1);
    storage_->arena.append(name);
    storage_->offsets.push_back(storage_->arena.size());
    index_.insert(id);
    if (inserted) *inserted = true;
    return IdT{id};
  }

  std::optional<IdT> find(std::string_view name) const {
    if (auto it = index_.find(name); it != index_.end()) return IdT{*it};
    return std::nullopt;
  }

  std::string_view name(IdT id) const { return storage_->view(id.value); }

  std::size_t size() const noexcept { return storage_->offsets.size() - 1; }

 private:
  struct Storage {
    std::string arena;
    std::vector<std::size_t> offsets{0};

    std::string_view view(std::uint32_t id) const {
      return std::string_view(arena).substr(offsets[id], offsets[id + 1] - offsets[id]);
    }
  };

  struct Hash {
    using is_transparent = void;
    const Storage* storage;
    std::size_t operator()(std::uint32_t id) const { return absl::Hash<std::string_view>{}(storage->view(id)); }
    std::size_t operator()(std::string_view s) const { return absl::Hash<std::string_view>{}(s); }
  };

  struct Eq {
    using is_transparent = void;
    const Storage* storage;
    bool operator()(std::uint32_t a, std::uint32_t b) const { return a == b; }
    bool operator()(std::uint32_t a, std::string_view b) const { return storage->view(a) == b; }
    bool operator()(std::string_view a, std::uint32_t b) const { return a == storage->view(b); }
  };

  std::unique_ptr<Storage> storage_;
  absl::flat_hash_set<std::uint32_t, Hash, Eq> index_;
};

using AccountRegistry = NameRegistry<AccountId>;
using RecordRegistry = NameRegistry<RecordIndex>;

}  // namespace senm
