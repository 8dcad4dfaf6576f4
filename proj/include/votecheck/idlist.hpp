#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace votecheck {

using IdListId = uint32_t;

// Interning pool for short immutable u32 sequences (choice branches, call
// arguments, event-set members). Equal content always yields the same id.
// Each list owns its own buffer, so a span returned by get() stays valid for
// the life of the pool no matter how many lists are interned after it —
// callers iterate over one list while creating others.
class IdListPool {
 public:
  IdListId intern(std::span<const uint32_t> items) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (uint32_t v : items) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    auto& bucket = buckets_[h];
    for (IdListId id : bucket) {
      const std::vector<uint32_t>& existing = lists_[id];
      if (existing.size() == items.size() &&
          std::equal(existing.begin(), existing.end(), items.begin()))
        return id;
    }
    IdListId id = static_cast<IdListId>(lists_.size());
    lists_.emplace_back(items.begin(), items.end());
    bucket.push_back(id);
    return id;
  }

  std::span<const uint32_t> get(IdListId id) const { return lists_[id]; }

  size_t size() const { return lists_.size(); }

 private:
  std::vector<std::vector<uint32_t>> lists_;
  std::unordered_map<uint64_t, std::vector<IdListId>> buckets_;
};

}  // namespace votecheck
