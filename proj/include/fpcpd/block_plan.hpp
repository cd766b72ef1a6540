#pragma once

/**
 * @file block_plan.hpp
 * Partition of the index grid of an I x J x K tensor into blocks of
 * mutually interchangeable entries.
 *
 * Two entries are interchangeable when they differ in all three indices, so
 * their row-local SGD updates touch disjoint rows of A, B and C and may run
 * concurrently.
 *
 * Construction (generalized diagonal): let s range over the smallest mode
 * (size p) and let the other two modes have sizes n1, n2 >= p. Block (u, v),
 * u < n1, v < n2, holds the p entries whose smallest-mode index is s and
 * whose other indices are (u + s) mod n1 and (v + s) mod n2. Every block is
 * full, the blocks tile the grid exactly once, and d = n1 * n2 = IJK / p.
 */

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "fpcpd/tensor.hpp"

namespace fpcpd {

struct Entry {
  std::size_t i = 0, j = 0, k = 0;
  friend bool operator==(const Entry&, const Entry&) = default;
};

using Block = std::span<const Entry>;

/// Blocks stored back to back; block b is entries[offsets[b], offsets[b+1]).
class BlockPlan {
public:
  BlockPlan() = default;

  BlockPlan(Dims dims, std::size_t parallelism, std::vector<Entry> entries, std::vector<std::size_t> offsets)
      : dims_(dims), p_(parallelism), entries_(std::move(entries)), offsets_(std::move(offsets)) {
    if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != entries_.size() ||
        !std::is_sorted(offsets_.begin(), offsets_.end()))
      throw InvalidArgument("block offsets are inconsistent with the entry list");
  }

  /// Convenience for hand-written plans (tests, tooling).
  static BlockPlan from_blocks(Dims dims, const std::vector<std::vector<Entry>>& blocks) {
    std::vector<Entry> entries;
    std::vector<std::size_t> offsets{0};
    std::size_t p = 0;
    for (const auto& b : blocks) {
      entries.insert(entries.end(), b.begin(), b.end());
      offsets.push_back(entries.size());
      p = std::max(p, b.size());
    }
    return BlockPlan(dims, p, std::move(entries), std::move(offsets));
  }

  const Dims& dims() const { return dims_; }
  std::size_t parallelism() const { return p_; }
  std::size_t block_count() const { return offsets_.size() - 1; }
  std::size_t entry_count() const { return entries_.size(); }

  Block block(std::size_t b) const {
    return Block(entries_.data() + offsets_[b], offsets_[b + 1] - offsets_[b]);
  }
  std::span<const Entry> entries() const { return entries_; }

private:
  Dims dims_{};
  std::size_t p_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::size_t> offsets_{0};
};

inline BlockPlan build_plan(Dims dims) {
  if (dims.I == 0 || dims.J == 0 || dims.K == 0)
    throw InvalidArgument("build_plan: dims must be positive (got " + to_string(dims) + ")");

  // Mode roles: `lead` is the (first) smallest mode, n1/n2 the remaining two in order.
  const std::array<std::size_t, 3> size{dims.I, dims.J, dims.K};
  const std::size_t lead = static_cast<std::size_t>(std::min_element(size.begin(), size.end()) - size.begin());
  const std::size_t m1 = lead == 0 ? 1 : 0;
  const std::size_t m2 = lead == 2 ? 1 : 2;
  const std::size_t p = size[lead], n1 = size[m1], n2 = size[m2];

  std::vector<Entry> entries;
  entries.reserve(dims.size());
  std::vector<std::size_t> offsets;
  offsets.reserve(n1 * n2 + 1);
  offsets.push_back(0);

  std::array<std::size_t, 3> idx{};
  for (std::size_t u = 0; u < n1; ++u)
    for (std::size_t v = 0; v < n2; ++v) {
      for (std::size_t s = 0; s < p; ++s) {
        idx[lead] = s;
        idx[m1] = (u + s) % n1;
        idx[m2] = (v + s) % n2;
        entries.push_back({idx[0], idx[1], idx[2]});
      }
      offsets.push_back(entries.size());
    }
  return BlockPlan(dims, p, std::move(entries), std::move(offsets));
}

/// Exhaustive check of the cover property and pairwise interchangeability within every block.
inline bool verify_plan(const BlockPlan& plan, Dims dims) {
  if (plan.dims() != dims || plan.entry_count() != dims.size()) return false;

  std::vector<bool> covered(dims.size(), false);
  // Per-mode stamps: stamp[x] == b + 1 means index x already used in block b.
  std::vector<std::size_t> seen_i(dims.I, 0), seen_j(dims.J, 0), seen_k(dims.K, 0);

  for (std::size_t b = 0; b < plan.block_count(); ++b) {
    const std::size_t stamp = b + 1;
    for (const Entry& e : plan.block(b)) {
      if (e.i >= dims.I || e.j >= dims.J || e.k >= dims.K) return false;
      const std::size_t lin = e.i + dims.I * (e.j + dims.J * e.k);
      if (covered[lin]) return false;
      covered[lin] = true;
      if (seen_i[e.i] == stamp || seen_j[e.j] == stamp || seen_k[e.k] == stamp) return false;
      seen_i[e.i] = seen_j[e.j] = seen_k[e.k] = stamp;
    }
  }
  return std::all_of(covered.begin(), covered.end(), [](bool c) { return c; });
}

}  // namespace fpcpd
