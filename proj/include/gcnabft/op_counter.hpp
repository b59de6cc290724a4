#pragma once

#include <cstdint>

namespace gcnabft {

// Arithmetic-operation tallies for one kernel or one accounting bucket.
// Multiplications and additions are counted equally; a multiply-add is two
// ops. Comparisons cover the checksum verdict comparisons.
struct OpCounter {
  std::uint64_t multiplies = 0;
  std::uint64_t additions = 0;
  std::uint64_t comparisons = 0;

  std::uint64_t total() const { return multiplies + additions + comparisons; }

  OpCounter& operator+=(const OpCounter& o) {
    multiplies += o.multiplies;
    additions += o.additions;
    comparisons += o.comparisons;
    return *this;
  }

  friend OpCounter operator+(OpCounter a, const OpCounter& b) { return a += b; }

  bool operator==(const OpCounter&) const = default;
};

}  // namespace gcnabft
