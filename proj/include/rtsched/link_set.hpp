#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace rts {

/// A set of link indices in [0, 64), stored as a bitmask.
///
/// Ordering (`lex_less`) is lexicographic on the ascending member sequence,
/// which is the canonical order used for deterministic tie-breaking.
class LinkSet {
 public:
  static constexpr int kMaxLinks = 64;

  class iterator {
   public:
    using value_type = int;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    explicit iterator(std::uint64_t rest) : rest_(rest) {}
    int operator*() const { return std::countr_zero(rest_); }
    iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    bool operator==(const iterator&) const = default;

   private:
    std::uint64_t rest_ = 0;
  };

  constexpr LinkSet() = default;
  constexpr explicit LinkSet(std::uint64_t bits) : bits_(bits) {}
  LinkSet(std::initializer_list<int> links) {
    for (int l : links) insert(l);
  }

  static constexpr LinkSet first_n(int n) {
    return LinkSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }
  static constexpr LinkSet single(int l) { return LinkSet(std::uint64_t{1} << l); }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(int l) const { return (bits_ >> l) & 1U; }
  constexpr void insert(int l) { bits_ |= std::uint64_t{1} << l; }
  constexpr void erase(int l) { bits_ &= ~(std::uint64_t{1} << l); }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool subset_of(LinkSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(LinkSet other) const { return (bits_ & other.bits_) != 0; }
  /// Smallest member; undefined on an empty set.
  constexpr int front() const { return std::countr_zero(bits_); }

  iterator begin() const { return iterator(bits_); }
  iterator end() const { return iterator(0); }

  std::vector<int> to_vector() const { return {begin(), end()}; }
  std::string to_string() const;

  constexpr LinkSet operator&(LinkSet o) const { return LinkSet(bits_ & o.bits_); }
  constexpr LinkSet operator|(LinkSet o) const { return LinkSet(bits_ | o.bits_); }
  constexpr LinkSet operator-(LinkSet o) const { return LinkSet(bits_ & ~o.bits_); }
  constexpr LinkSet& operator&=(LinkSet o) { bits_ &= o.bits_; return *this; }
  constexpr LinkSet& operator|=(LinkSet o) { bits_ |= o.bits_; return *this; }
  constexpr LinkSet& operator-=(LinkSet o) { bits_ &= ~o.bits_; return *this; }
  constexpr bool operator==(const LinkSet&) const = default;

 private:
  std::uint64_t bits_ = 0;
};

/// Lexicographic comparison of the ascending member sequences.
constexpr bool lex_less(LinkSet a, LinkSet b) {
  const std::uint64_t diff = a.bits() ^ b.bits();
  if (diff == 0) return false;
  const int m = std::countr_zero(diff);
  // Both share every member below m; the set holding m is ahead at this
  // position unless the other one has already run out.
  const std::uint64_t above = (m == 63) ? 0 : (~std::uint64_t{0} << (m + 1));
  if (a.contains(m)) return (b.bits() & above) != 0;
  return (a.bits() & above) == 0;
}

struct LexLess {
  constexpr bool operator()(LinkSet a, LinkSet b) const { return lex_less(a, b); }
};

inline std::string LinkSet::to_string() const {
  std::string out = "{";
  bool first = true;
  for (int l : *this) {
    if (!first) out += ',';
    out += std::to_string(l);
    first = false;
  }
  out += '}';
  return out;
}

}  // namespace rts
