#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace splitopt {

// Fixed-length bit vector packed into 64-bit words. Bits past size() are
// always zero so word-level operations never need a tail mask.
class Bitset {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  Bitset() = default;
  explicit Bitset(std::size_t size, bool value = false)
      : size_(size), words_(word_count(size), value ? ~Word{0} : Word{0}) {
    clear_tail();
  }

  static std::size_t word_count(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

  std::size_t size() const { return size_; }
  std::size_t num_words() const { return words_.size(); }
  std::span<const Word> words() const { return words_; }
  std::span<Word> words() { return words_; }

  bool test(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }
  void set(std::size_t i, bool value = true) {
    const Word bit = Word{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= bit;
    } else {
      words_[i / kWordBits] &= ~bit;
    }
  }

  std::size_t count() const {
    std::size_t total = 0;
    for (Word w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

  bool none() const {
    for (Word w : words_) {
      if (w != 0) return false;
    }
    return true;
  }

  Bitset& operator&=(const Bitset& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }
  Bitset& operator|=(const Bitset& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }

  // this & ~other
  Bitset and_not(const Bitset& other) const {
    Bitset out(size_);
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = words_[i] & ~other.words_[i];
    return out;
  }

  Bitset flipped() const {
    Bitset out(size_);
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = ~words_[i];
    out.clear_tail();
    return out;
  }

  // Calls fn(index) for every set bit in increasing order.
  template <typename Fn>
  void for_each_set(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      Word bits = words_[w];
      while (bits != 0) {
        const int offset = std::countr_zero(bits);
        fn(w * kWordBits + static_cast<std::size_t>(offset));
        bits &= bits - 1;
      }
    }
  }

  std::uint64_t hash() const;

  friend bool operator==(const Bitset& a, const Bitset& b) {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }

 private:
  void clear_tail() {
    const std::size_t rem = size_ % kWordBits;
    if (rem != 0 && !words_.empty()) words_.back() &= (Word{1} << rem) - 1;
  }

  std::size_t size_ = 0;
  std::vector<Word> words_;
};

inline Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
inline Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }

inline std::size_t count_and(const Bitset& a, const Bitset& b) {
  const auto wa = a.words();
  const auto wb = b.words();
  std::size_t total = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) total += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
  return total;
}

inline std::size_t count_and(const Bitset& a, const Bitset& b, const Bitset& c) {
  const auto wa = a.words();
  const auto wb = b.words();
  const auto wc = c.words();
  std::size_t total = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    total += static_cast<std::size_t>(std::popcount(wa[i] & wb[i] & wc[i]));
  }
  return total;
}

// SplitMix64 finalizer; shared by mask hashing and the counter RNG.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t Bitset::hash() const {
  std::uint64_t h = 0x84222325cbf29ce4ULL ^ size_;
  for (Word w : words_) h = mix64(h ^ w);
  return h;
}

}  // namespace splitopt
