#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace derivelog {

/// Dense point / world identifier, 0-based.
using Point = std::uint32_t;

/// Hard capacity of every finite structure handled by the library.
inline constexpr std::size_t kMaxPoints = 256;

/// Fixed-capacity bitset over points. Every frame, space and valuation in the
/// library stores its subsets this way, so set algebra is a handful of word
/// operations.
class PointSet {
 public:
  static constexpr std::size_t kWords = kMaxPoints / 64;

  constexpr PointSet() = default;
  PointSet(std::initializer_list<Point> points) {
    for (Point p : points) insert(p);
  }

  /// {0, ..., n-1}
  static PointSet full(std::size_t n) {
    PointSet s;
    for (std::size_t w = 0; w < kWords && n > 0; ++w) {
      if (n >= 64) {
        s.words_[w] = ~std::uint64_t{0};
        n -= 64;
      } else {
        s.words_[w] = (std::uint64_t{1} << n) - 1;
        n = 0;
      }
    }
    return s;
  }

  /// Subset of {0..63} encoded by the low bits of `mask`.
  static PointSet from_mask(std::uint64_t mask) {
    PointSet s;
    s.words_[0] = mask;
    return s;
  }

  static PointSet singleton(Point p) {
    PointSet s;
    s.insert(p);
    return s;
  }

  bool contains(Point p) const { return (words_[p >> 6] >> (p & 63)) & 1U; }
  void insert(Point p) { words_[p >> 6] |= std::uint64_t{1} << (p & 63); }
  void erase(Point p) { words_[p >> 6] &= ~(std::uint64_t{1} << (p & 63)); }
  void assign(Point p, bool value) {
    if (value) {
      insert(p);
    } else {
      erase(p);
    }
  }

  bool empty() const {
    for (auto w : words_) {
      if (w != 0) return false;
    }
    return true;
  }

  std::size_t size() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  /// Low 64 bits; meaningful only for sets inside {0..63}.
  std::uint64_t low_mask() const { return words_[0]; }

  bool intersects(const PointSet& o) const {
    for (std::size_t i = 0; i < kWords; ++i) {
      if ((words_[i] & o.words_[i]) != 0) return true;
    }
    return false;
  }

  bool is_subset_of(const PointSet& o) const {
    for (std::size_t i = 0; i < kWords; ++i) {
      if ((words_[i] & ~o.words_[i]) != 0) return false;
    }
    return true;
  }

  /// Complement relative to {0, ..., n-1}.
  PointSet complement(std::size_t n) const {
    PointSet s = full(n);
    for (std::size_t i = 0; i < kWords; ++i) s.words_[i] &= ~words_[i];
    return s;
  }

  PointSet& operator|=(const PointSet& o) {
    for (std::size_t i = 0; i < kWords; ++i) words_[i] |= o.words_[i];
    return *this;
  }
  PointSet& operator&=(const PointSet& o) {
    for (std::size_t i = 0; i < kWords; ++i) words_[i] &= o.words_[i];
    return *this;
  }
  /// Set difference.
  PointSet& operator-=(const PointSet& o) {
    for (std::size_t i = 0; i < kWords; ++i) words_[i] &= ~o.words_[i];
    return *this;
  }

  friend PointSet operator|(PointSet a, const PointSet& b) { return a |= b; }
  friend PointSet operator&(PointSet a, const PointSet& b) { return a &= b; }
  friend PointSet operator-(PointSet a, const PointSet& b) { return a -= b; }

  friend bool operator==(const PointSet&, const PointSet&) = default;
  /// Orders by the integer value of the bit vector (highest word first).
  friend bool operator<(const PointSet& a, const PointSet& b) {
    for (std::size_t i = kWords; i-- > 0;) {
      if (a.words_[i] != b.words_[i]) return a.words_[i] < b.words_[i];
    }
    return false;
  }

  /// Smallest member, or kMaxPoints when empty.
  Point first() const {
    for (std::size_t i = 0; i < kWords; ++i) {
      if (words_[i] != 0) {
        return static_cast<Point>(i * 64 + std::countr_zero(words_[i]));
      }
    }
    return static_cast<Point>(kMaxPoints);
  }

  std::vector<Point> to_vector() const {
    std::vector<Point> out;
    for_each([&](Point p) { out.push_back(p); });
    return out;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < kWords; ++i) {
      std::uint64_t w = words_[i];
      while (w != 0) {
        fn(static_cast<Point>(i * 64 + std::countr_zero(w)));
        w &= w - 1;
      }
    }
  }

  /// "{0,2,5}"
  std::string to_string() const;

 private:
  std::array<std::uint64_t, kWords> words_{};
};

/// Preimage of `target` under a total map given as a table.
PointSet preimage(const std::vector<Point>& map, const PointSet& target);

/// Image of `source` under a total map given as a table.
PointSet image(const std::vector<Point>& map, const PointSet& source);

}  // namespace derivelog
