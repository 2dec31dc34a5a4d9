#pragma once

// Bit-packed vectors and Gaussian elimination over GF(2).

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace mirrorlab::gf2 {

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const noexcept { return size_; }

  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  BitVector& operator^=(const BitVector& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= o.words_[w];
    return *this;
  }
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend bool operator==(const BitVector& a, const BitVector& b) = default;

  bool none() const {
    for (auto w : words_) {
      if (w != 0) return false;
    }
    return true;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  // Index of the lowest set bit, or size() when empty.
  std::size_t lowest() const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if (words_[w] != 0) return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
    }
    return size_;
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
    return out;
  }

  static BitVector unit(std::size_t size, std::size_t i) {
    BitVector v(size);
    v.set(i);
    return v;
  }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Incremental row-echelon basis. Each stored row remembers which inserted
// vectors were XORed to produce it, so membership queries can return an
// explicit combination.
class Basis {
 public:
  Basis(std::size_t dimension, std::size_t max_inputs)
      : dim_(dimension), inputs_(max_inputs), pivot_row_(dimension, npos) {}

  std::size_t rank() const noexcept { return rows_.size(); }
  std::size_t dimension() const noexcept { return dim_; }

  // Inserts a vector tagged with input id `tag`. Returns true when it was
  // linearly independent of everything inserted before.
  bool insert(const BitVector& v, std::size_t tag) {
    BitVector vec = v;
    BitVector combo(inputs_);
    combo.set(tag);
    reduce(vec, combo);
    if (vec.none()) return false;
    const std::size_t p = vec.lowest();
    pivot_row_[p] = rows_.size();
    rows_.push_back({std::move(vec), std::move(combo), p});
    return true;
  }

  // Set of input tags whose XOR equals `target`, if `target` is in the span.
  std::optional<BitVector> express(const BitVector& target) const {
    BitVector vec = target;
    BitVector combo(inputs_);
    reduce(vec, combo);
    if (!vec.none()) return std::nullopt;
    return combo;
  }

  bool contains(const BitVector& target) const {
    BitVector vec = target;
    BitVector combo(inputs_);
    reduce(vec, combo);
    return vec.none();
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  struct Row {
    BitVector vec;
    BitVector combo;
    std::size_t pivot;
  };

  // Clears every pivot position of `vec`. A row's pivot is its lowest set
  // bit, so a single ascending scan leaves no pivot bit behind.
  void reduce(BitVector& vec, BitVector& combo) const {
    std::size_t p = vec.lowest();
    while (p < dim_) {
      if (const std::size_t r = pivot_row_[p]; r != npos) {
        vec ^= rows_[r].vec;
        combo ^= rows_[r].combo;
      }
      p = next_set(vec, p + 1);
    }
  }

  static std::size_t next_set(const BitVector& v, std::size_t from) {
    for (std::size_t i = from; i < v.size(); ++i) {
      if (v.test(i)) return i;
    }
    return v.size();
  }

  std::size_t dim_;
  std::size_t inputs_;
  std::vector<std::size_t> pivot_row_;
  std::vector<Row> rows_;
};

}  // namespace mirrorlab::gf2
