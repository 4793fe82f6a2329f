#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace mfc {

/// b^e as an unsigned integer; throws std::overflow_error past 2^62.
std::uint64_t ipow(int base, int exponent);

/// Largest word length whose index range still fits in 62 bits.
int max_word_length(int base);

/// A finite word over {0,...,b-1}, i.e. the b-adic interval
/// I_w = [i(w) b^-|w|, (i(w)+1) b^-|w|].
///
/// Stored as (length, index); digit 0 is the most significant one, so
/// prefix(k) is the ancestor at depth k.
class Word {
 public:
  Word() = default;
  Word(int base, int length, std::uint64_t index);

  static Word root(int base) { return Word(base, 0, 0); }
  static Word from_digits(int base, std::span<const int> digits);
  /// Parses a digit string such as "0121"; the empty string is the root.
  static Word parse(int base, std::string_view digits);

  int base() const noexcept { return base_; }
  int length() const noexcept { return length_; }
  std::uint64_t index() const noexcept { return index_; }
  bool empty() const noexcept { return length_ == 0; }

  int digit(int k) const;
  Word prefix(int k) const;
  Word child(int digit) const;
  Word parent() const;
  /// v.concat(w) is the word vw.
  Word concat(const Word& tail) const;
  /// Appends `count` copies of `digit`.
  Word padded(int count, int digit = 0) const;

  double left() const;
  double right() const;

  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  int base_ = 2;
  int length_ = 0;
  std::uint64_t index_ = 0;
};

/// delta(v, w) = |i(v) - i(w)|, defined for words of equal length.
std::uint64_t distance(const Word& v, const Word& w);

/// w^{(n)}(t): the length-n word whose half-open interval contains t.
/// t = 1 maps to the last interval.
Word word_containing(int base, int length, double t);

}  // namespace mfc
