#include "mfcascade/word.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mfc {

std::uint64_t ipow(int base, int exponent) {
  if (base < 2) throw std::invalid_argument("ipow: base must be >= 2");
  if (exponent < 0) throw std::invalid_argument("ipow: negative exponent");
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 62;
  std::uint64_t r = 1;
  for (int i = 0; i < exponent; ++i) {
    if (r > kLimit / static_cast<std::uint64_t>(base)) throw std::overflow_error("ipow: b^e exceeds 2^62");
    r *= static_cast<std::uint64_t>(base);
  }
  return r;
}

int max_word_length(int base) {
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 62;
  int len = 0;
  std::uint64_t r = 1;
  while (r <= kLimit / static_cast<std::uint64_t>(base)) {
    r *= static_cast<std::uint64_t>(base);
    ++len;
  }
  return len;
}

Word::Word(int base, int length, std::uint64_t index) : base_(base), length_(length), index_(index) {
  if (base < 2) throw std::invalid_argument("Word: base must be >= 2");
  if (length < 0 || length > max_word_length(base)) throw std::invalid_argument("Word: length out of range");
  if (index >= ipow(base, length)) throw std::invalid_argument("Word: index out of range");
}

Word Word::from_digits(int base, std::span<const int> digits) {
  std::uint64_t idx = 0;
  for (int d : digits) {
    if (d < 0 || d >= base) throw std::invalid_argument("Word: digit out of range");
    idx = idx * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(d);
  }
  return Word(base, static_cast<int>(digits.size()), idx);
}

Word Word::parse(int base, std::string_view digits) {
  std::vector<int> ds;
  ds.reserve(digits.size());
  for (char c : digits) {
    if (c < '0' || c > '9') throw std::invalid_argument("Word: non-digit character");
    ds.push_back(c - '0');
  }
  return from_digits(base, ds);
}

int Word::digit(int k) const {
  if (k < 0 || k >= length_) throw std::out_of_range("Word::digit");
  const std::uint64_t scale = ipow(base_, length_ - 1 - k);
  return static_cast<int>((index_ / scale) % static_cast<std::uint64_t>(base_));
}

Word Word::prefix(int k) const {
  if (k < 0 || k > length_) throw std::out_of_range("Word::prefix");
  return Word(base_, k, index_ / ipow(base_, length_ - k));
}

Word Word::child(int d) const {
  if (d < 0 || d >= base_) throw std::invalid_argument("Word::child: digit out of range");
  return Word(base_, length_ + 1, index_ * static_cast<std::uint64_t>(base_) + static_cast<std::uint64_t>(d));
}

Word Word::parent() const {
  if (length_ == 0) throw std::out_of_range("Word::parent of the empty word");
  return prefix(length_ - 1);
}

Word Word::concat(const Word& tail) const {
  if (tail.base_ != base_) throw std::invalid_argument("Word::concat: base mismatch");
  return Word(base_, length_ + tail.length_, index_ * ipow(base_, tail.length_) + tail.index_);
}

Word Word::padded(int count, int d) const {
  Word w = *this;
  for (int i = 0; i < count; ++i) w = w.child(d);
  return w;
}

double Word::left() const {
  return static_cast<double>(index_) / static_cast<double>(ipow(base_, length_));
}

double Word::right() const {
  return static_cast<double>(index_ + 1) / static_cast<double>(ipow(base_, length_));
}

std::string Word::to_string() const {
  std::string s(static_cast<std::size_t>(length_), '0');
  std::uint64_t idx = index_;
  for (int k = length_ - 1; k >= 0; --k) {
    s[static_cast<std::size_t>(k)] = static_cast<char>('0' + idx % static_cast<std::uint64_t>(base_));
    idx /= static_cast<std::uint64_t>(base_);
  }
  return s;
}

std::uint64_t distance(const Word& v, const Word& w) {
  if (v.length() != w.length() || v.base() != w.base())
    throw std::invalid_argument("distance: words must share base and length");
  return v.index() > w.index() ? v.index() - w.index() : w.index() - v.index();
}

Word word_containing(int base, int length, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("word_containing: t must lie in [0,1]");
  const std::uint64_t count = ipow(base, length);
  auto idx = static_cast<std::uint64_t>(std::floor(t * static_cast<double>(count)));
  if (idx >= count) idx = count - 1;
  return Word(base, length, idx);
}

}  // namespace mfc
