#pragma once

#include <array>
#include <cstdint>
#include <algorithm>
#include <compare>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace finverif {

// Unsigned 256-bit integer with EVM-style wrapping arithmetic.
// Stored as four 64-bit limbs, least significant first.
class U256 {
public:
  U256() : limbs_{0, 0, 0, 0} {}
  U256(std::uint64_t v) : limbs_{v, 0, 0, 0} {}

  static U256 zero() { return U256(); }
  static U256 one() { return U256(1); }
  static U256 max_value() {
    U256 r;
    r.limbs_ = {~0ull, ~0ull, ~0ull, ~0ull};
    return r;
  }

  std::uint64_t limb(int i) const { return limbs_[static_cast<std::size_t>(i)]; }

  bool is_zero() const {
    return limbs_[0] == 0 && limbs_[1] == 0 && limbs_[2] == 0 && limbs_[3] == 0;
  }

  bool fits_u64() const { return limbs_[1] == 0 && limbs_[2] == 0 && limbs_[3] == 0; }
  std::uint64_t as_u64() const { return limbs_[0]; }

  friend bool operator==(const U256& a, const U256& b) { return a.limbs_ == b.limbs_; }
  friend std::strong_ordering operator<=>(const U256& a, const U256& b) {
    for (int i = 3; i >= 0; --i) {
      if (a.limbs_[static_cast<std::size_t>(i)] != b.limbs_[static_cast<std::size_t>(i)])
        return a.limbs_[static_cast<std::size_t>(i)] <=> b.limbs_[static_cast<std::size_t>(i)];
    }
    return std::strong_ordering::equal;
  }

  friend U256 operator+(const U256& a, const U256& b) {
    U256 r;
    unsigned __int128 carry = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      unsigned __int128 s = static_cast<unsigned __int128>(a.limbs_[i]) + b.limbs_[i] + carry;
      r.limbs_[i] = static_cast<std::uint64_t>(s);
      carry = s >> 64;
    }
    return r;
  }

  friend U256 operator-(const U256& a, const U256& b) {
    U256 r;
    std::uint64_t borrow = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      unsigned __int128 d = static_cast<unsigned __int128>(a.limbs_[i]) -
                            static_cast<unsigned __int128>(b.limbs_[i]) - borrow;
      r.limbs_[i] = static_cast<std::uint64_t>(d);
      borrow = (d >> 64) ? 1 : 0;
    }
    return r;
  }

  friend U256 operator*(const U256& a, const U256& b) {
    U256 r;
    for (std::size_t i = 0; i < 4; ++i) {
      unsigned __int128 carry = 0;
      for (std::size_t j = 0; i + j < 4; ++j) {
        unsigned __int128 cur = static_cast<unsigned __int128>(a.limbs_[i]) * b.limbs_[j] +
                                r.limbs_[i + j] + carry;
        r.limbs_[i + j] = static_cast<std::uint64_t>(cur);
        carry = cur >> 64;
      }
    }
    return r;
  }

  // Truncating division; division by zero yields zero (EVM convention).
  friend U256 operator/(const U256& a, const U256& b) { return divmod(a, b).first; }
  friend U256 operator%(const U256& a, const U256& b) { return divmod(a, b).second; }

  static std::pair<U256, U256> divmod(const U256& a, const U256& b) {
    if (b.is_zero()) return {U256(), U256()};
    if (a < b) return {U256(), a};
    if (b.fits_u64() && a.fits_u64()) return {U256(a.limbs_[0] / b.limbs_[0]), U256(a.limbs_[0] % b.limbs_[0])};
    // Schoolbook binary long division; slow path is fine at this scale.
    U256 quotient, remainder;
    for (int bit = 255; bit >= 0; --bit) {
      remainder = remainder.shl1();
      if (a.bit(bit)) remainder.limbs_[0] |= 1;
      if (!(remainder < b)) {
        remainder = remainder - b;
        quotient.set_bit(bit);
      }
    }
    return {quotient, remainder};
  }

  U256 pow(const U256& e) const {
    U256 base = *this, result(1), exp = e;
    while (!exp.is_zero()) {
      if (exp.limbs_[0] & 1) result = result * base;
      base = base * base;
      exp = exp.shr1();
    }
    return result;
  }

  bool bit(int i) const { return (limbs_[static_cast<std::size_t>(i / 64)] >> (i % 64)) & 1; }
  void set_bit(int i) { limbs_[static_cast<std::size_t>(i / 64)] |= (1ull << (i % 64)); }

  U256 shl1() const {
    U256 r;
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      r.limbs_[i] = (limbs_[i] << 1) | carry;
      carry = limbs_[i] >> 63;
    }
    return r;
  }

  U256 shr1() const {
    U256 r;
    std::uint64_t carry = 0;
    for (int i = 3; i >= 0; --i) {
      std::size_t k = static_cast<std::size_t>(i);
      r.limbs_[k] = (limbs_[k] >> 1) | (carry << 63);
      carry = limbs_[k] & 1;
    }
    return r;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    std::string digits;
    U256 cur = *this;
    const U256 ten(10);
    while (!cur.is_zero()) {
      auto [q, r] = divmod(cur, ten);
      digits.push_back(static_cast<char>('0' + r.limbs_[0]));
      cur = q;
    }
    std::reverse(digits.begin(), digits.end());
    return digits;
  }

  static std::optional<U256> parse(const std::string& text) {
    if (text.empty()) return std::nullopt;
    U256 acc;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
      for (std::size_t i = 2; i < text.size(); ++i) {
        char c = text[i];
        std::uint64_t d;
        if (c >= '0' && c <= '9') d = static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') d = static_cast<std::uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') d = static_cast<std::uint64_t>(c - 'A' + 10);
        else return std::nullopt;
        acc = acc * U256(16) + U256(d);
      }
      return acc;
    }
    for (char c : text) {
      if (c < '0' || c > '9') return std::nullopt;
      acc = acc * U256(10) + U256(static_cast<std::uint64_t>(c - '0'));
    }
    return acc;
  }

private:
  std::array<std::uint64_t, 4> limbs_;
};

// Arbitrary-precision signed integer, base 2^32 magnitude. Used only by the
// constraint solver, where coefficients can exceed 2^256 after elimination.
class BigInt {
public:
  BigInt() = default;
  BigInt(long long v) {
    if (v < 0) { negative_ = true; v = -v; }
    while (v) { mag_.push_back(static_cast<std::uint32_t>(v & 0xffffffffu)); v >>= 32; }
  }
  explicit BigInt(const U256& v) {
    for (int i = 0; i < 4; ++i) {
      mag_.push_back(static_cast<std::uint32_t>(v.limb(i) & 0xffffffffu));
      mag_.push_back(static_cast<std::uint32_t>(v.limb(i) >> 32));
    }
    trim();
  }

  bool is_zero() const { return mag_.empty(); }
  bool is_negative() const { return negative_; }
  int sign() const { return mag_.empty() ? 0 : (negative_ ? -1 : 1); }

  BigInt operator-() const {
    BigInt r = *this;
    if (!r.mag_.empty()) r.negative_ = !r.negative_;
    return r;
  }

  friend BigInt operator+(const BigInt& a, const BigInt& b) {
    if (a.negative_ == b.negative_) {
      BigInt r;
      r.mag_ = add_mag(a.mag_, b.mag_);
      r.negative_ = a.negative_;
      r.trim();
      return r;
    }
    int c = cmp_mag(a.mag_, b.mag_);
    BigInt r;
    if (c == 0) return r;
    if (c > 0) { r.mag_ = sub_mag(a.mag_, b.mag_); r.negative_ = a.negative_; }
    else { r.mag_ = sub_mag(b.mag_, a.mag_); r.negative_ = b.negative_; }
    r.trim();
    return r;
  }

  friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

  friend BigInt operator*(const BigInt& a, const BigInt& b) {
    BigInt r;
    if (a.is_zero() || b.is_zero()) return r;
    r.mag_.assign(a.mag_.size() + b.mag_.size(), 0);
    for (std::size_t i = 0; i < a.mag_.size(); ++i) {
      std::uint64_t carry = 0;
      for (std::size_t j = 0; j < b.mag_.size(); ++j) {
        std::uint64_t cur = static_cast<std::uint64_t>(a.mag_[i]) * b.mag_[j] + r.mag_[i + j] + carry;
        r.mag_[i + j] = static_cast<std::uint32_t>(cur);
        carry = cur >> 32;
      }
      r.mag_[i + b.mag_.size()] += static_cast<std::uint32_t>(carry);
    }
    r.negative_ = a.negative_ != b.negative_;
    r.trim();
    return r;
  }

  // Truncated toward zero.
  static std::pair<BigInt, BigInt> divmod(const BigInt& a, const BigInt& b) {
    if (b.is_zero()) throw std::domain_error("BigInt division by zero");
    if (b.mag_.size() == 1) {
      // single-limb schoolbook division
      BigInt q;
      q.mag_.assign(a.mag_.size(), 0);
      std::uint64_t divisor = b.mag_[0];
      std::uint64_t rem = 0;
      for (std::size_t i = a.mag_.size(); i-- > 0;) {
        std::uint64_t cur = (rem << 32) | a.mag_[i];
        q.mag_[i] = static_cast<std::uint32_t>(cur / divisor);
        rem = cur % divisor;
      }
      q.trim();
      q.negative_ = !q.is_zero() && (a.negative_ != b.negative_);
      BigInt r(static_cast<long long>(rem));
      r.negative_ = !r.is_zero() && a.negative_;
      return {q, r};
    }
    BigInt q, r;
    for (std::size_t i = a.mag_.size(); i-- > 0;) {
      for (int bit = 31; bit >= 0; --bit) {
        r = r.shl1();
        if ((a.mag_[i] >> bit) & 1) r = r.set_low_bit();
        if (cmp_mag(r.mag_, b.mag_) >= 0) {
          r.mag_ = sub_mag(r.mag_, b.mag_);
          r.trim();
          q.set_bit(i * 32 + static_cast<std::size_t>(bit));
        }
      }
    }
    q.trim();
    q.negative_ = !q.is_zero() && (a.negative_ != b.negative_);
    r.negative_ = !r.is_zero() && a.negative_;
    return {q, r};
  }

  friend BigInt operator/(const BigInt& a, const BigInt& b) { return divmod(a, b).first; }
  friend BigInt operator%(const BigInt& a, const BigInt& b) { return divmod(a, b).second; }

  friend bool operator==(const BigInt& a, const BigInt& b) {
    return a.negative_ == b.negative_ && a.mag_ == b.mag_;
  }
  friend std::strong_ordering operator<=>(const BigInt& a, const BigInt& b) {
    if (a.sign() != b.sign()) return a.sign() <=> b.sign();
    int c = cmp_mag(a.mag_, b.mag_);
    if (a.negative_) c = -c;
    return c <=> 0;
  }

  static BigInt gcd(BigInt a, BigInt b) {
    a.negative_ = b.negative_ = false;
    while (!b.is_zero()) {
      BigInt r = divmod(a, b).second;
      r.negative_ = false;
      a = std::move(b);
      b = std::move(r);
    }
    return a;
  }

  bool is_one() const { return !negative_ && mag_.size() == 1 && mag_[0] == 1; }

  // Floor division (needed for integral rounding in the solver).
  static BigInt fdiv(const BigInt& a, const BigInt& b) {
    auto [q, r] = divmod(a, b);
    if (!r.is_zero() && ((a.sign() < 0) != (b.sign() < 0))) q = q - BigInt(1);
    return q;
  }

  bool fits_u256() const { return !negative_ && mag_.size() <= 8; }
  U256 as_u256() const {
    U256 r;
    for (std::size_t i = 0; i < mag_.size() && i < 8; ++i) {
      // reconstruct limb-by-limb
      if (mag_[i]) {
        U256 part(static_cast<std::uint64_t>(mag_[i]));
        for (std::size_t k = 0; k < i; ++k) part = part * U256(1ull << 32);
        r = r + part;
      }
    }
    return r;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    std::string digits;
    BigInt cur = *this;
    cur.negative_ = false;
    const BigInt ten(10);
    while (!cur.is_zero()) {
      auto [q, r] = divmod(cur, ten);
      digits.push_back(static_cast<char>('0' + (r.mag_.empty() ? 0 : r.mag_[0])));
      cur = q;
    }
    if (negative_) digits.push_back('-');
    std::reverse(digits.begin(), digits.end());
    return digits;
  }

  static std::optional<BigInt> parse(const std::string& text) {
    if (text.empty()) return std::nullopt;
    BigInt acc;
    std::size_t i = 0;
    bool neg = false;
    if (text[0] == '-') { neg = true; i = 1; }
    if (i >= text.size()) return std::nullopt;
    const BigInt ten(10);
    for (; i < text.size(); ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
      acc = acc * ten + BigInt(text[i] - '0');
    }
    if (neg) acc = -acc;
    return acc;
  }

private:
  void trim() {
    while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
    if (mag_.empty()) negative_ = false;
  }
  BigInt shl1() const {
    BigInt r;
    r.mag_.assign(mag_.size() + 1, 0);
    std::uint32_t carry = 0;
    for (std::size_t i = 0; i < mag_.size(); ++i) {
      r.mag_[i] = (mag_[i] << 1) | carry;
      carry = mag_[i] >> 31;
    }
    r.mag_[mag_.size()] = carry;
    r.trim();
    return r;
  }
  BigInt set_low_bit() const {
    BigInt r = *this;
    if (r.mag_.empty()) r.mag_.push_back(1);
    else r.mag_[0] |= 1;
    return r;
  }
  void set_bit(std::size_t i) {
    std::size_t word = i / 32;
    if (mag_.size() <= word) mag_.resize(word + 1, 0);
    mag_[word] |= (1u << (i % 32));
  }

  static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (std::size_t i = a.size(); i-- > 0;) {
      if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
  }
  static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> r(std::max(a.size(), b.size()) + 1, 0);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::uint64_t s = carry;
      if (i < a.size()) s += a[i];
      if (i < b.size()) s += b[i];
      r[i] = static_cast<std::uint32_t>(s);
      carry = s >> 32;
    }
    return r;
  }
  // requires |a| >= |b|
  static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> r(a.size(), 0);
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::int64_t d = static_cast<std::int64_t>(a[i]) - borrow - (i < b.size() ? b[i] : 0);
      if (d < 0) { d += (1ll << 32); borrow = 1; } else borrow = 0;
      r[i] = static_cast<std::uint32_t>(d);
    }
    return r;
  }

  std::vector<std::uint32_t> mag_;
  bool negative_ = false;
};

inline BigInt pow2_256() {
  BigInt m(1);
  const BigInt two(2);
  for (int i = 0; i < 256; ++i) m = m * two;
  return m;
}

// Exact rational, normalized with positive denominator.
class Rational {
public:
  Rational() : num_(0), den_(1) {}
  Rational(BigInt n) : num_(std::move(n)), den_(1) {}
  Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_integer() const { return den_ == BigInt(1); }
  int sign() const { return num_.sign(); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return (a.num_ * b.den_) <=> (b.num_ * a.den_);
  }

  BigInt floor() const { return BigInt::fdiv(num_, den_); }
  BigInt ceil() const { return -BigInt::fdiv(-num_, den_); }

  std::string to_string() const {
    if (is_integer()) return num_.to_string();
    return num_.to_string() + "/" + den_.to_string();
  }

private:
  void normalize() {
    if (den_.is_zero()) throw std::domain_error("rational with zero denominator");
    if (den_.sign() < 0) { num_ = -num_; den_ = -den_; }
    if (num_.is_zero()) {
      den_ = BigInt(1);
      return;
    }
    if (den_.is_one()) return;
    BigInt g = BigInt::gcd(num_, den_);
    if (!g.is_zero() && !g.is_one()) {
      num_ = num_ / g;
      den_ = den_ / g;
    }
  }

  BigInt num_;
  BigInt den_;
};

}  // namespace finverif
