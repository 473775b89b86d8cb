#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ambc {

inline constexpr std::size_t kSyncBits = 63;
inline constexpr std::size_t kDataBits = 57;
inline constexpr std::size_t kFrameBits = kSyncBits + kDataBits;

/// Immutable ordered sequence of binary symbols.
class BitSequence {
 public:
  BitSequence() = default;
  explicit BitSequence(std::vector<std::uint8_t> bits);

  /// Parses an ASCII string of '0' and '1'.
  static BitSequence from_string(std::string_view text);
  std::string to_string() const;

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::size_t count_ones() const noexcept;

  BitSequence concat(const BitSequence& tail) const;
  BitSequence slice(std::size_t pos, std::size_t len) const;
  BitSequence complement() const;
  /// Left cyclic rotation: result[i] = this[(i + k) mod n].
  BitSequence rotated(std::size_t k) const;

  friend bool operator==(const BitSequence&, const BitSequence&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Fibonacci LFSR description. Stages are numbered 1..degree; the output is
/// the last stage and the feedback (XOR of the tapped stages) enters stage 1.
/// Taps {6, 5} realise the generating polynomial X^6 + X^5 + 1.
///
/// `seed` holds the register with stage i in bit (i - 1).
struct LfsrSpec {
  int degree = 6;
  std::vector<int> taps{6, 5};
  std::uint32_t seed = 0b111111;

  /// Seed written as stages 1..degree from left to right, e.g. "000001".
  static std::uint32_t seed_from_string(std::string_view stages);
};

class Lfsr {
 public:
  explicit Lfsr(const LfsrSpec& spec);

  std::uint8_t step();
  std::uint32_t state() const noexcept { return reg_; }

 private:
  int degree_;
  std::uint32_t mask_;
  std::uint32_t tap_mask_;
  std::uint32_t reg_;
};

/// One full period of the LFSR output (2^degree - 1 bits). Throws
/// Errc::invalid_seed for an all-zero register and Errc::invalid_argument when
/// the taps do not give a maximal-length sequence.
BitSequence generate_m_sequence(const LfsrSpec& spec);

/// 63-bit sync word from X^6 + X^5 + 1 with the all-ones seed.
const BitSequence& default_sync();
/// First 57 bits of the X^6 + X + 1 sequence started from 000001. A shift
/// of the sync generator would put a near-copy of the sync word inside
/// every frame.
const BitSequence& default_payload();

/// sync followed by a 57-bit payload.
BitSequence build_frame(const BitSequence& data);
BitSequence build_frame(const BitSequence& sync, const BitSequence& data);

/// Fraction of positions where the two sequences agree.
double agreement_correlation(const BitSequence& window, const BitSequence& reference);
std::size_t hamming_errors(const BitSequence& a, const BitSequence& b);

}  // namespace ambc
