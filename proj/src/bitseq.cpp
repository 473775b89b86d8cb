#include "ambc/bitseq.hpp"

#include <algorithm>
#include <bit>

#include <fmt/format.h>

#include "ambc/error.hpp"

namespace ambc {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::invalid_seed: return "invalid seed";
    case Errc::length_mismatch: return "length mismatch";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::aliasing: return "aliasing";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::representation_mismatch: return "representation mismatch";
    case Errc::config: return "configuration error";
    case Errc::io: return "I/O error";
  }
  return "unknown error";
}

BitSequence::BitSequence(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] > 1) {
      throw Error(Errc::invalid_argument,
                  fmt::format("bit {} has value {}, expected 0 or 1", i, bits_[i]));
    }
  }
}

BitSequence BitSequence::from_string(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else {
      throw Error(Errc::invalid_argument,
                  fmt::format("invalid character '{}' in bit string", c));
    }
  }
  return BitSequence(std::move(bits));
}

std::string BitSequence::to_string() const {
  std::string out(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) out[i] = bits_[i] ? '1' : '0';
  return out;
}

std::size_t BitSequence::count_ones() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

BitSequence BitSequence::concat(const BitSequence& tail) const {
  std::vector<std::uint8_t> out(bits_);
  out.insert(out.end(), tail.bits_.begin(), tail.bits_.end());
  return BitSequence(std::move(out));
}

BitSequence BitSequence::slice(std::size_t pos, std::size_t len) const {
  if (pos + len > bits_.size()) {
    throw Error(Errc::length_mismatch,
                fmt::format("slice [{}, {}) out of range for length {}", pos, pos + len,
                            bits_.size()));
  }
  return BitSequence(std::vector<std::uint8_t>(bits_.begin() + pos, bits_.begin() + pos + len));
}

BitSequence BitSequence::complement() const {
  std::vector<std::uint8_t> out(bits_);
  for (auto& b : out) b ^= 1;
  return BitSequence(std::move(out));
}

BitSequence BitSequence::rotated(std::size_t k) const {
  if (bits_.empty()) return *this;
  std::vector<std::uint8_t> out(bits_);
  std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k % out.size()), out.end());
  return BitSequence(std::move(out));
}

std::uint32_t LfsrSpec::seed_from_string(std::string_view stages) {
  std::uint32_t seed = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i] == '1') {
      seed |= 1u << i;
    } else if (stages[i] != '0') {
      throw Error(Errc::invalid_seed, fmt::format("invalid seed string '{}'", stages));
    }
  }
  return seed;
}

Lfsr::Lfsr(const LfsrSpec& spec) : degree_(spec.degree) {
  if (degree_ < 2 || degree_ > 31) {
    throw Error(Errc::invalid_argument, fmt::format("unsupported LFSR degree {}", degree_));
  }
  mask_ = (1u << degree_) - 1;
  tap_mask_ = 0;
  for (int t : spec.taps) {
    if (t < 1 || t > degree_) {
      throw Error(Errc::invalid_argument, fmt::format("tap {} outside stages 1..{}", t, degree_));
    }
    tap_mask_ |= 1u << (t - 1);
  }
  if ((tap_mask_ >> (degree_ - 1) & 1u) == 0) {
    throw Error(Errc::invalid_argument, "the last stage must be tapped");
  }
  reg_ = spec.seed & mask_;
  if (reg_ == 0 || spec.seed != reg_) {
    throw Error(Errc::invalid_seed,
                fmt::format("seed {:#x} is not a nonzero {}-bit state", spec.seed, degree_));
  }
}

std::uint8_t Lfsr::step() {
  const auto out = static_cast<std::uint8_t>((reg_ >> (degree_ - 1)) & 1u);
  const auto feedback = static_cast<std::uint32_t>(std::popcount(reg_ & tap_mask_) & 1);
  reg_ = ((reg_ << 1) | feedback) & mask_;
  return out;
}

BitSequence generate_m_sequence(const LfsrSpec& spec) {
  Lfsr lfsr(spec);
  const std::size_t period = (std::size_t{1} << spec.degree) - 1;
  std::vector<std::uint8_t> bits(period);
  for (std::size_t i = 0; i < period; ++i) {
    bits[i] = lfsr.step();
    if (lfsr.state() == spec.seed && i + 1 < period) {
      throw Error(Errc::invalid_argument,
                  fmt::format("taps give period {} instead of {}", i + 1, period));
    }
  }
  return BitSequence(std::move(bits));
}

const BitSequence& default_sync() {
  static const BitSequence sync = generate_m_sequence(LfsrSpec{});
  return sync;
}

const BitSequence& default_payload() {
  static const BitSequence payload = [] {
    LfsrSpec spec;
    spec.taps = {6, 1};
    spec.seed = LfsrSpec::seed_from_string("000001");
    return generate_m_sequence(spec).slice(0, kDataBits);
  }();
  return payload;
}

BitSequence build_frame(const BitSequence& data) { return build_frame(default_sync(), data); }

BitSequence build_frame(const BitSequence& sync, const BitSequence& data) {
  if (data.size() != kDataBits) {
    throw Error(Errc::length_mismatch,
                fmt::format("payload has {} bits, frame needs {}", data.size(), kDataBits));
  }
  if (sync.size() != kSyncBits) {
    throw Error(Errc::length_mismatch,
                fmt::format("sync word has {} bits, frame needs {}", sync.size(), kSyncBits));
  }
  return sync.concat(data);
}

std::size_t hamming_errors(const BitSequence& a, const BitSequence& b) {
  if (a.size() != b.size()) {
    throw Error(Errc::length_mismatch,
                fmt::format("cannot compare sequences of length {} and {}", a.size(), b.size()));
  }
  std::size_t errors = 0;
  for (std::size_t i = 0; i < a.size(); ++i) errors += a[i] != b[i];
  return errors;
}

double agreement_correlation(const BitSequence& window, const BitSequence& reference) {
  const std::size_t errors = hamming_errors(window, reference);
  if (window.empty()) {
    throw Error(Errc::length_mismatch, "correlation of empty sequences");
  }
  return static_cast<double>(window.size() - errors) / static_cast<double>(window.size());
}

}  // namespace ambc
