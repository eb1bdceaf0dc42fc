#pragma once

#include "plankit/error.hpp"

#include <mpfr.h>

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <vector>

namespace plankit {

/// Fractional digits of pi in base four, generated with MPFR on first use
/// and extended geometrically as larger indices are requested.
class PiBase4 {
 public:
  static constexpr std::size_t kDigitBudget = 10'000'000;

  static PiBase4& instance() {
    static PiBase4 digits;
    return digits;
  }

  /// i-th fractional base-4 digit (i = 0 is the first digit after the point).
  std::uint8_t digit(std::size_t i) {
    if (i >= kDigitBudget)
      throw Error("DigitBudgetExceeded", "pi digit index " + std::to_string(i) + " exceeds the budget of " +
                                             std::to_string(kDigitBudget));
    std::lock_guard lock(mutex_);
    if (i >= digits_.size()) grow(i + 1);
    return digits_[i];
  }

  /// Copies digits [0, count) into a caller-owned buffer, for hot loops.
  std::vector<std::uint8_t> prefix(std::size_t count) {
    if (count > kDigitBudget) throw Error("DigitBudgetExceeded", "requested more pi digits than the budget");
    std::lock_guard lock(mutex_);
    if (count > digits_.size()) grow(count);
    return {digits_.begin(), digits_.begin() + static_cast<std::ptrdiff_t>(count)};
  }

 private:
  PiBase4() = default;

  void grow(std::size_t needed) {
    std::size_t target = digits_.empty() ? std::size_t{1} << 16 : digits_.size() * 2;
    while (target < needed) target *= 2;
    if (target > kDigitBudget) target = kDigitBudget;

    // Two bits per digit plus guard bits for the integer part and rounding.
    const mpfr_prec_t bits = static_cast<mpfr_prec_t>(2 * target + 64);
    mpfr_t pi;
    mpfr_init2(pi, bits);
    mpfr_const_pi(pi, MPFR_RNDZ);
    mpz_t z;
    mpz_init(z);
    // pi * 2^(2*target) truncated: its low 2*target bits are the fraction.
    mpfr_mul_2ui(pi, pi, static_cast<unsigned long>(2 * target), MPFR_RNDZ);
    mpfr_get_z(z, pi, MPFR_RNDZ);
    digits_.assign(target, 0);
    for (std::size_t k = 0; k < target; ++k) {
      const std::size_t low_bit = 2 * (target - 1 - k);
      digits_[k] = static_cast<std::uint8_t>((mpz_tstbit(z, low_bit + 1) << 1) | mpz_tstbit(z, low_bit));
    }
    mpz_clear(z);
    mpfr_clear(pi);
  }

  std::mutex mutex_;
  std::vector<std::uint8_t> digits_;
};

inline std::uint8_t pi_base4_digit(std::size_t i) { return PiBase4::instance().digit(i); }

}  // namespace plankit
