// modulation.hpp
//
// Gray-mapped QPSK and 16QAM with unit average symbol energy.
//
//   QPSK:  (b1, b0) -> ((1 - 2 b1) + j (1 - 2 b0)) / sqrt(2)
//   16QAM: (b3, b2, b1, b0) -> (I(b3 b2) + j I(b1 b0)) / sqrt(10),
//          I(00) = -3, I(01) = -1, I(11) = +1, I(10) = +3
//
// The first bit of each group is the most significant one.
#ifndef GMUD_MODULATION_HPP
#define GMUD_MODULATION_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace gmud {

enum class Modulation { Qpsk, Qam16 };

std::string_view modulation_name(Modulation mod);
/// "qpsk" or "16qam" (case-insensitive).
Modulation parse_modulation(std::string_view name);

int bits_per_symbol(Modulation mod);

/// Maps bits_per_symbol(mod) bits, first bit first.
std::complex<double> map_symbol(std::span<const std::uint8_t> bits, Modulation mod);
/// Minimum-distance decision; writes bits_per_symbol(mod) bits to out.
void slice_symbol(std::complex<double> z, Modulation mod, std::span<std::uint8_t> out);

std::vector<std::complex<double>> modulate(std::span<const std::uint8_t> bits, Modulation mod);
std::vector<std::uint8_t> demodulate(std::span<const std::complex<double>> symbols, Modulation mod);

/// Every constellation point, indexed by its bit pattern read as an integer.
std::vector<std::complex<double>> constellation(Modulation mod);

} // namespace gmud

#endif // GMUD_MODULATION_HPP
