// modulation.cpp
#include "gmud/modulation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>

#include "gmud/errors.hpp"

namespace gmud {

namespace {

const double kQpskScale = 1.0 / std::sqrt(2.0);
const double kQamScale = 1.0 / std::sqrt(10.0);

// Gray pair (msb, lsb) -> amplitude level.
double qam_level(std::uint8_t msb, std::uint8_t lsb) {
    static constexpr std::array<double, 4> kLevels{-3.0, -1.0, 3.0, 1.0}; // 00, 01, 10, 11
    return kLevels[static_cast<std::size_t>((msb << 1) | lsb)];
}

void qam_slice(double x, std::uint8_t& msb, std::uint8_t& lsb) {
    const double t = kQamScale * 2.0;
    if (x < -t) {
        msb = 0, lsb = 0;
    } else if (x < 0.0) {
        msb = 0, lsb = 1;
    } else if (x < t) {
        msb = 1, lsb = 1;
    } else {
        msb = 1, lsb = 0;
    }
}

void check_bits(std::span<const std::uint8_t> bits) {
    for (auto b : bits) {
        if (b > 1) {
            throw FormatError("bits must be 0 or 1");
        }
    }
}

} // namespace

std::string_view modulation_name(Modulation mod) { return mod == Modulation::Qpsk ? "qpsk" : "16qam"; }

Modulation parse_modulation(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "qpsk") {
        return Modulation::Qpsk;
    }
    if (lower == "16qam" || lower == "qam16") {
        return Modulation::Qam16;
    }
    throw FormatError("unknown modulation '" + std::string(name) + "'");
}

int bits_per_symbol(Modulation mod) { return mod == Modulation::Qpsk ? 2 : 4; }

std::complex<double> map_symbol(std::span<const std::uint8_t> bits, Modulation mod) {
    if (bits.size() != static_cast<std::size_t>(bits_per_symbol(mod))) {
        throw FormatError("map_symbol: wrong number of bits");
    }
    check_bits(bits);
    if (mod == Modulation::Qpsk) {
        return {kQpskScale * (1.0 - 2.0 * bits[0]), kQpskScale * (1.0 - 2.0 * bits[1])};
    }
    return {kQamScale * qam_level(bits[0], bits[1]), kQamScale * qam_level(bits[2], bits[3])};
}

void slice_symbol(std::complex<double> z, Modulation mod, std::span<std::uint8_t> out) {
    if (out.size() != static_cast<std::size_t>(bits_per_symbol(mod))) {
        throw FormatError("slice_symbol: wrong output size");
    }
    if (mod == Modulation::Qpsk) {
        out[0] = z.real() < 0.0 ? 1 : 0;
        out[1] = z.imag() < 0.0 ? 1 : 0;
        return;
    }
    qam_slice(z.real(), out[0], out[1]);
    qam_slice(z.imag(), out[2], out[3]);
}

std::vector<std::complex<double>> modulate(std::span<const std::uint8_t> bits, Modulation mod) {
    const auto bps = static_cast<std::size_t>(bits_per_symbol(mod));
    if (bits.size() % bps != 0) {
        throw FormatError("modulate: " + std::to_string(bits.size()) + " bits is not a multiple of " +
                          std::to_string(bps));
    }
    std::vector<std::complex<double>> out;
    out.reserve(bits.size() / bps);
    for (std::size_t i = 0; i < bits.size(); i += bps) {
        out.push_back(map_symbol(bits.subspan(i, bps), mod));
    }
    return out;
}

std::vector<std::uint8_t> demodulate(std::span<const std::complex<double>> symbols, Modulation mod) {
    const auto bps = static_cast<std::size_t>(bits_per_symbol(mod));
    std::vector<std::uint8_t> out(symbols.size() * bps);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        slice_symbol(symbols[i], mod, std::span(out).subspan(i * bps, bps));
    }
    return out;
}

std::vector<std::complex<double>> constellation(Modulation mod) {
    const int bps = bits_per_symbol(mod);
    std::vector<std::complex<double>> points;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(bps));
    for (int value = 0; value < (1 << bps); ++value) {
        for (int b = 0; b < bps; ++b) {
            bits[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((value >> (bps - 1 - b)) & 1);
        }
        points.push_back(map_symbol(bits, mod));
    }
    return points;
}

} // namespace gmud
