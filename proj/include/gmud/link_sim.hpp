// link_sim.hpp
//
// Two users with two receive antennas each, served by a two-antenna base
// station. Per channel use:
//
//     x = G u / sqrt(gamma),  gamma = ||G u||^2
//     y_k = H_k x + n_k,      n_k ~ CN(0, sigma^2 I)
//
// so ||x|| = 1 and the SNR is 1 / sigma^2. The transmitter builds G only from
// what users feed back (perfect or quantized); receivers equalize with their
// true effective gain.
#ifndef GMUD_LINK_SIM_HPP
#define GMUD_LINK_SIM_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gmud/feedback.hpp"
#include "gmud/linalg.hpp"
#include "gmud/modulation.hpp"
#include "gmud/precoders.hpp"

namespace gmud {

inline constexpr int kUsers = 2;

using Rng = std::mt19937_64;

/// Perfect CSI when n is empty, otherwise 12 n quantized bits per user.
struct FeedbackMode {
    std::optional<unsigned> n;

    bool perfect() const { return !n.has_value(); }
    /// "perfect" or the total bit count 12 n.
    std::string label() const;

    friend bool operator==(const FeedbackMode&, const FeedbackMode&) = default;
};

/// "perfect" or a positive integer n.
FeedbackMode parse_feedback_mode(std::string_view text);

/// How a GMUD user combines its two receive antennas.
enum class GmudReceiver {
    /// First row of P_k^H: w = H_k^-H g_k. The output is r_k q_k^H x plus
    /// noise, so the interference is exactly the r_k^2 |q_k^H q_l|^2 term the
    /// precoder optimizes, and the second row of R is never used.
    PrincipalRow,
    /// Matched filter on h = H_k g_k.
    MatchedFilter,
};

std::string_view gmud_receiver_name(GmudReceiver receiver);
GmudReceiver parse_gmud_receiver(std::string_view name);

struct SimConfig {
    Scheme scheme = Scheme::Gmud;
    Modulation modulation = Modulation::Qpsk;
    std::vector<double> snr_db;
    FeedbackMode feedback;
    int realizations = 500;
    /// Channel uses per realization; each carries one symbol per user.
    int symbols = 100;
    std::uint64_t seed = 1;
    GridSpec grid;
    FixedRowPolicy fixed_row = FixedRowPolicy::FirstRow;
    GmudReceiver gmud_receiver = GmudReceiver::PrincipalRow;
};

void validate(const SimConfig& config);

double noise_variance(double snr_db);

struct ChannelSet {
    std::array<Matrix2cd, kUsers> h;
    std::array<SvdFactorization<double>, kUsers> svd;
};

/// Two independent 2x2 channels with i.i.d. CN(0, 1) entries, drawn row-major
/// (real part, then imaginary part), user 0 first.
ChannelSet gen_channels(Rng& rng);

/// Fresh generator for one (snr point, realization) pair.
Rng realization_rng(std::uint64_t seed, std::size_t snr_index, std::size_t realization);

struct TransmitResult {
    Vector2cd x;
    double gamma{};
};

/// Throws DomainError when G u is the zero vector.
TransmitResult transmit(const MatrixXcd& g, const Vector2cd& u);

/// Precoder the transmitter builds from the users' (possibly quantized)
/// reports of `channels`.
PrecodingMatrix build_precoder(const SimConfig& config, const ChannelSet& channels, double noise_var);

/// Receive combiner of a GMUD user whose transmit column is `beam`.
/// PrincipalRow falls back to the matched filter when H is singular.
Vector2cd gmud_combiner(const Matrix2cd& h, const Vector2cd& beam, GmudReceiver receiver);

/// Adds CN(0, sigma^2) noise on all four receive antennas (always drawn,
/// user 0 first) and returns each user's equalized observation
/// z_k = w^H y_k / (w^H H_k g_k / sqrt(gamma)) of its own symbol, where
///   reg-inv schemes: w selects the scheme's receive antenna
///   gmud:            w = gmud_combiner(H_k, g_k, receiver)
/// Receivers know their effective gain exactly.
std::array<std::complex<double>, kUsers> receive_detect(const PrecodingMatrix& precoder, const ChannelSet& channels,
                                                        const Vector2cd& x, double gamma, double noise_var, Rng& rng,
                                                        GmudReceiver receiver = GmudReceiver::PrincipalRow);

struct BerPoint {
    double snr_db{};
    double ber{};
    std::uint64_t bits{};
    std::uint64_t errors{};
    /// Standard error of the BER estimate from the spread of per-realization BERs.
    double std_error{};
};

struct BerCurve {
    Scheme scheme{};
    Modulation modulation{};
    FeedbackMode feedback;
    std::vector<BerPoint> points;
};

struct RunOptions {
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 1;
};

/// Monte Carlo BER sweep. The result depends only on the config: every
/// realization owns a generator derived from (seed, snr index, realization).
BerCurve run_ber(const SimConfig& config, const RunOptions& options = {});

/// Bit errors of one realization: channels, feedback, precoder, then
/// config.symbols channel uses.
std::uint64_t simulate_realization(const SimConfig& config, double snr_db, Rng& rng);

/// Single-user reference: symbols through y = s + n with n ~ CN(0, sigma^2).
BerPoint run_awgn_reference(Modulation mod, double snr_db, std::uint64_t symbols, std::uint64_t seed);

} // namespace gmud

#endif // GMUD_LINK_SIM_HPP
