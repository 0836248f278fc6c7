// precoders.hpp
//
// Transmit strategies for two users sharing a two-antenna base station:
// regularized channel inversion on a fixed receive antenna, the same with
// max-min-SINR receive-antenna selection, and GMUD beam steering driven by
// each user's (lambda1, lambda2, v1) report.
#ifndef GMUD_PRECODERS_HPP
#define GMUD_PRECODERS_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmud/linalg.hpp"

namespace gmud {

enum class Scheme { RegInvFixed, RegInvSelection, Gmud };

std::string_view scheme_name(Scheme scheme);
/// Accepts the canonical names plus the short aliases "reg-inv" and "reg-inv-sel".
Scheme parse_scheme(std::string_view name);

/// SINRs above this are reported as this value, so max-min comparisons stay
/// total when the interference-plus-noise term vanishes.
inline constexpr double kSinrCeiling = 1e12;

double saturating_sinr(double signal, double interference_plus_noise);

/// What the transmitter knows about one user under GMUD feedback.
struct EigenFeedback {
    double lambda1{};
    double lambda2{};
    Vector2cd v1 = Vector2cd(1.0, 0.0);
};

EigenFeedback eigen_feedback(const Matrix2cd& h);

struct GmudBeamParams {
    std::array<double, 2> r{};
    std::array<double, 2> theta{};
    double alpha{};
    double beta{};
};

struct SinrReport {
    std::vector<double> per_user;
    double min_sinr{};
    /// Expected normalization E||G u||^2 for unit-energy symbols.
    double gamma_bar{};
};

struct PrecodingMatrix {
    MatrixXcd g; // N_T x K
    Scheme scheme{Scheme::RegInvFixed};
    /// Receive antenna each user listens on (reg-inv schemes).
    std::vector<int> antennas;
    std::optional<GmudBeamParams> gmud;
};

/// G = H^H (H H^H + K sigma^2 I)^-1, unnormalized.
PrecodingMatrix reg_inv(const MatrixXcd& h_tilde, double noise_var);

/// Per-user SINR of a regularized-inverse precoder: with E = H G,
/// |E_mm|^2 / (sum_{n != m} |E_mn|^2 + gamma_bar sigma^2).
SinrReport reg_inv_sinr(const MatrixXcd& h_tilde, const MatrixXcd& g, double noise_var);

struct AntennaSelection {
    std::vector<int> antennas;
    std::size_t combination{};
    PrecodingMatrix precoder;
    SinrReport sinr;
};

/// Number of receive-antenna combinations, N_R^K.
std::size_t combination_count(std::span<const MatrixXcd> channels);

/// Antenna index of each user for combination `index`; user 0 is the most
/// significant digit in base N_R.
std::vector<int> combination_antennas(std::span<const MatrixXcd> channels, std::size_t index);

/// Stacks row antennas[k] of channels[k].
MatrixXcd stack_rows(std::span<const MatrixXcd> channels, std::span<const int> antennas);

/// Evaluates every combination and keeps the max-min-SINR one (first index
/// wins ties).
AntennaSelection antenna_selection(std::span<const MatrixXcd> channels, double noise_var);

double gmud_min_sinr_from_overlap(double r_k, double r_l, double overlap, double alpha2, double beta2,
                                  double noise_var, double* sinr_k = nullptr, double* sinr_l = nullptr);

/// Max-min cost of the loaded GMUD beams: for user k
///     alpha^2 r_k^2 / (beta^2 r_k^2 |q_k^H q_l|^2 + sigma^2 gamma_bar)
/// and symmetrically for l, with gamma_bar = alpha^2 + beta^2.
SinrReport gmud_min_sinr(const GmudBeamParams& params, const EigenFeedback& fb_k, const EigenFeedback& fb_l,
                         double noise_var);

struct GridSpec {
    int n_r = 8;
    int n_theta = 16;
    int n_power = 9;
    bool refine = false;
};

/// r values: n points uniform on [lambda2, lambda1] (just lambda1 when n == 1).
std::vector<double> r_grid(const EigenFeedback& fb, int n);
/// theta values: j * 2 pi / n.
std::vector<double> theta_grid(int n);
/// alpha^2 values: n points uniform on [0.1, 0.9] (0.5 when n == 1), followed
/// by the endpoints 0 and 1.
std::vector<double> power_grid(int n);

/// Matrix whose columns are the two loaded unit beams.
MatrixXcd gmud_precoder_matrix(const GmudBeamParams& params, const EigenFeedback& fb_k,
                               const EigenFeedback& fb_l);

struct GmudOptimum {
    PrecodingMatrix precoder;
    GmudBeamParams params;
    SinrReport sinr;
};

/// Exhaustive max-min search over (r_k, r_l, theta_k, theta_l, alpha^2) in
/// that lexicographic order; the first grid point reaching the maximum wins.
GmudOptimum optimize_gmud(const EigenFeedback& fb_k, const EigenFeedback& fb_l, double noise_var,
                          const GridSpec& grid = {});

} // namespace gmud

#endif // GMUD_PRECODERS_HPP
