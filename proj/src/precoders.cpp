// precoders.cpp
#include "gmud/precoders.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gmud/decomposition.hpp"
#include "gmud/errors.hpp"

namespace gmud {

std::string_view scheme_name(Scheme scheme) {
    switch (scheme) {
    case Scheme::RegInvFixed:
        return "reg-inv-fixed";
    case Scheme::RegInvSelection:
        return "reg-inv-selection";
    case Scheme::Gmud:
        return "gmud";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "reg-inv" || name == "reg-inv-fixed") {
        return Scheme::RegInvFixed;
    }
    if (name == "reg-inv-sel" || name == "reg-inv-selection") {
        return Scheme::RegInvSelection;
    }
    if (name == "gmud") {
        return Scheme::Gmud;
    }
    throw FormatError("unknown scheme '" + std::string(name) + "'");
}

double saturating_sinr(double signal, double interference_plus_noise) {
    if (!(signal > 0.0)) {
        return 0.0;
    }
    if (interference_plus_noise * kSinrCeiling <= signal) {
        return kSinrCeiling;
    }
    return signal / interference_plus_noise;
}

EigenFeedback eigen_feedback(const Matrix2cd& h) {
    const auto svd = svd2x2(h);
    return {svd.lambda1, svd.lambda2, svd.v.col(0)};
}

PrecodingMatrix reg_inv(const MatrixXcd& h_tilde, double noise_var) {
    if (!(noise_var >= 0.0)) {
        throw DomainError("reg_inv: noise variance must be nonnegative");
    }
    const auto users = h_tilde.rows();
    const MatrixXcd gram = h_tilde * h_tilde.adjoint() +
                           static_cast<double>(users) * noise_var * MatrixXcd::Identity(users, users);
    PrecodingMatrix out;
    out.g = mat_mul(h_tilde.adjoint(), mat_inv(gram));
    out.scheme = Scheme::RegInvFixed;
    return out;
}

SinrReport reg_inv_sinr(const MatrixXcd& h_tilde, const MatrixXcd& g, double noise_var) {
    const MatrixXcd effective = mat_mul(h_tilde, g);
    SinrReport report;
    report.gamma_bar = g.squaredNorm();
    const double noise = report.gamma_bar * noise_var;
    report.per_user.resize(static_cast<std::size_t>(effective.rows()));
    for (Eigen::Index m = 0; m < effective.rows(); ++m) {
        double interference = 0.0;
        for (Eigen::Index n = 0; n < effective.cols(); ++n) {
            if (n != m) {
                interference += std::norm(effective(m, n));
            }
        }
        report.per_user[static_cast<std::size_t>(m)] = saturating_sinr(std::norm(effective(m, m)), interference + noise);
    }
    report.min_sinr = *std::min_element(report.per_user.begin(), report.per_user.end());
    return report;
}

std::size_t combination_count(std::span<const MatrixXcd> channels) {
    if (channels.empty()) {
        throw DimensionError("antenna selection needs at least one user");
    }
    const auto antennas = static_cast<std::size_t>(channels.front().rows());
    std::size_t count = 1;
    for (const auto& h : channels) {
        if (static_cast<std::size_t>(h.rows()) != antennas || h.cols() != channels.front().cols()) {
            throw DimensionError("all users must share the same channel shape");
        }
        count *= antennas;
    }
    return count;
}

std::vector<int> combination_antennas(std::span<const MatrixXcd> channels, std::size_t index) {
    const auto base = static_cast<std::size_t>(channels.front().rows());
    std::vector<int> antennas(channels.size());
    for (std::size_t k = channels.size(); k-- > 0;) {
        antennas[k] = static_cast<int>(index % base);
        index /= base;
    }
    return antennas;
}

MatrixXcd stack_rows(std::span<const MatrixXcd> channels, std::span<const int> antennas) {
    if (channels.size() != antennas.size()) {
        throw DimensionError("stack_rows: one antenna per user required");
    }
    MatrixXcd out(static_cast<Eigen::Index>(channels.size()), channels.front().cols());
    for (std::size_t k = 0; k < channels.size(); ++k) {
        const auto row = antennas[k];
        if (row < 0 || row >= channels[k].rows()) {
            throw DimensionError("stack_rows: antenna index out of range");
        }
        out.row(static_cast<Eigen::Index>(k)) = channels[k].row(row);
    }
    return out;
}

AntennaSelection antenna_selection(std::span<const MatrixXcd> channels, double noise_var) {
    const std::size_t count = combination_count(channels);
    std::optional<AntennaSelection> best;
    for (std::size_t idx = 0; idx < count; ++idx) {
        auto antennas = combination_antennas(channels, idx);
        const MatrixXcd h_hat = stack_rows(channels, antennas);
        PrecodingMatrix precoder = reg_inv(h_hat, noise_var);
        SinrReport sinr = reg_inv_sinr(h_hat, precoder.g, noise_var);
        if (!best || sinr.min_sinr > best->sinr.min_sinr) {
            precoder.scheme = Scheme::RegInvSelection;
            precoder.antennas = antennas;
            best = AntennaSelection{std::move(antennas), idx, std::move(precoder), std::move(sinr)};
        }
    }
    return *best;
}

double gmud_min_sinr_from_overlap(double r_k, double r_l, double overlap, double alpha2, double beta2,
                                  double noise_var, double* sinr_k, double* sinr_l) {
    const double noise = noise_var * (alpha2 + beta2);
    const double rk2 = r_k * r_k;
    const double rl2 = r_l * r_l;
    const double k = saturating_sinr(alpha2 * rk2, beta2 * rk2 * overlap + noise);
    const double l = saturating_sinr(beta2 * rl2, alpha2 * rl2 * overlap + noise);
    if (sinr_k != nullptr) {
        *sinr_k = k;
    }
    if (sinr_l != nullptr) {
        *sinr_l = l;
    }
    return std::min(k, l);
}

namespace {

Vector2cd beam(const EigenFeedback& fb, double r, double theta) {
    return beam_from_feedback(fb.lambda1, fb.lambda2, fb.v1, r, theta);
}

SinrReport make_report(double k, double l, double alpha2, double beta2) {
    SinrReport report;
    report.per_user = {k, l};
    report.min_sinr = std::min(k, l);
    report.gamma_bar = alpha2 + beta2;
    return report;
}

struct PowerSplit {
    double alpha;
    double beta;
    double alpha2;
    double beta2;
};

PowerSplit power_split(double alpha_squared) {
    const double a2 = std::clamp(alpha_squared, 0.0, 1.0);
    PowerSplit split{};
    split.alpha = std::sqrt(a2);
    split.beta = std::sqrt(1.0 - a2);
    split.alpha2 = split.alpha * split.alpha;
    split.beta2 = split.beta * split.beta;
    return split;
}

} // namespace

SinrReport gmud_min_sinr(const GmudBeamParams& params, const EigenFeedback& fb_k, const EigenFeedback& fb_l,
                         double noise_var) {
    const Vector2cd q_k = beam(fb_k, params.r[0], params.theta[0]);
    const Vector2cd q_l = beam(fb_l, params.r[1], params.theta[1]);
    const double overlap = std::norm(q_k.dot(q_l));
    const double alpha2 = params.alpha * params.alpha;
    const double beta2 = params.beta * params.beta;
    double k = 0.0;
    double l = 0.0;
    gmud_min_sinr_from_overlap(params.r[0], params.r[1], overlap, alpha2, beta2, noise_var, &k, &l);
    return make_report(k, l, alpha2, beta2);
}

std::vector<double> r_grid(const EigenFeedback& fb, int n) {
    if (n < 1) {
        throw DomainError("grid sizes must be at least 1");
    }
    if (n == 1) {
        return {fb.lambda1};
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    const double step = (fb.lambda1 - fb.lambda2) / (n - 1);
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = fb.lambda2 + i * step;
    }
    out.back() = fb.lambda1;
    return out;
}

std::vector<double> theta_grid(int n) {
    if (n < 1) {
        throw DomainError("grid sizes must be at least 1");
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        out[static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * j / n;
    }
    return out;
}

std::vector<double> power_grid(int n) {
    if (n < 1) {
        throw DomainError("grid sizes must be at least 1");
    }
    std::vector<double> out;
    if (n == 1) {
        out.push_back(0.5);
    } else {
        for (int i = 0; i < n; ++i) {
            out.push_back(0.1 + 0.8 * i / (n - 1));
        }
    }
    out.push_back(0.0);
    out.push_back(1.0);
    return out;
}

MatrixXcd gmud_precoder_matrix(const GmudBeamParams& params, const EigenFeedback& fb_k,
                               const EigenFeedback& fb_l) {
    MatrixXcd g(2, 2);
    g.col(0) = params.alpha * beam(fb_k, params.r[0], params.theta[0]);
    g.col(1) = params.beta * beam(fb_l, params.r[1], params.theta[1]);
    return g;
}

namespace {

GmudOptimum finish(const GmudBeamParams& params, const SinrReport& sinr, const EigenFeedback& fb_k,
                   const EigenFeedback& fb_l) {
    GmudOptimum out;
    out.params = params;
    out.sinr = sinr;
    out.precoder.g = gmud_precoder_matrix(params, fb_k, fb_l);
    out.precoder.scheme = Scheme::Gmud;
    out.precoder.gmud = params;
    return out;
}

// One pass over the 3^5 neighbourhood at half the grid spacing.
void refine_incumbent(GmudBeamParams& best, double& best_value, SinrReport& best_report, const EigenFeedback& fb_k,
                      const EigenFeedback& fb_l, double noise_var, const GridSpec& grid) {
    const auto half_step = [](double lo, double hi, int n) { return n > 1 ? 0.5 * (hi - lo) / (n - 1) : 0.0; };
    const double dr_k = half_step(fb_k.lambda2, fb_k.lambda1, grid.n_r);
    const double dr_l = half_step(fb_l.lambda2, fb_l.lambda1, grid.n_r);
    const double dtheta = std::numbers::pi / grid.n_theta;
    const double dpower = grid.n_power > 1 ? 0.4 / (grid.n_power - 1) : 0.2;
    const GmudBeamParams center = best;
    const double center_a2 = center.alpha * center.alpha;

    for (int ok = -1; ok <= 1; ++ok) {
        for (int ol = -1; ol <= 1; ++ol) {
            for (int tk = -1; tk <= 1; ++tk) {
                for (int tl = -1; tl <= 1; ++tl) {
                    for (int op = -1; op <= 1; ++op) {
                        GmudBeamParams cand = center;
                        cand.r[0] = std::clamp(center.r[0] + ok * dr_k, fb_k.lambda2, fb_k.lambda1);
                        cand.r[1] = std::clamp(center.r[1] + ol * dr_l, fb_l.lambda2, fb_l.lambda1);
                        cand.theta[0] = detail::wrap_phase(center.theta[0] + tk * dtheta);
                        cand.theta[1] = detail::wrap_phase(center.theta[1] + tl * dtheta);
                        const PowerSplit split = power_split(center_a2 + op * dpower);
                        cand.alpha = split.alpha;
                        cand.beta = split.beta;
                        SinrReport report = gmud_min_sinr(cand, fb_k, fb_l, noise_var);
                        if (report.min_sinr > best_value) {
                            best_value = report.min_sinr;
                            best = cand;
                            best_report = std::move(report);
                        }
                    }
                }
            }
        }
    }
}

} // namespace

GmudOptimum optimize_gmud(const EigenFeedback& fb_k, const EigenFeedback& fb_l, double noise_var,
                          const GridSpec& grid) {
    const std::vector<double> rk = r_grid(fb_k, grid.n_r);
    const std::vector<double> rl = r_grid(fb_l, grid.n_r);
    const std::vector<double> thetas = theta_grid(grid.n_theta);
    std::vector<PowerSplit> splits;
    for (double a2 : power_grid(grid.n_power)) {
        splits.push_back(power_split(a2));
    }

    const std::size_t n_theta = thetas.size();
    std::vector<Vector2cd> beams_k(rk.size() * n_theta);
    std::vector<Vector2cd> beams_l(rl.size() * n_theta);
    for (std::size_t i = 0; i < rk.size(); ++i) {
        for (std::size_t j = 0; j < n_theta; ++j) {
            beams_k[i * n_theta + j] = beam(fb_k, rk[i], thetas[j]);
            beams_l[i * n_theta + j] = beam(fb_l, rl[i], thetas[j]);
        }
    }

    double best_value = -1.0;
    std::size_t best_ik = 0, best_il = 0, best_jk = 0, best_jl = 0, best_p = 0;
    for (std::size_t ik = 0; ik < rk.size(); ++ik) {
        for (std::size_t il = 0; il < rl.size(); ++il) {
            for (std::size_t jk = 0; jk < n_theta; ++jk) {
                const Vector2cd& q_k = beams_k[ik * n_theta + jk];
                for (std::size_t jl = 0; jl < n_theta; ++jl) {
                    const double overlap = std::norm(q_k.dot(beams_l[il * n_theta + jl]));
                    for (std::size_t p = 0; p < splits.size(); ++p) {
                        const double value = gmud_min_sinr_from_overlap(rk[ik], rl[il], overlap, splits[p].alpha2,
                                                                        splits[p].beta2, noise_var);
                        if (value > best_value) {
                            best_value = value;
                            best_ik = ik;
                            best_il = il;
                            best_jk = jk;
                            best_jl = jl;
                            best_p = p;
                        }
                    }
                }
            }
        }
    }

    GmudBeamParams params;
    params.r = {rk[best_ik], rl[best_il]};
    params.theta = {thetas[best_jk], thetas[best_jl]};
    params.alpha = splits[best_p].alpha;
    params.beta = splits[best_p].beta;

    SinrReport report = gmud_min_sinr(params, fb_k, fb_l, noise_var);
    if (grid.refine) {
        double value = report.min_sinr;
        refine_incumbent(params, value, report, fb_k, fb_l, noise_var, grid);
    }
    return finish(params, report, fb_k, fb_l);
}

} // namespace gmud
