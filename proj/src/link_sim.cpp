// link_sim.cpp
#include "gmud/link_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "gmud/errors.hpp"

namespace gmud {

namespace {

std::complex<double> complex_gaussian(Rng& rng, double variance) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

void draw_bits(Rng& rng, std::span<std::uint8_t> out) {
    std::uint64_t word = 0;
    int left = 0;
    for (auto& b : out) {
        if (left == 0) {
            word = rng();
            left = 64;
        }
        b = static_cast<std::uint8_t>(word >> 63);
        word <<= 1;
        --left;
    }
}

EigenFeedback transmitter_view(const SvdFactorization<double>& svd, const FeedbackMode& mode) {
    if (mode.perfect()) {
        return {svd.lambda1, svd.lambda2, svd.v.col(0)};
    }
    const auto msg = quantize_message(GmudReport{svd.v.col(0), svd.lambda1, svd.lambda2}, {*mode.n});
    const auto& g = std::get<GmudReport>(msg);
    return {g.lambda1, g.lambda2, g.v1};
}

MatrixXcd reported_channel(const Matrix2cd& h, Scheme scheme, const FeedbackMode& mode, FixedRowPolicy policy) {
    if (mode.perfect()) {
        if (scheme == Scheme::RegInvFixed) {
            return h.row(fixed_row_index(h, policy));
        }
        return h;
    }
    return reported_rows(quantize_message(describe_channel(h, scheme, policy), {*mode.n}));
}

} // namespace

std::string_view gmud_receiver_name(GmudReceiver receiver) {
    return receiver == GmudReceiver::PrincipalRow ? "principal-row" : "matched-filter";
}

GmudReceiver parse_gmud_receiver(std::string_view name) {
    if (name == "principal-row") {
        return GmudReceiver::PrincipalRow;
    }
    if (name == "matched-filter") {
        return GmudReceiver::MatchedFilter;
    }
    throw FormatError("unknown GMUD receiver '" + std::string(name) + "'");
}

std::string FeedbackMode::label() const { return n ? std::to_string(12 * *n) : std::string("perfect"); }

FeedbackMode parse_feedback_mode(std::string_view text) {
    if (text == "perfect") {
        return {};
    }
    unsigned value = 0;
    if (text.empty()) {
        throw FormatError("empty feedback mode");
    }
    for (char c : text) {
        if (c < '0' || c > '9' || value > 1000) {
            throw FormatError("feedback must be 'perfect' or a positive integer N, got '" + std::string(text) + "'");
        }
        value = value * 10 + static_cast<unsigned>(c - '0');
    }
    if (value == 0) {
        throw FormatError("feedback N must be positive");
    }
    return FeedbackMode{value};
}

void validate(const SimConfig& config) {
    if (config.realizations < 1) {
        throw DomainError("realizations must be at least 1");
    }
    if (config.symbols < 1) {
        throw DomainError("symbols per realization must be at least 1");
    }
    if (config.snr_db.empty()) {
        throw DomainError("SNR list must not be empty");
    }
    if (config.grid.n_r < 1 || config.grid.n_theta < 1 || config.grid.n_power < 1) {
        throw DomainError("grid sizes must be at least 1");
    }
    if (config.feedback.n) {
        field_layout(config.scheme, {*config.feedback.n});
    }
}

double noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

ChannelSet gen_channels(Rng& rng) {
    ChannelSet set;
    for (int k = 0; k < kUsers; ++k) {
        auto& h = set.h[static_cast<std::size_t>(k)];
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                h(i, j) = complex_gaussian(rng, 1.0);
            }
        }
        set.svd[static_cast<std::size_t>(k)] = svd2x2(h);
    }
    return set;
}

Rng realization_rng(std::uint64_t seed, std::size_t snr_index, std::size_t realization) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(snr_index), static_cast<std::uint32_t>(realization)};
    return Rng(seq);
}

TransmitResult transmit(const MatrixXcd& g, const Vector2cd& u) {
    if (g.cols() != u.size() || g.rows() != 2) {
        throw DimensionError("transmit: precoder must be 2 x K with K matching the symbol vector");
    }
    const Vector2cd gu = g * u;
    const double gamma = gu.squaredNorm();
    if (!(gamma > 0.0)) {
        throw DomainError("transmit: G u is the zero vector");
    }
    return {gu / std::sqrt(gamma), gamma};
}

PrecodingMatrix build_precoder(const SimConfig& config, const ChannelSet& channels, double noise_var) {
    switch (config.scheme) {
    case Scheme::Gmud: {
        const auto fb0 = transmitter_view(channels.svd[0], config.feedback);
        const auto fb1 = transmitter_view(channels.svd[1], config.feedback);
        return optimize_gmud(fb0, fb1, noise_var, config.grid).precoder;
    }
    case Scheme::RegInvSelection: {
        const std::array<MatrixXcd, kUsers> reported{
            reported_channel(channels.h[0], Scheme::RegInvSelection, config.feedback, config.fixed_row),
            reported_channel(channels.h[1], Scheme::RegInvSelection, config.feedback, config.fixed_row)};
        return antenna_selection(reported, noise_var).precoder;
    }
    case Scheme::RegInvFixed: {
        MatrixXcd h_tilde(kUsers, 2);
        std::vector<int> antennas;
        for (std::size_t k = 0; k < kUsers; ++k) {
            h_tilde.row(static_cast<Eigen::Index>(k)) =
                reported_channel(channels.h[k], Scheme::RegInvFixed, config.feedback, config.fixed_row);
            antennas.push_back(fixed_row_index(channels.h[k], config.fixed_row));
        }
        PrecodingMatrix precoder = reg_inv(h_tilde, noise_var);
        precoder.antennas = std::move(antennas);
        return precoder;
    }
    }
    throw DomainError("unknown scheme");
}

Vector2cd gmud_combiner(const Matrix2cd& h, const Vector2cd& beam, GmudReceiver receiver) {
    if (receiver == GmudReceiver::PrincipalRow) {
        try {
            return mat_inv(Matrix2cd(h.adjoint())) * beam;
        } catch (const SingularMatrixError&) {
            // no principal row to project on; fall through to the matched filter
        }
    }
    return h * beam;
}

std::array<std::complex<double>, kUsers> receive_detect(const PrecodingMatrix& precoder, const ChannelSet& channels,
                                                        const Vector2cd& x, double gamma, double noise_var, Rng& rng,
                                                        GmudReceiver receiver) {
    std::array<Vector2cd, kUsers> y;
    for (std::size_t k = 0; k < kUsers; ++k) {
        y[k] = channels.h[k] * x;
        for (Eigen::Index a = 0; a < 2; ++a) {
            y[k](a) += complex_gaussian(rng, noise_var);
        }
    }

    const double inv_sqrt_gamma = 1.0 / std::sqrt(gamma);
    std::array<std::complex<double>, kUsers> z{};
    for (std::size_t k = 0; k < kUsers; ++k) {
        const auto col = precoder.g.col(static_cast<Eigen::Index>(k));
        if (precoder.scheme == Scheme::Gmud) {
            const Vector2cd w = gmud_combiner(channels.h[k], col, receiver);
            const std::complex<double> gain = w.dot(channels.h[k] * col) * inv_sqrt_gamma;
            z[k] = w.dot(y[k]) / gain;
        } else {
            const int a = precoder.antennas.at(k);
            const std::complex<double> gain = (channels.h[k].row(a) * col).value() * inv_sqrt_gamma;
            z[k] = y[k](a) / gain;
        }
    }
    return z;
}

std::uint64_t simulate_realization(const SimConfig& config, double snr_db, Rng& rng) {
    const double noise_var = noise_variance(snr_db);
    const ChannelSet channels = gen_channels(rng);
    const PrecodingMatrix precoder = build_precoder(config, channels, noise_var);

    const auto bps = static_cast<std::size_t>(bits_per_symbol(config.modulation));
    std::vector<std::uint8_t> sent(kUsers * bps);
    std::vector<std::uint8_t> decided(kUsers * bps);
    std::uint64_t errors = 0;
    for (int t = 0; t < config.symbols; ++t) {
        draw_bits(rng, sent);
        Vector2cd u;
        for (std::size_t k = 0; k < kUsers; ++k) {
            u(static_cast<Eigen::Index>(k)) = map_symbol(std::span(sent).subspan(k * bps, bps), config.modulation);
        }
        // Colinear beams (e.g. two users with identical coarse reports) can
        // cancel a symbol pair exactly; that channel use then carries no power.
        TransmitResult tx{Vector2cd::Zero(), 1.0};
        if ((precoder.g * u).squaredNorm() > 0.0) {
            tx = transmit(precoder.g, u);
        }
        const auto z = receive_detect(precoder, channels, tx.x, tx.gamma, noise_var, rng, config.gmud_receiver);
        for (std::size_t k = 0; k < kUsers; ++k) {
            slice_symbol(z[k], config.modulation, std::span(decided).subspan(k * bps, bps));
        }
        for (std::size_t i = 0; i < sent.size(); ++i) {
            errors += sent[i] != decided[i] ? 1U : 0U;
        }
    }
    return errors;
}

BerCurve run_ber(const SimConfig& config, const RunOptions& options) {
    validate(config);
    const std::size_t n_snr = config.snr_db.size();
    const auto n_real = static_cast<std::size_t>(config.realizations);
    const std::size_t tasks = n_snr * n_real;
    std::vector<std::uint64_t> errors(tasks, 0);

    unsigned threads = options.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : options.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t task = next++; task < tasks; task = next++) {
            const std::size_t s = task / n_real;
            const std::size_t i = task % n_real;
            try {
                Rng rng = realization_rng(config.seed, s, i);
                errors[task] = simulate_realization(config, config.snr_db[s], rng);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = tasks;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    BerCurve curve{config.scheme, config.modulation, config.feedback, {}};
    const std::uint64_t bits_per_real =
        static_cast<std::uint64_t>(config.symbols) * kUsers * static_cast<std::uint64_t>(bits_per_symbol(config.modulation));
    for (std::size_t s = 0; s < n_snr; ++s) {
        BerPoint point;
        point.snr_db = config.snr_db[s];
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < n_real; ++i) {
            const std::uint64_t e = errors[s * n_real + i];
            point.errors += e;
            const double b = static_cast<double>(e) / static_cast<double>(bits_per_real);
            sum_sq += b * b;
        }
        point.bits = bits_per_real * n_real;
        point.ber = static_cast<double>(point.errors) / static_cast<double>(point.bits);
        const double n = static_cast<double>(n_real);
        const double variance = n > 1 ? std::max(0.0, (sum_sq - n * point.ber * point.ber) / (n - 1)) : 0.0;
        point.std_error = std::sqrt(variance / n);
        curve.points.push_back(point);
    }
    return curve;
}

BerPoint run_awgn_reference(Modulation mod, double snr_db, std::uint64_t symbols, std::uint64_t seed) {
    Rng rng = realization_rng(seed, 0, 0);
    const double noise_var = noise_variance(snr_db);
    const auto bps = static_cast<std::size_t>(bits_per_symbol(mod));
    std::vector<std::uint8_t> sent(bps);
    std::vector<std::uint8_t> decided(bps);
    BerPoint point;
    point.snr_db = snr_db;
    for (std::uint64_t t = 0; t < symbols; ++t) {
        draw_bits(rng, sent);
        const auto y = map_symbol(sent, mod) + complex_gaussian(rng, noise_var);
        slice_symbol(y, mod, decided);
        for (std::size_t i = 0; i < bps; ++i) {
            point.errors += sent[i] != decided[i] ? 1U : 0U;
        }
    }
    point.bits = symbols * bps;
    point.ber = static_cast<double>(point.errors) / static_cast<double>(point.bits);
    point.std_error = std::sqrt(point.ber * (1.0 - point.ber) / static_cast<double>(point.bits));
    return point;
}

} // namespace gmud
