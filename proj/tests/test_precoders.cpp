#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "gmud/decomposition.hpp"
#include "gmud/errors.hpp"
#include "gmud/precoders.hpp"
#include "test_util.hpp"

using namespace gmud;
using cd = std::complex<double>;

namespace {

// Max-min score of one receive-antenna combination, computed with Eigen's own
// inverse rather than the library's.
double selection_score(const std::array<MatrixXcd, 2>& ch, int a0, int a1, double noise_var) {
    MatrixXcd h(2, 2);
    h.row(0) = ch[0].row(a0);
    h.row(1) = ch[1].row(a1);
    const MatrixXcd g = h.adjoint() * (h * h.adjoint() + 2.0 * noise_var * MatrixXcd::Identity(2, 2)).inverse();
    const MatrixXcd e = h * g;
    double gamma_bar = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            gamma_bar += std::norm(g(i, j));
        }
    }
    const double s0 = std::norm(e(0, 0)) / (std::norm(e(0, 1)) + gamma_bar * noise_var);
    const double s1 = std::norm(e(1, 1)) / (std::norm(e(1, 0)) + gamma_bar * noise_var);
    return std::min(s0, s1);
}

// Beam written out from the rotation formulas.
Vector2cd oracle_beam(const EigenFeedback& fb, double r, double theta) {
    const double l1 = fb.lambda1, l2 = fb.lambda2;
    double c = 1.0, s = 0.0;
    if (l1 - l2 > 1e-12 * l1) {
        const double a = std::sqrt((r * r - l2 * l2) / (l1 * l1 - l2 * l2));
        const double b = std::sqrt((l1 * l1 - r * r) / (l1 * l1 - l2 * l2));
        c = l1 / r * a;
        s = l2 / r * b;
    }
    const Vector2cd v2(-std::conj(fb.v1(1)), std::conj(fb.v1(0)));
    return std::exp(cd(0.0, theta)) * c * fb.v1 - s * v2;
}

EigenFeedback random_feedback(std::mt19937_64& rng) { return eigen_feedback(test::random_2x2(rng)); }

} // namespace

TEST(SchemeNames, RoundTrip) {
    for (Scheme s : {Scheme::RegInvFixed, Scheme::RegInvSelection, Scheme::Gmud}) {
        EXPECT_EQ(parse_scheme(scheme_name(s)), s);
    }
    EXPECT_EQ(parse_scheme("reg-inv"), Scheme::RegInvFixed);
    EXPECT_EQ(parse_scheme("reg-inv-sel"), Scheme::RegInvSelection);
    EXPECT_THROW(parse_scheme("svd"), FormatError);
}

TEST(RegInv, IdentityChannel) {
    const auto zf = reg_inv(MatrixXcd::Identity(2, 2), 0.0);
    EXPECT_LT((zf.g - MatrixXcd::Identity(2, 2)).norm(), 1e-15);
    const auto mmse = reg_inv(MatrixXcd::Identity(2, 2), 0.1);
    EXPECT_LT((mmse.g - MatrixXcd::Identity(2, 2) / 1.2).norm(), 1e-15);
    EXPECT_NEAR(mmse.g(0, 0).real(), 0.83333, 1e-5);
}

TEST(RegInv, ZeroForcingResidual) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 500; ++i) {
        const MatrixXcd h = test::random_matrix(rng, 2, 2);
        const auto p = reg_inv(h, 0.0);
        const MatrixXcd e = h * p.g;
        if (p.g.norm() * h.norm() > 1e6) {
            continue;
        }
        ASSERT_LE((e - MatrixXcd::Identity(2, 2)).norm(), 1e-9);
    }
}

TEST(RegInv, SingularWithoutRegularization) {
    MatrixXcd h(2, 2);
    h << 1.0, 1.0, 1.0, 1.0;
    EXPECT_THROW(reg_inv(h, 0.0), SingularMatrixError);
    EXPECT_NO_THROW(reg_inv(h, 0.1));
}

TEST(RegInvSinr, MatchesDirectExpression) {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 100; ++i) {
        const MatrixXcd h = test::random_matrix(rng, 2, 2);
        const double nv = 0.05;
        const auto p = reg_inv(h, nv);
        const auto report = reg_inv_sinr(h, p.g, nv);
        const MatrixXcd e = h * p.g;
        const double gb = p.g.squaredNorm();
        ASSERT_NEAR(report.gamma_bar, gb, 1e-12 * gb);
        ASSERT_NEAR(report.per_user[0], std::norm(e(0, 0)) / (std::norm(e(0, 1)) + gb * nv), 1e-9 * report.per_user[0]);
        ASSERT_NEAR(report.per_user[1], std::norm(e(1, 1)) / (std::norm(e(1, 0)) + gb * nv), 1e-9 * report.per_user[1]);
        ASSERT_EQ(report.min_sinr, std::min(report.per_user[0], report.per_user[1]));
    }
}

TEST(AntennaSelection, Combinations) {
    std::array<MatrixXcd, 2> ch{MatrixXcd::Zero(2, 2), MatrixXcd::Zero(2, 2)};
    EXPECT_EQ(combination_count(ch), 4u);
    EXPECT_EQ(combination_antennas(ch, 0), (std::vector<int>{0, 0}));
    EXPECT_EQ(combination_antennas(ch, 1), (std::vector<int>{0, 1}));
    EXPECT_EQ(combination_antennas(ch, 2), (std::vector<int>{1, 0}));
    EXPECT_EQ(combination_antennas(ch, 3), (std::vector<int>{1, 1}));
}

TEST(AntennaSelection, SingleReceiveAntenna) {
    std::mt19937_64 rng(33);
    std::array<MatrixXcd, 2> ch{test::random_matrix(rng, 1, 2), test::random_matrix(rng, 1, 2)};
    const auto sel = antenna_selection(ch, 0.1);
    EXPECT_EQ(sel.combination, 0u);
    EXPECT_EQ(sel.antennas, (std::vector<int>{0, 0}));
}

TEST(AntennaSelection, PicksOrthogonalRows) {
    std::array<MatrixXcd, 2> ch{MatrixXcd(2, 2), MatrixXcd(2, 2)};
    ch[0] << 0.7, 0.7, 1.0, 0.0;
    ch[1] << 0.0, 1.0, 0.7, 0.71;
    const auto sel = antenna_selection(ch, 0.01);
    EXPECT_EQ(sel.antennas, (std::vector<int>{1, 0}));
}

TEST(AntennaSelection, MatchesBruteForce) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 1000; ++trial) {
        std::array<MatrixXcd, 2> ch{test::random_matrix(rng, 2, 2), test::random_matrix(rng, 2, 2)};
        const double nv = std::pow(10.0, -(trial % 30) / 10.0);
        std::size_t best = 0;
        double best_score = -1.0;
        for (std::size_t idx = 0; idx < 4; ++idx) {
            const double score = selection_score(ch, static_cast<int>(idx / 2), static_cast<int>(idx % 2), nv);
            if (score > best_score) {
                best_score = score;
                best = idx;
            }
        }
        const auto sel = antenna_selection(ch, nv);
        ASSERT_EQ(sel.combination, best) << "trial " << trial;
        ASSERT_NEAR(sel.sinr.min_sinr, best_score, 1e-8 * best_score);
    }
}

TEST(GmudMinSinr, OrthogonalBeams) {
    const EigenFeedback k{2.0, 1.0, Vector2cd(1.0, 0.0)};
    const EigenFeedback l{1.5, 0.5, Vector2cd(0.0, 1.0)};
    GmudBeamParams p;
    p.r = {2.0, 1.5};
    p.theta = {0.4, 1.3};
    p.alpha = p.beta = std::sqrt(0.5);
    const double nv = 0.01;
    const auto report = gmud_min_sinr(p, k, l, nv);
    EXPECT_NEAR(report.per_user[0], 4.0 / (2.0 * nv), 1e-9);
    EXPECT_NEAR(report.per_user[1], 2.25 / (2.0 * nv), 1e-9);
    EXPECT_NEAR(report.gamma_bar, 1.0, 1e-15);

    EXPECT_EQ(gmud_min_sinr(p, k, l, 0.0).min_sinr, kSinrCeiling);
}

TEST(GmudMinSinr, IdenticalBeamsAreInterferenceLimited) {
    const EigenFeedback fb{2.0, 1.0, Vector2cd(0.6, cd(0.0, 0.8))};
    GmudBeamParams p;
    p.r = {2.0, 2.0};
    p.theta = {0.0, 0.0};
    p.alpha = p.beta = std::sqrt(0.5);
    EXPECT_NEAR(gmud_min_sinr(p, fb, fb, 1e-12).min_sinr, 1.0, 1e-9);
}

TEST(GmudMinSinr, MatchesDirectExpression) {
    std::mt19937_64 rng(35);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const EigenFeedback k = random_feedback(rng), l = random_feedback(rng);
        GmudBeamParams p;
        p.r = {k.lambda2 + (k.lambda1 - k.lambda2) * u(rng), l.lambda2 + (l.lambda1 - l.lambda2) * u(rng)};
        p.theta = {6.28 * u(rng), 6.28 * u(rng)};
        const double a2 = u(rng);
        p.alpha = std::sqrt(a2);
        p.beta = std::sqrt(1.0 - a2);
        const double nv = 0.1 * u(rng) + 1e-3;

        const double ov = std::norm(oracle_beam(k, p.r[0], p.theta[0]).dot(oracle_beam(l, p.r[1], p.theta[1])));
        const double sk = a2 * p.r[0] * p.r[0] / ((1.0 - a2) * p.r[0] * p.r[0] * ov + nv);
        const double sl = (1.0 - a2) * p.r[1] * p.r[1] / (a2 * p.r[1] * p.r[1] * ov + nv);
        const auto report = gmud_min_sinr(p, k, l, nv);
        ASSERT_NEAR(report.per_user[0], sk, 1e-9 * std::max(1.0, sk));
        ASSERT_NEAR(report.per_user[1], sl, 1e-9 * std::max(1.0, sl));
    }
}

TEST(GmudMinSinr, CommonPhaseInvariance) {
    std::mt19937_64 rng(36);
    const EigenFeedback k = random_feedback(rng), l = random_feedback(rng);
    GmudBeamParams p;
    p.r = {0.5 * (k.lambda1 + k.lambda2), l.lambda1};
    p.theta = {0.3, 2.0};
    p.alpha = p.beta = std::sqrt(0.5);
    // v1 -> e^{j phi} v1 sends its complement to e^{-j phi} v2, so shifting
    // theta by -2 phi turns every beam into e^{-j phi} times the original.
    const double phi = 0.9;
    EigenFeedback k2 = k, l2 = l;
    k2.v1 *= std::polar(1.0, phi);
    l2.v1 *= std::polar(1.0, phi);
    GmudBeamParams p2 = p;
    p2.theta = {p.theta[0] - 2.0 * phi, p.theta[1] - 2.0 * phi};
    const Vector2cd q = gmud_precoder_matrix(p, k, l).col(0);
    const Vector2cd q2 = gmud_precoder_matrix(p2, k2, l2).col(0);
    EXPECT_LT((q2 - std::polar(1.0, -phi) * q).norm(), 1e-12);
    EXPECT_NEAR(gmud_min_sinr(p, k, l, 0.1).min_sinr, gmud_min_sinr(p2, k2, l2, 0.1).min_sinr, 1e-12);
}

TEST(Grids, Shapes) {
    const EigenFeedback fb{2.0, 1.0, Vector2cd(1.0, 0.0)};
    const auto r = r_grid(fb, 8);
    ASSERT_EQ(r.size(), 8u);
    EXPECT_EQ(r.front(), 1.0);
    EXPECT_EQ(r.back(), 2.0);
    EXPECT_EQ(r_grid(fb, 1), std::vector<double>{2.0});

    const auto t = theta_grid(16);
    ASSERT_EQ(t.size(), 16u);
    EXPECT_EQ(t[0], 0.0);
    EXPECT_NEAR(t[4], std::numbers::pi / 2.0, 1e-15);

    const auto pw = power_grid(9);
    ASSERT_EQ(pw.size(), 11u);
    EXPECT_NEAR(pw[0], 0.1, 1e-15);
    EXPECT_NEAR(pw[8], 0.9, 1e-15);
    EXPECT_EQ(pw[9], 0.0);
    EXPECT_EQ(pw[10], 1.0);
    EXPECT_EQ(power_grid(1), (std::vector<double>{0.5, 0.0, 1.0}));
    EXPECT_THROW(r_grid(fb, 0), DomainError);
}

TEST(OptimizeGmud, MatchesReEnumeration) {
    std::mt19937_64 rng(37);
    const GridSpec grid{4, 8, 5, false};
    for (int trial = 0; trial < 20; ++trial) {
        const EigenFeedback k = random_feedback(rng), l = random_feedback(rng);
        const double nv = std::pow(10.0, -(trial % 4) * 0.8);
        double best = -1.0;
        for (double rk : r_grid(k, grid.n_r)) {
            for (double rl : r_grid(l, grid.n_r)) {
                for (double tk : theta_grid(grid.n_theta)) {
                    for (double tl : theta_grid(grid.n_theta)) {
                        for (double a2 : power_grid(grid.n_power)) {
                            GmudBeamParams p;
                            p.r = {rk, rl};
                            p.theta = {tk, tl};
                            p.alpha = std::sqrt(a2);
                            p.beta = std::sqrt(1.0 - a2);
                            best = std::max(best, gmud_min_sinr(p, k, l, nv).min_sinr);
                        }
                    }
                }
            }
        }
        const auto opt = optimize_gmud(k, l, nv, grid);
        ASSERT_EQ(opt.sinr.min_sinr, best) << "trial " << trial;

        GmudBeamParams svd_point;
        svd_point.r = {k.lambda1, l.lambda1};
        svd_point.alpha = svd_point.beta = std::sqrt(0.5);
        ASSERT_GE(opt.sinr.min_sinr, gmud_min_sinr(svd_point, k, l, nv).min_sinr);
    }
}

TEST(OptimizeGmud, OrthogonalUsersKeepPrincipalBeams) {
    const EigenFeedback k{2.0, 1.0, Vector2cd(1.0, 0.0)};
    const EigenFeedback l{2.0, 1.0, Vector2cd(0.0, 1.0)};
    const auto opt = optimize_gmud(k, l, 1e-6);
    EXPECT_EQ(opt.params.r[0], 2.0);
    EXPECT_EQ(opt.params.r[1], 2.0);
    EXPECT_NEAR(opt.params.alpha * opt.params.alpha, 0.5, 1e-12);
}

TEST(OptimizeGmud, SinglePointGrid) {
    std::mt19937_64 rng(38);
    const EigenFeedback k = random_feedback(rng), l = random_feedback(rng);
    const auto opt = optimize_gmud(k, l, 0.1, GridSpec{1, 1, 1, false});
    EXPECT_EQ(opt.params.r[0], k.lambda1);
    EXPECT_EQ(opt.params.r[1], l.lambda1);
    EXPECT_EQ(opt.params.theta[0], 0.0);
    EXPECT_EQ(opt.params.theta[1], 0.0);
}

TEST(OptimizeGmud, PrecoderColumnsAreLoadedUnitBeams) {
    std::mt19937_64 rng(39);
    const EigenFeedback k = random_feedback(rng), l = random_feedback(rng);
    const auto opt = optimize_gmud(k, l, 0.05);
    const auto& p = opt.params;
    EXPECT_NEAR(p.alpha * p.alpha + p.beta * p.beta, 1.0, 1e-12);
    EXPECT_NEAR(opt.precoder.g.col(0).norm(), p.alpha, 1e-12);
    EXPECT_NEAR(opt.precoder.g.col(1).norm(), p.beta, 1e-12);
    EXPECT_LT((opt.precoder.g.col(0) - p.alpha * oracle_beam(k, p.r[0], p.theta[0])).norm(), 1e-12);
}

TEST(OptimizeGmud, RefinementNeverWorse) {
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 5; ++trial) {
        const EigenFeedback k = random_feedback(rng), l = random_feedback(rng);
        const auto coarse = optimize_gmud(k, l, 0.05, GridSpec{4, 8, 5, false});
        const auto fine = optimize_gmud(k, l, 0.05, GridSpec{4, 8, 5, true});
        ASSERT_GE(fine.sinr.min_sinr, coarse.sinr.min_sinr);
    }
}
