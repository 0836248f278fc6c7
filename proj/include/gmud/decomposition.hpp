// decomposition.hpp
//
// Generalized multi-unitary decomposition of 2x2 complex matrices:
//
//     H = (U M U0) R (V M V0)^H = P R Q^H
//
// where H = U diag(l1, l2) V^H is the SVD, U0 and V0 are real Givens
// rotations chosen so that R = U0^H diag(l1, l2) V0 has first row [r, 0],
// and M = diag(exp(j t1), exp(j t2)) is a free phase matrix. R depends only
// on (l1, l2, r); every choice of M gives another unitary pair (P, Q).
#ifndef GMUD_DECOMPOSITION_HPP
#define GMUD_DECOMPOSITION_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include "gmud/errors.hpp"
#include "gmud/linalg.hpp"

namespace gmud {

/// U0 = [[a, b], [-b, a]], V0 = [[c, s], [-s, c]], all entries in [0, 1].
template <typename Scalar>
struct GmudRotation {
    Scalar a{1};
    Scalar b{0};
    Scalar c{1};
    Scalar s{0};

    ComplexMatrix2<Scalar> left() const {
        ComplexMatrix2<Scalar> m;
        m << a, b, -b, a;
        return m;
    }

    ComplexMatrix2<Scalar> right() const {
        ComplexMatrix2<Scalar> m;
        m << c, s, -s, c;
        return m;
    }
};

/// Lower-triangular [[r, 0], [z1, z2]].
template <typename Scalar>
struct SpecialR {
    Scalar r{};
    Scalar z1{};
    Scalar z2{};

    ComplexMatrix2<Scalar> matrix() const {
        ComplexMatrix2<Scalar> m;
        m << r, Scalar(0), z1, z2;
        return m;
    }
};

/// Phases of M = diag(exp(j theta1), exp(j theta2)), each in [0, 2 pi).
template <typename Scalar>
struct PhasePair {
    Scalar theta1{};
    Scalar theta2{};
};

template <typename Scalar>
struct GmudFactorization {
    ComplexMatrix2<Scalar> p;
    SpecialR<Scalar> rmat;
    ComplexMatrix2<Scalar> q;
    Scalar r{};
    PhasePair<Scalar> phases;
    GmudRotation<Scalar> rotation;
    SvdFactorization<Scalar> source_svd;

    ComplexMatrix2<Scalar> reconstruct() const { return p * rmat.matrix() * q.adjoint(); }
};

namespace detail {

/// Relative slack on both ends of [lambda2, lambda1]; absorbs round-off from
/// quantized feedback.
inline constexpr double kIntervalSlack = 1e-9;

template <typename Scalar>
Scalar wrap_phase(Scalar theta) {
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    Scalar wrapped = std::fmod(theta, two_pi);
    if (wrapped < Scalar(0)) {
        wrapped += two_pi;
    }
    return wrapped >= two_pi ? Scalar(0) : wrapped;
}

/// Validates r against [lambda2, lambda1] with relative slack and clamps it
/// into the closed interval.
template <typename Scalar>
Scalar admissible_r(Scalar lambda1, Scalar lambda2, Scalar r) {
    if (!(lambda1 > Scalar(0)) || lambda2 < Scalar(0) || lambda2 > lambda1 || !std::isfinite(r)) {
        std::ostringstream msg;
        msg << "invalid singular values (" << lambda1 << ", " << lambda2 << ")";
        throw DomainError(msg.str());
    }
    const Scalar slack = Scalar(kIntervalSlack);
    if (r < lambda2 * (Scalar(1) - slack) || r > lambda1 * (Scalar(1) + slack)) {
        std::ostringstream msg;
        msg.precision(10);
        msg << "r = " << r << " outside admissible interval [" << lambda2 << ", " << lambda1 << "]";
        throw DomainError(msg.str());
    }
    return std::clamp(r, lambda2, lambda1);
}

} // namespace detail

/// Real Givens parameters solving
///     a c l1 + b s l2 = r,   a s l1 - b c l2 = 0
/// with b = sqrt(1 - a^2), s = sqrt(1 - c^2). Equal singular values (to
/// 1e-12 relative) give the identity rotations.
template <typename Scalar>
GmudRotation<Scalar> solve_rotations(Scalar lambda1, Scalar lambda2, Scalar r) {
    r = detail::admissible_r(lambda1, lambda2, r);
    if (lambda1 - lambda2 <= Scalar(1e-12) * lambda1) {
        return {};
    }
    const Scalar spread = lambda1 * lambda1 - lambda2 * lambda2;
    const Scalar a2 = std::clamp((r * r - lambda2 * lambda2) / spread, Scalar(0), Scalar(1));
    const Scalar b2 = std::clamp((lambda1 * lambda1 - r * r) / spread, Scalar(0), Scalar(1));
    GmudRotation<Scalar> rot;
    rot.a = std::sqrt(a2);
    rot.b = std::sqrt(b2);
    rot.c = std::min(Scalar(1), lambda1 / r * rot.a);
    rot.s = std::min(Scalar(1), lambda2 / r * rot.b);
    return rot;
}

template <typename Scalar>
SpecialR<Scalar> build_special_r(Scalar lambda1, Scalar lambda2, Scalar r) {
    const GmudRotation<Scalar> rot = solve_rotations(lambda1, lambda2, r);
    SpecialR<Scalar> out;
    out.r = detail::admissible_r(lambda1, lambda2, r);
    out.z1 = rot.b * rot.c * lambda1 - rot.a * rot.s * lambda2;
    out.z2 = rot.b * rot.s * lambda1 + rot.a * rot.c * lambda2;
    return out;
}

template <typename Scalar>
ComplexMatrix2<Scalar> phase_matrix(const PhasePair<Scalar>& pp) {
    ComplexMatrix2<Scalar> m = ComplexMatrix2<Scalar>::Zero();
    m(0, 0) = std::polar(Scalar(1), pp.theta1);
    m(1, 1) = std::polar(Scalar(1), pp.theta2);
    return m;
}

/// Full factorization H = P R Q^H for a prescribed r in [lambda2(H), lambda1(H)].
template <typename Derived>
auto gmud(const Eigen::MatrixBase<Derived>& h,
          typename Eigen::NumTraits<typename Derived::Scalar>::Real r,
          const PhasePair<typename Eigen::NumTraits<typename Derived::Scalar>::Real>& pp) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

    GmudFactorization<Real> out;
    out.source_svd = svd2x2(h);
    const auto& svd = out.source_svd;
    if (!(svd.lambda1 > Real(0))) {
        throw DomainError("gmud: zero matrix has no admissible r");
    }
    out.r = detail::admissible_r(svd.lambda1, svd.lambda2, r);
    out.phases = {detail::wrap_phase(pp.theta1), detail::wrap_phase(pp.theta2)};
    out.rotation = solve_rotations(svd.lambda1, svd.lambda2, out.r);
    out.rmat = build_special_r(svd.lambda1, svd.lambda2, out.r);

    const ComplexMatrix2<Real> m = phase_matrix(out.phases);
    out.p = svd.u * m * out.rotation.left();
    out.q = svd.v * m * out.rotation.right();
    return out;
}

/// [-conj(v1[1]), conj(v1[0])] for a unit 2-vector.
template <typename Scalar>
ComplexVector2<Scalar> complete_orthonormal(const ComplexVector2<Scalar>& v1) {
    const Scalar norm = v1.norm();
    if (std::abs(norm - Scalar(1)) > Scalar(1e-9)) {
        std::ostringstream msg;
        msg << "complete_orthonormal: input norm " << norm << " is not 1";
        throw DomainError(msg.str());
    }
    return detail::orthogonal_complement(v1);
}

/// First column of V M(theta, 0) V0 where V = [v1, complete_orthonormal(v1)]:
///     q1 = c exp(j theta) v1 - s v2.
/// This is the transmit beam a GMUD precoder builds from (l1, l2, v1) alone;
/// |v1^H q1| = c for every theta.
template <typename Scalar>
ComplexVector2<Scalar> beam_from_feedback(Scalar lambda1, Scalar lambda2, const ComplexVector2<Scalar>& v1,
                                          Scalar r, Scalar theta) {
    const GmudRotation<Scalar> rot = solve_rotations(lambda1, lambda2, r);
    const ComplexVector2<Scalar> v2 = complete_orthonormal(v1);
    return std::polar(rot.c, theta) * v1 - rot.s * v2;
}

/// Opening of the beam cone around v1: arccos(c).
template <typename Scalar>
Scalar cone_angle(const GmudRotation<Scalar>& rot) {
    return std::acos(std::clamp(rot.c, Scalar(0), Scalar(1)));
}

} // namespace gmud

#endif // GMUD_DECOMPOSITION_HPP
