// linalg.hpp
//
// Small dense complex kernel on top of Eigen: products, conjugate transpose,
// inverses, Frobenius norms and a closed-form SVD for 2x2 complex matrices.
// Everything is templated on the real scalar so the same code serves double
// (the simulator) and long double (test oracles).
#ifndef GMUD_LINALG_HPP
#define GMUD_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "gmud/errors.hpp"

namespace gmud {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using ComplexMatrix2 = Eigen::Matrix<Complex<Scalar>, 2, 2>;

template <typename Scalar>
using ComplexVector2 = Eigen::Matrix<Complex<Scalar>, 2, 1>;

using Matrix2cd = ComplexMatrix2<double>;
using Vector2cd = ComplexVector2<double>;
using MatrixXcd = ComplexMatrix<double>;

namespace detail {

inline std::string shape_string(Eigen::Index rows, Eigen::Index cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

/// [-conj(v1), conj(v0)]: orthogonal to v in exact arithmetic, same norm.
template <typename Scalar>
ComplexVector2<Scalar> orthogonal_complement(const ComplexVector2<Scalar>& v) {
    return ComplexVector2<Scalar>(-std::conj(v(1)), std::conj(v(0)));
}

/// Rotates v so that its largest-magnitude entry is real and nonnegative.
/// Ties go to the lower index.
template <typename Scalar>
ComplexVector2<Scalar> fix_phase(const ComplexVector2<Scalar>& v) {
    const Eigen::Index pivot = std::abs(v(1)) > std::abs(v(0)) ? 1 : 0;
    const Scalar mag = std::abs(v(pivot));
    if (mag == Scalar(0)) {
        return v;
    }
    const Complex<Scalar> unit_phase = std::conj(v(pivot)) / mag;
    ComplexVector2<Scalar> out = v * unit_phase;
    out(pivot) = Complex<Scalar>(mag, Scalar(0));
    return out;
}

} // namespace detail

/// Standard matrix product; throws DimensionError when a.cols() != b.rows().
template <typename DerivedA, typename DerivedB>
auto mat_mul(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("mat_mul: cannot multiply " + detail::shape_string(a.rows(), a.cols()) +
                             " by " + detail::shape_string(b.rows(), b.cols()));
    }
    return (a.derived() * b.derived()).eval();
}

template <typename Derived>
auto conj_transpose(const Eigen::MatrixBase<Derived>& a) {
    return a.adjoint().eval();
}

template <typename Derived>
auto fro_norm(const Eigen::MatrixBase<Derived>& a) {
    return a.norm();
}

/// Inverse of a square matrix. 2x2 goes through the adjugate, larger sizes
/// through Gauss-Jordan elimination with partial pivoting. A determinant (2x2)
/// or pivot whose magnitude is at most 1e-14 * ||a||_F raises
/// SingularMatrixError.
template <typename Derived>
typename Derived::PlainObject mat_inv(const Eigen::MatrixBase<Derived>& a) {
    using Plain = typename Derived::PlainObject;
    using Cx = typename Derived::Scalar;
    using Real = typename Eigen::NumTraits<Cx>::Real;

    const Eigen::Index n = a.rows();
    if (n != a.cols() || n == 0) {
        throw DimensionError("mat_inv: matrix must be square and nonempty, got " +
                             detail::shape_string(a.rows(), a.cols()));
    }
    const Real threshold = Real(1e-14) * a.norm();

    if (n == 2) {
        const Cx det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        if (std::abs(det) <= threshold) {
            throw SingularMatrixError("mat_inv: determinant below singularity threshold");
        }
        Plain inv = Plain::Zero(2, 2);
        inv(0, 0) = a(1, 1) / det;
        inv(0, 1) = -a(0, 1) / det;
        inv(1, 0) = -a(1, 0) / det;
        inv(1, 1) = a(0, 0) / det;
        return inv;
    }

    Plain work = a;
    Plain inv = Plain::Identity(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index row = col + 1; row < n; ++row) {
            if (std::abs(work(row, col)) > std::abs(work(pivot, col))) {
                pivot = row;
            }
        }
        if (std::abs(work(pivot, col)) <= threshold) {
            throw SingularMatrixError("mat_inv: pivot below singularity threshold");
        }
        if (pivot != col) {
            work.row(pivot).swap(work.row(col));
            inv.row(pivot).swap(inv.row(col));
        }
        const Cx scale = Cx(1) / work(col, col);
        work.row(col) *= scale;
        inv.row(col) *= scale;
        for (Eigen::Index row = 0; row < n; ++row) {
            if (row == col) {
                continue;
            }
            const Cx factor = work(row, col);
            if (factor != Cx(0)) {
                work.row(row) -= factor * work.row(col);
                inv.row(row) -= factor * inv.row(col);
            }
        }
    }
    return inv;
}

/// H = u * diag(lambda1, lambda2) * v^H with lambda1 >= lambda2 >= 0.
/// In each column of v the largest-magnitude entry is real and nonnegative.
template <typename Scalar>
struct SvdFactorization {
    ComplexMatrix2<Scalar> u;
    Scalar lambda1{};
    Scalar lambda2{};
    ComplexMatrix2<Scalar> v;

    ComplexMatrix2<Scalar> reconstruct() const {
        ComplexMatrix2<Scalar> sigma = ComplexMatrix2<Scalar>::Zero();
        sigma(0, 0) = lambda1;
        sigma(1, 1) = lambda2;
        return u * sigma * v.adjoint();
    }

    ComplexVector2<Scalar> principal() const { return v.col(0); }
};

/// Closed-form SVD of a 2x2 complex matrix.
///
/// The right singular vectors come from the eigenproblem of W = h^H h solved
/// with the quadratic formula. lambda1 = ||h v1||, and lambda2 = |det h| /
/// lambda1 so the small singular value keeps full relative accuracy. The
/// second left vector is the orthogonal complement of the first, rotated onto
/// h v2; below lambda2 <= 1e-12 * lambda1 the rotation is skipped.
template <typename Derived>
auto svd2x2(const Eigen::MatrixBase<Derived>& h) {
    using Cx = typename Derived::Scalar;
    using Real = typename Eigen::NumTraits<Cx>::Real;
    using Mat = ComplexMatrix2<Real>;
    using Vec = ComplexVector2<Real>;

    if (h.rows() != 2 || h.cols() != 2) {
        throw DimensionError("svd2x2: expected 2x2, got " + detail::shape_string(h.rows(), h.cols()));
    }
    const Mat m = h;

    SvdFactorization<Real> out;
    if (m.isZero(Real(0))) {
        out.u = Mat::Identity();
        out.v = Mat::Identity();
        return out;
    }

    // W = [[p, q], [conj(q), s]]
    const Mat w = m.adjoint() * m;
    const Real p = w(0, 0).real();
    const Real s = w(1, 1).real();
    const Cx q = w(0, 1);
    const Real half_gap = std::sqrt(Real(0.25) * (p - s) * (p - s) + std::norm(q));
    const Real mu1 = Real(0.5) * (p + s) + half_gap;

    // Two candidate null vectors of W - mu1 I; the longer one is better conditioned.
    const Vec cand_a(q, Cx(mu1 - p));
    const Vec cand_b(Cx(mu1 - s), std::conj(q));
    const Real na = cand_a.norm();
    const Real nb = cand_b.norm();
    Vec v1;
    if (na == Real(0) && nb == Real(0)) {
        v1 = Vec(Cx(1), Cx(0));
    } else {
        v1 = na >= nb ? Vec(cand_a / na) : Vec(cand_b / nb);
    }
    v1 = detail::fix_phase(v1);
    const Vec v2 = detail::fix_phase<Real>(detail::orthogonal_complement(v1));

    const Vec hv1 = m * v1;
    out.lambda1 = hv1.norm();
    const Vec u1 = hv1 / out.lambda1;
    Vec u2 = detail::orthogonal_complement(u1);

    const Real abs_det = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    out.lambda2 = abs_det / out.lambda1;
    if (out.lambda2 > out.lambda1) {
        out.lambda2 = out.lambda1;
    }
    if (out.lambda2 > Real(1e-12) * out.lambda1) {
        const Cx proj = u2.dot(m * v2);
        const Real mag = std::abs(proj);
        if (mag > Real(0)) {
            u2 *= proj / mag;
        }
    }

    out.u.col(0) = u1;
    out.u.col(1) = u2;
    out.v.col(0) = v1;
    out.v.col(1) = v2;
    return out;
}

} // namespace gmud

#endif // GMUD_LINALG_HPP
