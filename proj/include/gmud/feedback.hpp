// feedback.hpp
//
// Bit-exact limited-feedback codec. Each scheme spends 12 n bits per user:
//
//   scheme              unit-vector scalars      norms / singular values
//   reg-inv-selection   8 x n bits               2 x 2n bits
//   reg-inv-fixed       4 x 2n bits              1 x 4n bits
//   gmud                4 x 2n bits              2 x 2n bits
//
// Fields are packed most-significant bit first in the order the message
// declares them. A complex component contributes its real part then its
// imaginary part. Unit-vector scalars are quantized on [-1, 1], norms and
// singular values on [0, 4], with a uniform midrise quantizer.
#ifndef GMUD_FEEDBACK_HPP
#define GMUD_FEEDBACK_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gmud/linalg.hpp"
#include "gmud/precoders.hpp"

namespace gmud {

using BitString = std::vector<bool>;
using RowVector2cd = Eigen::Matrix<std::complex<double>, 1, 2>;

struct FeedbackBudget {
    unsigned n = 4;

    unsigned total_bits() const { return 12 * n; }
};

struct QuantizedScalar {
    std::uint64_t index{};
    double recon{};
};

/// Midrise uniform quantizer: v is clamped to [lo, hi), the step is
/// (hi - lo) / 2^bits and the reconstruction is the cell midpoint.
QuantizedScalar quantize_scalar(double v, double lo, double hi, int bits);
double dequantize_scalar(std::uint64_t index, double lo, double hi, int bits);

/// A run of `count` scalars sharing bit width and range.
struct FieldGroup {
    int count;
    int bits;
    double lo;
    double hi;
};

inline constexpr double kUnitLo = -1.0;
inline constexpr double kUnitHi = 1.0;
inline constexpr double kNormLo = 0.0;
inline constexpr double kNormHi = 4.0;
/// Widest field the codec will pack; wider fields would exceed double precision.
inline constexpr int kMaxFieldBits = 52;

std::vector<FieldGroup> field_layout(Scheme scheme, FeedbackBudget budget);

/// Both rows of H as unit vectors plus their norms.
struct RegInvSelectionReport {
    std::array<RowVector2cd, 2> rows;
    std::array<double, 2> norms{};
};

/// One row of H as a unit vector plus its norm.
struct RegInvFixedReport {
    RowVector2cd row;
    double norm{};
};

/// Principal right singular vector and both singular values.
struct GmudReport {
    Vector2cd v1;
    double lambda1{};
    double lambda2{};
};

using FeedbackMessage = std::variant<RegInvSelectionReport, RegInvFixedReport, GmudReport>;

Scheme message_scheme(const FeedbackMessage& msg);

/// Which row of H the fixed-antenna baseline reports.
enum class FixedRowPolicy { FirstRow, BestNorm };

/// "first-row" or "best-norm".
std::string_view fixed_row_name(FixedRowPolicy policy);
FixedRowPolicy parse_fixed_row(std::string_view name);

int fixed_row_index(const Matrix2cd& h, FixedRowPolicy policy);

/// Unquantized report of a 2x2 channel for the given scheme.
FeedbackMessage describe_channel(const Matrix2cd& h, Scheme scheme, FixedRowPolicy policy = FixedRowPolicy::FirstRow);

/// Message scalars in wire order.
std::vector<double> message_scalars(const FeedbackMessage& msg);

/// Builds a message from wire-order scalars, renormalizing unit vectors and
/// sorting singular values into descending order.
FeedbackMessage message_from_scalars(std::span<const double> scalars, Scheme scheme);

BitString encode(const FeedbackMessage& msg, FeedbackBudget budget);
BitString encode_scalars(std::span<const double> scalars, Scheme scheme, FeedbackBudget budget);

/// Midrise reconstruction of every field, in wire order, before any
/// renormalization. Throws FormatError unless bits.size() == 12 n.
std::vector<double> reconstruction_levels(const BitString& bits, Scheme scheme, FeedbackBudget budget);

FeedbackMessage decode(const BitString& bits, Scheme scheme, FeedbackBudget budget);

/// decode(encode(msg)).
FeedbackMessage quantize_message(const FeedbackMessage& msg, FeedbackBudget budget);

/// Channel rows the transmitter reconstructs from a reg-inv report
/// (norm times unit row).
MatrixXcd reported_rows(const FeedbackMessage& msg);

std::string to_string(const BitString& bits);
BitString bits_from_string(std::string_view text);

} // namespace gmud

#endif // GMUD_FEEDBACK_HPP
