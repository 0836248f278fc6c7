// feedback.cpp
#include "gmud/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gmud/errors.hpp"

namespace gmud {

namespace {

void check_bits(int bits) {
    if (bits < 1 || bits > kMaxFieldBits) {
        throw DomainError("quantizer width must be in [1, " + std::to_string(kMaxFieldBits) + "] bits, got " +
                          std::to_string(bits));
    }
}

std::size_t scalar_count(Scheme scheme) {
    switch (scheme) {
    case Scheme::RegInvSelection:
        return 10;
    case Scheme::RegInvFixed:
        return 5;
    case Scheme::Gmud:
        return 6;
    }
    return 0;
}

template <typename Vec>
void push_components(std::vector<double>& out, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i).real());
        out.push_back(v(i).imag());
    }
}

template <typename Vec>
Vec unit_from(std::span<const double> s) {
    Vec v;
    v(0) = {s[0], s[1]};
    v(1) = {s[2], s[3]};
    const double norm = v.norm();
    if (norm > 0.0) {
        v /= norm;
    } else {
        v(0) = 1.0;
        v(1) = 0.0;
    }
    return v;
}

std::pair<RowVector2cd, double> normalize_row(const RowVector2cd& row) {
    const double norm = row.norm();
    if (norm == 0.0) {
        return {RowVector2cd(1.0, 0.0), 0.0};
    }
    return {row / norm, norm};
}

} // namespace

QuantizedScalar quantize_scalar(double v, double lo, double hi, int bits) {
    check_bits(bits);
    if (!(lo < hi)) {
        throw DomainError("quantize_scalar: empty range");
    }
    const std::uint64_t levels = std::uint64_t{1} << bits;
    const double step = (hi - lo) / static_cast<double>(levels);
    std::uint64_t index = 0;
    if (v >= hi) {
        index = levels - 1;
    } else if (v > lo) {
        index = std::min(static_cast<std::uint64_t>(std::floor((v - lo) / step)), levels - 1);
    }
    return {index, lo + (static_cast<double>(index) + 0.5) * step};
}

double dequantize_scalar(std::uint64_t index, double lo, double hi, int bits) {
    check_bits(bits);
    const std::uint64_t levels = std::uint64_t{1} << bits;
    if (index >= levels) {
        throw FormatError("quantizer index out of range");
    }
    const double step = (hi - lo) / static_cast<double>(levels);
    return lo + (static_cast<double>(index) + 0.5) * step;
}

std::vector<FieldGroup> field_layout(Scheme scheme, FeedbackBudget budget) {
    if (budget.n < 1) {
        throw DomainError("feedback budget n must be positive");
    }
    const int n = static_cast<int>(budget.n);
    std::vector<FieldGroup> layout;
    switch (scheme) {
    case Scheme::RegInvSelection:
        layout = {{8, n, kUnitLo, kUnitHi}, {2, 2 * n, kNormLo, kNormHi}};
        break;
    case Scheme::RegInvFixed:
        layout = {{4, 2 * n, kUnitLo, kUnitHi}, {1, 4 * n, kNormLo, kNormHi}};
        break;
    case Scheme::Gmud:
        layout = {{4, 2 * n, kUnitLo, kUnitHi}, {2, 2 * n, kNormLo, kNormHi}};
        break;
    }
    for (const auto& group : layout) {
        check_bits(group.bits);
    }
    return layout;
}

Scheme message_scheme(const FeedbackMessage& msg) {
    switch (msg.index()) {
    case 0:
        return Scheme::RegInvSelection;
    case 1:
        return Scheme::RegInvFixed;
    default:
        return Scheme::Gmud;
    }
}

std::string_view fixed_row_name(FixedRowPolicy policy) {
    return policy == FixedRowPolicy::FirstRow ? "first-row" : "best-norm";
}

FixedRowPolicy parse_fixed_row(std::string_view name) {
    if (name == "first-row") {
        return FixedRowPolicy::FirstRow;
    }
    if (name == "best-norm") {
        return FixedRowPolicy::BestNorm;
    }
    throw FormatError("unknown fixed-row policy '" + std::string(name) + "'");
}

int fixed_row_index(const Matrix2cd& h, FixedRowPolicy policy) {
    if (policy == FixedRowPolicy::BestNorm && h.row(1).squaredNorm() > h.row(0).squaredNorm()) {
        return 1;
    }
    return 0;
}

FeedbackMessage describe_channel(const Matrix2cd& h, Scheme scheme, FixedRowPolicy policy) {
    switch (scheme) {
    case Scheme::RegInvSelection: {
        RegInvSelectionReport report;
        for (int i = 0; i < 2; ++i) {
            auto [unit, norm] = normalize_row(h.row(i));
            report.rows[static_cast<std::size_t>(i)] = unit;
            report.norms[static_cast<std::size_t>(i)] = norm;
        }
        return report;
    }
    case Scheme::RegInvFixed: {
        auto [unit, norm] = normalize_row(h.row(fixed_row_index(h, policy)));
        return RegInvFixedReport{unit, norm};
    }
    case Scheme::Gmud: {
        const EigenFeedback fb = eigen_feedback(h);
        return GmudReport{fb.v1, fb.lambda1, fb.lambda2};
    }
    }
    throw DomainError("unknown scheme");
}

std::vector<double> message_scalars(const FeedbackMessage& msg) {
    std::vector<double> out;
    if (const auto* sel = std::get_if<RegInvSelectionReport>(&msg)) {
        push_components(out, sel->rows[0]);
        push_components(out, sel->rows[1]);
        out.push_back(sel->norms[0]);
        out.push_back(sel->norms[1]);
    } else if (const auto* fixed = std::get_if<RegInvFixedReport>(&msg)) {
        push_components(out, fixed->row);
        out.push_back(fixed->norm);
    } else {
        const auto& g = std::get<GmudReport>(msg);
        push_components(out, g.v1);
        out.push_back(g.lambda1);
        out.push_back(g.lambda2);
    }
    return out;
}

FeedbackMessage message_from_scalars(std::span<const double> s, Scheme scheme) {
    if (s.size() != scalar_count(scheme)) {
        throw FormatError("wrong number of feedback scalars for " + std::string(scheme_name(scheme)));
    }
    switch (scheme) {
    case Scheme::RegInvSelection: {
        RegInvSelectionReport report;
        report.rows[0] = unit_from<RowVector2cd>(s.subspan(0, 4));
        report.rows[1] = unit_from<RowVector2cd>(s.subspan(4, 4));
        report.norms = {s[8], s[9]};
        return report;
    }
    case Scheme::RegInvFixed:
        return RegInvFixedReport{unit_from<RowVector2cd>(s.subspan(0, 4)), s[4]};
    case Scheme::Gmud: {
        GmudReport report{unit_from<Vector2cd>(s.subspan(0, 4)), s[4], s[5]};
        if (report.lambda2 > report.lambda1) {
            std::swap(report.lambda1, report.lambda2);
        }
        return report;
    }
    }
    throw DomainError("unknown scheme");
}

BitString encode_scalars(std::span<const double> scalars, Scheme scheme, FeedbackBudget budget) {
    if (scalars.size() != scalar_count(scheme)) {
        throw FormatError("wrong number of feedback scalars for " + std::string(scheme_name(scheme)));
    }
    BitString bits;
    bits.reserve(budget.total_bits());
    std::size_t next = 0;
    for (const auto& group : field_layout(scheme, budget)) {
        for (int i = 0; i < group.count; ++i) {
            const auto q = quantize_scalar(scalars[next++], group.lo, group.hi, group.bits);
            for (int b = group.bits - 1; b >= 0; --b) {
                bits.push_back(((q.index >> b) & 1U) != 0);
            }
        }
    }
    return bits;
}

BitString encode(const FeedbackMessage& msg, FeedbackBudget budget) {
    const auto scalars = message_scalars(msg);
    return encode_scalars(scalars, message_scheme(msg), budget);
}

std::vector<double> reconstruction_levels(const BitString& bits, Scheme scheme, FeedbackBudget budget) {
    const auto layout = field_layout(scheme, budget);
    if (bits.size() != budget.total_bits()) {
        throw FormatError("feedback message must be " + std::to_string(budget.total_bits()) + " bits, got " +
                          std::to_string(bits.size()));
    }
    std::vector<double> levels;
    std::size_t pos = 0;
    for (const auto& group : layout) {
        for (int i = 0; i < group.count; ++i) {
            std::uint64_t index = 0;
            for (int b = 0; b < group.bits; ++b) {
                index = (index << 1) | (bits[pos++] ? 1U : 0U);
            }
            levels.push_back(dequantize_scalar(index, group.lo, group.hi, group.bits));
        }
    }
    return levels;
}

FeedbackMessage decode(const BitString& bits, Scheme scheme, FeedbackBudget budget) {
    const auto levels = reconstruction_levels(bits, scheme, budget);
    return message_from_scalars(levels, scheme);
}

FeedbackMessage quantize_message(const FeedbackMessage& msg, FeedbackBudget budget) {
    return decode(encode(msg, budget), message_scheme(msg), budget);
}

MatrixXcd reported_rows(const FeedbackMessage& msg) {
    if (const auto* sel = std::get_if<RegInvSelectionReport>(&msg)) {
        MatrixXcd rows(2, 2);
        rows.row(0) = sel->norms[0] * sel->rows[0];
        rows.row(1) = sel->norms[1] * sel->rows[1];
        return rows;
    }
    if (const auto* fixed = std::get_if<RegInvFixedReport>(&msg)) {
        MatrixXcd rows(1, 2);
        rows.row(0) = fixed->norm * fixed->row;
        return rows;
    }
    throw DomainError("reported_rows: GMUD reports carry no channel rows");
}

std::string to_string(const BitString& bits) {
    std::string out;
    out.reserve(bits.size());
    for (bool b : bits) {
        out.push_back(b ? '1' : '0');
    }
    return out;
}

BitString bits_from_string(std::string_view text) {
    BitString bits;
    bits.reserve(text.size());
    for (char c : text) {
        if (c == '0' || c == '1') {
            bits.push_back(c == '1');
        } else {
            throw FormatError(std::string("invalid bit character '") + c + "'");
        }
    }
    return bits;
}

} // namespace gmud
