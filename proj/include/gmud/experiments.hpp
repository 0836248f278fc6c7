// experiments.hpp
//
// Sweep orchestration and result files: CSV curves, SVG charts, gnuplot .dat
// tables and JSON run manifests. A manifest carries everything needed to
// rerun a sweep and reproduce its CSV byte for byte.
#ifndef GMUD_EXPERIMENTS_HPP
#define GMUD_EXPERIMENTS_HPP

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gmud/link_sim.hpp"

namespace gmud {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Inclusive "start:step:stop" in dB. A zero step is only valid when
/// start == stop and yields one point.
std::vector<double> parse_snr_range(std::string_view text);

struct SweepSpec {
    std::vector<Scheme> schemes;
    Modulation modulation = Modulation::Qpsk;
    std::vector<double> snr_db;
    std::vector<FeedbackMode> feedback;
    int realizations = 500;
    int symbols = 100;
    std::uint64_t seed = 1;
    GridSpec grid;
    FixedRowPolicy fixed_row = FixedRowPolicy::FirstRow;
    GmudReceiver gmud_receiver = GmudReceiver::PrincipalRow;
};

/// Channel uses per realization so that a point carries at least
/// `bits_per_point` payload bits.
int symbols_for_budget(Modulation mod, int realizations, std::uint64_t bits_per_point);

/// One SimConfig per (feedback mode, scheme), feedback-major.
std::vector<SimConfig> expand(const SweepSpec& spec);

std::vector<BerCurve> run_sweep(const SweepSpec& spec, const RunOptions& options = {});

/// Feedback list for a comparison: perfect CSI first, then the requested
/// budgets in order, duplicates dropped.
std::vector<FeedbackMode> comparison_feedback(std::span<const FeedbackMode> requested);

/// Columns: scheme,modulation,feedback_bits,snr_db,ber,bits,errors
void write_csv(std::ostream& out, std::span<const BerCurve> curves);
std::string render_csv(std::span<const BerCurve> curves);

/// Line chart, SNR on x, log10 BER on y. Zero-BER points break the line.
std::string render_svg(std::span<const BerCurve> curves, std::string_view title);

/// gnuplot-friendly blocks, one per curve, separated by two blank lines.
std::string render_dat(std::span<const BerCurve> curves);

std::string curve_label(const BerCurve& curve);

struct OutputPaths {
    std::filesystem::path csv;
    std::filesystem::path svg;
    std::filesystem::path manifest;
    std::filesystem::path dat; // empty when not requested
};

/// out.csv -> out.svg, out.manifest.json, out.dat
OutputPaths output_paths(const std::filesystem::path& csv, bool with_dat);

nlohmann::json spec_to_json(const SweepSpec& spec);
SweepSpec spec_from_json(const nlohmann::json& j);

nlohmann::json make_manifest(std::string_view command, const SweepSpec& spec, double duration_s,
                             const OutputPaths& paths);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace gmud

#endif // GMUD_EXPERIMENTS_HPP
