// gmud_cli.cpp
//
//   gmud decompose --matrix "re im re im re im re im" --r R [--theta1 T] [--theta2 T]
//   gmud sweep     --scheme S --mod M --snr a:s:b --feedback perfect|N --out run.csv
//   gmud compare   --mod M --snr a:s:b --feedback N [--feedback ...] --out cmp.csv
//   gmud quantize  --scheme S --n N (--matrix ... | --bits 0101...)
//   gmud replay    --manifest run.manifest.json [--out other.csv]
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmud/decomposition.hpp"
#include "gmud/errors.hpp"
#include "gmud/experiments.hpp"
#include "gmud/feedback.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

template <typename Mat>
json matrix_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(complex_json(m(i, j)));
        }
        rows.push_back(row);
    }
    return rows;
}

/// Eight whitespace-separated reals, row-major (re, im) pairs. `text` is
/// either the numbers themselves or a path to a file holding them.
gmud::Matrix2cd parse_matrix(const std::string& text) {
    std::string source = text;
    if (fs::is_regular_file(text)) {
        std::ifstream in(text);
        std::ostringstream all;
        all << in.rdbuf();
        source = all.str();
    }
    std::istringstream in(source);
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size() || !std::isfinite(v)) {
            throw gmud::FormatError("matrix entry '" + token + "' is not a finite number");
        }
        values.push_back(v);
    }
    if (values.size() != 8) {
        throw gmud::FormatError("matrix needs 8 reals (row-major re im pairs), got " + std::to_string(values.size()));
    }
    gmud::Matrix2cd h;
    for (int i = 0; i < 4; ++i) {
        h(i / 2, i % 2) = {values[2 * i], values[2 * i + 1]};
    }
    return h;
}

std::uint64_t default_seed() {
    const char* env = std::getenv("GMUD_SEED");
    if (env == nullptr || *env == '\0') {
        return 1;
    }
    std::size_t used = 0;
    std::uint64_t seed = 0;
    try {
        seed = std::stoull(env, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != std::char_traits<char>::length(env)) {
        throw UsageError(std::string("GMUD_SEED must be an unsigned integer, got '") + env + "'");
    }
    return seed;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

// decompose ---------------------------------------------------------------

struct DecomposeArgs {
    std::string matrix;
    std::optional<double> r;
    double theta1 = 0.0;
    double theta2 = 0.0;
};

int run_decompose(const DecomposeArgs& args) {
    const gmud::Matrix2cd h = parse_matrix(args.matrix);
    const auto svd = gmud::svd2x2(h);
    const double r = args.r.value_or(svd.lambda1);
    const auto f = gmud::gmud(h, r, gmud::PhasePair<double>{args.theta1, args.theta2});
    const gmud::Matrix2cd rm = f.rmat.matrix();
    json out;
    out["lambda"] = {svd.lambda1, svd.lambda2};
    out["r"] = f.r;
    out["theta"] = {f.phases.theta1, f.phases.theta2};
    out["rotation"] = {{"a", f.rotation.a}, {"b", f.rotation.b}, {"c", f.rotation.c}, {"s", f.rotation.s}};
    out["P"] = matrix_json(f.p);
    out["R"] = matrix_json(rm);
    out["Q"] = matrix_json(f.q);
    out["residual"] = (f.p * rm * f.q.adjoint() - h).norm();
    out["cone_angle"] = gmud::cone_angle(f.rotation);
    print_json(out);
    return 0;
}

// quantize ----------------------------------------------------------------

struct QuantizeArgs {
    std::string scheme = "gmud";
    unsigned n = 4;
    std::string matrix;
    std::string bits;
    std::string fixed_row = "first-row";
};

json message_json(const gmud::FeedbackMessage& msg) {
    json j;
    if (const auto* sel = std::get_if<gmud::RegInvSelectionReport>(&msg)) {
        j["rows"] = {matrix_json(sel->rows[0]), matrix_json(sel->rows[1])};
        j["norms"] = {sel->norms[0], sel->norms[1]};
    } else if (const auto* fixed = std::get_if<gmud::RegInvFixedReport>(&msg)) {
        j["row"] = matrix_json(fixed->row);
        j["norm"] = fixed->norm;
    } else {
        const auto& g = std::get<gmud::GmudReport>(msg);
        j["v1"] = {complex_json(g.v1(0)), complex_json(g.v1(1))};
        j["lambda"] = {g.lambda1, g.lambda2};
    }
    return j;
}

int run_quantize(const QuantizeArgs& args) {
    const gmud::Scheme scheme = gmud::parse_scheme(args.scheme);
    const gmud::FeedbackBudget budget{args.n};
    if (args.matrix.empty() == args.bits.empty()) {
        throw UsageError("quantize needs exactly one of --matrix or --bits");
    }
    json out;
    out["scheme"] = std::string(gmud::scheme_name(scheme));
    out["n"] = args.n;
    out["total_bits"] = budget.total_bits();
    json layout = json::array();
    for (const auto& g : gmud::field_layout(scheme, budget)) {
        layout.push_back({{"count", g.count}, {"bits", g.bits}, {"range", {g.lo, g.hi}}});
    }
    out["layout"] = layout;

    gmud::BitString bits;
    if (!args.matrix.empty()) {
        const auto msg = gmud::describe_channel(parse_matrix(args.matrix), scheme, gmud::parse_fixed_row(args.fixed_row));
        out["input"] = message_json(msg);
        bits = gmud::encode(msg, budget);
    } else {
        bits = gmud::bits_from_string(args.bits);
    }
    out["bits"] = gmud::to_string(bits);
    out["levels"] = gmud::reconstruction_levels(bits, scheme, budget);
    out["decoded"] = message_json(gmud::decode(bits, scheme, budget));
    print_json(out);
    return 0;
}

// sweep / compare / replay ------------------------------------------------

struct SweepArgs {
    std::vector<std::string> schemes;
    std::string modulation = "qpsk";
    std::string snr = "0:4:40";
    std::vector<std::string> feedback;
    int realizations = 500;
    std::optional<int> symbols;
    std::uint64_t bits_per_point = 200000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out;
    bool dat = false;
    int grid_r = 8;
    int grid_theta = 16;
    int grid_power = 9;
    bool refine = false;
    std::string fixed_row = "first-row";
    std::string gmud_receiver = "principal-row";
    bool quiet = false;
};

gmud::SweepSpec build_spec(const SweepArgs& args, bool compare) {
    gmud::SweepSpec spec;
    if (args.schemes.empty()) {
        spec.schemes = {gmud::Scheme::RegInvFixed, gmud::Scheme::RegInvSelection, gmud::Scheme::Gmud};
    }
    for (const auto& s : args.schemes) {
        spec.schemes.push_back(gmud::parse_scheme(s));
    }
    spec.modulation = gmud::parse_modulation(args.modulation);
    spec.snr_db = gmud::parse_snr_range(args.snr);
    std::vector<gmud::FeedbackMode> fb;
    for (const auto& f : args.feedback) {
        fb.push_back(gmud::parse_feedback_mode(f));
    }
    if (compare) {
        spec.feedback = gmud::comparison_feedback(fb);
    } else {
        if (fb.size() > 1) {
            throw UsageError("sweep takes a single --feedback; use compare for several");
        }
        spec.feedback = fb.empty() ? std::vector<gmud::FeedbackMode>{gmud::FeedbackMode{}} : fb;
    }
    spec.realizations = args.realizations;
    spec.symbols = args.symbols ? *args.symbols
                                : gmud::symbols_for_budget(spec.modulation, args.realizations, args.bits_per_point);
    spec.seed = args.seed ? *args.seed : default_seed();
    spec.grid = gmud::GridSpec{args.grid_r, args.grid_theta, args.grid_power, args.refine};
    spec.fixed_row = gmud::parse_fixed_row(args.fixed_row);
    spec.gmud_receiver = gmud::parse_gmud_receiver(args.gmud_receiver);
    for (const auto& c : gmud::expand(spec)) {
        gmud::validate(c);
    }
    return spec;
}

std::string chart_title(const gmud::SweepSpec& spec) {
    return "Bit error rate, " + std::string(gmud::modulation_name(spec.modulation)) + ", 2 users x 2 receive antennas";
}

int execute(std::string_view command, const gmud::SweepSpec& spec, const fs::path& csv, bool dat, unsigned threads,
            bool quiet) {
    const auto paths = gmud::output_paths(csv, dat);
    if (!paths.csv.parent_path().empty()) {
        fs::create_directories(paths.csv.parent_path());
    }
    const auto start = std::chrono::steady_clock::now();
    std::vector<gmud::BerCurve> curves;
    for (const auto& config : gmud::expand(spec)) {
        if (!quiet) {
            std::cerr << "running " << gmud::scheme_name(config.scheme) << " feedback=" << config.feedback.label()
                      << " (" << config.snr_db.size() << " points)\n";
        }
        curves.push_back(gmud::run_ber(config, gmud::RunOptions{threads}));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    gmud::write_file_atomic(paths.csv, gmud::render_csv(curves));
    gmud::write_file_atomic(paths.svg, gmud::render_svg(curves, chart_title(spec)));
    if (dat) {
        gmud::write_file_atomic(paths.dat, gmud::render_dat(curves));
    }
    gmud::write_file_atomic(paths.manifest, gmud::make_manifest(command, spec, seconds, paths).dump(2) + "\n");
    if (!quiet) {
        std::cerr << "wrote " << paths.csv.string() << ", " << paths.svg.string() << ", "
                  << paths.manifest.string() << (dat ? ", " + paths.dat.string() : std::string()) << '\n';
    }
    return 0;
}

struct ReplayArgs {
    std::string manifest;
    std::string out;
    unsigned threads = 0;
    bool dat = false;
    bool quiet = false;
};

int run_replay(const ReplayArgs& args) {
    std::ifstream in(args.manifest);
    if (!in) {
        throw UsageError("cannot read manifest " + args.manifest);
    }
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw gmud::FormatError(std::string("manifest is not valid JSON: ") + e.what());
    }
    const gmud::SweepSpec spec = gmud::spec_from_json(manifest.at("config"));
    const std::string command = manifest.value("command", std::string("sweep"));
    const fs::path csv = args.out.empty() ? fs::path(manifest.at("outputs").at("csv").get<std::string>()) : fs::path(args.out);
    const bool dat = args.dat || manifest.at("outputs").contains("dat");
    return execute(command, spec, csv, dat, args.threads, args.quiet);
}

void add_sweep_options(CLI::App* cmd, SweepArgs& a, bool compare) {
    if (compare) {
        cmd->add_option("--scheme", a.schemes, "Schemes to compare (default: all three)");
        cmd->add_option("--feedback", a.feedback, "Feedback budget N (12N bits) or 'perfect'; repeatable");
    } else {
        cmd->add_option("--scheme", a.schemes, "reg-inv-fixed | reg-inv-selection | gmud")->required()->expected(1);
        cmd->add_option("--feedback", a.feedback, "'perfect' or budget N (12N bits per user)")->expected(1);
    }
    cmd->add_option("--mod", a.modulation, "qpsk | 16qam")->capture_default_str();
    cmd->add_option("--snr", a.snr, "SNR range in dB, start:step:stop inclusive")->capture_default_str();
    cmd->add_option("--realizations", a.realizations, "Channel realizations per SNR point")->capture_default_str();
    auto* symbols = cmd->add_option("--symbols", a.symbols, "Channel uses per realization");
    cmd->add_option("--bits-per-point", a.bits_per_point, "Payload bits per SNR point when --symbols is not given")
        ->capture_default_str()
        ->excludes(symbols);
    cmd->add_option("--seed", a.seed, "Master seed (default: $GMUD_SEED, else 1)");
    cmd->add_option("--threads", a.threads, "Worker threads, 0 = all cores")->capture_default_str();
    cmd->add_option("--out", a.out, "Output CSV path; .svg and .manifest.json are written beside it")->required();
    cmd->add_flag("--dat", a.dat, "Also write a gnuplot .dat table");
    cmd->add_option("--grid-r", a.grid_r, "GMUD grid points for r")->capture_default_str();
    cmd->add_option("--grid-theta", a.grid_theta, "GMUD grid points for theta")->capture_default_str();
    cmd->add_option("--grid-power", a.grid_power, "GMUD grid points for the power split")->capture_default_str();
    cmd->add_flag("--refine", a.refine, "One refinement pass around the GMUD grid optimum");
    cmd->add_option("--fixed-row", a.fixed_row, "first-row | best-norm")->capture_default_str();
    cmd->add_option("--gmud-receiver", a.gmud_receiver, "principal-row | matched-filter")->capture_default_str();
    cmd->add_flag("-q,--quiet", a.quiet, "No progress on stderr");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GMUD multi-user MIMO precoding: decompositions, BER sweeps and feedback quantization"};
    app.set_version_flag("--version", std::string(gmud::kToolVersion));
    app.require_subcommand(1);

    DecomposeArgs dec;
    auto* decompose = app.add_subcommand("decompose", "Factor a 2x2 channel as P R Q^H and print JSON");
    decompose->add_option("--matrix", dec.matrix, "8 reals (row-major re im pairs) or a file containing them")
        ->required();
    decompose->add_option("--r", dec.r, "Leading diagonal of R, in [lambda2, lambda1] (default lambda1)");
    decompose->add_option("--theta1", dec.theta1, "Phase of the first M entry (radians)");
    decompose->add_option("--theta2", dec.theta2, "Phase of the second M entry (radians)");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "BER versus SNR for one scheme");
    add_sweep_options(sweep, sweep_args, false);

    SweepArgs compare_args;
    auto* compare = app.add_subcommand("compare", "All schemes at equal feedback budget plus perfect-CSI references");
    add_sweep_options(compare, compare_args, true);

    QuantizeArgs qa;
    auto* quantize = app.add_subcommand("quantize", "Encode a channel report or decode a bit string");
    quantize->add_option("--scheme", qa.scheme, "reg-inv-fixed | reg-inv-selection | gmud")->capture_default_str();
    quantize->add_option("--n", qa.n, "Budget N (12N bits)")->capture_default_str();
    quantize->add_option("--matrix", qa.matrix, "Channel to encode: 8 reals or a file");
    quantize->add_option("--bits", qa.bits, "Bit string to decode");
    quantize->add_option("--fixed-row", qa.fixed_row, "first-row | best-norm")->capture_default_str();

    ReplayArgs ra;
    auto* replay = app.add_subcommand("replay", "Rerun the sweep recorded in a manifest");
    replay->add_option("--manifest", ra.manifest, "Manifest JSON written by sweep or compare")->required();
    replay->add_option("--out", ra.out, "Output CSV path (default: the manifest's)");
    replay->add_option("--threads", ra.threads, "Worker threads, 0 = all cores");
    replay->add_flag("--dat", ra.dat, "Also write a gnuplot .dat table");
    replay->add_flag("-q,--quiet", ra.quiet, "No progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*decompose) {
            return run_decompose(dec);
        }
        if (*quantize) {
            return run_quantize(qa);
        }
        if (*sweep) {
            const auto spec = build_spec(sweep_args, false);
            return execute("sweep", spec, sweep_args.out, sweep_args.dat, sweep_args.threads, sweep_args.quiet);
        }
        if (*compare) {
            const auto spec = build_spec(compare_args, true);
            return execute("compare", spec, compare_args.out, compare_args.dat, compare_args.threads,
                           compare_args.quiet);
        }
        if (*replay) {
            return run_replay(ra);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
