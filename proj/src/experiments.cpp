// experiments.cpp
#include "gmud/experiments.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <system_error>

#include "gmud/errors.hpp"

namespace gmud {

namespace {

double parse_double(std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(value)) {
        throw FormatError("not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::string shortest(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string feedback_token(const FeedbackMode& mode) { return mode.n ? std::to_string(*mode.n) : "perfect"; }

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        default:
            out.push_back(c);
        }
    }
    return out;
}

std::string_view scheme_color(Scheme scheme) {
    switch (scheme) {
    case Scheme::RegInvFixed:
        return "#d62728";
    case Scheme::RegInvSelection:
        return "#1f77b4";
    case Scheme::Gmud:
        return "#2ca02c";
    }
    return "#000000";
}

} // namespace

std::vector<double> parse_snr_range(std::string_view text) {
    const auto first = text.find(':');
    const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
    if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos) {
        throw FormatError("SNR range must be start:step:stop, got '" + std::string(text) + "'");
    }
    const double start = parse_double(text.substr(0, first));
    const double step = parse_double(text.substr(first + 1, second - first - 1));
    const double stop = parse_double(text.substr(second + 1));
    if (step == 0.0) {
        if (start != stop) {
            throw FormatError("SNR step 0 requires start == stop");
        }
        return {start};
    }
    if ((stop - start) / step < 0.0) {
        throw FormatError("SNR step moves away from stop");
    }
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 10000) {
        throw FormatError("SNR range has too many points");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) {
        // start + i*step accumulates no drift, and rounding to 1e-9 dB keeps
        // "0:0.1:1" printing as 0.3 instead of 0.30000000000000004.
        out.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
    return out;
}

int symbols_for_budget(Modulation mod, int realizations, std::uint64_t bits_per_point) {
    if (realizations < 1) {
        throw DomainError("realizations must be at least 1");
    }
    const std::uint64_t per_use = static_cast<std::uint64_t>(kUsers) * static_cast<std::uint64_t>(bits_per_symbol(mod));
    const std::uint64_t per_real = per_use * static_cast<std::uint64_t>(realizations);
    return static_cast<int>(std::max<std::uint64_t>(1, (bits_per_point + per_real - 1) / per_real));
}

std::vector<SimConfig> expand(const SweepSpec& spec) {
    std::vector<SimConfig> configs;
    for (const auto& fb : spec.feedback) {
        for (Scheme scheme : spec.schemes) {
            SimConfig c;
            c.scheme = scheme;
            c.modulation = spec.modulation;
            c.snr_db = spec.snr_db;
            c.feedback = fb;
            c.realizations = spec.realizations;
            c.symbols = spec.symbols;
            c.seed = spec.seed;
            c.grid = spec.grid;
            c.fixed_row = spec.fixed_row;
            c.gmud_receiver = spec.gmud_receiver;
            configs.push_back(std::move(c));
        }
    }
    return configs;
}

std::vector<BerCurve> run_sweep(const SweepSpec& spec, const RunOptions& options) {
    const auto configs = expand(spec);
    for (const auto& c : configs) {
        validate(c);
    }
    std::vector<BerCurve> curves;
    curves.reserve(configs.size());
    for (const auto& c : configs) {
        curves.push_back(run_ber(c, options));
    }
    return curves;
}

std::vector<FeedbackMode> comparison_feedback(std::span<const FeedbackMode> requested) {
    std::vector<FeedbackMode> out{FeedbackMode{}};
    for (const auto& mode : requested) {
        if (std::find(out.begin(), out.end(), mode) == out.end()) {
            out.push_back(mode);
        }
    }
    return out;
}

void write_csv(std::ostream& out, std::span<const BerCurve> curves) {
    out << "scheme,modulation,feedback_bits,snr_db,ber,bits,errors\n";
    for (const auto& curve : curves) {
        for (const auto& p : curve.points) {
            out << scheme_name(curve.scheme) << ',' << modulation_name(curve.modulation) << ','
                << curve.feedback.label() << ',' << shortest(p.snr_db) << ',' << shortest(p.ber) << ',' << p.bits
                << ',' << p.errors << '\n';
        }
    }
}

std::string render_csv(std::span<const BerCurve> curves) {
    std::ostringstream out;
    write_csv(out, curves);
    return out.str();
}

std::string curve_label(const BerCurve& curve) {
    std::string label(scheme_name(curve.scheme));
    label += curve.feedback.perfect() ? " (perfect CSI)" : " (" + curve.feedback.label() + " bits)";
    return label;
}

std::string render_svg(std::span<const BerCurve> curves, std::string_view title) {
    constexpr double width = 760.0, height = 500.0;
    constexpr double left = 70.0, right = 220.0, top = 40.0, bottom = 55.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    double ber_min = 1.0;
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            x_min = std::min(x_min, p.snr_db);
            x_max = std::max(x_max, p.snr_db);
            if (p.ber > 0.0) {
                ber_min = std::min(ber_min, p.ber);
            }
        }
    }
    if (!std::isfinite(x_min)) {
        x_min = 0.0;
        x_max = 1.0;
    }
    if (x_max == x_min) {
        x_min -= 1.0;
        x_max += 1.0;
    }
    const int decade_lo = std::min(-1, static_cast<int>(std::floor(std::log10(ber_min))));
    const auto px = [&](double snr) { return left + (snr - x_min) / (x_max - x_min) * plot_w; };
    const auto py = [&](double ber) { return top + (0.0 - std::log10(ber)) / (0.0 - decade_lo) * plot_h; };

    std::ostringstream svg;
    svg.setf(std::ios::fixed);
    svg.precision(2);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << xml_escape(title) << "</text>\n";

    for (int d = decade_lo; d <= 0; ++d) {
        const double y = py(std::pow(10.0, d));
        svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w << "\" y2=\"" << y
            << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    const int ticks = 8;
    for (int i = 0; i <= ticks; ++i) {
        const double snr = x_min + (x_max - x_min) * i / ticks;
        const double x = px(snr);
        svg << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + plot_h
            << "\" stroke=\"#eeeeee\"/>\n";
        svg << "<text x=\"" << x << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
            << shortest(std::round(snr * 100.0) / 100.0) << "</text>\n";
    }
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\">SNR (dB)</text>\n";
    svg << "<text transform=\"translate(18," << top + plot_h / 2
        << ") rotate(-90)\" text-anchor=\"middle\">bit error rate</text>\n";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        const std::string dash = c.feedback.perfect() ? "" : " stroke-dasharray=\"" + std::to_string(3 + 3 * (i % 3)) + ",3\"";
        std::string points;
        const auto flush = [&] {
            if (!points.empty()) {
                svg << "<polyline fill=\"none\" stroke=\"" << scheme_color(c.scheme) << "\" stroke-width=\"1.8\""
                    << dash << " points=\"" << points << "\"/>\n";
                points.clear();
            }
        };
        for (const auto& p : c.points) {
            if (p.ber > 0.0) {
                std::ostringstream pt;
                pt.setf(std::ios::fixed);
                pt.precision(2);
                pt << px(p.snr_db) << ',' << py(p.ber) << ' ';
                points += pt.str();
                svg << "<circle cx=\"" << px(p.snr_db) << "\" cy=\"" << py(p.ber) << "\" r=\"2.5\" fill=\""
                    << scheme_color(c.scheme) << "\"/>\n";
            } else {
                flush();
            }
        }
        flush();

        const double ly = top + 14.0 + 20.0 * static_cast<double>(i);
        const double lx = left + plot_w + 12.0;
        svg << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 26 << "\" y2=\"" << ly << "\" stroke=\""
            << scheme_color(c.scheme) << "\" stroke-width=\"1.8\"" << dash << "/>\n";
        svg << "<text x=\"" << lx + 32 << "\" y=\"" << ly + 4 << "\">" << xml_escape(curve_label(c)) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string render_dat(std::span<const BerCurve> curves) {
    std::ostringstream out;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        if (i > 0) {
            out << "\n\n";
        }
        out << "# " << curve_label(curves[i]) << ", " << modulation_name(curves[i].modulation) << "\n";
        out << "# snr_db ber std_error\n";
        for (const auto& p : curves[i].points) {
            out << shortest(p.snr_db) << ' ' << shortest(p.ber) << ' ' << shortest(p.std_error) << '\n';
        }
    }
    return out.str();
}

OutputPaths output_paths(const std::filesystem::path& csv, bool with_dat) {
    OutputPaths paths;
    paths.csv = csv;
    auto stem = csv;
    stem.replace_extension();
    paths.svg = stem.string() + ".svg";
    paths.manifest = stem.string() + ".manifest.json";
    if (with_dat) {
        paths.dat = stem.string() + ".dat";
    }
    return paths;
}

nlohmann::json spec_to_json(const SweepSpec& spec) {
    nlohmann::json j;
    j["schemes"] = nlohmann::json::array();
    for (Scheme s : spec.schemes) {
        j["schemes"].push_back(std::string(scheme_name(s)));
    }
    j["modulation"] = std::string(modulation_name(spec.modulation));
    j["snr_db"] = spec.snr_db;
    j["feedback"] = nlohmann::json::array();
    for (const auto& fb : spec.feedback) {
        j["feedback"].push_back(feedback_token(fb));
    }
    j["realizations"] = spec.realizations;
    j["symbols"] = spec.symbols;
    j["seed"] = spec.seed;
    j["grid"] = {{"n_r", spec.grid.n_r},
                 {"n_theta", spec.grid.n_theta},
                 {"n_power", spec.grid.n_power},
                 {"refine", spec.grid.refine}};
    j["fixed_row"] = std::string(fixed_row_name(spec.fixed_row));
    j["gmud_receiver"] = std::string(gmud_receiver_name(spec.gmud_receiver));
    return j;
}

SweepSpec spec_from_json(const nlohmann::json& j) {
    try {
        SweepSpec spec;
        for (const auto& s : j.at("schemes")) {
            spec.schemes.push_back(parse_scheme(s.get<std::string>()));
        }
        spec.modulation = parse_modulation(j.at("modulation").get<std::string>());
        spec.snr_db = j.at("snr_db").get<std::vector<double>>();
        for (const auto& fb : j.at("feedback")) {
            spec.feedback.push_back(parse_feedback_mode(fb.get<std::string>()));
        }
        spec.realizations = j.at("realizations").get<int>();
        spec.symbols = j.at("symbols").get<int>();
        spec.seed = j.at("seed").get<std::uint64_t>();
        const auto& grid = j.at("grid");
        spec.grid.n_r = grid.at("n_r").get<int>();
        spec.grid.n_theta = grid.at("n_theta").get<int>();
        spec.grid.n_power = grid.at("n_power").get<int>();
        spec.grid.refine = grid.at("refine").get<bool>();
        spec.fixed_row = parse_fixed_row(j.value("fixed_row", std::string("first-row")));
        spec.gmud_receiver = parse_gmud_receiver(j.value("gmud_receiver", std::string("principal-row")));
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed sweep config: ") + e.what());
    }
}

nlohmann::json make_manifest(std::string_view command, const SweepSpec& spec, double duration_s,
                             const OutputPaths& paths) {
    nlohmann::json j;
    j["tool"] = "gmud";
    j["version"] = std::string(kToolVersion);
    j["command"] = std::string(command);
    j["seed"] = spec.seed;
    j["config"] = spec_to_json(spec);
    j["duration_s"] = duration_s;
    j["outputs"] = {{"csv", paths.csv.string()}, {"svg", paths.svg.string()}, {"manifest", paths.manifest.string()}};
    if (!paths.dat.empty()) {
        j["outputs"]["dat"] = paths.dat.string();
    }
    return j;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace gmud
