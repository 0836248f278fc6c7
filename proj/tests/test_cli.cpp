#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int status;
    std::string out;
};

Run run(const std::string& args, const std::string& redirect = "2>/dev/null") {
    const std::string cmd = std::string(GMUD_CLI_PATH) + " " + args + " " + redirect;
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        out.append(buf.data(), n);
    }
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Run run_stderr(const std::string& args) {
    return run(args, "2>&1 1>/dev/null");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream all;
    all << in.rdbuf();
    return all.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("gmud_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string sweep_args(const std::string& out) const {
        return "sweep --scheme gmud --mod qpsk --snr 0:10:20 --feedback perfect --realizations 20 --symbols 10 -q --out " +
               (dir / out).string();
    }

    fs::path dir;
};

const std::string kDiag = "--matrix \"2 0 0 0 0 0 1 0\"";

} // namespace

TEST_F(CliTest, DecomposeGeometricMean) {
    const auto r = run("decompose " + kDiag + " --r 1.4142135 --theta1 0 --theta2 0");
    ASSERT_EQ(r.status, 0);
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["R"][0][0][0].get<double>(), 1.41421, 1e-5);
    EXPECT_NEAR(j["R"][1][1][0].get<double>(), 1.41421, 1e-5);
    EXPECT_EQ(j["R"][0][1][0].get<double>(), 0.0);
    EXPECT_LT(j["residual"].get<double>(), 1e-10);
    EXPECT_TRUE(j.contains("P"));
    EXPECT_TRUE(j.contains("Q"));
    EXPECT_TRUE(j.contains("cone_angle"));
}

TEST_F(CliTest, DecomposeOutOfRangeNamesInterval) {
    const auto r = run_stderr("decompose " + kDiag + " --r 5");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.out.find("[1, 2]"), std::string::npos) << r.out;
}

TEST_F(CliTest, DecomposeSvdBoundary) {
    const auto r = run("decompose " + kDiag + " --r 2");
    ASSERT_EQ(r.status, 0);
    const json j = json::parse(r.out);
    const double q00 = std::hypot(j["Q"][0][0][0].get<double>(), j["Q"][0][0][1].get<double>());
    const double q10 = std::hypot(j["Q"][1][0][0].get<double>(), j["Q"][1][0][1].get<double>());
    EXPECT_NEAR(q00, 1.0, 1e-12);
    EXPECT_NEAR(q10, 0.0, 1e-12);
    EXPECT_NEAR(j["cone_angle"].get<double>(), 0.0, 1e-12);
}

TEST_F(CliTest, DecomposeFromFileAndBadInput) {
    std::ofstream(dir / "h.txt") << "2 0 0 0\n0 0 1 0\n";
    EXPECT_EQ(run("decompose --matrix " + (dir / "h.txt").string()).status, 0);
    EXPECT_NE(run("decompose --matrix \"1 2 3\"").status, 0);
    EXPECT_NE(run("decompose --matrix \"1 0 0 0 0 0 x 0\"").status, 0);
}

TEST_F(CliTest, SweepIsDeterministic) {
    ASSERT_EQ(run(sweep_args("a.csv") + " --seed 7").status, 0);
    ASSERT_EQ(run(sweep_args("b.csv") + " --seed 7").status, 0);
    const std::string a = slurp(dir / "a.csv");
    EXPECT_EQ(a, slurp(dir / "b.csv"));
    EXPECT_EQ(a.substr(0, a.find('\n')), "scheme,modulation,feedback_bits,snr_db,ber,bits,errors");
    EXPECT_TRUE(fs::exists(dir / "a.svg"));
    EXPECT_TRUE(fs::exists(dir / "a.manifest.json"));
    EXPECT_FALSE(fs::exists(dir / "a.dat"));
    for (const auto& entry : fs::directory_iterator(dir)) {
        EXPECT_NE(entry.path().extension(), ".tmp");
    }
}

TEST_F(CliTest, SweepSinglePoint) {
    ASSERT_EQ(run("sweep --scheme reg-inv-fixed --snr 10:0:10 --realizations 5 --symbols 4 -q --out " +
                  (dir / "one.csv").string())
                  .status,
              0);
    const std::string csv = slurp(dir / "one.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST_F(CliTest, SeedFromEnvironmentAndFlagWins) {
    const std::string cli = std::string(GMUD_CLI_PATH);
    ASSERT_EQ(std::system(("GMUD_SEED=7 " + cli + " " + sweep_args("env.csv")).c_str()), 0);
    ASSERT_EQ(run(sweep_args("flag.csv") + " --seed 7").status, 0);
    EXPECT_EQ(slurp(dir / "env.csv"), slurp(dir / "flag.csv"));
    EXPECT_EQ(json::parse(slurp(dir / "env.manifest.json"))["seed"], 7);

    ASSERT_EQ(std::system(("GMUD_SEED=7 " + cli + " " + sweep_args("wins.csv") + " --seed 9").c_str()), 0);
    EXPECT_EQ(json::parse(slurp(dir / "wins.manifest.json"))["seed"], 9);
    EXPECT_NE(std::system(("GMUD_SEED=abc " + cli + " " + sweep_args("bad.csv") + " 2>/dev/null").c_str()), 0);
}

TEST_F(CliTest, ManifestReplayIsByteIdentical) {
    ASSERT_EQ(run(sweep_args("orig.csv") + " --seed 3 --dat").status, 0);
    EXPECT_TRUE(fs::exists(dir / "orig.dat"));
    const json manifest = json::parse(slurp(dir / "orig.manifest.json"));
    EXPECT_EQ(manifest["tool"], "gmud");
    EXPECT_EQ(manifest["command"], "sweep");
    EXPECT_EQ(manifest["config"]["schemes"], json::array({"gmud"}));
    EXPECT_TRUE(manifest.contains("duration_s"));
    ASSERT_EQ(run("replay -q --manifest " + (dir / "orig.manifest.json").string() + " --out " +
                  (dir / "again.csv").string())
                  .status,
              0);
    EXPECT_EQ(slurp(dir / "orig.csv"), slurp(dir / "again.csv"));
}

TEST_F(CliTest, CompareCurveCount) {
    ASSERT_EQ(run("compare --mod 16qam --snr 0:10:20 --feedback 4 --feedback perfect --realizations 10 --symbols 5 -q "
                  "--out " +
                  (dir / "cmp.csv").string())
                  .status,
              0);
    std::istringstream csv(slurp(dir / "cmp.csv"));
    std::string line;
    std::getline(csv, line);
    std::set<std::string> curves;
    while (std::getline(csv, line)) {
        const auto first = line.find(',');
        const auto third = line.find(',', line.find(',', first + 1) + 1);
        curves.insert(line.substr(0, first) + line.substr(line.find(',', first + 1), third - line.find(',', first + 1)));
    }
    EXPECT_EQ(curves.size(), 6u);
}

TEST_F(CliTest, InvalidFlagsExitNonzero) {
    EXPECT_NE(run("sweep --scheme nope --out " + (dir / "x.csv").string()).status, 0);
    EXPECT_NE(run("sweep --scheme gmud --mod 8psk --out " + (dir / "x.csv").string()).status, 0);
    EXPECT_NE(run("sweep --scheme gmud --snr 10:1:0 --out " + (dir / "x.csv").string()).status, 0);
    EXPECT_NE(run("sweep --scheme gmud --feedback zero --out " + (dir / "x.csv").string()).status, 0);
    EXPECT_NE(run("sweep --scheme gmud --realizations 0 --out " + (dir / "x.csv").string()).status, 0);
    EXPECT_NE(run("frobnicate").status, 0);
    EXPECT_FALSE(fs::exists(dir / "x.csv"));
}

TEST_F(CliTest, QuantizeRoundTrip) {
    const auto enc = run("quantize --scheme gmud --n 4 --matrix \"1 0 0 0.5 0.25 0 -0.75 0.1\"");
    ASSERT_EQ(enc.status, 0);
    const json j = json::parse(enc.out);
    const std::string bits = j["bits"];
    EXPECT_EQ(bits.size(), 48u);
    const auto dec = run("quantize --scheme gmud --n 4 --bits " + bits);
    ASSERT_EQ(dec.status, 0);
    EXPECT_EQ(json::parse(dec.out)["levels"], j["levels"]);

    const json zero = json::parse(run("quantize --scheme gmud --n 4 --bits " + std::string(48, '0')).out);
    EXPECT_EQ(zero["levels"][0].get<double>(), -0.99609375);
    EXPECT_EQ(zero["levels"][4].get<double>(), 0.0078125);
    EXPECT_NE(run("quantize --scheme gmud --n 4 --bits 0101").status, 0);
}
