#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cli_io.hpp"

using namespace epwcli;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("epw_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Run {
    int code = -1;
    std::string out, err;
};

Run run(const std::string& args) {
    const fs::path dir = scratch("run");
    const std::string cmd = std::string(EPW_CLI_PATH) + " " + args + " > " + (dir / "out").string() + " 2> " +
                            (dir / "err").string();
    const int st = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    r.out = slurp(dir / "out");
    r.err = slurp(dir / "err");
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Csv, RoundTripIsBitExact) {
    const fs::path dir = scratch("csv");
    const std::vector<double> xs{0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 1.0 - 1e-16, -0.0};
    std::vector<Row> rows;
    for (double x : xs) rows.push_back({x, x * x});
    {
        std::ofstream out(dir / "a.csv", std::ios::binary);
        write_csv(out, {"x", "x2"}, rows);
    }
    const auto cols = read_csv_columns(dir / "a.csv");
    ASSERT_EQ(cols.at("x").size(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_EQ(cols.at("x")[i], xs[i]);
        EXPECT_EQ(cols.at("x2")[i], xs[i] * xs[i]);
    }
    EXPECT_NE(slurp(dir / "a.csv").find("\r\n"), std::string::npos);
}

TEST(Csv, EmptyRowsGiveHeaderOnly) {
    std::ostringstream os;
    write_csv(os, {"a", "b,c"}, {});
    EXPECT_EQ(os.str(), "a,\"b,c\"\r\n");
    EXPECT_THROW(write_csv(os, {"a"}, {Row{1.0, 2.0}}), IoError);
}

TEST(Csv, QuotesFields) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Manifest, DigestsMatchFiles) {
    const fs::path dir = scratch("manifest");
    {
        OutputDir out(dir, "epw test", "k=1");
        out.text("a.txt", "abc");
        out.csv("b.csv", {"x"}, {Row{1.0}});
        out.finish();
    }
    const auto m = json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(m["tool_version"], kToolVersion);
    EXPECT_EQ(m["command_line"], "epw test");
    EXPECT_EQ(m["digests"].size(), 2u);
    // SHA-256 of "abc"
    EXPECT_EQ(m["digests"]["a.txt"], "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(m["digests"]["b.csv"], sha256_file(dir / "b.csv"));
}

TEST(Config, ParsesAndRejects) {
    const fs::path dir = scratch("config");
    {
        std::ofstream out(dir / "ok.cfg");
        out << "# comment\n\n--kappa = 1\ntol=1e-12\n";
    }
    const auto kv = read_config(dir / "ok.cfg");
    ASSERT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv[0].first, "kappa");
    EXPECT_EQ(kv[0].second, "1");
    {
        std::ofstream out(dir / "bad.cfg");
        out << "kappa\n";
    }
    EXPECT_THROW(read_config(dir / "bad.cfg"), IoError);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("speed --no-such-flag").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("speed --kappa -1").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, SpeedColdPrintsC0) {
    const auto r = run("speed --kappa 0");
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "kappa,c,residual,gap,gap_over_sqrt_kappa\r");
    const double c = std::stod(row.substr(row.find(',') + 1));
    EXPECT_NEAR(c, 1.585201, 1e-6);
}

TEST(Cli, CommandLineOverridesConfig) {
    const fs::path dir = scratch("override");
    {
        std::ofstream out(dir / "run.cfg");
        out << "kappa=1\n";
    }
    const auto from_cfg = run("--config " + (dir / "run.cfg").string() + " speed");
    ASSERT_EQ(from_cfg.code, 0) << from_cfg.err;
    EXPECT_NE(from_cfg.out.find("\n1,1.56"), std::string::npos) << from_cfg.out;
    const auto overridden = run("--config " + (dir / "run.cfg").string() + " speed --kappa 0");
    ASSERT_EQ(overridden.code, 0) << overridden.err;
    EXPECT_NE(overridden.out.find("\n0,1.5852"), std::string::npos) << overridden.out;
    EXPECT_EQ(run("--config " + (dir / "missing.cfg").string() + " speed").code, 2);
}

TEST(Cli, OutDirGetsManifest) {
    const fs::path dir = scratch("outdir");
    const auto r = run("speed --kappa 1 --kappa 0.01 --out-dir " + (dir / "s").string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto m = json::parse(slurp(dir / "s" / "manifest.json"));
    EXPECT_EQ(m["digests"]["speed.csv"], sha256_file(dir / "s" / "speed.csv"));
    EXPECT_NE(m["config"].get<std::string>().find("kappa"), std::string::npos);
    EXPECT_EQ(read_csv_columns(dir / "s" / "speed.csv").at("c").size(), 2u);
}

TEST(Cli, SimulateAndReanalyze) {
    const fs::path dir = scratch("sim");
    const auto r = run("simulate --experiment gaussian-v --modes 256 --tmax 0.05 --out-dir " + (dir / "s").string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rep = json::parse(slurp(dir / "s" / "report.json"));
    EXPECT_TRUE(fs::exists(dir / "s" / "history.csv"));
    EXPECT_TRUE(fs::exists(dir / "s" / "snap_0000050.csv"));
    const auto a = run("analyze-blowup " + (dir / "s" / "snap_0000050.csv").string());
    ASSERT_EQ(a.code, 0) << a.err;
    const auto j = json::parse(a.out);
    EXPECT_EQ(j["n_modes"], 256);
    EXPECT_EQ(run("analyze-blowup " + (dir / "nope.csv").string()).code, 1);
}
