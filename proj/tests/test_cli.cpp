#include <gtest/gtest.h>

#include <levymp/cli.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace levymp;
using levymp::cli::RunConfig;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("levymp_test_" + name);
    fs::remove_all(p);
    return p;
}

json read_json(const fs::path& p) {
    std::ifstream f(p);
    return json::parse(f);
}

std::string read_text(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

RunConfig base(const std::string& cmd, const std::string& dir) {
    RunConfig c;
    c.command = cmd;
    c.output_path = scratch_dir(dir).string();
    return c;
}

int run(const RunConfig& c, std::string* out = nullptr) {
    std::ostringstream o, e;
    int code = cli::run(c, o, e);
    if (out) *out = o.str();
    return code;
}

int shell(const std::string& args) {
    std::string cmd = std::string(LEVYMP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

template <class T>
void expect_round_trip(const T& value) {
    json j = value;
    T back = json::parse(j.dump()).get<T>();
    EXPECT_TRUE(back == value) << j.dump();
}

}  // namespace

TEST(Cli, DimExample) {
    auto c = base("dim", "dim");
    c.alphas = std::vector<ExactNumber>{parse_exact("1.8"), parse_exact("1.5")};
    c.k = 2;
    std::string out;
    ASSERT_EQ(run(c, &out), 0);
    json r = read_json(fs::path(c.output_path) / "report.json");
    EXPECT_NEAR(r["dim_value"].get<double>(), 4.0 / 3.0, 1e-12);
    EXPECT_TRUE(r["exists"].get<bool>());
    EXPECT_NE(out.find("dim_value"), std::string::npos);
    EXPECT_TRUE(fs::exists(fs::path(c.output_path) / "config.json"));

    c.alphas = std::vector<ExactNumber>{2.0, 2.0};
    c.k = 5;
    ASSERT_EQ(run(c), 0);
    EXPECT_NEAR(read_json(fs::path(c.output_path) / "report.json")["dim_value"].get<double>(), 2.0, 1e-12);
}

TEST(Cli, ExistsBoundaryFromMatrix) {
    auto c = base("exists", "exists");
    c.matrix = cli::parse_matrix(json::parse("[[0.75,0],[1,0.75]]"), "matrix");
    c.k = 3;
    ASSERT_EQ(run(c), 0);
    json r = read_json(fs::path(c.output_path) / "report.json");
    EXPECT_TRUE(r["exists"].get<bool>());
    EXPECT_TRUE(r["boundary_case"].get<bool>());
    EXPECT_EQ(r["dim_clamped"].get<double>(), 0.0);
}

TEST(Cli, AnalyzeWritesProfile) {
    auto c = base("analyze", "analyze");
    c.matrix = cli::parse_matrix(json::parse("[[0.6,-1],[1,0.6]]"), "matrix");
    ASSERT_EQ(run(c), 0);
    SpectralProfile p = read_json(fs::path(c.output_path) / "profile.json").get<SpectralProfile>();
    EXPECT_EQ(p.case_label, CaseLabel::A1_rot);
    EXPECT_NEAR(p.alphas[0], 5.0 / 3.0, 1e-12);
}

TEST(Cli, ValidationErrorsExitTwo) {
    auto c = base("dim", "invalid");
    EXPECT_EQ(run(c), 2);  // neither matrix nor alphas
    c.alphas = std::vector<ExactNumber>{1.8, 1.5};
    c.matrix = cli::parse_matrix(json::parse("[[0.5,0],[0,0.5]]"), "matrix");
    EXPECT_EQ(run(c), 2);  // both
    c.matrix.reset();
    c.command = "frobnicate";
    EXPECT_EQ(run(c), 2);
    c.command = "dim";
    c.k = 1;
    EXPECT_EQ(run(c), 2);
    c.k = 2;
    c.alphas = std::vector<ExactNumber>{2.5, 1.5};
    EXPECT_EQ(run(c), 2);
    c.alphas = std::vector<ExactNumber>{1.5, 1.5};
    c.case_label = "Q7";
    EXPECT_EQ(run(c), 2);
    RunConfig d;
    EXPECT_THROW(cli::apply_json(d, json::parse(R"({"command": "dim", "bogus": 1})")), ConfigError);
    try {
        cli::apply_json(d, json::parse(R"({"matrix": [[0.5, 0], [0, "x"]]})"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("matrix[1]"), std::string::npos) << e.what();
    }
    EXPECT_THROW(cli::apply_json(d, json::parse(R"({"tolerances": {"nope": 1}})")), ConfigError);
}

TEST(Cli, StrictInconclusiveExitsThree) {
    auto c = base("verify-intersection", "strict");
    c.alphas = std::vector<ExactNumber>{1.9, 1.9};
    c.samples = 2000;
    c.ladder = {4, 8, 16, 32, 64};
    c.tolerances.rules.convergent_below = -100;
    c.tolerances.rules.divergent_above = 100;
    c.tolerances.rules.growth_fraction = 100;
    EXPECT_EQ(run(c), 0);
    c.strict = true;
    EXPECT_EQ(run(c), 3);
    ConvergenceVerdict v = read_json(fs::path(c.output_path) / "verdict.json").get<ConvergenceVerdict>();
    EXPECT_EQ(v.verdict, Verdict::inconclusive);
    std::string csv = read_text(fs::path(c.output_path) / "ladder.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "radius,partial_value,std_error");
}

TEST(Cli, ConfigRoundTrip) {
    RunConfig c;
    c.command = "verify-prop42";
    c.alphas = std::vector<ExactNumber>{parse_exact("4/3")};
    c.k = 3;
    c.seed = 1234567890123ULL;
    c.ladder = {10, 20, 40, 80, 160};
    c.fixed = 3.0;
    c.beta_grid = {0.1, 0.7};
    c.eps = 1.0 / 3.0;
    c.tolerances.rules.growth_rungs = 4;
    json j = cli::config_to_json(c);
    RunConfig d;
    cli::apply_json(d, json::parse(j.dump()));
    EXPECT_EQ(cli::config_to_json(d), j);
    EXPECT_EQ((*d.alphas)[0].exact, Rational(4, 3));
    EXPECT_EQ(d.eps, c.eps);
}

TEST(Cli, ReportRoundTrips) {
    expect_round_trip(classify_exponent(make_exponent({{exact_from_double(0.75), exact_from_double(0)},
                                                       {exact_from_double(1), exact_from_double(0.75)}})));
    expect_round_trip(classify_exponent(make_exponent({{0.6, -1.0}, {1.0, 0.6}})));
    expect_round_trip(exists_multiple(profile_from_alphas({1.8, 1.5}), 2));
    expect_round_trip(exists_multiple(profile_from_alphas({2, 2, 2}), 3));
    expect_round_trip(KernelSpec::log_kernel(1.6));
    expect_round_trip(RegionSpec{2, 3.5, 7.25, std::pair{2, 3}, false});
    auto k = KernelSpec::anisotropic_kernel({1.8, 1.2});
    auto est = mc_region_integral(k, RegionSpec{2, 5, 5, std::nullopt, false}, 2000, 3);
    expect_round_trip(est);
    std::vector<double> lad{10, 20, 40, 80, 160};
    auto fit = asymptotic_exponent_fit(k, 1, Direction::diagonal, make_ladder(Direction::diagonal, lad), 100, 1);
    expect_round_trip(fit.fit);
    expect_round_trip(fit);
    const double grid[2] = {0.5, 1.5};
    auto scan = series_threshold_scan(1.8, 1.2, 2, grid, 1024);
    expect_round_trip(scan[0]);
    expect_round_trip(scan[1].verdict);
    ConvergenceVerdict inf_v;
    inf_v.tail_exponent = -std::numeric_limits<double>::infinity();
    inf_v.ladder = {{1.0, 0.1}};
    expect_round_trip(inf_v);
    ThresholdEstimate te;
    te.estimate = 0.93;
    te.lower = 0.9;
    te.upper = 1.0;
    te.closed_form = 14.0 / 15.0;
    te.evaluations = scan;
    expect_round_trip(te);
    auto rep = scaling_check(profile_from_alphas({2, 2}), make_exponent({{0.5, 0.0}, {0.0, 0.5}}), 4.0, 1.0, 50, 1);
    json rj = rep;
    ScalingReport back = json::parse(rj.dump()).get<ScalingReport>();
    EXPECT_EQ(back.entries, rep.entries);
    EXPECT_EQ(back.c, rep.c);
    CandidateTuple t{{1, 5}, {0.1, 0.5}};
    json tj = t;
    CandidateTuple tb = json::parse(tj.dump()).get<CandidateTuple>();
    EXPECT_EQ(tb.indices, t.indices);
    EXPECT_EQ(tb.times, t.times);
}

TEST(Cli, CsvFormattingRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 123456789.123456789, -0.0}) {
        std::string s = format_double(v);
        EXPECT_EQ(std::stod(s), v) << s;
    }
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    CsvWriter w({"a", "b"});
    w.row({1.0, 0.5});
    EXPECT_EQ(w.str(), "a,b\n1,0.5\n");
    EXPECT_THROW(w.row({1.0}), DomainError);
}

TEST(Cli, AtomicWriteLeavesNoTemporaries) {
    fs::path d = scratch_dir("atomic");
    atomic_write(d / "x.txt", "first");
    atomic_write(d / "x.txt", "second");
    EXPECT_EQ(read_text(d / "x.txt"), "second");
    int files = 0;
    for (auto& e : fs::directory_iterator(d)) {
        (void)e;
        ++files;
    }
    EXPECT_EQ(files, 1);
}

TEST(Cli, SimulateCsvIsReproducible) {
    auto c = base("simulate", "sim_a");
    c.alphas = std::vector<ExactNumber>{1.5, 1.2};
    c.n_steps = 5000;
    c.seed = 11;
    ASSERT_EQ(run(c), 0);
    std::string a = read_text(fs::path(c.output_path) / "path.csv");
    c.output_path = scratch_dir("sim_b").string();
    ASSERT_EQ(run(c), 0);
    EXPECT_EQ(a, read_text(fs::path(c.output_path) / "path.csv"));
    EXPECT_EQ(a.substr(0, a.find('\n')), "t,x1,x2");
}

TEST(Cli, BinaryEndToEnd) {
    fs::path d = scratch_dir("binary");
    EXPECT_EQ(shell("dim --alphas 1.8,1.5 --k 2 -o " + d.string()), 0);
    EXPECT_NEAR(read_json(d / "report.json")["dim_value"].get<double>(), 4.0 / 3.0, 1e-12);
    EXPECT_EQ(shell("exists --matrix '[[0.75,0],[1,0.75]]' --k 3 -o " + d.string()), 0);
    EXPECT_TRUE(read_json(d / "report.json")["boundary_case"].get<bool>());
    EXPECT_EQ(shell("exists --alphas 4/3,4/3 --case A2 --k 3 -o " + d.string()), 0);
    EXPECT_TRUE(read_json(d / "report.json")["boundary_case"].get<bool>());
    EXPECT_EQ(shell("dim --alphas 1.8,1.5 --matrix '[[0.5,0],[0,0.5]]' -o " + d.string()), 2);
    EXPECT_EQ(shell("dim --alphas 1.8,abc -o " + d.string()), 2);
    EXPECT_EQ(shell("nonsense --alphas 1.8,1.5 -o " + d.string()), 2);
    EXPECT_EQ(shell("dim --bogus-flag -o " + d.string()), 2);

    fs::path cfg = d / "in.json";
    {
        std::ofstream f(cfg);
        f << R"({"command": "dim", "alphas": [2, 2], "k": 5})";
    }
    EXPECT_EQ(shell("dim --config " + cfg.string() + " -o " + d.string()), 0);
    EXPECT_NEAR(read_json(d / "report.json")["dim_value"].get<double>(), 2.0, 1e-12);
    // flags override the file
    EXPECT_EQ(shell("dim --config " + cfg.string() + " --alphas 1.8,1.5 --k 2 -o " + d.string()), 0);
    EXPECT_NEAR(read_json(d / "report.json")["dim_value"].get<double>(), 4.0 / 3.0, 1e-12);
    json echoed = read_json(d / "config.json");
    EXPECT_EQ(echoed["k"].get<int>(), 2);
}
