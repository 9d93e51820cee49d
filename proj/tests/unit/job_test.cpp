#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gwrecon/job.hpp"
#include "gwrecon/selftest.hpp"

using namespace gwr;
namespace fs = std::filesystem;

namespace
{

job::job_spec parse(const std::string &text) { return job::parse_job(text); }

const std::string line_j = R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2},
                               "pipeline": "j-function", "caps": {"q_degree": 2, "deformation_degree": 1}})";

const nlohmann::json *find_entry(const nlohmann::json &table, std::size_t index, int q, int z)
{
    for (const auto &e : table)
        if (e["index"][0] == index && e["q_degree"] == q && e["z_power"] == z && e["monomial"].empty())
            return &e;
    return nullptr;
}

fs::path scratch_dir()
{
    auto d = fs::temp_directory_path() / ("gwrecon_job_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string &args, std::string *out = nullptr)
{
    auto dir = scratch_dir();
    auto out_file = dir / "stdout.txt";
    std::string cmd = std::string(GWRECON_CLI) + " " + args + " > " + out_file.string() + " 2> " + (dir / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    if (out) {
        std::ifstream in(out_file);
        std::stringstream s;
        s << in.rdbuf();
        *out = s.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_job(const std::string &name, const std::string &text)
{
    auto p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p.string();
}

} // namespace

TEST(Job, LineJFunctionDegreeOne)
{
    auto out = job::run(parse(line_j));
    const auto &point = out.document["result"]["point"];
    auto a = find_entry(point, 0, 1, -1);
    auto b = find_entry(point, 1, 1, -2);
    ASSERT_TRUE(a && b);
    EXPECT_EQ((*a)["value"], "-1/1");
    EXPECT_EQ((*b)["value"], "-2/1");
    EXPECT_EQ(out.document["schema"], "gwrecon.output/1");
    // no other Q^1 terms
    int q1 = 0;
    for (const auto &e : point)
        q1 += e["q_degree"] == 1;
    EXPECT_EQ(q1, 2);
}

TEST(Job, PlaneCurveTable)
{
    auto spec = parse(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 3},
                          "pipeline": "nd-invariants", "dmax": 2})");
    auto out = job::run(spec);
    const auto &t = out.document["result"]["table"];
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0]["N_d"], "1/1");
    EXPECT_EQ(t[1]["N_d"], "1/1");
    EXPECT_EQ(t[0]["oracle"], t[0]["N_d"]);
    EXPECT_EQ(t[1]["oracle"], t[1]["N_d"]);
    EXPECT_EQ(out.csv, "d,N_d,oracle\n1,1,1\n2,1,1\n");
}

TEST(Job, RejectsZeroRank)
{
    auto spec = parse(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 0}, "pipeline": "seed"})");
    try {
        job::run(spec);
        FAIL() << "expected a validation error";
    } catch (const validation_error &e) {
        EXPECT_STREQ(e.what(), "n must be ≥ 1");
    }
}

TEST(Job, ValidationRules)
{
    auto bad = [](const std::string &text) {
        EXPECT_THROW(job::validate(job::parse_job(text)), validation_error) << text;
    };
    bad(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2}, "pipeline": "nd-invariants", "dmax": 2})");
    bad(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2}, "pipeline": "seed", "caps": {"q_degree": 0}})");
    bad(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2}, "pipeline": "k-j-function"})");
    bad(R"({"schema": "gwrecon.job/1", "target": {"type": "projective-K", "n": 2}, "pipeline": "s-matrix"})");
    bad(R"({"schema": "gwrecon.job/1", "target": {"type": "sphere", "n": 2}, "pipeline": "seed"})");
    bad(R"({"schema": "gwrecon.job/1", "target": {"type": "local", "n": 2}, "pipeline": "seed"})");
    bad(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2}, "pipeline": "j-function",
            "variables": ["s"], "input": [{"basis": 1, "coefficient": "1/2"}]})");
    bad(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2}, "pipeline": "j-function",
            "input": [{"basis": 1, "coefficient": "1/2", "monomial": {"u": 1}}]})");
    bad(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2}, "pipeline": "s-matrix",
            "output": {"format": "csv"}})");
    EXPECT_THROW(job::parse_job(std::string(R"({"schema": "gwrecon.job/2"})")), validation_error);
    EXPECT_THROW(job::parse_job(std::string("{not json")), validation_error);
    EXPECT_THROW(job::parse_job(std::string(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2},
                                               "pipeline": "seed", "extra": 1})")),
                 validation_error);
    EXPECT_THROW(job::parse_job(std::string(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2},
                                               "pipeline": "j-function", "variables": ["s"],
                                               "input": [{"basis": 0, "coefficient": "1/0", "monomial": {"s": 1}}]})")),
                 validation_error);
}

TEST(Job, LowCapsAreAComputationError)
{
    auto spec = parse(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 3},
                          "pipeline": "nd-invariants", "dmax": 3, "caps": {"q_degree": 3, "deformation_degree": 4}})");
    EXPECT_THROW(job::run(spec), computation_error);
}

TEST(Job, JobRoundTrip)
{
    const std::string text = R"({"schema": "gwrecon.job/1", "target": {"type": "local", "n": 2, "l": 1},
        "pipeline": "j-function", "variables": ["s", "u"], "caps": {"q_degree": 2, "deformation_degree": 3},
        "input": [{"basis": 1, "loop_power": 1, "coefficient": "-3/6", "monomial": {"s": 1, "u": 2}}],
        "basis": [["1"], ["1/2", "2"]], "output": {"path": "out.json", "format": "csv"}})";
    auto a = parse(text);
    auto j1 = job::to_json(a);
    auto b = job::parse_job(j1);
    EXPECT_EQ(a, b);
    EXPECT_EQ(job::to_json(b).dump(), j1.dump());
    EXPECT_EQ(a.input[0].coefficient, rational(-1, 2));
    EXPECT_EQ(a.target.lambda_order, 16);
}

TEST(Job, OutputTablesRoundTrip)
{
    auto h = job::run(parse(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2},
        "pipeline": "j-function", "caps": {"q_degree": 2, "deformation_degree": 2}, "variables": ["s"],
        "input": [{"basis": 1, "coefficient": "1/3", "monomial": {"s": 1}}]})"));
    for (const char *key : {"point", "tau", "c"}) {
        const auto &t = h.document["result"][key];
        auto parsed = job::parse_h_table(t);
        EXPECT_EQ(job::to_json(parsed).dump(), t.dump()) << key;
    }
    auto k = job::run(parse(R"({"schema": "gwrecon.job/1", "target": {"type": "projective-K", "n": 2},
        "pipeline": "k-birkhoff", "caps": {"q_degree": 1, "deformation_degree": 1}})"));
    for (const char *key : {"U", "V", "W"}) {
        const auto &t = k.document["result"][key];
        auto parsed = job::parse_k_table(t);
        EXPECT_FALSE(parsed.empty());
        EXPECT_EQ(job::to_json(parsed).dump(), t.dump()) << key;
    }
    // a whole document survives parse/dump unchanged
    auto text = job::render(h, "json");
    EXPECT_EQ(nlohmann::json::parse(text).dump(2) + "\n", text);
}

TEST(Job, Deterministic)
{
    auto spec = parse(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 2},
                          "pipeline": "s-matrix", "caps": {"q_degree": 2, "deformation_degree": 2, "z_window": [24, 24]}})");
    EXPECT_EQ(job::render(job::run(spec), "json"), job::render(job::run(spec), "json"));
}

TEST(Job, SMatrixReportsPassingChecks)
{
    auto out = job::run(parse(R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 3},
        "pipeline": "s-matrix", "caps": {"q_degree": 2, "deformation_degree": 2, "z_window": [24, 24]}})"));
    const auto &checks = out.document["result"]["checks"];
    EXPECT_EQ(checks.size(), 3u);
    for (const auto &c : checks)
        EXPECT_TRUE(c["pass"].get<bool>()) << c.dump();
    EXPECT_EQ(out.document["result"]["quantum_product"].size(), 3u);
}

TEST(Job, KLineJFunctionDegreeOne)
{
    auto out = job::run(parse(R"({"schema": "gwrecon.job/1", "target": {"type": "projective-K", "n": 2},
        "pipeline": "k-j-function", "caps": {"q_degree": 1, "deformation_degree": 1}})"));
    // 1/(1-q) on the unit, -2q/(1-q)^2 on 1-P
    bool unit = false, eps = false;
    for (const auto &e : out.document["result"]["point"]) {
        if (e["q_degree"] != 1)
            continue;
        if (e["index"][0] == 0)
            unit = e["numerator"].dump() == R"([{"q_power":0,"value":"1/1"}])"
                   && e["denominator"].dump() == R"(["1/1","-1/1"])";
        if (e["index"][0] == 1)
            eps = e["numerator"].dump() == R"([{"q_power":1,"value":"-2/1"}])"
                  && e["denominator"].dump() == R"(["1/1","-2/1","1/1"])";
    }
    EXPECT_TRUE(unit);
    EXPECT_TRUE(eps);
}

TEST(Job, EveryPipelineRuns)
{
    for (const char *text : {
             R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 3}, "pipeline": "seed"})",
             R"({"schema": "gwrecon.job/1", "target": {"type": "equivariant", "n": 2, "lambda_order": 2}, "pipeline": "seed"})",
             R"({"schema": "gwrecon.job/1", "target": {"type": "equivariant", "n": 2, "lambda_order": 2}, "pipeline": "j-function"})",
             R"({"schema": "gwrecon.job/1", "target": {"type": "local", "n": 2, "l": 1}, "pipeline": "j-function",
                 "caps": {"q_degree": 2, "deformation_degree": 1}})",
             R"({"schema": "gwrecon.job/1", "target": {"type": "projective-K", "n": 3}, "pipeline": "seed",
                 "caps": {"q_degree": 2, "deformation_degree": 1}})",
         }) {
        auto out = job::run(parse(text));
        EXPECT_TRUE(out.document.contains("result")) << text;
        EXPECT_TRUE(out.document.contains("ring")) << text;
    }
}

TEST(Selftest, CorruptedGoldenIsNamed)
{
    auto dir = scratch_dir() / "golden";
    fs::create_directories(dir);
    fs::copy_file(fs::path(GWRECON_GOLDEN_DIR) / "local_line_mirror_map.txt", dir / "local_line_mirror_map.txt",
                  fs::copy_options::overwrite_existing);
    {
        std::ifstream in(dir / "local_line_mirror_map.txt");
        std::stringstream s;
        s << in.rdbuf();
        std::string text = s.str();
        auto pos = text.find("1/4");
        ASSERT_NE(pos, std::string::npos);
        text.replace(pos, 3, "1/5");
        std::ofstream(dir / "local_line_mirror_map.txt") << text;
    }
    selftest::options opt;
    opt.golden_dir = dir.string();
    opt.extended = false;
    auto o = selftest::detail::local_variant(opt);
    EXPECT_FALSE(o.pass);
    EXPECT_NE(o.detail.find("local_line_mirror_map.txt line 2"), std::string::npos) << o.detail;
}

TEST(Selftest, RepeatedRunsAgree)
{
    std::ostringstream a, b;
    selftest::print(a, selftest::run_all());
    selftest::print(b, selftest::run_all());
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str().find("10/10 criteria passed"), std::string::npos) << a.str();
}

TEST(Cli, ExitCodes)
{
    std::string out;
    EXPECT_EQ(run_cli("--job " + write_job("ok.json", line_j), &out), 0);
    EXPECT_NE(out.find("\"gwrecon.output/1\""), std::string::npos);
    EXPECT_EQ(run_cli("--job " + write_job("zero.json", R"({"schema": "gwrecon.job/1",
        "target": {"type": "projective", "n": 0}, "pipeline": "seed"})")),
              2);
    EXPECT_EQ(run_cli("--job " + write_job("low.json", R"({"schema": "gwrecon.job/1",
        "target": {"type": "projective", "n": 3}, "pipeline": "nd-invariants", "dmax": 3,
        "caps": {"q_degree": 2, "deformation_degree": 5}})")),
              3);
    EXPECT_EQ(run_cli("--job /nonexistent/job.json"), 2);
    EXPECT_EQ(run_cli("--format xml --job x"), 2);
    EXPECT_EQ(run_cli(""), 2);
}

TEST(Cli, OutputFileAndFormatOverride)
{
    auto job_path = write_job("nd.json", R"({"schema": "gwrecon.job/1", "target": {"type": "projective", "n": 3},
                                             "pipeline": "nd-invariants", "dmax": 3})");
    auto out_path = (scratch_dir() / "nd.csv").string();
    ASSERT_EQ(run_cli("--job " + job_path + " --out " + out_path + " --format csv --threads 4"), 0);
    std::ifstream in(out_path);
    std::stringstream s;
    s << in.rdbuf();
    EXPECT_EQ(s.str(), "d,N_d,oracle\n1,1,1\n2,1,1\n3,12,12\n");
    // thread count does not change the bytes
    std::string one, four;
    ASSERT_EQ(run_cli("--job " + job_path + " --threads 1", &one), 0);
    ASSERT_EQ(run_cli("--job " + job_path + " --threads 4", &four), 0);
    EXPECT_EQ(one, four);
}

TEST(Cli, Selftest)
{
    std::string out;
    EXPECT_EQ(run_cli("--selftest", &out), 0);
    EXPECT_NE(out.find("PASS criterion 10"), std::string::npos) << out;
}
