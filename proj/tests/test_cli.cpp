#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "common.hpp"
#include "segmamba/check.hpp"
#include "segmamba/cli.hpp"
#include "segmamba/oracle.hpp"
#include "segmamba/volio.hpp"

using namespace segmamba;
using testutil::TempDir;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_tiny_config(const std::filesystem::path& p) {
    std::ofstream(p) << R"({"in_channels":1,"num_classes":3,"stage_channels":[8,16],"blocks_per_stage":[1,1],)"
                        R"("d_state":4,"scan_chunk":64})";
}

/// Runs the installed binary through the shell and returns its exit status.
int shell(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" SEGMAMBA_CLI_PATH "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"frobnicate"}).code, 2);
    EXPECT_EQ(invoke({"bench", "--lengths", "abc"}).code, 2);
    EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, InitWeightsIsDeterministic) {
    TempDir dir("cli_init");
    ASSERT_EQ(invoke({"init-weights", "--seed", "7", "--out", (dir / "a.json").string()}).code, 0);
    ASSERT_EQ(invoke({"init-weights", "--seed", "7", "--out", (dir / "b.json").string()}).code, 0);
    ASSERT_EQ(invoke({"init-weights", "--seed", "8", "--out", (dir / "c.json").string()}).code, 0);
    EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
    EXPECT_EQ(slurp(dir / "a.bin"), slurp(dir / "b.bin"));
    EXPECT_NE(slurp(dir / "a.bin"), slurp(dir / "c.bin"));
}

TEST(Cli, InferWritesDeterministicMask) {
    TempDir dir("cli_infer");
    write_tiny_config(dir / "cfg.json");
    const Volume v = Volume::from_tensor(oracle::random_tensor({1, 30, 32, 29}, 3), {2.0, 1.0, 1.0});
    write_volume(v, dir / "case.json", dir / "case.raw");
    const std::string cfg = (dir / "cfg.json").string(), w = (dir / "w.json").string();
    ASSERT_EQ(invoke({"init-weights", "--config", cfg, "--seed", "1", "--out", w}).code, 0);
    for (const char* name : {"p1.json", "p2.json"}) {
        const Result r = invoke({"infer", "--config", cfg, "--weights", w, "--input", (dir / "case.json").string(), "--output",
                           (dir / name).string(), "--verbose"});
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_NE(r.out.find("enc1 [16x8x8x8]"), std::string::npos) << r.out;
    }
    EXPECT_EQ(slurp(dir / "p1.raw"), slurp(dir / "p2.raw"));
    const LabelMask m = read_mask(dir / "p1.json", dir / "p1.raw");
    EXPECT_EQ(m.dims, v.dims);
    EXPECT_EQ(m.spacing, v.spacing);
    for (auto l : m.labels) EXPECT_LT(l, 3);
}

TEST(Cli, InferMissingWeightsNamesPath) {
    TempDir dir("cli_missing");
    write_volume(Volume::from_tensor(Tensor::zeros({1, 16, 16, 16})), dir / "case.json", dir / "case.raw");
    const std::string missing = (dir / "nope.json").string();
    const Result r = invoke({"infer", "--weights", missing, "--input", (dir / "case.json").string(), "--output",
                       (dir / "out.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST(Cli, InferChannelMismatchFails) {
    TempDir dir("cli_channels");
    write_tiny_config(dir / "cfg.json");
    write_volume(Volume::from_tensor(Tensor::zeros({2, 16, 16, 16})), dir / "case.json", dir / "case.raw");
    const std::string cfg = (dir / "cfg.json").string(), w = (dir / "w.json").string();
    ASSERT_EQ(invoke({"init-weights", "--config", cfg, "--out", w}).code, 0);
    const Result r = invoke({"infer", "--config", cfg, "--weights", w, "--input", (dir / "case.json").string(), "--output",
                       (dir / "o.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("channels"), std::string::npos);
}

TEST(Cli, EvalIdenticalDirsAndPairing) {
    TempDir pred("cli_pred"), ref("cli_ref");
    for (int i = 0; i < 3; ++i) {
        LabelMask m = oracle::random_mask({4, 5, 6}, 40 + i, 0.3, 3);
        const std::string name = "case" + std::to_string(i);
        write_mask(m, pred / (name + ".json"), pred / (name + ".raw"));
        write_mask(m, ref / (name + ".json"), ref / (name + ".raw"));
    }
    const Result r = invoke({"eval", "--pred", pred.path().string(), "--ref", ref.path().string(), "--labels", "1,2", "--out",
                       (pred / "report.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "case_id,label,dice,iou,hd95");
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        EXPECT_NE(line.find(",1,1,0"), std::string::npos) << line;
    }
    EXPECT_EQ(rows, 3 * 2 + 2);
    EXPECT_EQ(slurp(pred / "report.csv"), r.out);

    const LabelMask lonely = oracle::random_mask({2, 2, 2}, 1, 0.5);
    write_mask(lonely, pred / "extra.json", pred / "extra.raw");
    std::filesystem::remove(pred / "report.csv");
    const Result lenient = invoke({"eval", "--pred", pred.path().string(), "--ref", ref.path().string()});
    EXPECT_EQ(lenient.code, 0);
    EXPECT_NE(lenient.err.find("extra"), std::string::npos);
    EXPECT_EQ(invoke({"eval", "--pred", pred.path().string(), "--ref", ref.path().string(), "--strict"}).code, 2);
}

TEST(Cli, EvalReportsNaForEmptyLabel) {
    TempDir pred("cli_na_p"), ref("cli_na_r");
    LabelMask m;
    m.dims = {2, 2, 2};
    m.labels.assign(8, 0);
    write_mask(m, pred / "a.json", pred / "a.raw");
    write_mask(m, ref / "a.json", ref / "a.raw");
    const Result r = invoke({"eval", "--pred", pred.path().string(), "--ref", ref.path().string()});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("a,1,1,1,NA"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("mean,1,1,1,NA"), std::string::npos) << r.out;
}

TEST(Cli, BenchCsvShape) {
    TempDir dir("cli_bench");
    const Result r = invoke({"bench", "--lengths", "64,128", "--channels", "8", "--repeats", "1", "--budget-bytes", "20000",
                       "--out", (dir / "b.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(dir / "b.csv");
    EXPECT_EQ(csv.rfind("op,L,channels,seconds,peak_bytes,status\n", 0), 0u);
    EXPECT_NE(csv.find("tom_scan,128,8,"), std::string::npos);
    EXPECT_NE(csv.find("attention,64,8,"), std::string::npos);
    EXPECT_NE(csv.find("attention,128,8,NA,"), std::string::npos) << csv;
    EXPECT_NE(csv.find("OOM-by-policy"), std::string::npos);
}

TEST(Cli, DescribePrintsPlan) {
    const Result r = invoke({"describe", "--in-channels", "4", "--input-dims", "128,128,128"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("enc3 [384x8x8x8]"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("sequence length 262144"), std::string::npos);
    EXPECT_NE(r.out.find("logits [2x128x128x128]"), std::string::npos);
}

TEST(Cli, CheckFilterAndInjectedFault) {
    const Result scan = invoke({"check", "--filter", "scan"});
    EXPECT_EQ(scan.code, 0) << scan.out;
    EXPECT_NE(scan.out.find("scan.causality"), std::string::npos);
    EXPECT_EQ(scan.out.find("metrics."), std::string::npos);
    EXPECT_EQ(shell("check --filter metrics"), 0);
    EXPECT_EQ(shell("check --filter metrics", std::string(kInjectFaultEnv) + "=1"), 1);
}
