#include <gtest/gtest.h>

#include <cstdlib>
#include <string>

#include "dtr/masks.hpp"
#include "test_util.hpp"

namespace {

using dtr::testutil::TempDir;
using dtr::testutil::read_file;
using dtr::testutil::write_file;

struct CliResult {
    int exit_code;
    std::string output;
};

CliResult run_cli(const std::string& args, const TempDir& dir) {
    const std::string log = dir.file("cli_output.txt");
    const std::string cmd = std::string(DTR_CLI_BIN) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = read_file(log);
    return result;
}

}  // namespace

TEST(Cli, MaskGenMatchesHandDerivedBank) {
    TempDir dir;
    const auto out = dir.file("m.csv");
    const auto r = run_cli("mask gen --T 4 --C 5 --beta 0.6 --alpha 1 --strategy dtr --out " + out, dir);
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_EQ(read_file(out),
              "4,5,dtr,1,0.6,0\n"
              "1,1,1,0,0\n"
              "0,1,1,1,0\n"
              "0,1,1,1,0\n"
              "0,0,1,1,1\n");
}

TEST(Cli, MaskGenValidationError) {
    TempDir dir;
    const auto r = run_cli("mask gen --T 4 --C 5 --beta 1.5 --out " + dir.file("m.csv"), dir);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("beta"), std::string::npos) << r.output;
}

TEST(Cli, MaskStatsReadsBank) {
    TempDir dir;
    const auto csv = dir.file("m.csv");
    ASSERT_EQ(run_cli("mask gen --T 8 --C 10 --beta 0.5 --alpha 2 --strategy dtr --out " + csv, dir)
                  .exit_code,
              0);
    const auto r = run_cli("mask stats --in " + csv + " --overlap-pgm " + dir.file("o.pgm"), dir);
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("C_beta=5"), std::string::npos) << r.output;
    EXPECT_NE(read_file(dir.file("o.pgm")).find("P2\n8 8\n5\n"), std::string::npos);
}

TEST(Cli, GradcheckPassesUnderThreshold) {
    TempDir dir;
    const auto r = run_cli("gradcheck --width 8 --blocks 2 --variant dit_style", dir);
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("max relative error"), std::string::npos) << r.output;
}

TEST(Cli, TrainMissingConfigIsIoError) {
    TempDir dir;
    const auto r = run_cli("train --config " + dir.file("missing.cfg") + " --out " + dir.file("out"),
                           dir);
    EXPECT_EQ(r.exit_code, 2) << r.output;
}

TEST(Cli, UnknownSubcommandFails) {
    TempDir dir;
    const auto r = run_cli("frobnicate", dir);
    EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, UnknownFlagFails) {
    TempDir dir;
    const auto r = run_cli("mask gen --T 4 --C 5 --out x.csv --bogus 3", dir);
    EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, HelpExitsCleanly) {
    TempDir dir;
    EXPECT_EQ(run_cli("--help", dir).exit_code, 0);
    EXPECT_EQ(run_cli("train --help", dir).exit_code, 0);
    EXPECT_EQ(run_cli("mask gen --help", dir).exit_code, 0);
}

TEST(Cli, TrainSampleEvalPipeline) {
    TempDir dir;
    const auto cfg_path = dir.file("run.cfg");
    write_file(cfg_path,
               "dataset = gauss8\n"
               "n_train = 256\n"
               "T = 40\n"
               "steps = 40\n"
               "batch = 16\n"
               "sample_steps = 8\n"
               "seed = 4\n"
               "model.width = 12\n"
               "model.blocks = 2\n"
               "model.temb_dim = 8\n");
    const auto out = dir.file("run_out");
    auto r = run_cli("train --config " + cfg_path + " --out " + out, dir);
    ASSERT_EQ(r.exit_code, 0) << r.output;

    const auto samples = dir.file("samples.csv");
    r = run_cli("sample --ckpt " + out + "/ckpt.bin --n 64 --steps 8 --seed 9 --out " + samples, dir);
    ASSERT_EQ(r.exit_code, 0) << r.output;

    const auto samples2 = dir.file("samples2.csv");
    r = run_cli("sample --ckpt " + out + "/ckpt.bin --n 64 --steps 8 --seed 9 --out " + samples2, dir);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_EQ(read_file(samples), read_file(samples2));

    r = run_cli("eval --samples " + samples + " --reference " + samples2 + " --projections 16", dir);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("swd 0\n"), std::string::npos) << r.output;

    const auto cka_dir = dir.file("cka_out");
    r = run_cli("cka --config " + cfg_path + " --ckpt " + out + "/ckpt.bin --out-dir " + cka_dir +
                    " --probes 4 --batch 32 --block 0",
                dir);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const std::string cka_csv = read_file(cka_dir + "/cka_block0.csv");
    EXPECT_EQ(cka_csv.substr(0, 2), "0,");
}
