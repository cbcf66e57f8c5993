#include "dtr/config.hpp"

#include <gtest/gtest.h>

#include "dtr/errors.hpp"
#include "test_util.hpp"

using namespace dtr;

TEST(ParseConfig, EmptyFileGivesDefaults) {
    const RunConfig cfg = parse_config_text("");
    EXPECT_EQ(cfg.dataset, "gauss8");
    EXPECT_EQ(cfg.T, 1000);
    EXPECT_EQ(cfg.steps, 5000);
    EXPECT_EQ(cfg.batch, 128);
    EXPECT_DOUBLE_EQ(cfg.lr, 1e-4);
    EXPECT_DOUBLE_EQ(cfg.ema_decay, 0.9999);
    EXPECT_EQ(cfg.sample_steps, 250);
    EXPECT_DOUBLE_EQ(cfg.mask.alpha, 4.0);
    EXPECT_DOUBLE_EQ(cfg.mask.beta, 0.8);
    EXPECT_EQ(cfg.mask.strategy, MaskStrategy::dtr);
    EXPECT_EQ(cfg.model.width, 64);
    EXPECT_EQ(cfg.model.n_blocks, 4);
    EXPECT_EQ(cfg.model.routing_variant, RoutingVariant::adm_style);
    EXPECT_EQ(cfg.weight.scheme, WeightScheme::uniform);
}

TEST(ParseConfig, CommentsAndWhitespace) {
    const RunConfig cfg = parse_config_text(
        "# a full-line comment\n"
        "\n"
        "  steps = 250   # trailing comment\n"
        "\tmask.alpha =\t2.5\n");
    EXPECT_EQ(cfg.steps, 250);
    EXPECT_DOUBLE_EQ(cfg.mask.alpha, 2.5);
}

TEST(ParseConfig, RoundTripsThroughSerialize) {
    RunConfig cfg = default_config();
    cfg.dataset = "checkerboard";
    cfg.steps = 777;
    cfg.lr = 3.5e-5;
    cfg.mask.alpha = 4.0;
    cfg.mask.strategy = MaskStrategy::random;
    cfg.mask.seed = 0xABCDEF;
    cfg.model.routing_variant = RoutingVariant::dit_style;
    cfg.model.width = 16;
    cfg.seed = 99;
    const RunConfig back = parse_config_text(serialize_config(cfg));
    EXPECT_EQ(serialize_config(back), serialize_config(cfg));
    EXPECT_DOUBLE_EQ(back.mask.alpha, 4.0);
    EXPECT_EQ(back.model.routing_variant, RoutingVariant::dit_style);
}

TEST(ParseConfig, RejectsOutOfRangeValues) {
    EXPECT_THROW(parse_config_text("mask.beta = 1.5\n"), std::invalid_argument);
    EXPECT_THROW(parse_config_text("mask.beta = 0\n"), std::invalid_argument);
    EXPECT_THROW(parse_config_text("mask.alpha = -1\n"), std::invalid_argument);
    EXPECT_THROW(parse_config_text("lr = 0\n"), std::invalid_argument);
    EXPECT_THROW(parse_config_text("ema_decay = 1\n"), std::invalid_argument);
    EXPECT_THROW(parse_config_text("batch = 0\n"), std::invalid_argument);
    EXPECT_THROW(parse_config_text("sample_steps = 2000\n"), std::invalid_argument);
    EXPECT_THROW(parse_config_text("dataset = imagenet\n"), std::invalid_argument);
    EXPECT_THROW(parse_config_text("weight.scheme = table\n"), std::invalid_argument);
}

TEST(ParseConfig, ErrorsNameTheLineNumber) {
    try {
        parse_config_text("steps = 100\nnot a key value pair\n");
        FAIL() << "expected a parse error";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    try {
        parse_config_text("\n\nunknown.key = 3\n");
        FAIL() << "expected a parse error";
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("line 3"), std::string::npos) << what;
        EXPECT_NE(what.find("unknown.key"), std::string::npos) << what;
    }
    try {
        parse_config_text("steps = soon\n");
        FAIL() << "expected a parse error";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
    }
}

TEST(ParseConfig, MissingFileIsIoError) {
    EXPECT_THROW(parse_config("/nonexistent/missing.cfg"), io_error);
}

TEST(ParseConfig, FileParsing) {
    testutil::TempDir dir;
    const auto path = dir.file("run.cfg");
    testutil::write_file(path, "dataset = swissroll\nseed = 5\nmodel.blocks = 2\n");
    const RunConfig cfg = parse_config(path);
    EXPECT_EQ(cfg.dataset, "swissroll");
    EXPECT_EQ(cfg.seed, 5u);
    EXPECT_EQ(cfg.model.n_blocks, 2);
}

TEST(RunConfig, BankSpecAlignsWithRun) {
    RunConfig cfg = default_config();
    cfg.T = 42;
    cfg.model.width = 24;
    const MaskSpec spec = cfg.bank_spec();
    EXPECT_EQ(spec.T, 42);
    EXPECT_EQ(spec.C, 24);
    EXPECT_DOUBLE_EQ(spec.beta, cfg.mask.beta);
}
