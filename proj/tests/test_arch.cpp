#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "common.hpp"
#include "segmamba/arch.hpp"
#include "segmamba/errors.hpp"
#include "segmamba/oracle.hpp"

using namespace segmamba;
using testutil::tiny_config;

namespace {

void zero(ParamStore& ps, const std::string& name) {
    Tensor& t = ps.at(name);
    t = Tensor::zeros(t.shape());
}

ParamStore zero_store(const ModelConfig& cfg) {
    ParamStore ps;
    for (const auto& spec : param_schema(cfg)) ps.add(spec.name, Tensor::zeros(spec.shape));
    return ps;
}

} // namespace

TEST(Stem, Shapes) {
    ModelConfig cfg;
    cfg.in_channels = 1;
    const ParamStore ps = init_weights(cfg, 1);
    EXPECT_EQ(stem(oracle::random_tensor({1, 8, 8, 8}, 2), ps, cfg).shape(), (Shape{48, 4, 4, 4}));
    EXPECT_THROW(stem(Tensor::zeros({1, 7, 8, 8}), ps, cfg), ShapeError);
}

TEST(Stem, ZeroInputZeroBiasGivesZero) {
    const ModelConfig cfg = tiny_config();
    const Tensor y = stem(Tensor::zeros({1, 8, 8, 8}), init_weights(cfg, 3), cfg);
    for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Gsc, ZeroFusionIsIdentity) {
    const ModelConfig cfg = tiny_config();
    ParamStore ps = init_weights(cfg, 4);
    zero(ps, "enc0.block0.gsc.fuse.conv.weight");
    zero(ps, "enc0.block0.gsc.fuse.conv.bias");
    const Tensor z = oracle::random_tensor({8, 4, 3, 5}, 5);
    EXPECT_EQ(gsc(z, ps, "enc0.block0.gsc"), z);
}

TEST(Gsc, ZeroGateIsIdentity) {
    const ModelConfig cfg = tiny_config();
    ParamStore ps = init_weights(cfg, 6);
    for (const char* n : {"norm.gamma", "norm.beta", "conv.bias"}) zero(ps, std::string("enc0.block0.gsc.proj1.") + n);
    // A zero gate leaves the fusion block's input constant, so the fusion
    // output is relu(bias) per channel; with zero bias it vanishes.
    zero(ps, "enc0.block0.gsc.fuse.conv.bias");
    const Tensor z = oracle::random_tensor({8, 4, 4, 4}, 7);
    EXPECT_EQ(gsc(z, ps, "enc0.block0.gsc"), z);
}

TEST(Flatten, HandEnumeratedOrders) {
    const Tensor z = Tensor::from({1, 2, 1, 1}, {3, 4});
    EXPECT_EQ(flatten_oriented(z, Direction::forward), Tensor::from({2, 1}, {3, 4}));
    EXPECT_EQ(flatten_oriented(z, Direction::reverse), Tensor::from({2, 1}, {4, 3}));
    EXPECT_EQ(flatten_oriented(z, Direction::inter_slice), Tensor::from({2, 1}, {3, 4}));
    // [1, D=2, H=1, W=2]: inter-slice visits (h,w) outer and d inner.
    const Tensor q = Tensor::from({1, 2, 1, 2}, {1, 2, 3, 4});
    EXPECT_EQ(flatten_oriented(q, Direction::inter_slice), Tensor::from({4, 1}, {1, 3, 2, 4}));
}

TEST(Flatten, RoundTripAndReverseRelation) {
    for (const Shape& s : {Shape{3, 1, 4, 5}, Shape{2, 4, 1, 3}, Shape{4, 2, 3, 1}, Shape{2, 3, 4, 5}}) {
        const Tensor z = oracle::random_tensor(s, s[1] * 7 + s[3]);
        for (Direction d : kAllDirections) {
            EXPECT_EQ(unflatten_oriented(flatten_oriented(z, d), d, spatial_extent(z)), z);
        }
        const Tensor f = flatten_oriented(z, Direction::forward), r = flatten_oriented(z, Direction::reverse);
        const std::size_t L = f.dim(0), C = f.dim(1);
        for (std::size_t t = 0; t < L; ++t)
            for (std::size_t c = 0; c < C; ++c) ASSERT_EQ(r[t * C + c], f[(L - 1 - t) * C + c]);
    }
    EXPECT_THROW(unflatten_oriented(Tensor::zeros({5, 2}), Direction::forward, {2, 2, 1}), ShapeError);
}

TEST(Tom, ZeroOutProjectionsGiveZero) {
    const ModelConfig cfg = tiny_config();
    ParamStore ps = init_weights(cfg, 8);
    for (const char* d : {"forward", "reverse", "inter_slice"}) {
        zero(ps, std::string("enc0.block0.tom.") + d + ".out_proj.weight");
        zero(ps, std::string("enc0.block0.tom.") + d + ".out_proj.bias");
    }
    const Tensor y = tom(oracle::random_tensor({8, 2, 3, 2}, 9), ps, "enc0.block0.tom", cfg);
    for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Tom, SingleVoxelIsSumOfBranches) {
    const ModelConfig cfg = tiny_config();
    const ParamStore ps = init_weights(cfg, 10);
    const Tensor z = oracle::random_tensor({8, 1, 1, 1}, 11);
    const Tensor seq = z.reshape({1, 8});
    const MambaConfig m = cfg.mamba(8);
    Tensor want = Tensor::zeros({1, 8});
    for (const char* d : {"forward", "reverse", "inter_slice"}) {
        want = binary(want, mamba_block(seq, mamba_params_from(ps, std::string("enc0.block0.tom.") + d, m), m),
                      Binary::add);
    }
    EXPECT_EQ(tom(z, ps, "enc0.block0.tom", cfg), want.reshape({8, 1, 1, 1}));
}

TEST(Tom, ForwardOnlyLastTokenAffectsOnlyItself) {
    ModelConfig cfg = tiny_config();
    cfg.directions = {Direction::forward};
    const ParamStore ps = init_weights(cfg, 12);
    const Tensor z = oracle::random_tensor({8, 2, 3, 4}, 13);
    Tensor zp = z;
    const std::size_t last = 23;
    for (std::size_t c = 0; c < 8; ++c) zp[c * 24 + last] += 0.5f;
    const Tensor a = tom(z, ps, "enc0.block0.tom", cfg), b = tom(zp, ps, "enc0.block0.tom", cfg);
    for (std::size_t c = 0; c < 8; ++c)
        for (std::size_t v = 0; v < last; ++v) ASSERT_EQ(a[c * 24 + v], b[c * 24 + v]);
}

TEST(TsMamba, ZeroedSubOutputsIsIdentity) {
    const ModelConfig cfg = tiny_config();
    ParamStore ps = init_weights(cfg, 14);
    const std::string p = "enc1.block0";
    for (const std::string n : {".gsc.fuse.conv.weight", ".gsc.fuse.conv.bias", ".mlp.fc2.weight", ".mlp.fc2.bias"})
        zero(ps, p + n);
    for (const char* d : {"forward", "reverse", "inter_slice"}) {
        zero(ps, p + ".tom." + d + ".out_proj.weight");
        zero(ps, p + ".tom." + d + ".out_proj.bias");
    }
    const Tensor z = oracle::random_tensor({16, 2, 4, 2}, 15);
    EXPECT_EQ(tsmamba_block(z, ps, p, cfg), z);
}

TEST(TsMamba, ShapePreserved) {
    const ModelConfig cfg = tiny_config();
    const ParamStore ps = init_weights(cfg, 16);
    for (const Shape& s : {Shape{8, 1, 1, 1}, Shape{8, 3, 2, 5}, Shape{8, 4, 4, 4}}) {
        EXPECT_EQ(tsmamba_block(oracle::random_tensor(s, 17), ps, "enc0.block0", cfg).shape(), s);
    }
}

TEST(Fue, ClosedFormsAndBound) {
    EXPECT_NEAR(fue_multiplier(0.0), 1.653426, 1e-6);
    EXPECT_NEAR(fue_multiplier(60.0), 2.0, 1e-12);
    EXPECT_NEAR(fue_multiplier(-std::log(std::exp(1.0) - 1.0)), 2.0 - std::exp(-1.0), 1e-12);
    const Tensor z = Tensor::from({2, 1, 1, 1}, {-1, 1});
    const Tensor y = fue(z);
    EXPECT_FLOAT_EQ(y[0], -1.653426f);
    EXPECT_FLOAT_EQ(y[1], 1.653426f);
}

TEST(ModelConfig, JsonRoundTripAndUnknownKeys) {
    ModelConfig cfg = tiny_config();
    cfg.directions = {Direction::inter_slice};
    const nlohmann::json j = cfg;
    EXPECT_EQ(j.at("directions")[0], "inter-slice");
    const ModelConfig back = j.get<ModelConfig>();
    EXPECT_EQ(nlohmann::json(back), j);
    EXPECT_ANY_THROW(nlohmann::json::parse(R"({"stage_chanels":[8]})").get<ModelConfig>());
    ModelConfig bad;
    bad.blocks_per_stage = {1};
    EXPECT_THROW(bad.validate(), ShapeError);
}

TEST(Encoder, ShapePlansMatchAlgebra) {
    ModelConfig cfg;
    cfg.in_channels = 4;
    const ShapePlan p128 = plan_shapes(cfg, {4, 128, 128, 128});
    EXPECT_EQ(p128.encoder, (std::vector<Shape>{{48, 64, 64, 64}, {96, 32, 32, 32}, {192, 16, 16, 16}, {384, 8, 8, 8}}));
    EXPECT_EQ(p128.output, (Shape{2, 128, 128, 128}));
    cfg.in_channels = 1;
    EXPECT_EQ(plan_shapes(cfg, {1, 32, 32, 32}).encoder,
              (std::vector<Shape>{{48, 16, 16, 16}, {96, 8, 8, 8}, {192, 4, 4, 4}, {384, 2, 2, 2}}));
    EXPECT_THROW(plan_shapes(cfg, {1, 24, 32, 32}), ShapeError);
}

TEST(Encoder, ZeroInputZeroBiasesGiveZeroFeatures) {
    const ModelConfig cfg = tiny_config();
    const auto feats = encoder_forward(Tensor::zeros({1, 8, 8, 8}), init_weights(cfg, 18), cfg);
    ASSERT_EQ(feats.size(), 2u);
    for (const auto& f : feats)
        for (float v : f.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Decoder, RejectsMismatchedSkips) {
    const ModelConfig cfg = tiny_config();
    const ParamStore ps = init_weights(cfg, 19);
    EXPECT_THROW(decoder_forward({Tensor::zeros({8, 4, 4, 4}), Tensor::zeros({16, 1, 1, 1})}, ps, cfg), ShapeError);
    EXPECT_THROW(decoder_forward({Tensor::zeros({8, 4, 4, 4})}, ps, cfg), ShapeError);
}

TEST(Model, ZeroWeightsGiveLabelZero) {
    const ModelConfig cfg = tiny_config();
    const Tensor logits = model_forward(oracle::random_tensor({1, 8, 8, 8}, 20), zero_store(cfg), cfg);
    EXPECT_EQ(logits.shape(), (Shape{3, 8, 8, 8}));
    for (float v : logits.data()) EXPECT_EQ(v, 0.0f);
    for (auto l : argmax_labels(logits)) EXPECT_EQ(l, 0);
}

TEST(Model, ArgmaxTiesGoToSmallestLabel) {
    const Tensor logits = Tensor::from({3, 1, 1, 3}, {1, 5, 2, 3, 5, 2, 3, 0, 2});
    EXPECT_EQ(argmax_labels(logits), (std::vector<std::uint8_t>{1, 0, 0}));
}

TEST(Model, DeterministicInitAndForward) {
    const ModelConfig cfg = tiny_config();
    const ParamStore a = init_weights(cfg, 21), b = init_weights(cfg, 21);
    EXPECT_TRUE(a == b);
    EXPECT_FALSE(a == init_weights(cfg, 22));
    const Tensor x = oracle::random_tensor({1, 8, 8, 8}, 23);
    EXPECT_EQ(model_forward(x, a, cfg), model_forward(x, b, cfg));
}

TEST(Model, ParameterCountIsStable) {
    ModelConfig cfg;
    cfg.in_channels = 4;
    cfg.num_classes = 3;
    const ParamStore a = init_weights(cfg, 1), b = init_weights(cfg, 2);
    EXPECT_EQ(a.scalar_count(), b.scalar_count());
    std::size_t from_schema = 0;
    for (const auto& s : param_schema(cfg)) from_schema += element_count(s.shape);
    EXPECT_EQ(a.scalar_count(), from_schema);
}

TEST(Weights, SaveLoadRoundTripAndValidation) {
    const ModelConfig cfg = tiny_config();
    const ParamStore ps = init_weights(cfg, 24);
    testutil::TempDir dir("weights");
    save_weights(ps, dir / "w.json");
    EXPECT_TRUE(load_weights(dir / "w.json", cfg) == ps);

    ModelConfig other = cfg;
    other.num_classes = 4;
    try {
        load_weights(dir / "w.json", other);
        FAIL() << "expected ParamError";
    } catch (const ParamError& e) {
        EXPECT_NE(std::string(e.what()).find("head.cls"), std::string::npos) << e.what();
    }

    ParamStore missing;
    for (const auto& [name, t] : ps)
        if (name != "stem.pw.bias") missing.add(name, t);
    try {
        validate_params(missing, cfg);
        FAIL() << "expected ParamError";
    } catch (const ParamError& e) {
        EXPECT_NE(std::string(e.what()).find("stem.pw.bias"), std::string::npos) << e.what();
    }
    ParamStore extra = ps;
    extra.add("bogus", Tensor::zeros({1}));
    EXPECT_THROW(validate_params(extra, cfg), ParamError);
    EXPECT_THROW(extra.add("bogus", Tensor::zeros({1})), ParamError);
}

TEST(Weights, LayoutIsAlignedAndRejectsCorruption) {
    ParamStore ps;
    ps.add("a", Tensor::from({3}, {1, 2, 3}));
    ps.add("b", Tensor::from({2, 2}, {4, 5, 6, 7}));
    testutil::TempDir dir("layout");
    save_weights(ps, dir / "w.json");
    std::ifstream in(dir / "w.json");
    const auto manifest = nlohmann::json::parse(in);
    EXPECT_EQ(manifest[0]["byte_offset"], 0);
    EXPECT_EQ(manifest[1]["byte_offset"], 64);
    EXPECT_EQ(manifest[1]["dtype"], "f32");
    // Records are padded to the alignment, including the last one.
    EXPECT_EQ(std::filesystem::file_size(dir / "w.bin"), 128u);

    auto rewrite = [&](nlohmann::json m) {
        std::ofstream(dir / "w.json") << m.dump();
    };
    auto bad = manifest;
    bad[1]["dtype"] = "f16";
    rewrite(bad);
    EXPECT_THROW(load_weights(dir / "w.json"), IoError);
    bad = manifest;
    bad[1]["byte_offset"] = 32;
    rewrite(bad);
    EXPECT_THROW(load_weights(dir / "w.json"), IoError);
    bad = manifest;
    bad[1]["byte_offset"] = 128;
    rewrite(bad);
    EXPECT_THROW(load_weights(dir / "w.json"), IoError);
    std::ofstream(dir / "w.json") << "{not json";
    EXPECT_THROW(load_weights(dir / "w.json"), IoError);
    EXPECT_THROW(load_weights(dir / "missing.json"), IoError);
}
