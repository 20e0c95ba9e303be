#include <gtest/gtest.h>

#include <cmath>

#include "segmamba/errors.hpp"
#include "segmamba/oracle.hpp"
#include "segmamba/parallel.hpp"
#include "segmamba/tensor.hpp"

using namespace segmamba;

namespace {

void expect_near_all(const Tensor& got, std::initializer_list<float> want, float tol = 1e-6f) {
    ASSERT_EQ(got.size(), want.size());
    std::size_t i = 0;
    for (float w : want) EXPECT_NEAR(got[i++], w, tol) << "index " << i - 1;
}

ConvSpec spec(std::size_t cin, std::size_t cout, Extent3 k, Extent3 s, Extent3 p, std::size_t g = 1) {
    return {cin, cout, k, s, p, g};
}

} // namespace

TEST(Conv3d, HandEvaluatedRow) {
    const Tensor x = Tensor::from({1, 1, 1, 3}, {1, 2, 3});
    const Tensor w = Tensor::from({1, 1, 1, 1, 3}, {1, 1, 1});
    const Tensor y = conv3d(x, w, Tensor::zeros({1}), spec(1, 1, {1, 1, 3}, Extent3::cube(1), {0, 0, 1}));
    EXPECT_EQ(y.shape(), (Shape{1, 1, 1, 3}));
    expect_near_all(y, {3, 6, 5}, 0.0f);
}

TEST(Conv3d, ZeroInputGivesZero) {
    const ConvSpec s = spec(2, 3, Extent3::cube(3), Extent3::cube(1), Extent3::cube(1));
    const Tensor w = oracle::random_tensor({3, 2, 3, 3, 3}, 1);
    const Tensor y = conv3d(Tensor::zeros({2, 4, 5, 6}), w, Tensor::zeros({3}), s);
    for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Conv3d, StemShape) {
    const ConvSpec s = spec(4, 4, Extent3::cube(7), Extent3::cube(2), Extent3::cube(3), 4);
    EXPECT_EQ(conv3d_output_shape({4, 128, 128, 128}, s), (Shape{4, 64, 64, 64}));
}

TEST(Conv3d, MatchesDirectOracleAcrossConfigs) {
    struct Case {
        ConvSpec s;
        Shape in;
    };
    const Case cases[] = {
        {spec(3, 4, Extent3::cube(3), Extent3::cube(1), Extent3::cube(1)), {3, 5, 6, 7}},
        {spec(4, 4, Extent3::cube(7), Extent3::cube(2), Extent3::cube(3), 4), {4, 8, 10, 6}},
        {spec(2, 6, Extent3::cube(2), Extent3::cube(2), Extent3::cube(0)), {2, 4, 6, 8}},
        {spec(4, 2, {1, 3, 2}, {2, 1, 3}, {0, 1, 1}, 2), {4, 5, 5, 7}},
        {spec(1, 1, Extent3::cube(1), Extent3::cube(1), Extent3::cube(0)), {1, 1, 1, 1}},
    };
    std::uint64_t seed = 10;
    for (const auto& c : cases) {
        const Tensor x = oracle::random_tensor(c.in, seed++);
        const Tensor w = oracle::random_tensor({c.s.out_channels, c.s.in_channels / c.s.groups, c.s.kernel.d,
                                                c.s.kernel.h, c.s.kernel.w},
                                               seed++);
        const Tensor b = oracle::random_tensor({c.s.out_channels}, seed++);
        EXPECT_LT(oracle::relative_error(conv3d(x, w, b, c.s), oracle::conv3d_direct(x, w, b, c.s)), 1e-6);
    }
}

TEST(Conv3d, ThreadedMatchesSingleThreadExactly) {
    const ConvSpec s = spec(3, 5, Extent3::cube(3), Extent3::cube(1), Extent3::cube(1));
    const Tensor x = oracle::random_tensor({3, 6, 6, 6}, 3);
    const Tensor w = oracle::random_tensor({5, 3, 3, 3, 3}, 4);
    const Tensor b = oracle::random_tensor({5}, 5);
    const Tensor one = conv3d(x, w, b, s);
    set_num_threads(4);
    const Tensor many = conv3d(x, w, b, s);
    set_num_threads(1);
    EXPECT_EQ(one, many);
}

TEST(Conv3d, RejectsMismatchedShapes) {
    const ConvSpec s = spec(2, 3, Extent3::cube(3), Extent3::cube(1), Extent3::cube(1));
    EXPECT_THROW(conv3d(Tensor::zeros({3, 4, 4, 4}), Tensor::zeros({3, 2, 3, 3, 3}), Tensor::zeros({3}), s),
                 ShapeError);
    EXPECT_THROW(conv3d(Tensor::zeros({2, 4, 4, 4}), Tensor::zeros({3, 2, 3, 3, 2}), Tensor::zeros({3}), s),
                 ShapeError);
    EXPECT_THROW(conv3d(Tensor::zeros({2, 4, 4, 4}), Tensor::zeros({3, 2, 3, 3, 3}), Tensor::zeros({2}), s),
                 ShapeError);
    EXPECT_THROW(spec(3, 4, Extent3::cube(1), Extent3::cube(1), Extent3::cube(0), 2).validate(), ShapeError);
}

TEST(TransposedConv3d, SingleVoxelFillsKernel) {
    const ConvSpec s = spec(1, 1, Extent3::cube(2), Extent3::cube(2), Extent3::cube(0));
    const Tensor y = transposed_conv3d(Tensor::from({1, 1, 1, 1}, {2.5f}), Tensor::ones({1, 1, 2, 2, 2}),
                                       Tensor::zeros({1}), s);
    EXPECT_EQ(y.shape(), (Shape{1, 2, 2, 2}));
    for (float v : y.data()) EXPECT_EQ(v, 2.5f);
}

TEST(TransposedConv3d, MatchesScatterOracle) {
    const ConvSpec s = spec(4, 3, Extent3::cube(2), Extent3::cube(2), Extent3::cube(0));
    const Tensor x = oracle::random_tensor({4, 3, 2, 5}, 21);
    const Tensor w = oracle::random_tensor({4, 3, 2, 2, 2}, 22);
    const Tensor b = oracle::random_tensor({3}, 23);
    const Tensor y = transposed_conv3d(x, w, b, s);
    EXPECT_EQ(y.shape(), (Shape{3, 6, 4, 10}));
    EXPECT_LT(oracle::relative_error(y, oracle::transposed_conv3d_scatter(x, w, b, s)), 1e-6);
}

TEST(TransposedConv3d, ZeroInputGivesBias) {
    const ConvSpec s = spec(2, 2, Extent3::cube(2), Extent3::cube(2), Extent3::cube(0));
    const Tensor y = transposed_conv3d(Tensor::zeros({2, 2, 2, 2}), oracle::random_tensor({2, 2, 2, 2, 2}, 1),
                                       Tensor::zeros({2}), s);
    for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(TransposedConv3d, RejectsUnsupportedCombination) {
    const ConvSpec s = spec(1, 1, Extent3::cube(1), Extent3::cube(2), Extent3::cube(0));
    EXPECT_THROW(transposed_conv3d(Tensor::zeros({1, 2, 2, 2}), Tensor::zeros({1, 1, 1, 1, 1}), Tensor::zeros({1}), s),
                 ShapeError);
}

TEST(Conv1dCausal, ImpulseResponseIsReversedKernel) {
    const Tensor x = Tensor::from({1, 4}, {1, 0, 0, 0});
    const Tensor w = Tensor::from({1, 4}, {0.1f, 0.2f, 0.3f, 0.4f});
    expect_near_all(conv1d_depthwise_causal(x, w, Tensor::zeros({1})), {0.4f, 0.3f, 0.2f, 0.1f}, 0.0f);
}

TEST(Conv1dCausal, UnitKernelIsIdentity) {
    const Tensor x = oracle::random_tensor({3, 9}, 2);
    EXPECT_EQ(conv1d_depthwise_causal(x, Tensor::ones({3, 1}), Tensor::zeros({3})), x);
}

TEST(LayerNorm, ClosedForms) {
    expect_near_all(layer_norm(Tensor::from({1, 2}, {1, 3}), Tensor::ones({2}), Tensor::zeros({2}), 0.0f), {-1, 1});
    expect_near_all(layer_norm(Tensor::from({1, 3}, {5, 5, 5}), Tensor::ones({3}), Tensor::zeros({3})), {0, 0, 0});
    expect_near_all(layer_norm(Tensor::from({1, 2}, {1, 3}), Tensor::zeros({2}), Tensor::from({2}, {7, 7})), {7, 7});
}

TEST(InstanceNorm, ClosedForms) {
    expect_near_all(instance_norm(Tensor::from({1, 1, 1, 2}, {-1, 1}), Tensor::ones({1}), Tensor::zeros({1}), 0.0f),
                    {-1, 1});
    expect_near_all(instance_norm(Tensor::from({1, 1, 1, 2}, {4, 4}), Tensor::ones({1}), Tensor::from({1}, {2})),
                    {2, 2});
    expect_near_all(instance_norm(Tensor::from({1, 1, 1, 2}, {0, 9}), Tensor::zeros({1}), Tensor::from({1}, {3})),
                    {3, 3});
}

TEST(Unary, SpotValues) {
    const Tensor z = Tensor::from({1}, {0});
    EXPECT_EQ(unary(z, Unary::sigmoid)[0], 0.5f);
    EXPECT_EQ(unary(z, Unary::silu)[0], 0.0f);
    EXPECT_EQ(unary(Tensor::from({1}, {-2}), Unary::relu)[0], 0.0f);
    EXPECT_NEAR(unary(z, Unary::softplus)[0], 0.693147f, 1e-6f);
    EXPECT_EQ(unary(z, Unary::gelu)[0], 0.0f);
    EXPECT_NEAR(unary(Tensor::from({1}, {1}), Unary::gelu)[0], 0.841345f, 1e-6f);
    EXPECT_NEAR(unary(Tensor::from({1}, {2}), Unary::log)[0], 0.693147f, 1e-6f);
    EXPECT_THROW(unary(Tensor::from({2}, {1, 0}), Unary::log), DomainError);
    EXPECT_THROW(unary(Tensor::from({1}, {-1}), Unary::log), DomainError);
}

TEST(Binary, ElementwiseAndBroadcast) {
    expect_near_all(binary(Tensor::from({2}, {2, 3}), Tensor::from({2}, {4, 5}), Binary::mul), {8, 15}, 0.0f);
    const Tensor x = oracle::random_tensor({3, 2, 2, 2}, 4);
    EXPECT_EQ(binary(x, Tensor::ones(x.shape()), Binary::mul), x);
    EXPECT_EQ(binary(x, Tensor::zeros(x.shape()), Binary::add), x);
    const Tensor m = binary(x, Tensor(Shape{1, 2, 2, 2}, 2.0f), Binary::mul);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(m[i], 2.0f * x[i]);
    EXPECT_THROW(binary(x, Tensor::zeros({2, 2, 2, 2}), Binary::add), ShapeError);
}

TEST(Linear, HandDotProductAndErrors) {
    expect_near_all(linear(Tensor::from({1, 2}, {1, 2}), Tensor::from({1, 2}, {1, 1}), Tensor::from({1}, {1})), {4},
                    0.0f);
    const Tensor x = oracle::random_tensor({3, 2}, 1);
    EXPECT_EQ(linear(x, Tensor::from({2, 2}, {1, 0, 0, 1}), Tensor::zeros({2})), x);
    expect_near_all(linear(x, Tensor::zeros({2, 2}), Tensor::from({2}, {5, 6})), {5, 6, 5, 6, 5, 6}, 0.0f);
    EXPECT_THROW(linear(x, Tensor::zeros({2, 3}), Tensor::zeros({2})), ShapeError);
}

TEST(Permute, IdentityAndInverse) {
    const Tensor x = oracle::random_tensor({2, 3, 4}, 9);
    EXPECT_EQ(permute(x, {0, 1, 2}), x);
    const Tensor p = permute(x, {2, 0, 1});
    EXPECT_EQ(p.shape(), (Shape{4, 2, 3}));
    EXPECT_EQ(permute(p, {1, 2, 0}), x);
    EXPECT_THROW(permute(x, {0, 0, 1}), ShapeError);
    EXPECT_THROW(permute(x, {0, 1}), ShapeError);
}

TEST(ReduceMean, ClosedFormAndErrors) {
    const Tensor m = reduce_mean(Tensor::from({2, 2}, {1, 3, 5, 7}), 0);
    EXPECT_EQ(m.shape(), (Shape{2}));
    expect_near_all(m, {3, 5}, 0.0f);
    EXPECT_THROW(reduce_mean(Tensor::zeros({2, 2}), 2), ShapeError);
}

TEST(Oracle, RelativeErrorDetectsDifferences) {
    EXPECT_DOUBLE_EQ(oracle::relative_error(Tensor::from({2}, {1, 2.5f}), Tensor::from({2}, {1, 2})), 0.25);
    EXPECT_TRUE(std::isinf(oracle::relative_error(Tensor::from({1}, {std::nanf("")}), Tensor::from({1}, {1}))));
    EXPECT_TRUE(std::isinf(oracle::relative_error(Tensor::zeros({2}), Tensor::zeros({3}))));
}
