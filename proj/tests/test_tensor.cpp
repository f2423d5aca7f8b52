#include "fog/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace {

TEST(Tensor, Rank4LayoutIsRowMajorChannelsLast) {
    auto t = fog::Tensor<float>::zeros4(2, 3, 4, 5);
    EXPECT_EQ(t.rank, 4);
    EXPECT_EQ(t.n(), 2);
    EXPECT_EQ(t.h(), 3);
    EXPECT_EQ(t.w(), 4);
    EXPECT_EQ(t.c(), 5);
    EXPECT_EQ(t.v.size(), 2u * 3u * 4u * 5u);
    // at(n,i,j,c) must address ((n*H + i)*W + j)*C + c.
    t.v[((1 * 3 + 2) * 4 + 3) * 5 + 4] = 42.0f;
    EXPECT_EQ(t.at(1, 2, 3, 4), 42.0f);
}

TEST(Tensor, Rank2LayoutIsRowMajor) {
    auto t = fog::Tensor<double>::zeros2(3, 7);
    EXPECT_EQ(t.rank, 2);
    EXPECT_EQ(t.n(), 3);
    EXPECT_EQ(t.c(), 7);
    t.v[2 * 7 + 5] = -1.0;
    EXPECT_EQ(t.at(2, 5), -1.0);
}

TEST(Tensor, SameShapeComparesRankAndDims) {
    auto a = fog::Tensor<float>::zeros4(1, 2, 2, 3);
    auto b = fog::Tensor<float>::zeros4(1, 2, 2, 3);
    auto c = fog::Tensor<float>::zeros4(1, 2, 3, 2);
    auto d = fog::Tensor<float>::zeros2(1, 12);
    EXPECT_TRUE(a.same_shape(b));
    EXPECT_FALSE(a.same_shape(c));
    EXPECT_FALSE(a.same_shape(d));
}

TEST(Tensor, RequireSameShapeThrows) {
    auto a = fog::Tensor<float>::zeros4(1, 2, 2, 3);
    auto b = fog::Tensor<float>::zeros4(2, 2, 2, 3);
    EXPECT_NO_THROW(fog::require_same_shape(a, a, "a"));
    EXPECT_THROW(fog::require_same_shape(a, b, "ab"), fog::ShapeMismatch);
}

TEST(Tensor, CastConvertsElementwise) {
    auto a = fog::Tensor<double>::zeros2(1, 3);
    a.v = {1.5, -2.0, 0.25};
    auto f = a.cast<float>();
    EXPECT_EQ(f.rank, 2);
    EXPECT_EQ(f.v[0], 1.5f);
    EXPECT_EQ(f.v[1], -2.0f);
    EXPECT_EQ(f.v[2], 0.25f);
}

TEST(Tensor, AllFiniteDetectsNanAndInf) {
    auto a = fog::Tensor<float>::zeros2(1, 3);
    EXPECT_TRUE(fog::all_finite(a));
    a.v[1] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_FALSE(fog::all_finite(a));
    a.v[1] = std::numeric_limits<float>::infinity();
    EXPECT_FALSE(fog::all_finite(a));
}

TEST(Tensor, ShapeStringIsReadable) {
    auto a = fog::Tensor<float>::zeros4(1, 64, 64, 3);
    auto b = fog::Tensor<float>::zeros2(10, 2);
    EXPECT_EQ(fog::shape_string(a.dims, a.rank), "(1,64,64,3)");
    EXPECT_EQ(fog::shape_string(b.dims, b.rank), "(10,2)");
}

}  // namespace
