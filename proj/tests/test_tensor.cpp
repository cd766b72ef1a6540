#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fpcpd/tensor.hpp"
#include "fpcpd/tensor_io.hpp"
#include "test_util.hpp"

using namespace fpcpd;
using fpcpd::testing::random_model;
using fpcpd::testing::random_tensor;

namespace {

FactorModel rank_one_222() {
  Matrix a(2, 1), b(2, 1), c(2, 1);
  a << 1, 2;
  b << 1, 1;
  c << 1, 0;
  return FactorModel(a, b, c);
}

}  // namespace

TEST(DenseTensor3, RejectsBadShapesAndNonFinite) {
  EXPECT_THROW(DenseTensor3(Dims{0, 2, 2}), InvalidArgument);
  EXPECT_THROW(DenseTensor3(Dims{2, 2, 2}, std::vector<double>(7, 0.0)), InvalidArgument);
  std::vector<double> v(8, 1.0);
  v[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(DenseTensor3(Dims{2, 2, 2}, v), InvalidArgument);
  v[3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(DenseTensor3(Dims{2, 2, 2}, v), InvalidArgument);
}

TEST(DenseTensor3, ModeOneFastestLayout) {
  DenseTensor3 t(Dims{2, 3, 4});
  EXPECT_EQ(t.index(1, 0, 0), 1u);
  EXPECT_EQ(t.index(0, 1, 0), 2u);
  EXPECT_EQ(t.index(0, 0, 1), 6u);
  EXPECT_THROW(t.at(2, 0, 0), InvalidArgument);
}

TEST(Unfold, ScalarTensor) {
  DenseTensor3 t(Dims{1, 1, 1}, {5.0});
  for (int m = 1; m <= 3; ++m) {
    const Matrix u = unfold(t, m);
    ASSERT_EQ(u.rows(), 1);
    ASSERT_EQ(u.cols(), 1);
    EXPECT_EQ(u(0, 0), 5.0);
  }
}

TEST(Unfold, RankOneHandExpanded) {
  const DenseTensor3 t = reconstruct(rank_one_222());
  Matrix expected(2, 4);
  expected << 1, 1, 0, 0, 2, 2, 0, 0;
  EXPECT_EQ(unfold(t, 1), expected);
}

TEST(Unfold, ShapesAndInvalidMode) {
  std::mt19937_64 rng(3);
  const DenseTensor3 t = random_tensor({3, 4, 5}, rng);
  EXPECT_EQ(unfold(t, 1).rows(), 3);
  EXPECT_EQ(unfold(t, 1).cols(), 20);
  EXPECT_EQ(unfold(t, 2).rows(), 4);
  EXPECT_EQ(unfold(t, 2).cols(), 15);
  EXPECT_EQ(unfold(t, 3).rows(), 5);
  EXPECT_EQ(unfold(t, 3).cols(), 12);
  EXPECT_THROW(unfold(t, 0), InvalidArgument);
  EXPECT_THROW(unfold(t, 4), InvalidArgument);
}

TEST(Unfold, FoldRoundTripProperty) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int trial = 0; trial < 25; ++trial) {
    const Dims d{dim(rng), dim(rng), dim(rng)};
    const DenseTensor3 t = random_tensor(d, rng);
    for (Mode m : {Mode::First, Mode::Second, Mode::Third}) EXPECT_EQ(fold(unfold(t, m), m, d), t);
  }
}

TEST(KhatriRao, HandExpanded) {
  Matrix m1(2, 1), m2(2, 1);
  m1 << 1, 2;
  m2 << 3, 4;
  Matrix expected(4, 1);
  expected << 3, 4, 6, 8;
  EXPECT_EQ(khatri_rao(m1, m2), expected);

  Matrix a(1, 1), b(1, 1);
  a << 2.5;
  b << -4;
  EXPECT_EQ(khatri_rao(a, b)(0, 0), -10.0);
}

TEST(KhatriRao, ShapeAndMismatch) {
  std::mt19937_64 rng(5);
  const Matrix p = fpcpd::testing::random_matrix(4, 3, rng);
  const Matrix q = fpcpd::testing::random_matrix(5, 3, rng);
  const Matrix kr = khatri_rao(p, q);
  EXPECT_EQ(kr.rows(), 20);
  EXPECT_EQ(kr.cols(), 3);
  EXPECT_THROW(khatri_rao(p, fpcpd::testing::random_matrix(5, 2, rng)), InvalidArgument);
}

TEST(Reconstruct, RankOneHandExpanded) {
  const DenseTensor3 t = reconstruct(rank_one_222());
  const double a[2] = {1, 2}, b[2] = {1, 1};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(t(i, j, 0), a[i] * b[j]);
      EXPECT_EQ(t(i, j, 1), 0.0);
    }
}

TEST(Reconstruct, ZeroFactorsGiveZeroTensor) {
  const DenseTensor3 t = reconstruct(FactorModel(Dims{3, 2, 4}, 3));
  for (double v : t.values()) EXPECT_EQ(v, 0.0);
}

TEST(Reconstruct, MatchesUnfoldedKhatriRaoIdentity) {
  std::mt19937_64 rng(17);
  for (std::size_t trial = 0; trial < 10; ++trial) {
    const Dims d{2 + trial % 3, 3, 4 + trial % 2};
    const FactorModel f = random_model(d, 1 + trial % 4, rng);
    const DenseTensor3 t = reconstruct(f);
    const Matrix m1 = f.A * khatri_rao(f.C, f.B).transpose();
    const Matrix m2 = f.B * khatri_rao(f.C, f.A).transpose();
    const Matrix m3 = f.C * khatri_rao(f.B, f.A).transpose();
    EXPECT_LE((unfold(t, Mode::First) - m1).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((unfold(t, Mode::Second) - m2).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((unfold(t, Mode::Third) - m3).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Loss, Examples) {
  std::mt19937_64 rng(2);
  const FactorModel f = random_model({4, 3, 5}, 3, rng);
  EXPECT_NEAR(loss(reconstruct(f), f), 0.0, 1e-12);

  const DenseTensor3 x = random_tensor({4, 3, 5}, rng);
  EXPECT_NEAR(loss(x, FactorModel(Dims{4, 3, 5}, 2)), x.squared_norm(), 1e-12);

  const DenseTensor3 ones(Dims{2, 2, 2}, std::vector<double>(8, 1.0));
  Matrix one = Matrix::Ones(2, 1);
  EXPECT_EQ(loss(ones, FactorModel(one, one, one)), 0.0);
  EXPECT_EQ(rmse(ones, FactorModel(Dims{2, 2, 2}, 1)), 1.0);

  EXPECT_THROW(loss(x, FactorModel(Dims{4, 3, 4}, 2)), InvalidArgument);
}

TEST(Loss, RmseIdentityAndScaleInvariance) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseTensor3 x = random_tensor({3, 4, 2}, rng);
    FactorModel f = random_model({3, 4, 2}, 2, rng);
    const double l = loss(x, f);
    const double r = rmse(x, f);
    EXPECT_NEAR(r * r * static_cast<double>(x.size()), l, 1e-10);
    EXPECT_NEAR(l, 2.0 * fpcpd::testing::half_loss_bruteforce(x, f), 1e-10);

    const double alpha = 0.25 + trial;
    f.A.col(1) *= alpha;
    f.B.col(1) /= alpha;
    EXPECT_NEAR(loss(x, f), l, 1e-9 * std::max(1.0, l));
  }
}

TEST(TensorIo, BinaryRoundTripIsBitExact) {
  std::mt19937_64 rng(29);
  const DenseTensor3 t = random_tensor({3, 5, 2}, rng);
  std::stringstream ss;
  write_tensor(ss, t);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 3 * 8 + t.size() * 8);
  EXPECT_EQ(bytes.substr(0, 4), "FPT3");
  // I = 3 as little-endian uint64
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3u);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(read_tensor(ss), t);
}

TEST(TensorIo, RejectsBadMagicAndTruncation) {
  std::stringstream bad("NOPE");
  EXPECT_THROW(read_tensor(bad), Error);
  std::mt19937_64 rng(1);
  std::stringstream ss;
  write_tensor(ss, random_tensor({2, 2, 2}, rng));
  std::string s = ss.str();
  s.resize(s.size() - 3);
  std::stringstream cut(s);
  EXPECT_THROW(read_tensor(cut), Error);
}

TEST(TensorIo, CsvIngestion) {
  std::stringstream ss("i,j,k,value\n0,0,0,1.5\n1,2,0,-2\n0,0,1,3\n");
  const DenseTensor3 t = read_tensor_csv(ss);
  EXPECT_EQ(t.dims(), (Dims{2, 3, 2}));
  EXPECT_EQ(t(0, 0, 0), 1.5);
  EXPECT_EQ(t(1, 2, 0), -2.0);
  EXPECT_EQ(t(0, 0, 1), 3.0);
  EXPECT_EQ(t(1, 1, 1), 0.0);

  std::stringstream dup("0,0,0,1\n0,0,0,2\n");
  EXPECT_THROW(read_tensor_csv(dup), Error);
  std::stringstream bad("0,0,0,1\n0,x,0,2\n");
  EXPECT_THROW(read_tensor_csv(bad), Error);

  std::stringstream out;
  write_tensor_csv(out, t);
  EXPECT_EQ(read_tensor_csv(out, t.dims()), t);
}
