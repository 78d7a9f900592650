// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "oracles.hpp"
#include "tdgemm/error.hpp"
#include "tdgemm/matrix_io.hpp"

using namespace tdgemm;
namespace fs = std::filesystem;

class MatrixIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("tdgemm_io_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(MatrixIo, BinaryRoundTrip) {
  std::mt19937_64 rng(1);
  const auto f = oracle::random_uniform<float>(7, 5, 3.0, rng);
  const auto d = oracle::random_uniform<double>(4, 9, 3.0, rng);
  write_matrix(dir_ / "f.bin", f);
  write_matrix(dir_ / "d.bin", d);
  EXPECT_TRUE(bitwise_equal(read_matrix<float>(dir_ / "f.bin"), f));
  EXPECT_TRUE(bitwise_equal(read_matrix<double>(dir_ / "d.bin"), d));
  EXPECT_EQ(peek_matrix_precision(dir_ / "f.bin"), Precision::kSingle);
  EXPECT_EQ(peek_matrix_precision(dir_ / "d.bin"), Precision::kDouble);
  EXPECT_EQ(fs::file_size(dir_ / "f.bin"), 13u + 35 * 4);
}

TEST_F(MatrixIo, CsvRoundTrip) {
  std::mt19937_64 rng(2);
  const auto d = oracle::random_uniform<double>(3, 4, 1e5, rng);
  write_matrix(dir_ / "d.csv", d);
  EXPECT_TRUE(bitwise_equal(read_matrix<double>(dir_ / "d.csv"), d));
}

TEST_F(MatrixIo, RejectsBadFiles) {
  std::ofstream(dir_ / "junk.bin") << "NOPE123456789";
  EXPECT_THROW(read_matrix<float>(dir_ / "junk.bin"), FormatError);
  write_matrix(dir_ / "f.bin", Matrix<float>(2, 2));
  EXPECT_THROW(read_matrix<double>(dir_ / "f.bin"), FormatError);
  fs::resize_file(dir_ / "f.bin", 20);
  EXPECT_THROW(read_matrix<float>(dir_ / "f.bin"), FormatError);
  std::ofstream(dir_ / "ragged.csv") << "1,2\n3\n";
  EXPECT_THROW(read_matrix<double>(dir_ / "ragged.csv"), FormatError);
  EXPECT_THROW(read_matrix<double>(dir_ / "missing.bin"), FormatError);
}

TEST_F(MatrixIo, DigestTracksContent) {
  write_matrix(dir_ / "a.bin", Matrix<float>{{1, 2}});
  write_matrix(dir_ / "b.bin", Matrix<float>{{1, 3}});
  EXPECT_NE(file_digest(dir_ / "a.bin"), file_digest(dir_ / "b.bin"));
  EXPECT_EQ(file_digest(dir_ / "a.bin").size(), 16u);
}
