// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tdgemm/config.hpp"
#include "tdgemm/matrix.hpp"

namespace tdgemm {

// Binary layout, little-endian: "TGMM", u32 rows, u32 cols, u8 precision
// code (bytes per element, 4 or 8), then row-major elements.

template <Real T>
void write_matrix_binary(const std::filesystem::path& path, const Matrix<T>& m);

// Throws FormatError on a bad header or truncated data, and when the stored
// precision differs from T.
template <Real T>
Matrix<T> read_matrix_binary(const std::filesystem::path& path);

Precision peek_matrix_precision(const std::filesystem::path& path);

template <Real T>
void write_matrix_csv(const std::filesystem::path& path, const Matrix<T>& m);

template <Real T>
Matrix<T> read_matrix_csv(const std::filesystem::path& path);

// Picks the format from the extension: ".csv" or binary otherwise.
template <Real T>
Matrix<T> read_matrix(const std::filesystem::path& path);

template <Real T>
void write_matrix(const std::filesystem::path& path, const Matrix<T>& m);

// FNV-1a 64 of the file bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace tdgemm
