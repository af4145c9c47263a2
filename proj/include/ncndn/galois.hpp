#pragma once

// Arithmetic and dense linear algebra over GF(2^8).
//
// The field is built on the AES polynomial x^8 + x^4 + x^3 + x + 1 (0x11B).
// Multiplication goes through a 64 KiB product table that is built once on
// first use; everything here is pure and safe to call from multiple threads.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ncndn::galois {

using Element = std::uint8_t;
using CoefficientVector = std::vector<Element>;
using Bytes = std::vector<std::uint8_t>;

inline constexpr unsigned kPolynomial = 0x11B;

class SingularMatrix : public std::runtime_error {
 public:
  explicit SingularMatrix(std::size_t rank, std::size_t rows);
  std::size_t rank() const { return rank_; }

 private:
  std::size_t rank_;
};

inline constexpr Element add(Element a, Element b) { return a ^ b; }
inline constexpr Element sub(Element a, Element b) { return a ^ b; }

Element mul(Element a, Element b);

// Throws std::domain_error for zero.
Element inv(Element a);
Element div(Element a, Element b);

// Row `a` of the product table: mul_row(a)[b] == mul(a, b).
const Element* mul_row(Element a);

// dst[i] ^= c * src[i]. Sizes must match.
void axpy(std::span<Element> dst, Element c, std::span<const Element> src);
void scale(std::span<Element> v, Element c);

class CoefficientMatrix {
 public:
  CoefficientMatrix() = default;
  CoefficientMatrix(std::size_t rows, std::size_t cols);
  // All rows must have the same length; throws std::invalid_argument otherwise.
  explicit CoefficientMatrix(const std::vector<CoefficientVector>& rows);

  static CoefficientMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Element& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Element at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Element> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const Element> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void append_row(std::span<const Element> values);
  void swap_rows(std::size_t a, std::size_t b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Element> data_;
};

// Rank by Gaussian elimination.
std::size_t rank(const CoefficientMatrix& m);

// Returns M * payloads, i.e. out[i] = sum_j M[i][j] * payloads[j].
std::vector<Bytes> multiply(const CoefficientMatrix& m,
                            std::span<const Bytes> payloads);

// Solves M * X = payloads for X. M must be square; throws SingularMatrix when
// it is rank deficient and std::invalid_argument on shape mismatch.
std::vector<Bytes> solve(const CoefficientMatrix& m,
                         std::span<const Bytes> payloads);

}  // namespace ncndn::galois
