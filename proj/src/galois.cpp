#include "ncndn/galois.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <utility>

namespace ncndn::galois {
namespace {

struct Tables {
  std::array<std::array<Element, 256>, 256> product{};
  std::array<Element, 256> inverse{};

  Tables() {
    // 0x03 generates the multiplicative group under 0x11B.
    std::array<Element, 255> exp{};
    std::array<int, 256> log{};
    unsigned x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<Element>(x);
      log[x] = i;
      unsigned doubled = x << 1;
      if (doubled & 0x100) doubled ^= kPolynomial;
      x ^= doubled;  // x * 3 = x * 2 + x
    }
    for (int a = 1; a < 256; ++a) {
      for (int b = 1; b < 256; ++b) {
        product[a][b] = exp[(log[a] + log[b]) % 255];
      }
      inverse[a] = exp[(255 - log[a]) % 255];
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

SingularMatrix::SingularMatrix(std::size_t rank, std::size_t rows)
    : std::runtime_error("singular matrix: rank " + std::to_string(rank) +
                         " < " + std::to_string(rows)),
      rank_(rank) {}

Element mul(Element a, Element b) { return tables().product[a][b]; }

Element inv(Element a) {
  if (a == 0) throw std::domain_error("zero has no inverse in GF(256)");
  return tables().inverse[a];
}

Element div(Element a, Element b) { return mul(a, inv(b)); }

const Element* mul_row(Element a) { return tables().product[a].data(); }

void axpy(std::span<Element> dst, Element c, std::span<const Element> src) {
  if (dst.size() != src.size()) {
    throw std::invalid_argument("axpy: size mismatch");
  }
  if (c == 0) return;
  if (c == 1) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
    return;
  }
  const Element* row = mul_row(c);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= row[src[i]];
}

void scale(std::span<Element> v, Element c) {
  const Element* row = mul_row(c);
  for (auto& e : v) e = row[e];
}

CoefficientMatrix::CoefficientMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

CoefficientMatrix::CoefficientMatrix(const std::vector<CoefficientVector>& rows)
    : rows_(rows.size()), cols_(rows.empty() ? 0 : rows.front().size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw std::invalid_argument("coefficient rows differ in length");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

CoefficientMatrix CoefficientMatrix::identity(std::size_t n) {
  CoefficientMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

void CoefficientMatrix::append_row(std::span<const Element> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw std::invalid_argument("appended row has wrong length");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void CoefficientMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  std::swap_ranges(data_.begin() + a * cols_, data_.begin() + (a + 1) * cols_,
                   data_.begin() + b * cols_);
}

std::size_t rank(const CoefficientMatrix& m) {
  CoefficientMatrix work = m;
  std::size_t r = 0;
  for (std::size_t col = 0; col < work.cols() && r < work.rows(); ++col) {
    std::size_t pivot = r;
    while (pivot < work.rows() && work.at(pivot, col) == 0) ++pivot;
    if (pivot == work.rows()) continue;
    work.swap_rows(r, pivot);
    scale(work.row(r), inv(work.at(r, col)));
    for (std::size_t i = r + 1; i < work.rows(); ++i) {
      if (Element f = work.at(i, col); f != 0) axpy(work.row(i), f, work.row(r));
    }
    ++r;
  }
  return r;
}

std::vector<Bytes> multiply(const CoefficientMatrix& m,
                            std::span<const Bytes> payloads) {
  if (payloads.size() != m.cols()) {
    throw std::invalid_argument("multiply: payload count != columns");
  }
  const std::size_t len = payloads.empty() ? 0 : payloads.front().size();
  std::vector<Bytes> out(m.rows(), Bytes(len, 0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (payloads[j].size() != len) {
        throw std::invalid_argument("multiply: payload lengths differ");
      }
      axpy(out[i], m.at(i, j), payloads[j]);
    }
  }
  return out;
}

std::vector<Bytes> solve(const CoefficientMatrix& m,
                         std::span<const Bytes> payloads) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("solve: matrix not square");
  if (payloads.size() != n) {
    throw std::invalid_argument("solve: payload count != rows");
  }
  CoefficientMatrix a = m;
  std::vector<Bytes> x(payloads.begin(), payloads.end());
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a.at(pivot, col) == 0) ++pivot;
    if (pivot == n) throw SingularMatrix(rank(m), n);
    a.swap_rows(col, pivot);
    std::swap(x[col], x[pivot]);
    const Element f = inv(a.at(col, col));
    scale(a.row(col), f);
    scale(x[col], f);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      if (Element g = a.at(i, col); g != 0) {
        axpy(a.row(i), g, a.row(col));
        axpy(x[i], g, x[col]);
      }
    }
  }
  return x;
}

}  // namespace ncndn::galois
