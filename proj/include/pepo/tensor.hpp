#ifndef PEPO_TENSOR_HPP
#define PEPO_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pepo/errors.hpp"

namespace pepo {

using Complex = std::complex<double>;

using MatrixXc =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense multi-index array of complex doubles in row-major order.
// The last index runs fastest; all index arithmetic in the library
// (vectorization, bond fusion) is defined relative to this layout.
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (std::size_t e : shape_) {
      if (e == 0) throw DimensionError("DenseTensor: zero extent");
      n *= e;
    }
    data_.assign(n, Complex(0.0, 0.0));
  }

  DenseTensor(std::vector<std::size_t> shape, std::vector<Complex> elems)
      : shape_(std::move(shape)), data_(std::move(elems)) {
    std::size_t n = 1;
    for (std::size_t e : shape_) n *= e;
    if (n != data_.size())
      throw DimensionError("DenseTensor: element count does not match shape");
  }

  static DenseTensor identity(std::size_t d) {
    DenseTensor t({d, d});
    for (std::size_t i = 0; i < d; ++i) t.data_[i * d + i] = 1.0;
    return t;
  }

  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  const std::vector<std::size_t>& shape() const { return shape_; }

  Complex* data() { return data_.data(); }
  const Complex* data() const { return data_.data(); }
  std::vector<Complex>& elements() { return data_; }
  const std::vector<Complex>& elements() const { return data_; }

  Complex& operator[](std::size_t flat) { return data_[flat]; }
  const Complex& operator[](std::size_t flat) const { return data_[flat]; }

  template <typename... Idx>
  Complex& operator()(Idx... idx) {
    return data_[flatten({static_cast<std::size_t>(idx)...})];
  }
  template <typename... Idx>
  const Complex& operator()(Idx... idx) const {
    return data_[flatten({static_cast<std::size_t>(idx)...})];
  }

  std::size_t flatten(std::initializer_list<std::size_t> idx) const {
    std::size_t flat = 0;
    std::size_t a = 0;
    for (std::size_t i : idx) flat = flat * shape_[a++] + i;
    return flat;
  }

  // Optional per-index tags, carried along permutes when present.
  std::vector<std::string> labels;

  DenseTensor permuted(std::span<const std::size_t> axes) const {
    if (axes.size() != rank())
      throw ArgumentError("permuted: axis list length mismatch");
    std::vector<bool> seen(rank(), false);
    for (std::size_t a : axes) {
      if (a >= rank() || seen[a]) throw ArgumentError("permuted: bad axis list");
      seen[a] = true;
    }
    std::vector<std::size_t> new_shape(rank());
    for (std::size_t k = 0; k < rank(); ++k) new_shape[k] = shape_[axes[k]];
    DenseTensor out(new_shape);
    if (!labels.empty()) {
      out.labels.resize(rank());
      for (std::size_t k = 0; k < rank(); ++k) out.labels[k] = labels[axes[k]];
    }

    const std::size_t r = rank();
    std::vector<std::size_t> old_strides(r, 1);
    for (std::size_t k = r; k-- > 1;)
      old_strides[k - 1] = old_strides[k] * shape_[k];
    // stride of the old axis feeding each new axis
    std::vector<std::size_t> src_stride(r);
    for (std::size_t k = 0; k < r; ++k) src_stride[k] = old_strides[axes[k]];

    std::vector<std::size_t> idx(r, 0);
    std::size_t src = 0;
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
      out.data_[flat] = data_[src];
      for (std::size_t k = r; k-- > 0;) {
        if (++idx[k] < new_shape[k]) {
          src += src_stride[k];
          break;
        }
        src -= src_stride[k] * (new_shape[k] - 1);
        idx[k] = 0;
      }
    }
    return out;
  }

  DenseTensor permuted(std::initializer_list<std::size_t> axes) const {
    std::vector<std::size_t> v(axes);
    return permuted(std::span<const std::size_t>(v));
  }

  // Element sequence is untouched; only the shape header changes.
  DenseTensor reshaped(std::vector<std::size_t> new_shape) const {
    std::size_t n = 1;
    for (std::size_t e : new_shape) n *= e;
    if (n != size()) throw DimensionError("reshaped: element count mismatch");
    DenseTensor out;
    out.shape_ = std::move(new_shape);
    out.data_ = data_;
    return out;
  }

  DenseTensor conjugated() const {
    DenseTensor out = *this;
    for (auto& z : out.data_) z = std::conj(z);
    return out;
  }

  double maxAbs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  double frobeniusNorm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  bool allFinite() const {
    for (const auto& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  DenseTensor& operator*=(Complex c) {
    for (auto& z : data_) z *= c;
    return *this;
  }

  DenseTensor& operator+=(const DenseTensor& other) {
    if (other.shape_ != shape_) throw DimensionError("operator+=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  DenseTensor& operator-=(const DenseTensor& other) {
    if (other.shape_ != shape_) throw DimensionError("operator-=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }

  // Multiply slices along one axis by real weights (diagonal gauge absorb).
  void scaleAxis(std::size_t axis, std::span<const double> w) {
    if (axis >= rank()) throw ArgumentError("scaleAxis: bad axis");
    if (w.size() != shape_[axis]) throw DimensionError("scaleAxis: weight length");
    std::size_t inner = 1;
    for (std::size_t k = axis + 1; k < rank(); ++k) inner *= shape_[k];
    std::size_t outer = size() / (inner * shape_[axis]);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t a = 0; a < shape_[axis]; ++a) {
        Complex* p = data_.data() + (o * shape_[axis] + a) * inner;
        for (std::size_t i = 0; i < inner; ++i) p[i] *= w[a];
      }
  }

  // View the tensor as a matrix splitting axes [0, n_left) x [n_left, rank).
  Eigen::Map<const MatrixXc> asMatrix(std::size_t n_left_axes) const {
    std::size_t rows = 1, cols = 1;
    for (std::size_t k = 0; k < n_left_axes; ++k) rows *= shape_[k];
    for (std::size_t k = n_left_axes; k < rank(); ++k) cols *= shape_[k];
    return Eigen::Map<const MatrixXc>(data_.data(), rows, cols);
  }

  Eigen::Map<MatrixXc> asMatrix(std::size_t n_left_axes) {
    std::size_t rows = 1, cols = 1;
    for (std::size_t k = 0; k < n_left_axes; ++k) rows *= shape_[k];
    for (std::size_t k = n_left_axes; k < rank(); ++k) cols *= shape_[k];
    return Eigen::Map<MatrixXc>(data_.data(), rows, cols);
  }

  static DenseTensor fromMatrix(const MatrixXc& m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()),
                   static_cast<std::size_t>(m.cols())});
    Eigen::Map<MatrixXc>(t.data(), m.rows(), m.cols()) = m;
    return t;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<Complex> data_;
};

inline DenseTensor operator*(Complex c, DenseTensor t) {
  t *= c;
  return t;
}

inline DenseTensor operator+(DenseTensor a, const DenseTensor& b) {
  a += b;
  return a;
}

inline DenseTensor operator-(DenseTensor a, const DenseTensor& b) {
  a -= b;
  return a;
}

using IndexPair = std::pair<std::size_t, std::size_t>;

// Pairwise contraction. Paired indices (i of a, j of b) are summed over;
// free indices of the result are a's free indices followed by b's.
inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            std::span<const IndexPair> pairs) {
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  for (const auto& [ia, ib] : pairs) {
    if (ia >= a.rank() || ib >= b.rank())
      throw ArgumentError("contract: pair index out of range");
    if (used_a[ia] || used_b[ib])
      throw ArgumentError("contract: repeated index in pairs");
    used_a[ia] = used_b[ib] = true;
    if (a.extent(ia) != b.extent(ib))
      throw DimensionError("contract: extent mismatch on paired indices");
  }

  std::vector<std::size_t> perm_a, perm_b;
  for (std::size_t k = 0; k < a.rank(); ++k)
    if (!used_a[k]) perm_a.push_back(k);
  std::size_t n_free_a = perm_a.size();
  for (const auto& [ia, ib] : pairs) perm_a.push_back(ia);
  for (const auto& [ia, ib] : pairs) perm_b.push_back(ib);
  std::size_t n_contracted = perm_b.size();
  for (std::size_t k = 0; k < b.rank(); ++k)
    if (!used_b[k]) perm_b.push_back(k);

  DenseTensor ap = a.permuted(std::span<const std::size_t>(perm_a));
  DenseTensor bp = b.permuted(std::span<const std::size_t>(perm_b));

  std::vector<std::size_t> out_shape;
  for (std::size_t k = 0; k < n_free_a; ++k) out_shape.push_back(ap.extent(k));
  for (std::size_t k = n_contracted; k < bp.rank(); ++k)
    out_shape.push_back(bp.extent(k));
  if (out_shape.empty()) out_shape.push_back(1);  // rank-0 as a 1-extent scalar

  DenseTensor out(out_shape);
  auto ma = ap.asMatrix(n_free_a);
  auto mb = bp.asMatrix(n_contracted);
  Eigen::Map<MatrixXc>(out.data(), ma.rows(), mb.cols()).noalias() = ma * mb;
  return out;
}

inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            std::initializer_list<IndexPair> pairs) {
  std::vector<IndexPair> v(pairs);
  return contract(a, b, std::span<const IndexPair>(v));
}

struct SvdResult {
  DenseTensor left_isometry;            // (left group extents..., kept)
  std::vector<double> singular_values;  // descending, >= 0
  DenseTensor right_isometry;           // (kept, right group extents...)
  double truncation_error = 0.0;        // sqrt(discarded weight / total weight)
};

// SVD across the axis partition [0, n_left) | [n_left, rank); keeps at most
// max_rank values and drops those below cutoff * sigma_max. Callers needing a
// different partition permute first.
inline SvdResult truncatedSvd(const DenseTensor& t, std::size_t n_left_axes,
                              std::size_t max_rank, double cutoff) {
  if (n_left_axes == 0 || n_left_axes >= t.rank())
    throw ArgumentError("truncatedSvd: split must leave both groups non-empty");
  if (max_rank < 1) throw ArgumentError("truncatedSvd: max_rank must be >= 1");
  if (!t.allFinite()) throw NumericalError("truncatedSvd: non-finite elements");

  auto m = t.asMatrix(n_left_axes);
  MatrixXc u;
  Eigen::VectorXd sv;
  MatrixXc v;
  if (std::min(m.rows(), m.cols()) > 64) {
    Eigen::BDCSVD<MatrixXc> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    sv = svd.singularValues();
    v = svd.matrixV();
  } else {
    Eigen::JacobiSVD<MatrixXc> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    sv = svd.singularValues();
    v = svd.matrixV();
  }

  double total_sq = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) total_sq += sv[i] * sv[i];

  std::size_t keep = std::min<std::size_t>(max_rank, sv.size());
  double smax = sv.size() > 0 ? sv[0] : 0.0;
  while (keep > 1 && sv[keep - 1] < cutoff * smax) --keep;

  double kept_sq = 0.0;
  for (std::size_t i = 0; i < keep; ++i) kept_sq += sv[i] * sv[i];
  double trunc_err =
      total_sq > 0.0 ? std::sqrt(std::max(0.0, total_sq - kept_sq) / total_sq)
                     : 0.0;

  std::vector<std::size_t> lshape(t.shape().begin(),
                                  t.shape().begin() + n_left_axes);
  lshape.push_back(keep);
  std::vector<std::size_t> rshape;
  rshape.push_back(keep);
  rshape.insert(rshape.end(), t.shape().begin() + n_left_axes, t.shape().end());

  SvdResult r;
  r.left_isometry = DenseTensor(std::move(lshape));
  r.right_isometry = DenseTensor(std::move(rshape));
  r.singular_values.assign(sv.data(), sv.data() + keep);
  r.truncation_error = trunc_err;

  Eigen::Map<MatrixXc>(r.left_isometry.data(), m.rows(), keep) =
      u.leftCols(keep);
  Eigen::Map<MatrixXc>(r.right_isometry.data(), keep, m.cols()) =
      v.leftCols(keep).adjoint();
  return r;
}

// Drop trailing singular triples beyond max_rank from an existing
// decomposition, folding the extra discarded weight into truncation_error.
inline void truncateSvdResult(SvdResult& r, std::size_t max_rank) {
  const std::size_t K = r.singular_values.size();
  if (max_rank < 1) throw ArgumentError("truncateSvdResult: max_rank < 1");
  if (K <= max_rank) return;

  double kept_sq = 0.0, new_kept_sq = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    double w = r.singular_values[i] * r.singular_values[i];
    kept_sq += w;
    if (i < max_rank) new_kept_sq += w;
  }
  double te = r.truncation_error;
  double total_sq = kept_sq / std::max(1.0 - te * te, 1e-300);
  r.truncation_error =
      std::sqrt(std::max(0.0, total_sq - new_kept_sq) / total_sq);

  std::vector<std::size_t> lshape = r.left_isometry.shape();
  std::size_t rows = r.left_isometry.size() / K;
  lshape.back() = max_rank;
  DenseTensor left(lshape);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < max_rank; ++j)
      left[i * max_rank + j] = r.left_isometry[i * K + j];

  std::vector<std::size_t> rshape = r.right_isometry.shape();
  std::size_t cols = r.right_isometry.size() / K;
  rshape.front() = max_rank;
  DenseTensor right(rshape);
  for (std::size_t i = 0; i < max_rank * cols; ++i)
    right[i] = r.right_isometry[i];

  r.left_isometry = std::move(left);
  r.right_isometry = std::move(right);
  r.singular_values.resize(max_rank);
}

}  // namespace pepo

#endif
