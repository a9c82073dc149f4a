#ifndef PEPO_ORACLE_HPP
#define PEPO_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pepo/evolution.hpp"
#include "pepo/models.hpp"
#include "pepo/tensor.hpp"

namespace pepo {

// Small open-boundary lattice for brute-force validation. Sites are indexed
// row-major; the Hilbert space is capped so dense exponentiation stays cheap.
struct SmallLattice {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t siteCount() const { return rows * cols; }
  std::size_t site(std::size_t r, std::size_t c) const { return r * cols + c; }

  std::vector<std::pair<std::size_t, std::size_t>> bonds() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        if (c + 1 < cols) out.emplace_back(site(r, c), site(r, c + 1));
        if (r + 1 < rows) out.emplace_back(site(r, c), site(r + 1, c));
      }
    return out;
  }

  std::size_t coordination(std::size_t s) const {
    std::size_t r = s / cols, c = s % cols;
    std::size_t z = 0;
    if (r > 0) ++z;
    if (r + 1 < rows) ++z;
    if (c > 0) ++z;
    if (c + 1 < cols) ++z;
    return z;
  }

  std::size_t hilbertDim(std::size_t d) const {
    double dim = std::pow(double(d), double(siteCount()));
    if (dim > 4096.0)
      throw ArgumentError("SmallLattice: Hilbert dimension exceeds 4096");
    return std::size_t(std::llround(dim));
  }
};

namespace detail {

// Add a two-site operator (s_i', s_j', s_i, s_j) acting on sites i, j into a
// full-lattice matrix.
inline void addTwoSite(MatrixXc& H, const DenseTensor& op, std::size_t i,
                       std::size_t j, std::size_t n_sites, std::size_t d) {
  const std::size_t dim = H.rows();
  std::vector<std::size_t> digits(n_sites);
  for (std::size_t s = 0; s < dim; ++s) {
    std::size_t rem = s;
    for (std::size_t k = n_sites; k-- > 0;) {
      digits[k] = rem % d;
      rem /= d;
    }
    std::size_t si = digits[i], sj = digits[j];
    // strides of site digits in the row-major basis index
    std::size_t stride_i = 1, stride_j = 1;
    for (std::size_t k = i + 1; k < n_sites; ++k) stride_i *= d;
    for (std::size_t k = j + 1; k < n_sites; ++k) stride_j *= d;
    std::size_t base = s - si * stride_i - sj * stride_j;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        Complex amp = op(a, b, si, sj);
        if (amp == Complex(0.0, 0.0)) continue;
        H(base + a * stride_i + b * stride_j, s) += amp;
      }
  }
}

inline MatrixXc embedTwoSite(const DenseTensor& op, std::size_t i,
                             std::size_t j, std::size_t n_sites,
                             std::size_t d, std::size_t dim) {
  MatrixXc m = MatrixXc::Zero(dim, dim);
  addTwoSite(m, op, i, j, n_sites, d);
  return m;
}

inline MatrixXc embedOneSite(const DenseTensor& op, std::size_t i,
                             std::size_t n_sites, std::size_t d,
                             std::size_t dim) {
  MatrixXc m = MatrixXc::Zero(dim, dim);
  std::size_t stride = 1;
  for (std::size_t k = i + 1; k < n_sites; ++k) stride *= d;
  for (std::size_t s = 0; s < dim; ++s) {
    std::size_t si = (s / stride) % d;
    std::size_t base = s - si * stride;
    for (std::size_t a = 0; a < d; ++a) {
      Complex amp = op(a, si);
      if (amp != Complex(0.0, 0.0)) m(base + a * stride, s) += amp;
    }
  }
  return m;
}

}  // namespace detail

// Full Hamiltonian with open boundaries: pure two-site terms on every bond
// plus the complete one-site term once per site.
inline MatrixXc denseHamiltonian(const Model& model, const SmallLattice& lat) {
  const std::size_t d = model.local_dim;
  const std::size_t n = lat.siteCount();
  const std::size_t dim = lat.hilbertDim(d);
  MatrixXc H = MatrixXc::Zero(dim, dim);
  for (const auto& [i, j] : lat.bonds())
    detail::addTwoSite(H, model.two_site, i, j, n, d);
  for (std::size_t i = 0; i < n; ++i)
    H += detail::embedOneSite(model.one_site, i, n, d, dim);
  return H;
}

// Tr(O_site e^{-beta H}) / Tr(e^{-beta H}) by dense eigendecomposition.
inline double exactThermalExpectation(const Model& model,
                                      const SmallLattice& lat, double beta,
                                      const DenseTensor& op,
                                      std::size_t site) {
  const std::size_t dim = lat.hilbertDim(model.local_dim);
  MatrixXc H = denseHamiltonian(model, lat);
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(H);
  Eigen::VectorXd ev = es.eigenvalues();
  double e0 = ev.minCoeff();
  Eigen::VectorXd w = (-beta * (ev.array() - e0)).exp();
  MatrixXc O = detail::embedOneSite(op, site, lat.siteCount(),
                                    model.local_dim, dim);
  MatrixXc Od = es.eigenvectors().adjoint() * O * es.eigenvectors();
  double num = (Od.diagonal().array().real() * w.array()).sum();
  double den = w.sum();
  return num / den;
}

// The same first-order bond-ordered product formula used by the evolution
// module, applied densely and without truncation: each slice conjugates rho
// by exp(-delta_beta/2 h_bond) for every bond in order, with one-site terms
// re-weighted by the actual coordination of each endpoint so the product
// targets exactly the Hamiltonian above.
inline double trotterizedThermalExpectation(const Model& model,
                                            const SmallLattice& lat,
                                            double beta, double delta_beta,
                                            const DenseTensor& op,
                                            std::size_t site,
                                            bool reverse_bond_order = false) {
  const std::size_t d = model.local_dim;
  const std::size_t n = lat.siteCount();
  const std::size_t dim = lat.hilbertDim(d);

  std::vector<MatrixXc> gates;
  for (const auto& [i, j] : lat.bonds()) {
    DenseTensor hb = model.bondTerm(1.0 / double(lat.coordination(i)),
                                    1.0 / double(lat.coordination(j)));
    DenseTensor g = bondExponential(hb, delta_beta / 2.0);
    gates.push_back(detail::embedTwoSite(g, i, j, n, d, dim));
  }
  if (reverse_bond_order) std::reverse(gates.begin(), gates.end());

  MatrixXc rho = MatrixXc::Identity(dim, dim);
  const std::size_t m = std::size_t(std::llround(beta / delta_beta));
  for (std::size_t slice = 0; slice < m; ++slice) {
    for (const auto& g : gates) rho = g * rho * g.adjoint();
    rho /= rho.norm();
  }
  MatrixXc O = detail::embedOneSite(op, site, n, d, dim);
  Complex num = (O * rho).trace();
  Complex den = rho.trace();
  return (num / den).real();
}

// Splitting error of one temperature slice: Frobenius distance between the
// bond-ordered product of gates and the exact slice exponential e^{-db H}.
// The product formula is first order, so this distance shrinks
// quadratically in the slice width (the accumulated error over a fixed
// total beta is linear; the quadratic claim is per slice).
inline double trotterSliceError(const Model& model, const SmallLattice& lat,
                                double delta_beta) {
  const std::size_t d = model.local_dim;
  const std::size_t n = lat.siteCount();
  const std::size_t dim = lat.hilbertDim(d);

  MatrixXc prod = MatrixXc::Identity(dim, dim);
  for (const auto& [i, j] : lat.bonds()) {
    DenseTensor hb = model.bondTerm(1.0 / double(lat.coordination(i)),
                                    1.0 / double(lat.coordination(j)));
    DenseTensor g = bondExponential(hb, delta_beta);
    prod = detail::embedTwoSite(g, i, j, n, d, dim) * prod;
  }

  MatrixXc H = denseHamiltonian(model, lat);
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(H);
  MatrixXc exact =
      es.eigenvectors() *
      (-delta_beta * es.eigenvalues().array()).exp().matrix().asDiagonal() *
      es.eigenvectors().adjoint();
  return (prod - exact).norm() / exact.norm();
}

}  // namespace pepo

#endif
