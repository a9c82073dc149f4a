#ifndef PEPO_STATE_HPP
#define PEPO_STATE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <vector>

#include "pepo/tensor.hpp"

namespace pepo {

// Site tensor axes. Physical ket/bra first, then bonds clockwise from up.
enum Axis : std::size_t {
  AX_KET = 0,
  AX_BRA = 1,
  AX_UP = 2,
  AX_RIGHT = 3,
  AX_DOWN = 4,
  AX_LEFT = 5
};

enum Sublattice : std::size_t { SUB_A = 0, SUB_B = 1 };

// The four inequivalent bonds of the checkerboard cell.
enum BondClass : std::size_t {
  BOND_AR = 0,  // A.right -- B.left
  BOND_AD = 1,  // A.down  -- B.up
  BOND_BR = 2,  // B.right -- A.left
  BOND_BD = 3   // B.down  -- A.up
};

inline BondClass bondOf(Sublattice s, Axis axis) {
  if (s == SUB_A) {
    switch (axis) {
      case AX_UP: return BOND_BD;
      case AX_RIGHT: return BOND_AR;
      case AX_DOWN: return BOND_AD;
      case AX_LEFT: return BOND_BR;
      default: break;
    }
  } else {
    switch (axis) {
      case AX_UP: return BOND_AD;
      case AX_RIGHT: return BOND_BR;
      case AX_DOWN: return BOND_BD;
      case AX_LEFT: return BOND_AR;
      default: break;
    }
  }
  throw ArgumentError("bondOf: not a bond axis");
}

// vec(rho)[s*d + s'] = rho[s, s']; with this ordering
// vec(A rho B) = (A (x) B^T) vec(rho).
inline std::vector<Complex> vectorize(const DenseTensor& op) {
  if (op.rank() != 2 || op.extent(0) != op.extent(1))
    throw DimensionError("vectorize: operator must be square d x d");
  return op.elements();
}

inline DenseTensor devectorize(const std::vector<Complex>& v, std::size_t d) {
  if (v.size() != d * d) throw DimensionError("devectorize: length != d^2");
  return DenseTensor({d, d}, v);
}

// Checkerboard infinite PEPO in vectorized form: two rank-6 site tensors
// (ket, bra, up, right, down, left) and four positive bond weight vectors in
// the simple-update gauge (descending, unit maximum). The represented network
// places the full lambda of each bond between its two site tensors.
struct VectorizedPepo {
  std::size_t local_dim = 0;
  std::size_t max_bond = 1;  // D cap used by updates
  std::array<DenseTensor, 2> sites;
  std::array<std::vector<double>, 4> lambdas;

  std::size_t bondExtent(BondClass b) const { return lambdas[b].size(); }
};

// beta = 0 state: identity operator on every site, unit bond dimension.
inline VectorizedPepo identityPepo(std::size_t d) {
  if (d < 2) throw ArgumentError("identityPepo: d must be >= 2");
  VectorizedPepo p;
  p.local_dim = d;
  p.max_bond = 1;
  DenseTensor site({d, d, 1, 1, 1, 1});
  for (std::size_t k = 0; k < d; ++k) site(k, k, 0, 0, 0, 0) = 1.0;
  p.sites[SUB_A] = site;
  p.sites[SUB_B] = site;
  for (auto& l : p.lambdas) l = {1.0};
  return p;
}

// The Ising thermal state exp(beta sum sz sz) factorizes over links as
// cosh(beta) I + sinh(beta) sz_i sz_j, a bond dimension 2 link operator.
// Splitting each link symmetrically and rescaling the link weights
// (cosh, sinh) to unit maximum gives identical site tensors
// T[k,b,u,r,d,l] = delta_{kb} prod_c (sz^c)[k,k] with lambda = (1, tanh beta).
inline VectorizedPepo exactIsingPepo(double beta) {
  if (!(beta > 0.0)) throw ArgumentError("exactIsingPepo: beta must be > 0");
  VectorizedPepo p;
  p.local_dim = 2;
  p.max_bond = 2;
  DenseTensor site({2, 2, 2, 2, 2, 2});
  for (std::size_t k = 0; k < 2; ++k) {
    double spin = (k == 0) ? 1.0 : -1.0;
    for (std::size_t u = 0; u < 2; ++u)
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t dn = 0; dn < 2; ++dn)
          for (std::size_t l = 0; l < 2; ++l) {
            int n_sz = int(u) + int(r) + int(dn) + int(l);
            site(k, k, u, r, dn, l) = std::pow(spin, n_sz);
          }
  }
  p.sites[SUB_A] = site;
  p.sites[SUB_B] = site;
  double t = std::tanh(beta);
  for (auto& l : p.lambdas) l = {1.0, t};
  return p;
}

// max over sublattices of ||A[k,b,...] - conj(A[b,k,...])||_F / ||A||_F.
// Gates of the form g (x) conj(g) preserve hermiticity exactly; growth of
// this number signals truncation problems, so it is monitored, not enforced.
inline double hermiticityDeviation(const VectorizedPepo& p) {
  double worst = 0.0;
  for (const auto& site : p.sites) {
    DenseTensor swapped = site.permuted({1, 0, 2, 3, 4, 5}).conjugated();
    DenseTensor diff = site - swapped;
    double norm = site.frobeniusNorm();
    if (norm > 0.0) worst = std::max(worst, diff.frobeniusNorm() / norm);
  }
  return worst;
}

}  // namespace pepo

#endif
