#ifndef PEPO_MODELS_HPP
#define PEPO_MODELS_HPP

#include <cmath>
#include <map>
#include <string>

#include "pepo/tensor.hpp"

namespace pepo {

// Two-site operator as a rank-4 tensor (s1', s2', s1, s2); asMatrix(2) gives
// the d^2 x d^2 matrix acting on the joined pair.
inline DenseTensor kron2(const DenseTensor& op1, const DenseTensor& op2) {
  std::size_t d1 = op1.extent(0), d2 = op2.extent(0);
  DenseTensor t({d1, d2, d1, d2});
  for (std::size_t a = 0; a < d1; ++a)
    for (std::size_t b = 0; b < d2; ++b)
      for (std::size_t c = 0; c < d1; ++c)
        for (std::size_t e = 0; e < d2; ++e)
          t(a, b, c, e) = op1(a, c) * op2(b, e);
  return t;
}

// A lattice model given by its nearest-neighbour bond term. One-site pieces
// (chemical potential, on-site repulsion, pinning field) are spread over the
// four incident bonds of the square lattice with weight 1/4 each, so the
// evolution only ever applies two-site gates. The pure pieces are kept
// separately for finite-lattice oracles that must re-weight at boundaries.
struct Model {
  std::string name;
  std::size_t local_dim = 0;
  DenseTensor two_site;  // pure two-site coupling, (s1',s2',s1,s2)
  DenseTensor one_site;  // full one-site term, d x d
  std::map<std::string, DenseTensor> observables;
  std::map<std::string, double> params;

  // Bond Hamiltonian with 1/4 of each endpoint's one-site term absorbed.
  DenseTensor bondTerm() const { return bondTerm(0.25, 0.25); }

  // General endpoint weights, for open-boundary lattices where edge sites
  // have coordination < 4.
  DenseTensor bondTerm(double w1, double w2) const {
    DenseTensor id = DenseTensor::identity(local_dim);
    DenseTensor h = two_site;
    DenseTensor a = kron2(one_site, id);
    DenseTensor b = kron2(id, one_site);
    a *= Complex(w1, 0.0);
    b *= Complex(w2, 0.0);
    h += a;
    h += b;
    return h;
  }
};

namespace ops {

inline DenseTensor sigmaZ() {
  DenseTensor s({2, 2});
  s(0, 0) = 1.0;
  s(1, 1) = -1.0;
  return s;
}

inline DenseTensor sigmaX() {
  DenseTensor s({2, 2});
  s(0, 1) = 1.0;
  s(1, 0) = 1.0;
  return s;
}

// Truncated bosonic lowering operator on {|0>, ..., |d-1>}, real non-negative
// matrix elements a[n-1, n] = sqrt(n).
inline DenseTensor lowering(std::size_t d) {
  DenseTensor a({d, d});
  for (std::size_t n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

inline DenseTensor raising(std::size_t d) {
  DenseTensor a({d, d});
  for (std::size_t n = 1; n < d; ++n) a(n, n - 1) = std::sqrt(double(n));
  return a;
}

inline DenseTensor number(std::size_t d) {
  DenseTensor n({d, d});
  for (std::size_t k = 0; k < d; ++k) n(k, k) = double(k);
  return n;
}

inline DenseTensor numberSquared(std::size_t d) {
  DenseTensor n({d, d});
  for (std::size_t k = 0; k < d; ++k) n(k, k) = double(k) * double(k);
  return n;
}

}  // namespace ops

// Ferromagnetic Ising model, H = -sum_<ij> sz_i sz_j - h_pin sum_i sz_i.
// The tiny pinning field (off by default only if h_pin = 0) selects a
// magnetization branch below T_c; reported magnetization is |<sz>|.
inline Model isingModel(double h_pin = 1e-6) {
  Model m;
  m.name = "ising";
  m.local_dim = 2;
  DenseTensor sz = ops::sigmaZ();
  m.two_site = kron2(sz, sz);
  m.two_site *= Complex(-1.0, 0.0);
  m.one_site = sz;
  m.one_site *= Complex(-h_pin, 0.0);
  m.observables["sz"] = sz;
  m.observables["sx"] = ops::sigmaX();
  m.params["h_pin"] = h_pin;
  return m;
}

// Hard-core Bose-Hubbard, H = -J sum_<ij> (adag_i a_j + adag_j a_i)
//                              - mu sum_i n_i,
// on the occupation basis {|0>, |1>} with n = adag a. The one-site term is
// stored in the traceless form -(mu/2) (2n - 1); the dropped constant only
// shifts the spectrum and cancels in every normalized observable.
inline Model hardcoreBoseHubbard(double J, double mu) {
  Model m;
  m.name = "hardcore_bh";
  m.local_dim = 2;
  DenseTensor a = ops::lowering(2);
  DenseTensor ad = ops::raising(2);
  DenseTensor hop = kron2(ad, a) + kron2(a, ad);
  hop *= Complex(-J, 0.0);
  m.two_site = hop;
  DenseTensor zb({2, 2});  // 2n - 1
  zb(0, 0) = -1.0;
  zb(1, 1) = 1.0;
  zb *= Complex(-mu / 2.0, 0.0);
  m.one_site = zb;
  m.observables["n"] = ops::number(2);
  m.observables["a"] = a;
  m.observables["adag"] = ad;
  m.observables["n2"] = ops::numberSquared(2);
  m.params["J"] = J;
  m.params["mu"] = mu;
  return m;
}

// Three-level soft-core Bose-Hubbard (at most two bosons per site),
// H = -J sum_<ij> (adag_i a_j + adag_j a_i) + sum_i (-mu n_i + U/2 n_i(n_i-1)).
inline Model softcoreBoseHubbard(double J, double mu, double U) {
  Model m;
  m.name = "softcore_bh";
  m.local_dim = 3;
  DenseTensor a = ops::lowering(3);
  DenseTensor ad = ops::raising(3);
  DenseTensor hop = kron2(ad, a) + kron2(a, ad);
  hop *= Complex(-J, 0.0);
  m.two_site = hop;
  DenseTensor one({3, 3});
  for (std::size_t n = 0; n < 3; ++n)
    one(n, n) = -mu * double(n) + 0.5 * U * double(n) * (double(n) - 1.0);
  m.one_site = one;
  m.observables["n"] = ops::number(3);
  m.observables["a"] = a;
  m.observables["n2"] = ops::numberSquared(3);
  m.params["J"] = J;
  m.params["mu"] = mu;
  m.params["U"] = U;
  return m;
}

}  // namespace pepo

#endif
