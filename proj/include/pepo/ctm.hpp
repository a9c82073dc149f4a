#ifndef PEPO_CTM_HPP
#define PEPO_CTM_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pepo/state.hpp"
#include "pepo/tensor.hpp"

namespace pepo {

// Single-layer reduced tensor of one sublattice site: sqrt(lambda) absorbed
// on every bond, physical pair closed either by the trace (op == nullptr) or
// by sandwiching a one-site operator. Axes (up, right, down, left).
inline DenseTensor reducedSiteTensor(const VectorizedPepo& p, Sublattice s,
                                     const DenseTensor* op = nullptr) {
  DenseTensor t = p.sites[s];
  for (Axis ax : {AX_UP, AX_RIGHT, AX_DOWN, AX_LEFT}) {
    const auto& lam = p.lambdas[bondOf(s, ax)];
    std::vector<double> w(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) w[i] = std::sqrt(lam[i]);
    t.scaleAxis(ax, w);
  }
  DenseTensor m = op ? *op : DenseTensor::identity(p.local_dim);
  if (m.rank() != 2 || m.extent(0) != p.local_dim || m.extent(1) != p.local_dim)
    throw DimensionError("reducedSiteTensor: operator must be d x d");
  // sum_{k,b} M[b,k] A[k,b,u,r,d,l]
  return contract(m, t, {{0, 1}, {1, 0}});
}

// Open-physical variant used for one-site reduced density matrices:
// axes (ket, bra, up, right, down, left) with sqrt(lambda) absorbed.
inline DenseTensor openSiteTensor(const VectorizedPepo& p, Sublattice s) {
  DenseTensor t = p.sites[s];
  for (Axis ax : {AX_UP, AX_RIGHT, AX_DOWN, AX_LEFT}) {
    const auto& lam = p.lambdas[bondOf(s, ax)];
    std::vector<double> w(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) w[i] = std::sqrt(lam[i]);
    t.scaleAxis(ax, w);
  }
  return t;
}

// Corner and edge tensors of the converged environment, one set per
// sublattice site. Index conventions, clockwise around the ring
// (first index joins the counter-clockwise neighbour, last the clockwise
// one, edges carry the bulk-facing index in the middle):
//   C1 (down, right)      T1 (left, bulk, right)   C2 (left, down)
//   T4 (down, bulk, up)                            T2 (up, bulk, down)
//   C4 (right, up)        T3 (right, bulk, left)   C3 (up, left)
struct CtmEnvironment {
  std::size_t chi = 0;
  bool converged = false;
  std::size_t iterations = 0;
  std::array<DenseTensor, 2> C1, C2, C3, C4, T1, T2, T3, T4;
};

struct CtmOptions {
  double tol = 1e-8;
  std::size_t max_iters = 500;
  double projector_floor = 1e-10;  // relative floor for projector spectra
  std::size_t extra_iters = 0;     // full iterations appended after convergence
};

namespace detail {

// Directional CTM working state for the 2-site checkerboard cell. Bulk
// tensors and environment are rotated together so a single left-absorption
// routine serves all four directions.
struct CtmWork {
  std::array<DenseTensor, 2> bulk;  // reduced site tensors (u, r, d, l)
  CtmEnvironment env;
  std::size_t chi_max = 0;
  double projector_floor = 1e-10;

  static DenseTensor traceAxes(const DenseTensor& t, std::size_t ax1,
                               std::size_t ax2) {
    // sum over two axes of a rank-4 tensor, keeping the remaining two
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < 4; ++k)
      if (k != ax1 && k != ax2) order.push_back(k);
    order.push_back(ax1);
    order.push_back(ax2);
    DenseTensor tp = t.permuted(std::span<const std::size_t>(order));
    std::size_t n0 = tp.extent(0), n1 = tp.extent(1);
    std::size_t inner = tp.extent(2) * tp.extent(3);
    DenseTensor out({n0, n1});
    for (std::size_t i = 0; i < n0 * n1; ++i) {
      Complex acc = 0.0;
      for (std::size_t j = 0; j < inner; ++j) acc += tp[i * inner + j];
      out[i] = acc;
    }
    return out;
  }

  static DenseTensor traceAxis(const DenseTensor& t, std::size_t ax) {
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < 4; ++k)
      if (k != ax) order.push_back(k);
    order.push_back(ax);
    DenseTensor tp = t.permuted(std::span<const std::size_t>(order));
    std::size_t outer = tp.size() / tp.extent(3);
    DenseTensor out({tp.extent(0), tp.extent(1), tp.extent(2)});
    for (std::size_t i = 0; i < outer; ++i) {
      Complex acc = 0.0;
      for (std::size_t j = 0; j < tp.extent(3); ++j)
        acc += tp[i * tp.extent(3) + j];
      out[i] = acc;
    }
    return out;
  }

  static void normalize(DenseTensor& t) {
    double m = t.maxAbs();
    if (m > 0.0) t *= Complex(1.0 / m, 0.0);
  }

  // Boundary-traced initialization: corners from the diagonal neighbour
  // (same parity), edges from the orthogonal neighbour (opposite parity).
  void init(const std::array<DenseTensor, 2>& reduced, std::size_t chi) {
    bulk = reduced;
    // observables are trace-normalized ratios, so the overall scale of the
    // bulk is free; pinning it to unit max-norm keeps the projector spectra
    // away from the underflow guard
    for (auto& a : bulk) normalize(a);
    env.chi = chi;
    chi_max = chi;
    env.converged = false;
    env.iterations = 0;
    for (std::size_t s = 0; s < 2; ++s) {
      std::size_t q = 1 - s;
      const DenseTensor& a = bulk[s];
      const DenseTensor& b = bulk[q];
      // axes of a: 0 up, 1 right, 2 down, 3 left
      env.C1[s] = traceAxes(a, AXU, AXL).permuted({1, 0});     // (r, d) -> (down, right)
      env.C2[s] = traceAxes(a, AXU, AXR).permuted({1, 0});     // (d, l) -> (left, down)
      env.C3[s] = traceAxes(a, AXR, AXD);                      // (u, l) -> (up, left)
      env.C4[s] = traceAxes(a, AXD, AXL).permuted({1, 0});     // (u, r) -> (right, up)
      env.T1[s] = traceAxis(b, AXU).permuted({2, 1, 0});       // (r,d,l)->(left,bulk,right)
      env.T2[s] = traceAxis(b, AXR);                           // (u,d,l)->(up,bulk?,..)
      env.T2[s] = env.T2[s].permuted({0, 2, 1});               // (u, l, d)
      env.T3[s] = traceAxis(b, AXD).permuted({1, 0, 2});       // (u,r,l)->(right,up,left)
      env.T4[s] = traceAxis(b, AXL).permuted({2, 1, 0});       // (u,r,d)->(down,right,up)
      for (DenseTensor* t : {&env.C1[s], &env.C2[s], &env.C3[s], &env.C4[s],
                             &env.T1[s], &env.T2[s], &env.T3[s], &env.T4[s]})
        normalize(*t);
    }
  }

  static constexpr std::size_t AXU = 0, AXR = 1, AXD = 2, AXL = 3;

  // Enlarged upper-left corner around parity s. Axes of the result:
  // (env-right, bulk-right, env-down, bulk-down).
  DenseTensor enlargedLU(std::size_t s) const {
    DenseTensor t = contract(env.C1[s], env.T4[s], {{0, 2}});  // (r0, d4, m4)
    t = contract(t, env.T1[s], {{0, 0}});                      // (d4, m4, m1, r1)
    t = contract(t, bulk[s], {{1, AXL}, {2, AXU}});            // (d4, r1, ar, ad)
    return t.permuted({1, 2, 0, 3});                           // (r1, ar, d4, ad)
  }

  // Enlarged lower-left corner. Axes: (env-up, bulk-up, env-right, bulk-right).
  DenseTensor enlargedLD(std::size_t s) const {
    DenseTensor t = contract(env.C4[s], env.T4[s], {{1, 0}});  // (rc, m4, u4)
    t = contract(t, env.T3[s], {{0, 2}});                      // (m4, u4, r3, m3)
    t = contract(t, bulk[s], {{0, AXL}, {3, AXD}});            // (u4, r3, au, ar)
    return t.permuted({0, 2, 1, 3});                           // (u4, au, r3, ar)
  }

  // One column absorption from the left. Both parities advance together;
  // projector pairs are built per horizontal cut from the two enlarged
  // half-column corners meeting at that cut.
  void leftMove() {
    std::array<DenseTensor, 2> proj_up, proj_dn;  // keyed by upper vertex parity
    for (std::size_t c = 0; c < 2; ++c) {
      std::size_t q = 1 - c;
      DenseTensor lu = enlargedLU(c);
      DenseTensor ld = enlargedLD(q);
      // per-cut scales cancel in the projector pair; normalizing here only
      // conditions the SVD
      normalize(lu);
      normalize(ld);
      DenseTensor m = contract(lu, ld, {{2, 0}, {3, 1}});  // (out_u, out_ub, out_d, out_db)
      SvdResult svd = truncatedSvd(m, 2, chi_max, projector_floor);
      double smax = svd.singular_values.empty() ? 0.0 : svd.singular_values[0];
      if (!(smax > 1e-14))
        throw EnvironmentError("ctm: singular projector construction");
      std::vector<double> isqrt(svd.singular_values.size());
      for (std::size_t i = 0; i < isqrt.size(); ++i)
        isqrt[i] = 1.0 / std::sqrt(svd.singular_values[i]);
      // upper side of the cut: Pt = LD * conj(V) * S^{-1/2}
      DenseTensor vc = svd.right_isometry.conjugated();  // (k, out_d, out_db)
      DenseTensor pt = contract(ld, vc, {{2, 1}, {3, 2}});  // (cut_chi, cut_D, k)
      pt.scaleAxis(2, isqrt);
      // lower side: P = S^{-1/2} * U^dag * LU
      DenseTensor uc = svd.left_isometry.conjugated();  // (out_u, out_ub, k)
      DenseTensor pr = contract(uc, lu, {{0, 0}, {1, 1}});  // (k, cut_chi, cut_D)
      pr.scaleAxis(0, isqrt);
      proj_up[c] = std::move(pt);
      proj_dn[c] = std::move(pr);
    }

    std::array<DenseTensor, 2> nC1, nT4, nC4;
    for (std::size_t s = 0; s < 2; ++s) {
      std::size_t q = 1 - s;
      // C1: absorb the top edge, truncate the cut above this row
      DenseTensor c1 = contract(env.C1[s], env.T1[s], {{1, 0}});  // (d0, m1, r1)
      c1 = contract(c1, proj_up[q], {{0, 0}, {1, 1}});            // (r1, k)
      nC1[q] = c1.permuted({1, 0});                               // (down, right)
      // T4: absorb the bulk column site
      DenseTensor t4 = contract(env.T4[s], bulk[s], {{1, AXL}});  // (d4, u4, au, ar, ad)
      t4 = contract(t4, proj_dn[q], {{1, 1}, {2, 2}});            // (d4, ar, ad, k_up)
      t4 = contract(t4, proj_up[s], {{0, 0}, {2, 1}});            // (ar, k_up, k_dn)
      nT4[q] = t4.permuted({2, 0, 1});                            // (down, bulk, up)
      // C4: absorb the bottom edge, truncate the cut below this row
      DenseTensor c4 = contract(env.C4[s], env.T3[s], {{0, 2}});  // (uc, r3, m3)
      nC4[q] = contract(c4, proj_dn[s], {{0, 1}, {2, 2}});        // (r3, k) = (right, up)
    }
    for (std::size_t s = 0; s < 2; ++s) {
      normalize(nC1[s]);
      normalize(nT4[s]);
      normalize(nC4[s]);
      env.C1[s] = std::move(nC1[s]);
      env.T4[s] = std::move(nT4[s]);
      env.C4[s] = std::move(nC4[s]);
    }
  }

  // Rotate the whole network 90 degrees counter-clockwise: the top edge
  // becomes the left edge, so the left-move machinery serves all four
  // directions. The uniform ring index convention makes the environment
  // reassignment permutation-free.
  void rotate() {
    for (auto& a : bulk) a = a.permuted({AXR, AXD, AXL, AXU});
    for (std::size_t s = 0; s < 2; ++s) {
      DenseTensor c1 = std::move(env.C1[s]);
      DenseTensor t1 = std::move(env.T1[s]);
      env.C1[s] = std::move(env.C2[s]);
      env.T1[s] = std::move(env.T2[s]);
      env.C2[s] = std::move(env.C3[s]);
      env.T2[s] = std::move(env.T3[s]);
      env.C3[s] = std::move(env.C4[s]);
      env.T3[s] = std::move(env.T4[s]);
      env.C4[s] = std::move(c1);
      env.T4[s] = std::move(t1);
    }
  }

  // Sorted, unit-normalized singular spectra of all eight corners,
  // concatenated and zero-padded to chi entries each.
  std::vector<double> cornerSpectra() const {
    std::vector<double> all;
    all.reserve(8 * chi_max);
    for (std::size_t s = 0; s < 2; ++s) {
      for (const DenseTensor* c : {&env.C1[s], &env.C2[s], &env.C3[s], &env.C4[s]}) {
        auto m = c->asMatrix(1);
        Eigen::JacobiSVD<MatrixXc> svd(m);
        Eigen::VectorXd sv = svd.singularValues();
        double mx = sv.size() > 0 ? sv[0] : 0.0;
        for (std::size_t i = 0; i < chi_max; ++i) {
          double v = (i < std::size_t(sv.size()) && mx > 0.0) ? sv[i] / mx : 0.0;
          all.push_back(v);
        }
      }
    }
    return all;
  }
};

}  // namespace detail

// Converge the directional CTM environment of the single-layer reduced
// network at environment dimension chi. Convergence is measured by the L2
// distance between successive corner singular spectra.
inline CtmEnvironment ctmConverge(const VectorizedPepo& p, std::size_t chi,
                                  const CtmOptions& opt = {}) {
  std::array<DenseTensor, 2> reduced = {
      reducedSiteTensor(p, SUB_A),
      reducedSiteTensor(p, SUB_B),
  };
  for (const auto& t : reduced)
    if (!t.allFinite())
      throw NumericalError("ctmConverge: non-finite reduced tensor");

  detail::CtmWork work;
  work.projector_floor = opt.projector_floor;
  work.init(reduced, chi);

  std::vector<double> prev = work.cornerSpectra();
  for (std::size_t it = 1; it <= opt.max_iters; ++it) {
    for (int dir = 0; dir < 4; ++dir) {
      work.leftMove();
      work.leftMove();
      work.rotate();
    }
    std::vector<double> cur = work.cornerSpectra();
    double dist = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      double diff = cur[i] - prev[i];
      dist += diff * diff;
    }
    dist = std::sqrt(dist);
    prev = std::move(cur);
    work.env.iterations = it;
    if (dist < opt.tol) {
      work.env.converged = true;
      break;
    }
  }
  for (std::size_t e = 0; e < opt.extra_iters; ++e)
    for (int dir = 0; dir < 4; ++dir) {
      work.leftMove();
      work.leftMove();
      work.rotate();
    }
  return work.env;
}

// Contract the environment ring around one open-physical site tensor into
// the (unnormalized) one-site reduced density matrix.
inline DenseTensor oneSiteRdm(const CtmEnvironment& env,
                              const VectorizedPepo& p, Sublattice s) {
  DenseTensor open = openSiteTensor(p, s);

  DenseTensor top = contract(env.C1[s], env.T1[s], {{1, 0}});   // (d0, m1, r1)
  top = contract(top, env.C2[s], {{2, 0}});                     // (d0, m1, d2)
  DenseTensor ring = contract(top, env.T4[s], {{0, 2}});        // (m1, d2, d4, m4)
  ring = contract(ring, env.T2[s], {{1, 0}});                   // (m1, d4, m4, m2, dd2)
  DenseTensor bot = contract(env.T3[s], env.C4[s], {{2, 0}});   // (r3, m3, u4)
  bot = contract(bot, env.C3[s], {{0, 1}});                     // (m3, u4, u3)
  ring = contract(ring, bot, {{1, 1}, {4, 2}});                 // (m1, m4, m2, m3)

  DenseTensor rdm = contract(
      ring, open,
      {{0, AX_UP}, {1, AX_LEFT}, {2, AX_RIGHT}, {3, AX_DOWN}});  // (k, b)

  Complex tr = 0.0;
  for (std::size_t k = 0; k < p.local_dim; ++k) tr += rdm(k, k);
  if (std::abs(tr) < 1e-30)
    throw EnvironmentError("oneSiteRdm: degenerate environment (trace ~ 0)");
  return rdm;
}

}  // namespace pepo

#endif
