#ifndef PEPO_EVOLUTION_HPP
#define PEPO_EVOLUTION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pepo/models.hpp"
#include "pepo/state.hpp"
#include "pepo/tensor.hpp"

namespace pepo {

// exp(-tau h) for a Hermitian bond term, by exact eigendecomposition.
inline DenseTensor bondExponential(const DenseTensor& bond_term, double tau) {
  auto h = bond_term.asMatrix(2);
  double herm_dev = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > 1e-10)
    throw ModelError("bondExponential: bond term is not Hermitian");
  MatrixXc hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(hs);
  MatrixXc g = es.eigenvectors() *
               (-tau * es.eigenvalues().array()).exp().matrix().asDiagonal() *
               es.eigenvectors().adjoint();
  DenseTensor out = DenseTensor::fromMatrix(g);
  std::size_t d = bond_term.extent(0);
  return out.reshaped({d, d, d, d});  // (k1', k2', k1, k2)
}

// Vectorized two-site Trotter gate g (x) conj(g), g = exp(-delta_beta h).
// Applied to a vectorized two-site operator it implements
// vec(rho) -> vec(g rho g^dag), advancing each side of the slicing by
// delta_beta. Stored as a rank-8 tensor
// (k1', b1', k2', b2', k1, b1, k2, b2); fusing ket/bra pairs gives the
// (d^2, d^2, d^2, d^2) superoperator on vectorized physical indices.
struct TwoSiteGate {
  std::size_t local_dim = 0;
  double delta_beta = 0.0;
  DenseTensor tensor;  // rank 8

  DenseTensor vectorizedForm() const {
    std::size_t d2 = local_dim * local_dim;
    return tensor.reshaped({d2, d2, d2, d2});
  }
};

inline TwoSiteGate buildGate(const Model& model, double delta_beta) {
  if (!(delta_beta >= 0.0)) throw ArgumentError("buildGate: delta_beta < 0");
  std::size_t d = model.local_dim;
  DenseTensor g = bondExponential(model.bondTerm(), delta_beta);
  DenseTensor gc = g.conjugated();
  // outer product, then interleave ket and bra factors per site
  DenseTensor big = contract(g, gc, std::initializer_list<IndexPair>{});
  // axes: (k1', k2', k1, k2, b1', b2', b1, b2)
  TwoSiteGate gate;
  gate.local_dim = d;
  gate.delta_beta = delta_beta;
  gate.tensor = big.permuted({0, 4, 1, 5, 2, 6, 3, 7});
  return gate;
}

// Bond orientations in the fixed sweep order.
inline constexpr std::array<BondClass, 4> kSweepOrder = {BOND_AR, BOND_AD,
                                                         BOND_BR, BOND_BD};

namespace detail {

struct BondGeometry {
  Sublattice left;   // site owning the "outgoing" side of the bond
  Axis left_axis;
  Sublattice right;
  Axis right_axis;
};

inline BondGeometry bondGeometry(BondClass b) {
  switch (b) {
    case BOND_AR: return {SUB_A, AX_RIGHT, SUB_B, AX_LEFT};
    case BOND_AD: return {SUB_A, AX_DOWN, SUB_B, AX_UP};
    case BOND_BR: return {SUB_B, AX_RIGHT, SUB_A, AX_LEFT};
    case BOND_BD: return {SUB_B, AX_DOWN, SUB_A, AX_UP};
  }
  throw ArgumentError("bondGeometry: bad bond");
}

inline void absorbEnvironmentLambdas(DenseTensor& t, Sublattice s,
                                     Axis skip,
                                     const VectorizedPepo& p) {
  for (Axis ax : {AX_UP, AX_RIGHT, AX_DOWN, AX_LEFT}) {
    if (ax == skip) continue;
    t.scaleAxis(ax, p.lambdas[bondOf(s, ax)]);
  }
}

inline void divideEnvironmentLambdas(DenseTensor& t, Sublattice s, Axis skip,
                                     const VectorizedPepo& p,
                                     double floor) {
  for (Axis ax : {AX_UP, AX_RIGHT, AX_DOWN, AX_LEFT}) {
    if (ax == skip) continue;
    const auto& lam = p.lambdas[bondOf(s, ax)];
    std::vector<double> inv(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i)
      inv[i] = lam[i] > floor ? 1.0 / lam[i] : 0.0;
    t.scaleAxis(ax, inv);
  }
}

}  // namespace detail

// Takagi factor Q (with O = Q Q^T) of a small symmetric unitary matrix.
// Since O Obar = I, the real and imaginary parts commute and are
// simultaneously diagonalizable by a real orthogonal R; the eigenvalue pairs
// lie on the unit circle and Q = R diag(e^{i theta/2}).
inline MatrixXc takagiUnitary(const MatrixXc& o_in) {
  MatrixXc o = 0.5 * (o_in + o_in.transpose());
  const Eigen::Index n = o.rows();
  Eigen::MatrixXd a = o.real(), b = o.imag();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esa(a);
  Eigen::MatrixXd r = esa.eigenvectors();
  Eigen::VectorXd av = esa.eigenvalues();
  // rediagonalize b inside each (near-)degenerate cluster of a
  Eigen::MatrixXd bt = r.transpose() * b * r;
  for (Eigen::Index lo = 0; lo < n;) {
    Eigen::Index hi = lo + 1;
    while (hi < n && std::abs(av[hi] - av[lo]) < 1e-10) ++hi;
    if (hi - lo > 1) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esb(
          bt.block(lo, lo, hi - lo, hi - lo));
      r.middleCols(lo, hi - lo) = r.middleCols(lo, hi - lo) * esb.eigenvectors();
    }
    lo = hi;
  }
  bt = r.transpose() * b * r;
  Eigen::MatrixXd at = r.transpose() * a * r;
  MatrixXc q(n, n);
  q.setZero();
  for (Eigen::Index j = 0; j < n; ++j) {
    double theta = std::atan2(bt(j, j), at(j, j));
    q.col(j) = r.col(j) * std::exp(Complex(0.0, 0.5 * theta));
  }
  return q;
}

namespace detail {

// The SVD factors of a ket/bra-symmetric theta are unique only up to a
// unitary inside each degenerate singular block, and a generic numerical SVD
// lands in a gauge where the site tensors lose the A[k,b,..] =
// conj(A[b,k,..]) structure even though the represented operator is still
// Hermitian. With P the ket<->bra swap on the open axes, the symmetry forces
// P conj(U) = U O with O block-diagonal symmetric unitary; rotating both
// factors by the Takagi root Q of O (and Q^dag on the right factor) restores
// self-conjugate site tensors without changing the represented state.
inline void fixHermitianGauge(SvdResult& svd) {
  const std::size_t K = svd.singular_values.size();
  std::size_t lrank = svd.left_isometry.rank();
  std::vector<std::size_t> swap_axes(lrank);
  swap_axes[0] = 1;
  swap_axes[1] = 0;
  for (std::size_t k = 2; k < lrank; ++k) swap_axes[k] = k;
  DenseTensor pu = svd.left_isometry
                       .permuted(std::span<const std::size_t>(swap_axes))
                       .conjugated();
  auto u_mat = svd.left_isometry.asMatrix(lrank - 1);
  auto pu_mat = pu.asMatrix(lrank - 1);
  MatrixXc o = u_mat.adjoint() * pu_mat;

  MatrixXc q = MatrixXc::Identity(K, K);
  double smax = svd.singular_values[0];
  for (std::size_t lo = 0; lo < K;) {
    std::size_t hi = lo + 1;
    while (hi < K &&
           svd.singular_values[lo] - svd.singular_values[hi] < 1e-8 * smax)
      ++hi;
    q.block(lo, lo, hi - lo, hi - lo) =
        takagiUnitary(o.block(lo, lo, hi - lo, hi - lo));
    lo = hi;
  }
  u_mat = (u_mat * q).eval();
  auto v_mat = svd.right_isometry.asMatrix(1);
  v_mat = (q.adjoint() * v_mat).eval();
}

}  // namespace detail

struct UpdateOptions {
  double svd_cutoff = 1e-10;
  double lambda_floor = 1e-12;  // pseudoinverse floor for gauge division
};

// One simple-update step on a single bond: absorb the mean-field lambda
// environment, apply the gate to the joined physical pair, split back by
// truncated SVD at max_rank = p.max_bond, restore the gauge, and store the
// new central singular values as the bond's lambda. Returns the relative
// truncation error of the split.
inline double simpleUpdateBond(VectorizedPepo& p, const TwoSiteGate& gate,
                               BondClass bond,
                               const UpdateOptions& opt = {}) {
  if (gate.local_dim != p.local_dim)
    throw DimensionError("simpleUpdateBond: gate/state dimension mismatch");
  const auto geo = detail::bondGeometry(bond);

  DenseTensor X = p.sites[geo.left];
  DenseTensor Y = p.sites[geo.right];
  detail::absorbEnvironmentLambdas(X, geo.left, geo.left_axis, p);
  detail::absorbEnvironmentLambdas(Y, geo.right, geo.right_axis, p);
  X.scaleAxis(geo.left_axis, p.lambdas[bond]);

  // Theta: X free axes (k1, b1, e1, e2, e3) then Y free (k2, b2, f1, f2, f3),
  // environment axes in ascending original order
  DenseTensor theta = contract(
      X, Y, {{std::size_t(geo.left_axis), std::size_t(geo.right_axis)}});

  DenseTensor evolved =
      contract(gate.tensor, theta, {{4, 0}, {5, 1}, {6, 5}, {7, 6}});
  // axes: (k1', b1', k2', b2', e1, e2, e3, f1, f2, f3)
  DenseTensor split =
      evolved.permuted({0, 1, 4, 5, 6, 2, 3, 7, 8, 9});

  // In exact arithmetic the evolved pair operator is Hermitian (real lambdas,
  // gates of the form g (x) conj(g)); roundoff injects a tiny anti-Hermitian
  // component each step, and near an ordering transition the update loop
  // amplifies it exponentially alongside the physical instability. Averaging
  // with the swap-conjugate cancels that noise at source; it does not touch
  // the (Hermitian) truncation-seeded symmetry breaking.
  DenseTensor swapped =
      split.permuted({1, 0, 2, 3, 4, 6, 5, 7, 8, 9}).conjugated();
  split += swapped;
  split *= Complex(0.5, 0.0);

  // split at full rank first: truncation may cut inside a degenerate
  // multiplet, and the hermitian gauge can only pick a symmetry-respecting
  // kept basis while the whole multiplet is still present
  SvdResult svd = truncatedSvd(split, 5, split.size(), opt.svd_cutoff);
  detail::fixHermitianGauge(svd);
  truncateSvdResult(svd, p.max_bond);

  double smax = svd.singular_values.empty() ? 0.0 : svd.singular_values[0];
  if (!(smax > 0.0))
    throw NumericalError("simpleUpdateBond: vanishing bond spectrum");
  std::vector<double> lam_new(svd.singular_values.size());
  for (std::size_t i = 0; i < lam_new.size(); ++i)
    lam_new[i] = svd.singular_values[i] / smax;

  // left_isometry axes: (k1, b1, e1, e2, e3, new); put the new bond back on
  // the active axis slot
  std::array<std::size_t, 6> perm_x{}, perm_y{};
  {
    // X': current order is (k, b, envs in ascending original axis order, new)
    std::size_t pos = 2;
    perm_x[0] = 0;
    perm_x[1] = 1;
    for (std::size_t ax = AX_UP; ax <= AX_LEFT; ++ax) {
      if (ax == std::size_t(geo.left_axis))
        perm_x[ax] = 5;  // the fresh bond index
      else
        perm_x[ax] = pos++;
    }
    // Y': current order is (new, k, b, envs ascending)
    pos = 3;
    perm_y[0] = 1;
    perm_y[1] = 2;
    for (std::size_t ax = AX_UP; ax <= AX_LEFT; ++ax) {
      if (ax == std::size_t(geo.right_axis))
        perm_y[ax] = 0;
      else
        perm_y[ax] = pos++;
    }
  }
  DenseTensor Xn = svd.left_isometry.permuted(
      std::span<const std::size_t>(perm_x.data(), perm_x.size()));
  DenseTensor Yn = svd.right_isometry.permuted(
      std::span<const std::size_t>(perm_y.data(), perm_y.size()));

  detail::divideEnvironmentLambdas(Xn, geo.left, geo.left_axis, p,
                                   opt.lambda_floor);
  detail::divideEnvironmentLambdas(Yn, geo.right, geo.right_axis, p,
                                   opt.lambda_floor);

  double mx = Xn.maxAbs(), my = Yn.maxAbs();
  if (!(mx > 0.0) || !(my > 0.0))
    throw NumericalError("simpleUpdateBond: zero site tensor after update");
  Xn *= Complex(1.0 / mx, 0.0);
  Yn *= Complex(1.0 / my, 0.0);

  p.sites[geo.left] = std::move(Xn);
  p.sites[geo.right] = std::move(Yn);
  p.lambdas[bond] = std::move(lam_new);
  return svd.truncation_error;
}

// Annealing schedule: beta advances by delta_beta per sweep over the four
// bond orientations; checkpoints snap to the nearest integer slice.
struct AnnealSchedule {
  double delta_beta = 1e-4;
  double beta_max = 1.0;
  std::vector<double> checkpoints;

  std::size_t sliceCount() const {
    return std::size_t(std::llround(beta_max / delta_beta));
  }
  std::size_t sliceOf(double beta) const {
    return std::size_t(std::llround(beta / delta_beta));
  }
};

struct CheckpointInfo {
  double beta = 0.0;
  double max_truncation_error = 0.0;  // worst bond SVD error since last checkpoint
  double hermiticity_deviation = 0.0;
  bool hermiticity_warning = false;
};

// Anneal from the state's current beta (slice offset start_slice) down in
// temperature; invokes on_checkpoint(p, info) at every requested beta.
// Each sweep applies gates built from delta_beta / 2 once per bond
// orientation; acting on both ket and bra sides this advances the total
// inverse temperature by delta_beta per sweep.
inline void anneal(VectorizedPepo& p, const Model& model,
                   const AnnealSchedule& schedule, std::size_t max_bond,
                   const std::function<void(const VectorizedPepo&,
                                            const CheckpointInfo&)>& on_checkpoint,
                   std::size_t start_slice = 0,
                   const UpdateOptions& opt = {}) {
  if (!(schedule.delta_beta > 0.0) ||
      !(schedule.beta_max > schedule.delta_beta / 2))
    throw ArgumentError("anneal: bad schedule");
  p.max_bond = max_bond;

  std::vector<std::size_t> checkpoint_slices;
  checkpoint_slices.reserve(schedule.checkpoints.size());
  for (double b : schedule.checkpoints) {
    std::size_t s = schedule.sliceOf(b);
    if (s == 0 || s > schedule.sliceCount())
      throw ArgumentError("anneal: checkpoint outside (0, beta_max]");
    checkpoint_slices.push_back(s);
  }

  TwoSiteGate gate = buildGate(model, schedule.delta_beta / 2.0);

  double trunc_acc = 0.0;
  const std::size_t m = schedule.sliceCount();
  for (std::size_t slice = start_slice + 1; slice <= m; ++slice) {
    for (BondClass b : kSweepOrder)
      trunc_acc = std::max(trunc_acc, simpleUpdateBond(p, gate, b, opt));

    for (const auto& s : p.sites)
      if (!s.allFinite()) {
        std::ostringstream msg;
        msg << "anneal: non-finite tensor elements at beta = "
            << slice * schedule.delta_beta;
        throw NumericalError(msg.str());
      }

    if (std::find(checkpoint_slices.begin(), checkpoint_slices.end(), slice) !=
        checkpoint_slices.end()) {
      CheckpointInfo info;
      info.beta = slice * schedule.delta_beta;
      info.max_truncation_error = trunc_acc;
      info.hermiticity_deviation = hermiticityDeviation(p);
      info.hermiticity_warning = info.hermiticity_deviation > 1e-6;
      on_checkpoint(p, info);
      trunc_acc = 0.0;
    }
  }
}

}  // namespace pepo

#endif
