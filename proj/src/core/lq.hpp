#pragma once

#include <string>

#include "core/problem.hpp"

namespace fbdsde {

// One affine coefficient with optional linear time dependence:
//   out = (Ay + t By) y + (AY + t BY) Y + (Az + t Bz) vec z + (AZ + t BZ) vec Z
//       + (Ak + t Bk) (k w) + (Av + t Bv) v + c0 + t c1
// where k w is the integral of the jump integrand against the driving
// measure. All matrices have `rows` rows.
struct AffineBlocks {
  Mat Ay, AY, Az, AZ, Ak, Av;
  Mat By, BY, Bz, BZ, Bk, Bv;
  Vec c0, c1;

  static AffineBlocks zero(int rows, const Dimensions& dims);
  void validate(int rows, const Dimensions& dims, const std::string& key) const;
};

// Jump coefficient evaluated at mark rho_j:
//   phi_j = base(t, zeta, v) + rho_j * rho(t, zeta, v) + kmark * k(rho_j).
// base and rho have n rows; kmark is n x m and acts on the j-th column of k
// only, which is what pointwise mark couplings look like.
struct JumpBlocks {
  AffineBlocks base;
  AffineBlocks rho;
  Mat kmark;

  static JumpBlocks zero(const Dimensions& dims);
  void validate(const Dimensions& dims) const;
};

// Quadratic cost
//   l = 1/2 (y'Qy y + Y'QY Y + vecz'Qz vecz + vecZ'QZ vecZ
//            + sum_j w_j k_j'Qk k_j + v'Qv v)
//     + ly.y + lY.Y + lz.vecz + lZ.vecZ + sum_j w_j lk.k_j + lv.v + lconst,
//   beta(y) = 1/2 y'beta_Q y + beta_l.y + beta_c,
//   gamma(Y) = 1/2 Y'gamma_Q Y + gamma_l.Y + gamma_c.
struct LqCost {
  Mat Qy, QY, Qz, QZ, Qk, Qv;
  Vec ly, lY, lz, lZ, lk, lv;
  double lconst = 0.0;
  Mat beta_Q;
  Vec beta_l;
  double beta_c = 0.0;
  Mat gamma_Q;
  Vec gamma_l;
  double gamma_c = 0.0;

  static LqCost zero(const Dimensions& dims);
  void validate(const Dimensions& dims) const;
};

// Full linear-quadratic problem description. This is the form the config
// loader and the built-in catalog produce; build_lq_problem turns it into a
// ProblemSpec with analytic Jacobians.
struct LqProblem {
  std::string name;
  Dimensions dims;
  JumpMeasure jumps;
  double T = 1.0;
  TerminalMap terminal;
  Vec x0;
  ControlSet controls;

  AffineBlocks b;      // rows n
  AffineBlocks sigma;  // rows n*d
  JumpBlocks phi;      // rows n per mark
  AffineBlocks f;      // rows m
  AffineBlocks g;      // rows m*l

  LqCost cost;

  static LqProblem zero(const Dimensions& dims, JumpMeasure jumps);
  void validate() const;
};

ProblemSpec build_lq_problem(const LqProblem& lq);

}  // namespace fbdsde
