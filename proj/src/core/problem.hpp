#pragma once

#include <functional>
#include <string>

#include "core/paths.hpp"
#include "core/types.hpp"

namespace fbdsde {

// The five coefficients of the coupled pair. B, Sigma and Phi drive the
// forward equation, F and G the backward one.
enum class Coeff { B, Sigma, Phi, F, G };

// Flattened output length of one coefficient: b -> n, sigma -> n*d,
// phi -> n*J (column j is the jump coefficient at mark j), f -> m, g -> m*l.
int coeff_rows(const Dimensions& dims, int marks, Coeff which);

// Jacobian of one coefficient with respect to each block of the quintuple
// and the control. Rows index the flattened coefficient output; columns
// follow the flattened block sizes (y: n, Y: m, z: n*l, Z: m*d, k: m*J,
// v: r). Derivatives in k are taken per entry of k(rho_j), not per density.
struct BlockJacobian {
  Mat y, Y, z, Z, k, v;

  void resize(int rows, const Dimensions& dims, int marks);
  void set_zero();
};

using CoeffFn =
    std::function<void(double t, const StateView& s, const ConstVecRef& v, VecRef out)>;
using CoeffJacFn =
    std::function<void(double t, const StateView& s, const ConstVecRef& v, BlockJacobian& out)>;

struct CoefficientSet {
  CoeffFn b;      // out: n
  CoeffFn sigma;  // out: n*d, column-major n x d
  CoeffFn phi;    // out: n*J, column j = phi at mark j
  CoeffFn f;      // out: m
  CoeffFn g;      // out: m*l, column-major m x l

  // Optional analytic Jacobians; central differences fill in when absent.
  CoeffJacFn b_jac, sigma_jac, phi_jac, f_jac, g_jac;

  // Set when every Jacobian is constant in (state, control). Downstream
  // assembly then evaluates each Jacobian once per time node instead of once
  // per sample.
  bool jacobians_state_independent = false;
};

// Gradient of the running cost with respect to each block and the control.
// The k block again holds raw per-entry derivatives.
struct CostGradient {
  Vec y, Y, z, Z, k, v;

  void resize(const Dimensions& dims, int marks);
  void set_zero();
};

struct CostSpec {
  std::function<double(double t, const StateView& s, const ConstVecRef& v)> running;
  std::function<double(const ConstVecRef& yT)> terminal;
  std::function<double(const ConstVecRef& Y0)> initial;

  // Optional analytic gradients with the same central-difference fallback.
  std::function<void(double t, const StateView& s, const ConstVecRef& v, CostGradient& out)>
      running_grad;
  std::function<void(const ConstVecRef& yT, VecRef out)> terminal_grad;  // length n
  std::function<void(const ConstVecRef& Y0, VecRef out)> initial_grad;   // length m
};

struct ProblemSpec {
  std::string name;
  Dimensions dims;
  JumpMeasure jumps;
  double T = 1.0;
  TerminalMap terminal;
  Vec x0;
  ControlSet controls;
  CoefficientSet coeffs;
  CostSpec cost;

  int marks() const { return jumps.count(); }

  // Structural checks plus finite-value probes of every user-supplied
  // function at the zero state. Throws std::invalid_argument.
  void validate() const;
};

// Evaluate one coefficient into a caller-sized buffer.
void eval_coeff(const ProblemSpec& spec, Coeff which, double t, const StateView& s,
                const ConstVecRef& v, VecRef out);

// Jacobian of one coefficient, analytic when supplied, otherwise central
// differences applied to the coefficient itself.
void eval_coeff_jacobian(const ProblemSpec& spec, Coeff which, double t, const StateView& s,
                         const ConstVecRef& v, BlockJacobian& out);

// Running cost gradient with the same analytic-or-difference rule.
void eval_running_cost_gradient(const ProblemSpec& spec, double t, const StateView& s,
                                const ConstVecRef& v, CostGradient& out);

void eval_terminal_cost_gradient(const ProblemSpec& spec, const ConstVecRef& yT, VecRef out);
void eval_initial_cost_gradient(const ProblemSpec& spec, const ConstVecRef& Y0, VecRef out);

}  // namespace fbdsde
