#include "core/catalog.hpp"

#include <algorithm>
#include <stdexcept>

namespace fbdsde {

namespace {

JumpMeasure midpoint_marks() {
  JumpMeasure jumps;
  const int J = 8;
  jumps.marks.resize(J);
  jumps.weights.resize(J);
  for (int j = 0; j < J; ++j) {
    jumps.marks[j] = (2.0 * j + 1.0) / 16.0;
    jumps.weights[j] = 1.0 / 8.0;
  }
  return jumps;
}

LqProblem scalar_skeleton(const std::string& name) {
  Dimensions dims;  // all ones
  LqProblem lq = LqProblem::zero(dims, midpoint_marks());
  lq.name = name;
  return lq;
}

// Coupled scalar problem with a known closed-form optimum at u = 0: the
// solution quintuple is (x0, x0, 0, 0, 0) and the total cost is 2 x0^2.
LqProblem example31() {
  LqProblem lq = scalar_skeleton("example31");
  lq.x0 = Vec::Constant(1, 1.0);

  lq.b.Av(0, 0) = 1.0;  // b = (1 + t) v
  lq.b.Bv(0, 0) = 1.0;

  lq.sigma.Az(0, 0) = -1.0;  // sigma = -z + Z + int k nu + v
  lq.sigma.AZ(0, 0) = 1.0;
  lq.sigma.Ak(0, 0) = 1.0;
  lq.sigma.Av(0, 0) = 1.0;

  lq.phi.rho.Av(0, 0) = -1.0;  // phi(rho) = -v rho

  lq.f.Av(0, 0) = -4.0;  // f = (t - 4) v
  lq.f.Bv(0, 0) = 1.0;

  for (Mat* blk : {&lq.g.Az, &lq.g.AZ, &lq.g.Ak, &lq.g.Av}) {
    (*blk)(0, 0) = 1.5;  // g = 3/2 (z + Z + int k nu + v)
  }

  for (Mat* q : {&lq.cost.Qy, &lq.cost.QY, &lq.cost.Qz, &lq.cost.QZ, &lq.cost.Qk, &lq.cost.Qv,
                 &lq.cost.beta_Q, &lq.cost.gamma_Q}) {
    (*q)(0, 0) = 1.0;
  }
  return lq;
}

// All coefficients vanish, terminal shift xi = 1: the pair decouples and the
// exact solution is y = 0, Y = 1 with zero integrands. Handy as a fixed
// point the solver must reproduce immediately.
LqProblem decoupled_constant() {
  LqProblem lq = scalar_skeleton("decoupled-constant");
  lq.terminal.xi = Vec::Constant(1, 1.0);
  return lq;
}

// f = y, b = -Y, g = z, sigma = -Z, phi = -k: the monotonicity bracket
// equals minus the full squared increment, so the dissipativity estimate
// should recover weights close to one on both groups.
LqProblem monotone_dissipative() {
  LqProblem lq = scalar_skeleton("monotone-dissipative");
  lq.f.Ay(0, 0) = 1.0;
  lq.b.AY(0, 0) = -1.0;
  lq.g.Az(0, 0) = 1.0;
  lq.sigma.AZ(0, 0) = -1.0;
  lq.phi.kmark(0, 0) = -1.0;
  return lq;
}

// Sign-flipped variant with c < 0: the bracket equals plus the squared
// increment, matching the reversed inequality regime.
LqProblem anti_monotone() {
  LqProblem lq = scalar_skeleton("anti-monotone");
  lq.terminal.c = -1.0;
  lq.f.Ay(0, 0) = -1.0;
  lq.b.AY(0, 0) = 1.0;
  lq.g.Az(0, 0) = -1.0;
  lq.sigma.AZ(0, 0) = 1.0;
  lq.phi.kmark(0, 0) = 1.0;
  return lq;
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"example31", "decoupled-constant", "monotone-dissipative", "anti-monotone"};
}

bool catalog_has(const std::string& name) {
  const auto names = catalog_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

LqProblem catalog_problem(const std::string& name) {
  if (name == "example31") return example31();
  if (name == "decoupled-constant") return decoupled_constant();
  if (name == "monotone-dissipative") return monotone_dissipative();
  if (name == "anti-monotone") return anti_monotone();
  throw std::invalid_argument("catalog: unknown problem '" + name + "'");
}

}  // namespace fbdsde
