#include "core/product_rule.hpp"

#include <cmath>
#include <stdexcept>

namespace fbdsde {

ItoIntegrands ItoIntegrands::zeros(int dim, const NoiseBundle& noise) {
  ItoIntegrands io;
  io.dim = dim;
  const int nodes = noise.steps + 1;
  io.alpha0 = PathArray(1, noise.paths, dim);
  io.beta = PathArray(nodes, noise.paths, dim);
  io.gamma = PathArray(nodes, noise.paths, dim * noise.bdim);
  io.delta = PathArray(nodes, noise.paths, dim * noise.wdim);
  io.K = PathArray(nodes, noise.paths, dim * noise.jumps.count());
  return io;
}

PathArray accumulate_ito(const ItoIntegrands& a, const NoiseBundle& noise) {
  const int N = noise.steps;
  const int M = noise.paths;
  const int dim = a.dim;
  const int l = noise.bdim;
  const int d = noise.wdim;
  const int J = noise.jumps.count();
  const double dt = noise.dt();

  PathArray alpha(N + 1, M, dim);
  for (int p = 0; p < M; ++p) {
    alpha.vec(0, p) = a.alpha0.vec(0, p);
    for (int i = 0; i < N; ++i) {
      Eigen::Map<const Vec> dB(noise.dB_at(i, p), l);
      Eigen::Map<const Vec> dW(noise.dW_at(i, p), d);
      Eigen::Map<const Vec> dN(noise.dN_at(i, p), J);
      Vec next = alpha.vec(i, p);
      next += dt * a.beta.vec(i, p);
      next += a.gamma.mat(i + 1, p, dim, l) * dB;
      next += a.delta.mat(i, p, dim, d) * dW;
      next += a.K.mat(i, p, dim, J) * dN;
      alpha.vec(i + 1, p) = next;
    }
  }
  return alpha;
}

ProductRuleReport check_discrete_product_rule(const ItoIntegrands& a, const ItoIntegrands& b,
                                              const NoiseBundle& noise) {
  if (a.dim != b.dim) throw std::invalid_argument("product rule: dimension mismatch");
  const int N = noise.steps;
  const int M = noise.paths;
  const int dim = a.dim;
  const int l = noise.bdim;
  const int d = noise.wdim;
  const int J = noise.jumps.count();
  const double dt = noise.dt();

  const PathArray pa = accumulate_ito(a, noise);
  const PathArray pb = accumulate_ito(b, noise);

  ProductRuleReport rep;
  rep.paths = M;
  rep.steps = N;

  double worst = 0.0;
  double lhs_sum = 0.0, rhs_sum = 0.0, res_sum = 0.0, res_sq = 0.0;

  for (int p = 0; p < M; ++p) {
    // (a) exact telescoping
    double cross = 0.0;
    for (int i = 0; i < N; ++i) {
      const Vec da = pa.vec(i + 1, p) - pa.vec(i, p);
      const Vec db = pb.vec(i + 1, p) - pb.vec(i, p);
      cross += pa.vec(i, p).dot(db) + pb.vec(i, p).dot(da) + da.dot(db);
    }
    const double lhs = pa.vec(N, p).dot(pb.vec(N, p));
    const double base = pa.vec(0, p).dot(pb.vec(0, p));
    worst = std::max(worst, std::abs(lhs - base - cross));

    // (b) expectation form. Stochastic integrals use midpoint-in-alpha for
    // the dt part, right node for dB, left node for dW and jumps; the
    // covariation corrections then carry the displayed signs.
    auto ito_integral = [&](const PathArray& alpha, const ItoIntegrands& other) {
      double acc = 0.0;
      for (int i = 0; i < N; ++i) {
        Eigen::Map<const Vec> dB(noise.dB_at(i, p), l);
        Eigen::Map<const Vec> dW(noise.dW_at(i, p), d);
        Eigen::Map<const Vec> dN(noise.dN_at(i, p), J);
        const Vec mid = 0.5 * (alpha.vec(i, p) + alpha.vec(i + 1, p));
        acc += dt * mid.dot(other.beta.vec(i, p));
        acc += alpha.vec(i + 1, p).dot(other.gamma.mat(i + 1, p, dim, l) * dB);
        acc += alpha.vec(i, p).dot(other.delta.mat(i, p, dim, d) * dW);
        acc += alpha.vec(i, p).dot(other.K.mat(i, p, dim, J) * dN);
      }
      return acc;
    };

    double corrections = 0.0;
    for (int i = 0; i < N; ++i) {
      const auto ga = a.gamma.mat(i + 1, p, dim, l);
      const auto gb = b.gamma.mat(i + 1, p, dim, l);
      const auto da = a.delta.mat(i, p, dim, d);
      const auto db = b.delta.mat(i, p, dim, d);
      corrections -= dt * ga.cwiseProduct(gb).sum();
      corrections += dt * da.cwiseProduct(db).sum();
      const auto Ka = a.K.mat(i, p, dim, J);
      const auto Kb = b.K.mat(i, p, dim, J);
      for (int j = 0; j < J; ++j) {
        corrections += dt * noise.jumps.weights[j] * Ka.col(j).dot(Kb.col(j));
      }
    }

    const double rhs = base + ito_integral(pa, b) + ito_integral(pb, a) + corrections;
    lhs_sum += lhs;
    rhs_sum += rhs;
    const double res = lhs - rhs;
    res_sum += res;
    res_sq += res * res;
  }

  rep.pathwise_residual = worst;
  rep.expectation_lhs = lhs_sum / M;
  rep.expectation_rhs = rhs_sum / M;
  rep.expectation_residual = res_sum / M;
  const double var = std::max(0.0, res_sq / M - (res_sum / M) * (res_sum / M));
  rep.se = std::sqrt(var / M);
  return rep;
}

}  // namespace fbdsde
