#include "qopf/variational.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace qopf {

LagrangianContext::LagrangianContext(QcqpProblem problem, AnsatzSpec primal, AnsatzSpec dual)
    : problem_(std::move(problem)), primal_(std::move(primal)), dual_(std::move(dual)) {
  if (problem_.dim != (1 << primal_.n_qubits))
    throw std::invalid_argument("primal ansatz has " + std::to_string(primal_.n_qubits) +
                                " qubits but the problem dimension is " + std::to_string(problem_.dim));
  if (problem_.size() != (1 << dual_.n_qubits))
    throw std::invalid_argument("dual ansatz has " + std::to_string(dual_.n_qubits) + " qubits but there are " +
                                std::to_string(problem_.size()) + " constraint rows");
  m0_ = decompose(problem_.m0);
  mm_.reserve(problem_.size());
  b_.resize(problem_.size());
  std::set<int> colors, all_keys;
  std::map<int, std::vector<KeyEntry>> by_key;
  for (const auto& p : m0_.pieces) {
    colors.insert(p.color);
    all_keys.insert(p.key());
  }
  for (int m = 0; m < problem_.size(); ++m) {
    mm_.push_back(decompose(problem_.constraints[m].matrix));
    b_[m] = problem_.constraints[m].bound;
  }
  for (int m = 0; m < problem_.size(); ++m)
    for (const auto& p : mm_[m].pieces) {
      colors.insert(p.color);
      all_keys.insert(p.key());
      by_key[p.key()].push_back({m, &p});
    }
  colors_ = static_cast<int>(colors.size());
  rotated_circuits_ = static_cast<int>(all_keys.size());
  for (auto& [key, entries] : by_key) {
    keys_.push_back(key);
    key_piece_.push_back(entries.front().piece);
    by_key_.push_back(std::move(entries));
  }
}

SparseCMatrix LagrangianContext::weighted_constraints(const RVector& w) const {
  SparseCMatrix out(problem_.dim, problem_.dim);
  for (int m = 0; m < problem_.size(); ++m)
    if (w[m] != 0.0 && problem_.constraints[m].matrix.nonZeros() > 0) out += w[m] * problem_.constraints[m].matrix;
  return out;
}

RVector LagrangianContext::constraint_values(const CVector& v) const {
  RVector out(problem_.size());
  for (int m = 0; m < problem_.size(); ++m) {
    const SparseCMatrix& mat = problem_.constraints[m].matrix;
    out[m] = mat.nonZeros() ? quadratic_form(mat, v) : 0.0;
  }
  return out;
}

CVector primal_vector(const LagrangianContext& ctx, const PrimalPoint& p) {
  return p.alpha * prepare(ctx.primal_spec(), p.theta).amplitudes;
}

RVector dual_vector(const LagrangianContext& ctx, const DualPoint& d) {
  return d.beta * d.beta * prepare(ctx.dual_spec(), d.phi).amplitudes.cwiseAbs2();
}

Terms eval_terms_exact(const LagrangianContext& ctx, const QuantumState& psi, const RVector& pmf) {
  Terms t;
  t.f0 = quadratic_form(ctx.problem().m0, psi.amplitudes);
  t.f = pmf.dot(ctx.constraint_values(psi.amplitudes));
  t.g = pmf.dot(ctx.bounds());
  return t;
}

Terms eval_terms_exact(const LagrangianContext& ctx, const PrimalPoint& p, const DualPoint& d) {
  const QuantumState psi = prepare(ctx.primal_spec(), p.theta);
  const RVector pmf = prepare(ctx.dual_spec(), d.phi).amplitudes.cwiseAbs2();
  return eval_terms_exact(ctx, psi, pmf);
}

double kronecker_F(const LagrangianContext& ctx, const QuantumState& psi, const QuantumState& xi) {
  const int n = ctx.dim(), m = ctx.rows();
  CMatrix block = CMatrix::Zero(static_cast<Eigen::Index>(n) * m, static_cast<Eigen::Index>(n) * m);
  for (int r = 0; r < m; ++r) block.block(r * n, r * n, n, n) = CMatrix(ctx.problem().constraints[r].matrix);
  CVector composite(static_cast<Eigen::Index>(n) * m);
  for (int r = 0; r < m; ++r) composite.segment(r * n, n) = xi.amplitudes[r] * psi.amplitudes;
  return composite.dot(block * composite).real();
}

double eval_F0_sampled(const LagrangianContext& ctx, const QuantumState& psi, const SamplingConfig& cfg,
                       SeedStream& seeds, SampleCounter* counter) {
  const ColorDecomposition& d = ctx.m0_pieces();
  const XbmEstimate e = estimate_expectation(psi, d, cfg.shots, seeds.next(), cfg.allocation);
  if (counter) {
    for (auto s : allocate_shots(d, cfg.shots, cfg.allocation)) counter->shots += s;
    counter->primal_circuits += static_cast<std::int64_t>(d.pieces.size());
  }
  return e.estimate;
}

double eval_F_sampled(const LagrangianContext& ctx, const QuantumState& psi, const RVector& pmf,
                      const SamplingConfig& cfg, SeedStream& seeds, SampleCounter* counter) {
  if (cfg.shots < 1 || cfg.primal_shots_per_dual < 1) throw std::invalid_argument("shot counts must be positive");
  const std::int64_t per_dual = cfg.primal_shots_per_dual;
  std::vector<std::int64_t> shared;
  if (cfg.joint) {
    shared = sample_counts(pmf, cfg.shots, seeds.next());
    if (counter) {
      counter->shots += cfg.shots;
      counter->dual_circuits += 1;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < ctx.union_keys().size(); ++i) {
    const RVector probs = rotated_probabilities(psi, ctx.key_piece(i));
    std::vector<std::int64_t> own;
    if (!cfg.joint) {
      own = sample_counts(pmf, cfg.shots, seeds.next());
      if (counter) {
        counter->shots += cfg.shots;
        counter->dual_circuits += 1;
      }
    }
    const std::vector<std::int64_t>& dual_counts = cfg.joint ? shared : own;
    double acc = 0.0;
    for (const auto& entry : ctx.rows_with_key(i)) {
      const std::int64_t c = dual_counts[static_cast<std::size_t>(entry.row)];
      if (c == 0) continue;
      const auto outcomes = sample_counts(probs, c * per_dual, seeds.next());
      double part = 0.0;
      for (std::size_t j = 0; j < outcomes.size(); ++j)
        if (outcomes[j]) part += static_cast<double>(outcomes[j]) * entry.piece->diagonal[static_cast<Eigen::Index>(j)];
      acc += part / static_cast<double>(per_dual);
    }
    total += acc / static_cast<double>(cfg.shots);
    if (counter) {
      counter->shots += cfg.shots * per_dual;
      counter->primal_circuits += 1;
    }
  }
  return total;
}

double eval_G_sampled(const LagrangianContext& ctx, const RVector& pmf, const SamplingConfig& cfg, SeedStream& seeds,
                      SampleCounter* counter) {
  const auto counts = sample_counts(pmf, cfg.shots, seeds.next());
  double acc = 0.0;
  for (std::size_t m = 0; m < counts.size(); ++m)
    if (counts[m]) acc += static_cast<double>(counts[m]) * ctx.bounds()[static_cast<Eigen::Index>(m)];
  if (counter) {
    counter->shots += cfg.shots;
    counter->dual_circuits += 1;
  }
  return acc / static_cast<double>(cfg.shots);
}

double lagrangian(const LagrangianContext& ctx, const PrimalPoint& p, const DualPoint& d, const EvalMode& mode) {
  const double a2 = p.alpha * p.alpha, b2 = d.beta * d.beta;
  const QuantumState psi = prepare(ctx.primal_spec(), p.theta);
  const RVector pmf = prepare(ctx.dual_spec(), d.phi).amplitudes.cwiseAbs2();
  if (!mode.sampled) {
    const Terms t = eval_terms_exact(ctx, psi, pmf);
    return a2 * t.f0 + a2 * b2 * t.f - b2 * t.g;
  }
  SeedStream seeds(mode.seed);
  const double f0 = eval_F0_sampled(ctx, psi, mode.sampling, seeds);
  const double f = eval_F_sampled(ctx, psi, pmf, mode.sampling, seeds);
  const double g = eval_G_sampled(ctx, pmf, mode.sampling, seeds);
  return a2 * f0 + a2 * b2 * f - b2 * g;
}

namespace {

Gradient grad_exact(const LagrangianContext& ctx, const PrimalPoint& p, const DualPoint& d) {
  const double a = p.alpha, b = d.beta, a2 = a * a, b2 = b * b;
  const AnsatzSpec& ps = ctx.primal_spec();
  const AnsatzSpec& ds = ctx.dual_spec();
  const QuantumState psi = prepare(ps, p.theta);
  const RVector pmf = prepare(ds, d.phi).amplitudes.cwiseAbs2();
  const RVector f_rows = ctx.constraint_values(psi.amplitudes);
  const double f0 = quadratic_form(ctx.problem().m0, psi.amplitudes);
  const double f = pmf.dot(f_rows);
  const double g = pmf.dot(ctx.bounds());

  Gradient out;
  out.lagrangian = a2 * f0 + a2 * b2 * f - b2 * g;
  out.alpha = 2 * a * f0 + 2 * a * b2 * f;
  out.beta = 2 * b * (a2 * f - g);

  // d/dtheta of psi^H B psi with B = alpha^2 (M0 + beta^2 sum_m pmf_m M_m)
  const SparseCMatrix weighted = SparseCMatrix(a2 * ctx.problem().m0) + a2 * b2 * ctx.weighted_constraints(pmf);
  out.theta.resize(ps.param_count());
  for (int k = 0; k < ps.param_count(); ++k) {
    const auto [plus, minus] = shift_points(p.theta, k);
    out.theta[k] = 0.5 * (quadratic_form(weighted, prepare(ps, plus).amplitudes) -
                          quadratic_form(weighted, prepare(ps, minus).amplitudes));
  }
  // d/dphi of beta^2 pmf . (alpha^2 f_rows - b)
  const RVector row_weight = a2 * f_rows - ctx.bounds();
  out.phi.resize(ds.param_count());
  for (int k = 0; k < ds.param_count(); ++k) {
    const auto [plus, minus] = shift_points(d.phi, k);
    const RVector dp = prepare(ds, plus).amplitudes.cwiseAbs2() - prepare(ds, minus).amplitudes.cwiseAbs2();
    out.phi[k] = 0.5 * b2 * dp.dot(row_weight);
  }
  return out;
}

Gradient grad_sampled(const LagrangianContext& ctx, const PrimalPoint& p, const DualPoint& d,
                      const SamplingConfig& cfg, std::uint64_t seed) {
  const double a = p.alpha, b = d.beta, a2 = a * a, b2 = b * b;
  const AnsatzSpec& ps = ctx.primal_spec();
  const AnsatzSpec& ds = ctx.dual_spec();
  SeedStream seeds(seed);
  SampleCounter counter;
  const QuantumState psi = prepare(ps, p.theta);
  const RVector pmf = prepare(ds, d.phi).amplitudes.cwiseAbs2();

  // coefficients that vanish exactly need no samples
  const bool need_f0 = a2 != 0.0;
  const bool need_f = a2 * b2 != 0.0;
  const bool need_g = b2 != 0.0;
  auto F0 = [&](const QuantumState& s) { return need_f0 ? eval_F0_sampled(ctx, s, cfg, seeds, &counter) : 0.0; };
  auto F = [&](const QuantumState& s, const RVector& q) {
    return need_f ? eval_F_sampled(ctx, s, q, cfg, seeds, &counter) : 0.0;
  };
  auto G = [&](const RVector& q) { return need_g ? eval_G_sampled(ctx, q, cfg, seeds, &counter) : 0.0; };

  Gradient out;
  const double f0 = F0(psi);
  const double f = F(psi, pmf);
  const double g = G(pmf);
  out.lagrangian = a2 * f0 + a2 * b2 * f - b2 * g;
  out.alpha = 2 * a * f0 + 2 * a * b2 * f;
  out.beta = 2 * b * (a2 * f - g);

  out.theta.resize(ps.param_count());
  for (int k = 0; k < ps.param_count(); ++k) {
    const auto [plus, minus] = shift_points(p.theta, k);
    const QuantumState sp = prepare(ps, plus), sm = prepare(ps, minus);
    const double d0 = F0(sp) - F0(sm);
    const double d1 = F(sp, pmf) - F(sm, pmf);
    out.theta[k] = 0.5 * a2 * d0 + 0.5 * a2 * b2 * d1;
  }
  out.phi.resize(ds.param_count());
  for (int k = 0; k < ds.param_count(); ++k) {
    const auto [plus, minus] = shift_points(d.phi, k);
    const RVector qp = prepare(ds, plus).amplitudes.cwiseAbs2();
    const RVector qm = prepare(ds, minus).amplitudes.cwiseAbs2();
    const double d1 = F(psi, qp) - F(psi, qm);
    const double d2 = G(qp) - G(qm);
    out.phi[k] = 0.5 * a2 * b2 * d1 - 0.5 * b2 * d2;
  }
  out.shots = counter.shots;
  return out;
}

}  // namespace

Gradient grad(const LagrangianContext& ctx, const PrimalPoint& p, const DualPoint& d, const EvalMode& mode) {
  if (p.theta.size() != ctx.primal_spec().param_count() || d.phi.size() != ctx.dual_spec().param_count())
    throw std::invalid_argument("parameter vector length does not match the ansatz");
  Gradient out = mode.sampled ? grad_sampled(ctx, p, d, mode.sampling, mode.seed) : grad_exact(ctx, p, d);
  out.primal_circuits =
      static_cast<std::int64_t>(ctx.rotated_circuits()) * (2 * ctx.primal_spec().param_count() + 1);
  out.dual_circuits = 2 * ctx.dual_spec().param_count() + 1;
  return out;
}

RVector stack_operator(const Gradient& g) {
  const Eigen::Index P = g.theta.size(), Q = g.phi.size();
  RVector out(P + Q + 2);
  out.head(P) = g.theta;
  out[P] = g.alpha;
  out.segment(P + 1, Q) = -g.phi;
  out[P + Q + 1] = -g.beta;
  return out;
}

}  // namespace qopf
