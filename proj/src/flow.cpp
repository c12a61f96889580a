#include "ndf/flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "ndf/error.hpp"
#include "ndf/sampling.hpp"

namespace ndf {

void validate(const FlowConfig& cfg) {
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) {
    throw Error(ErrorCode::BadSpec, "flow step tau must be > 0");
  }
  if (!(cfg.inner_tol > 0.0)) {
    throw Error(ErrorCode::BadSpec, "inner_tol must be > 0");
  }
  if (cfg.n_steps < 1) throw Error(ErrorCode::BadSpec, "n_steps must be >= 1");
  if (cfg.max_inner_iters < 1) {
    throw Error(ErrorCode::BadSpec, "max_inner_iters must be >= 1");
  }
}

double prox_objective(const FormInstance& form, const Field& w, const Field& u,
                      double tau) {
  const Field d = w - u;
  return energy(form, w) + inner(d, d) / (2.0 * tau);
}

namespace {

using Vec = Eigen::VectorXd;

/// The resolvent problem min_w sum_e F_e((Dw)_e) + ||w - u||_M^2 / (2 tau)
/// and its Fenchel dual over edge variables q.
class ProxProblem {
 public:
  ProxProblem(const FormInstance& form, const Field& u, double tau)
      : terms_(form.terms()), tau_(tau), n_(u.size()) {
    u_ = Eigen::Map<const Vec>(u.values().data(), static_cast<Eigen::Index>(n_));
    const auto w = u.space()->weights();
    m_ = Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(n_));
  }

  [[nodiscard]] std::size_t edges() const { return terms_.size(); }

  [[nodiscard]] Vec diff(const Vec& w) const {
    Vec z(static_cast<Eigen::Index>(terms_.size()));
    for (std::size_t e = 0; e < terms_.size(); ++e) {
      z[static_cast<Eigen::Index>(e)] = w[idx(terms_[e].head)] - w[idx(terms_[e].tail)];
    }
    return z;
  }

  [[nodiscard]] Vec adjoint(const Vec& q) const {
    Vec out = Vec::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t e = 0; e < terms_.size(); ++e) {
      const double qe = q[static_cast<Eigen::Index>(e)];
      out[idx(terms_[e].head)] += qe;
      out[idx(terms_[e].tail)] -= qe;
    }
    return out;
  }

  [[nodiscard]] double primal(const Vec& w) const {
    const Vec z = diff(w);
    double e = 0.0;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      e += terms_[k].value(z[static_cast<Eigen::Index>(k)]);
    }
    const Vec d = w - u_;
    return e + d.dot(m_.cwiseProduct(d)) / (2.0 * tau_);
  }

  [[nodiscard]] Vec primal_from_dual(const Vec& q) const {
    return u_ - tau_ * adjoint(q).cwiseQuotient(m_);
  }

  [[nodiscard]] double dual(const Vec& q) const {
    const Vec a = adjoint(q);
    double conj = 0.0;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      conj += terms_[k].conjugate(q[static_cast<Eigen::Index>(k)]);
    }
    return -conj + a.dot(u_) - 0.5 * tau_ * a.dot(a.cwiseQuotient(m_));
  }

  [[nodiscard]] double gap(const Vec& w, const Vec& q) const {
    return primal(w) - dual(q);
  }

  /// Gradient and Hessian of the primal objective.
  void derivatives(const Vec& w, Vec& grad, Eigen::MatrixXd& hess) const {
    const Vec z = diff(w);
    Vec q(static_cast<Eigen::Index>(terms_.size()));
    hess = (m_ / tau_).asDiagonal();
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const auto& t = terms_[k];
      const double zk = z[static_cast<Eigen::Index>(k)];
      q[static_cast<Eigen::Index>(k)] = t.derivative(zk);
      const double c = t.curvature(zk);
      const auto h = idx(t.head);
      const auto l = idx(t.tail);
      hess(h, h) += c;
      hess(l, l) += c;
      hess(h, l) -= c;
      hess(l, h) -= c;
    }
    grad = m_.cwiseProduct(w - u_) / tau_ + adjoint(q);
  }

  [[nodiscard]] Vec edge_derivatives(const Vec& w) const {
    const Vec z = diff(w);
    Vec q(z.size());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      q[static_cast<Eigen::Index>(k)] = terms_[k].derivative(z[static_cast<Eigen::Index>(k)]);
    }
    return q;
  }

  /// Upper bound on the Lipschitz constant of the dual smooth part.
  [[nodiscard]] double dual_lipschitz() const {
    std::vector<double> deg(n_, 0.0);
    for (const auto& t : terms_) {
      deg[t.head] += 1.0;
      deg[t.tail] += 1.0;
    }
    double worst = 0.0;
    for (const auto& t : terms_) {
      worst = std::max(worst, deg[t.head] / m_[idx(t.head)] + deg[t.tail] / m_[idx(t.tail)]);
    }
    return tau_ * worst;
  }

  [[nodiscard]] Vec prox_conjugate(const Vec& v, double lambda) const {
    Vec out(v.size());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      out[static_cast<Eigen::Index>(k)] =
          terms_[k].prox_conjugate(v[static_cast<Eigen::Index>(k)], lambda);
    }
    return out;
  }

  [[nodiscard]] const Vec& u() const { return u_; }

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

  const std::vector<EdgeTerm>& terms_;
  double tau_;
  std::size_t n_;
  Vec u_;
  Vec m_;
};

struct Solved {
  Vec w;
  double gap;
  std::size_t iterations;
};

/// Damped Newton on the primal. Runs past the gap tolerance until the step
/// stalls so that the returned point is accurate to rounding.
Solved solve_newton(const ProxProblem& prob, double tol, std::size_t max_iters) {
  Vec w = prob.u();
  Vec grad;
  Eigen::MatrixXd hess;
  double obj = prob.primal(w);
  double gap = prob.gap(w, prob.edge_derivatives(w));
  std::size_t it = 0;
  for (; it < max_iters; ++it) {
    prob.derivatives(w, grad, hess);
    const Vec step = -hess.ldlt().solve(grad);
    const double slope = grad.dot(step);
    double t = 1.0;
    Vec trial = w + step;
    double trial_obj = prob.primal(trial);
    while (trial_obj > obj + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      trial = w + t * step;
      trial_obj = prob.primal(trial);
    }
    const double moved = (t * step).lpNorm<Eigen::Infinity>();
    if (trial_obj <= obj) {
      w = trial;
      obj = trial_obj;
    }
    gap = prob.gap(w, prob.edge_derivatives(w));
    const double scale = 1.0 + w.lpNorm<Eigen::Infinity>();
    if (gap <= tol && (moved <= 1e-15 * scale || trial_obj > obj)) break;
  }
  return {w, gap, it + 1};
}

/// Accelerated proximal gradient on the dual with adaptive restart.
Solved solve_dual(const ProxProblem& prob, double tol, std::size_t max_iters) {
  const auto e = static_cast<Eigen::Index>(prob.edges());
  const double lip = prob.dual_lipschitz();
  const double step = 1.0 / lip;
  Vec q = prob.prox_conjugate(Vec::Zero(e), step);
  Vec y = q;
  double momentum = 1.0;
  double gap = std::numeric_limits<double>::infinity();
  Vec w = prob.primal_from_dual(q);
  std::size_t it = 0;
  for (; it < max_iters; ++it) {
    const Vec wy = prob.primal_from_dual(y);
    const Vec q_next = prob.prox_conjugate(y + step * prob.diff(wy), step);
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    if ((y - q_next).dot(q_next - q) > 0.0) {
      y = q_next;
      momentum = 1.0;
    } else {
      y = q_next + ((momentum - 1.0) / next_momentum) * (q_next - q);
      momentum = next_momentum;
    }
    q = q_next;
    if (it % 10 == 9) {
      w = prob.primal_from_dual(q);
      gap = prob.gap(w, q);
      if (gap <= tol) break;
    }
  }
  w = prob.primal_from_dual(q);
  gap = prob.gap(w, q);
  return {w, gap, it + 1};
}

void check_probes(const FormInstance& form, const Field& u, const Field& v,
                  double tau, double tol, std::uint64_t seed) {
  const double best = prox_objective(form, v, u, tau);
  auto violates = [&](const Field& w) {
    return best > prox_objective(form, w, u, tau) + tol;
  };
  if (violates(u)) {
    throw Error(ErrorCode::NoConvergence, "prox result worse than its input");
  }
  Rng rng = Rng::stream(seed, "prox_probes");
  const double base = 1.0 + linf_norm(u);
  std::vector<double> vals(u.size());
  for (int i = 0; i < 32; ++i) {
    const double radius = base * std::pow(10.0, -4.0 + 3.0 * i / 31.0);
    for (std::size_t x = 0; x < vals.size(); ++x) {
      vals[x] = v[x] + radius * rng.uniform(-1.0, 1.0);
    }
    if (violates(Field(u.space(), vals))) {
      throw Error(ErrorCode::NoConvergence,
                  "prox result beaten by probe " + std::to_string(i));
    }
  }
}

}  // namespace

ProxResult prox_solve(const FormInstance& form, const Field& u, double tau,
                      double inner_tol, std::size_t max_inner_iters,
                      std::uint64_t probe_seed) {
  if (!u.space()->same_as(*form.space())) {
    throw Error(ErrorCode::SpaceMismatch, "initial datum is not on the form's space");
  }
  validate(FlowConfig{tau, 1, inner_tol, max_inner_iters, probe_seed});
  if (form.terms().empty()) return {u, 0.0, 0};

  const ProxProblem prob(form, u, tau);
  const Solved s = form.smooth() ? solve_newton(prob, inner_tol, max_inner_iters)
                                 : solve_dual(prob, inner_tol, max_inner_iters);
  if (!(s.gap <= inner_tol)) {
    throw Error(ErrorCode::NoConvergence,
                "duality gap " + std::to_string(s.gap) + " above inner_tol after " +
                    std::to_string(s.iterations) + " iterations");
  }
  Field v(u.space(), std::vector<double>(s.w.data(), s.w.data() + s.w.size()));
  check_probes(form, u, v, tau, inner_tol, probe_seed);
  return {std::move(v), std::max(s.gap, 0.0), s.iterations};
}

FlowTrace evolve(const FormInstance& form, const Field& u0,
                 const FlowConfig& cfg) {
  validate(cfg);
  FlowTrace trace;
  trace.tau = cfg.tau;
  trace.states.reserve(cfg.n_steps + 1);
  trace.states.push_back(u0);
  trace.energies.push_back(eval_form(form, u0));
  for (std::size_t k = 0; k < cfg.n_steps; ++k) {
    try {
      ProxResult r = prox_solve(form, trace.states.back(), cfg.tau, cfg.inner_tol,
                                cfg.max_inner_iters, cfg.probe_seed);
      trace.energies.push_back(eval_form(form, r.state));
      trace.residuals.push_back(r.residual);
      trace.states.push_back(std::move(r.state));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConvergence) throw;
      throw Error(ErrorCode::NoConvergence,
                  "step " + std::to_string(k) + ": " + e.what());
    }
  }
  return trace;
}

}  // namespace ndf
