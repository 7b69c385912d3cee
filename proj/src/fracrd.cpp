#include "fastconv/fracrd.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "fastconv/control.hpp"
#include "fastconv/error.hpp"

namespace fastconv {

namespace {

using Sparse = Eigen::SparseMatrix<double>;

void check(const FracRDProblem& p) {
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw ConfigError("fracrd: alpha must lie in (0, 1]");
  if (p.M_nodes < 3) throw ConfigError("fracrd: need at least 3 nodes");
  if (!(p.x_hi > p.x_lo) || !(p.T > 0.0) || !(p.tol > 0.0) || !(p.h0 >= p.h_min) || !(p.h_min > 0.0))
    throw ConfigError("fracrd: invalid parameters");
  if (p.u0.size() != 0 && p.u0.size() != 3 * p.M_nodes) throw ConfigError("fracrd: u0 has wrong size");
}

class Stepper {
 public:
  explicit Stepper(const FracRDProblem& p)
      : p_(p),
        A_(fracrd_linear_operator(p)),
        engine_(power_kernel(p.alpha), EngineConfig{p.h_min, p.B, p.T, p.contour, true}, 3 * p.M_nodes) {
    u0_ = p.u0.size() ? p.u0 : fracrd_default_initial(p);
    u_ = u0_;
    g_ = fracrd_rhs(p_, A_, u_);
    engine_.start(g_);
  }

  /// Solves for u at t + h without committing.
  Eigen::VectorXd trial(double t_next) {
    const double h = t_next - engine_.last_time();
    const DiagonalWeights w = engine_.diagonal(t_next);
    if (h != h_factored_) factor(w.next);
    const Eigen::Index M = p_.M_nodes;
    Eigen::VectorXd rhs = w.prev * (A_ * u_) + engine_.history(t_next) + u0_;
    const Eigen::VectorXd prod = u_.segment(0, M).cwiseProduct(u_.segment(M, M));
    rhs.segment(0, M) -= p_.k1 * w.f1 * prod;
    rhs.segment(M, M) -= p_.k1 * w.f1 * prod;
    rhs.segment(2 * M, M) += p_.k1 * w.f1 * prod;
    Eigen::VectorXd u = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success || !u.allFinite()) throw NumericalFailure("fracrd: linear solve failed");
    h_factored_ = h;
    return u;
  }

  void accept(double t, const Eigen::VectorXd& u) {
    u_ = u;
    g_ = fracrd_rhs(p_, A_, u_);
    engine_.commit(t, g_);
  }

  const Eigen::VectorXd& u() const { return u_; }
  const Eigen::VectorXd& g() const { return g_; }
  const Sparse& A() const { return A_; }
  const FastConvolution& engine() const { return engine_; }

 private:
  void factor(double c) {
    Sparse I(A_.rows(), A_.cols());
    I.setIdentity();
    const Sparse S = I - c * A_;
    lu_.compute(S);
    if (lu_.info() != Eigen::Success) throw NumericalFailure("fracrd: factorization failed");
  }

  const FracRDProblem& p_;
  Sparse A_;
  FastConvolution engine_;
  Eigen::SparseLU<Sparse> lu_;
  double h_factored_ = -1.0;
  Eigen::VectorXd u0_, u_, g_;
};

Trajectory make_trajectory(const FracRDProblem& p) {
  Trajectory tr;
  tr.columns = {"t", "h", "gamma1", "rejects", "conserved"};
  for (int s = 1; s <= 3; ++s)
    for (int i = 0; i < p.M_nodes; ++i) tr.columns.push_back("u" + std::to_string(s) + "_" + std::to_string(i));
  return tr;
}

void record(Trajectory& tr, const FracRDProblem& p, double t, double h, double gamma, int rejects,
            const Eigen::VectorXd& u) {
  std::vector<double> row{t, h, gamma, static_cast<double>(rejects), fracrd_conserved(p, u)};
  row.insert(row.end(), u.data(), u.data() + u.size());
  tr.add(std::move(row));
}

}  // namespace

Eigen::VectorXd fracrd_grid(const FracRDProblem& p) {
  const double dx = (p.x_hi - p.x_lo) / p.M_nodes;
  Eigen::VectorXd x(p.M_nodes);
  for (int i = 0; i < p.M_nodes; ++i) x[i] = p.x_lo + i * dx;
  return x;
}

Eigen::VectorXd fracrd_default_initial(const FracRDProblem& p) {
  const Eigen::VectorXd x = fracrd_grid(p);
  const Eigen::Index M = p.M_nodes;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(3 * M);
  for (Eigen::Index i = 0; i < M; ++i) {
    u[i] = 0.5 * (1.0 + std::tanh(-5.0 * x[i]));
    u[M + i] = 0.5 * (1.0 + std::tanh(5.0 * x[i]));
  }
  return u;
}

Sparse fracrd_linear_operator(const FracRDProblem& p) {
  check(p);
  const int M = p.M_nodes;
  const double dx = (p.x_hi - p.x_lo) / M;
  const double d = p.K_diff / (dx * dx);
  std::vector<Eigen::Triplet<double>> trip;
  for (int s = 0; s < 3; ++s) {
    for (int i = 0; i < M; ++i) {
      const int r = s * M + i;
      trip.emplace_back(r, r, -2.0 * d);
      trip.emplace_back(r, s * M + (i + M - 1) % M, d);
      trip.emplace_back(r, s * M + (i + 1) % M, d);
    }
  }
  for (int i = 0; i < M; ++i) {
    trip.emplace_back(i, 2 * M + i, p.k2 + p.k3);
    trip.emplace_back(M + i, 2 * M + i, p.k2);
    trip.emplace_back(2 * M + i, 2 * M + i, -(p.k2 + p.k3));
  }
  Sparse A(3 * M, 3 * M);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::VectorXd fracrd_rhs(const FracRDProblem& p, const Sparse& A, const Eigen::VectorXd& v) {
  const Eigen::Index M = p.M_nodes;
  Eigen::VectorXd g = A * v;
  const Eigen::VectorXd prod = p.k1 * v.segment(0, M).cwiseProduct(v.segment(M, M));
  g.segment(0, M) -= prod;
  g.segment(M, M) -= prod;
  g.segment(2 * M, M) += prod;
  return g;
}

double fracrd_conserved(const FracRDProblem& p, const Eigen::VectorXd& u) {
  const Eigen::Index M = p.M_nodes;
  return u.segment(0, M).sum() + u.segment(2 * M, M).sum();
}

Trajectory fracrd_solve(const FracRDProblem& p) {
  check(p);
  Stepper st(p);
  Trajectory tr = make_trajectory(p);
  ControllerConfig ctl;
  ctl.tol = p.tol;
  ctl.C = kernel_constant(power_kernel(p.alpha), p.T);
  ctl.h0 = p.h0;
  ctl.h_min_guard = p.h_min;
  validate(ctl);
  record(tr, p, 0.0, 0.0, 0.0, 0, st.u());
  double t = 0.0, h_last = p.h0, gamma_last = 0.0;
  std::size_t n = 0;
  try {
    while (t < p.T) {
      double h = n < 2 ? p.h0 : propose_step_first_diff(ctl, h_last, gamma_last);
      if (p.T - (t + h) < 0.25 * h) h = p.T - t;
      int rejects = 0;
      Eigen::VectorXd u;
      double gamma = 0.0;
      for (;;) {
        h = std::min(h, p.T - t);
        u = st.trial(t + h);
        gamma = first_difference_norm(t, t + h, st.g(), fracrd_rhs(p, st.A(), u));
        if (n < 2) break;
        const StepDecision d = accept_step(ctl, h, gamma);
        if (d.accept) break;
        if (++rejects > ctl.max_retries) throw NumericalFailure("fracrd: too many rejected steps");
        h = d.h;
      }
      t += h;
      st.accept(t, u);
      ++n;
      h_last = h;
      gamma_last = gamma;
      record(tr, p, t, h, gamma, rejects, u);
    }
  } catch (const NumericalFailure& e) {
    tr.status = "failed";
    tr.message = e.what();
  }
  tr.final_state["u"] = st.u();
  tr.counters = st.engine().counters();
  return tr;
}

Trajectory fracrd_solve_fixed(const FracRDProblem& p, double h) {
  check(p);
  if (!(h >= p.h_min)) throw ConfigError("fracrd: step below h_min");
  Stepper st(p);
  Trajectory tr = make_trajectory(p);
  record(tr, p, 0.0, 0.0, 0.0, 0, st.u());
  const auto steps = static_cast<long long>(std::llround(p.T / h));
  for (long long n = 1; n <= steps; ++n) {
    const double t = n == steps ? p.T : n * h;
    const Eigen::VectorXd u = st.trial(t);
    st.accept(t, u);
    record(tr, p, t, h, 0.0, 0, u);
  }
  tr.final_state["u"] = st.u();
  tr.counters = st.engine().counters();
  return tr;
}

}  // namespace fastconv
