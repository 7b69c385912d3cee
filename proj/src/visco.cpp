#include "fastconv/visco.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "fastconv/control.hpp"
#include "fastconv/engine.hpp"
#include "fastconv/error.hpp"

namespace fastconv {

using Sparse = Eigen::SparseMatrix<double>;

Lame lame_from_young(double E, double nu_p) {
  if (!(E > 0.0) || !(nu_p > -1.0 && nu_p < 0.5)) throw ConfigError("elasticity: invalid E or Poisson ratio");
  return {E / (2.0 * (1.0 + nu_p)), E * nu_p / ((1.0 + nu_p) * (1.0 - 2.0 * nu_p))};
}

RawAssembly assemble_rectangle(int nx, int ny, double E, double nu_p, double rho, double Lx, double Ly) {
  if (nx < 1 || ny < 1 || !(Lx > 0.0) || !(Ly > 0.0) || !(rho > 0.0))
    throw ConfigError("elasticity: degenerate mesh dimensions");
  const Lame lm = lame_from_young(E, nu_p);
  Eigen::Matrix3d D;
  D << lm.lambda + 2 * lm.mu, lm.lambda, 0, lm.lambda, lm.lambda + 2 * lm.mu, 0, 0, 0, lm.mu;
  const int nnx = nx + 1;
  const int nodes = nnx * (ny + 1);
  RawAssembly out;
  out.nodes.resize(nodes, 2);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) out.nodes.row(j * nnx + i) << Lx * i / nx, Ly * j / ny;

  std::vector<Eigen::Triplet<double>> kt, mt;
  auto element = [&](std::array<int, 3> tri) {
    Eigen::Matrix<double, 3, 2> X;
    for (int a = 0; a < 3; ++a) X.row(a) = out.nodes.row(tri[a]);
    const double area = 0.5 * ((X(1, 0) - X(0, 0)) * (X(2, 1) - X(0, 1)) - (X(2, 0) - X(0, 0)) * (X(1, 1) - X(0, 1)));
    Eigen::Matrix<double, 3, 6> Bm = Eigen::Matrix<double, 3, 6>::Zero();
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3, c = (a + 2) % 3;
      const double dx = (X(b, 1) - X(c, 1)) / (2 * area);
      const double dy = (X(c, 0) - X(b, 0)) / (2 * area);
      Bm(0, 2 * a) = dx;
      Bm(1, 2 * a + 1) = dy;
      Bm(2, 2 * a) = dy;
      Bm(2, 2 * a + 1) = dx;
    }
    Eigen::Matrix<double, 6, 6> Ke = area * Bm.transpose() * D * Bm;
    Ke = 0.5 * (Ke + Ke.transpose()).eval();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double m = rho * area / 12.0 * (a == b ? 2.0 : 1.0);
        for (int r = 0; r < 2; ++r) {
          mt.emplace_back(2 * tri[a] + r, 2 * tri[b] + r, m);
          for (int c = 0; c < 2; ++c) kt.emplace_back(2 * tri[a] + r, 2 * tri[b] + c, Ke(2 * a + r, 2 * b + c));
        }
      }
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int n00 = j * nnx + i, n10 = n00 + 1, n01 = n00 + nnx, n11 = n01 + 1;
      element({n00, n10, n11});
      element({n00, n11, n01});
    }
  out.A.resize(2 * nodes, 2 * nodes);
  out.M.resize(2 * nodes, 2 * nodes);
  out.A.setFromTriplets(kt.begin(), kt.end());
  out.M.setFromTriplets(mt.begin(), mt.end());
  return out;
}

ElasticModel assemble_cantilever(int nx, int ny, double E, double nu_p, double rho, double Lx, double Ly) {
  const RawAssembly raw = assemble_rectangle(nx, ny, E, nu_p, rho, Lx, Ly);
  const int nnx = nx + 1;
  const int nodes = nnx * (ny + 1);
  std::vector<int> map(2 * nodes, -1);
  int free = 0;
  for (int n = 0; n < nodes; ++n) {
    if (n % nnx == 0) continue;
    map[2 * n] = free++;
    map[2 * n + 1] = free++;
  }
  auto restrict = [&](const Sparse& S) {
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < S.outerSize(); ++k)
      for (Sparse::InnerIterator it(S, k); it; ++it)
        if (map[it.row()] >= 0 && map[it.col()] >= 0) t.emplace_back(map[it.row()], map[it.col()], it.value());
    Sparse R(free, free);
    R.setFromTriplets(t.begin(), t.end());
    return R;
  };
  ElasticModel m;
  m.A = restrict(raw.A);
  m.M = restrict(raw.M);
  m.load = Eigen::VectorXd::Zero(free);
  const double seg = Ly / ny;
  for (int j = 0; j <= ny; ++j) {
    const int n = j * nnx + nx;
    const double w = (j == 0 || j == ny) ? 0.5 * seg : seg;
    m.load[map[2 * n]] += w;
    m.load[map[2 * n + 1]] += w;
  }
  const int corner = ny * nnx + nx;
  m.probe_x = map[2 * corner];
  m.probe_y = map[2 * corner + 1];
  return m;
}

Sparse read_coordinate_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file " + path);
  std::vector<Eigen::Triplet<double>> t;
  Eigen::Index rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == '%') continue;
    std::istringstream ls(line);
    long long r, c;
    double v;
    if (!(ls >> r >> c >> v) || r < 1 || c < 1) throw ConfigError("malformed matrix line in " + path + ": " + line);
    t.emplace_back(r - 1, c - 1, v);
    rows = std::max<Eigen::Index>(rows, r);
    cols = std::max<Eigen::Index>(cols, c);
  }
  Sparse S(rows, cols);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

Eigen::VectorXd read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vector file " + path);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (!in.eof()) throw ConfigError("malformed vector file " + path);
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double boundary_force(double t) {
  if (!(t > 2.0 && t < 3.0)) return 0.0;
  const double s = std::pow(2.0 * t - 5.0, 8);
  return 20.0 * std::exp(1.0 / (s - 1.0));
}

Eigen::VectorXd lowest_mode(const ElasticModel& m) {
  const Eigen::MatrixXd A(m.A), M(m.M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
  if (es.info() != Eigen::Success) throw NumericalFailure("visco: eigensolver failed");
  Eigen::VectorXd x = es.eigenvectors().col(0).normalized();
  Eigen::Index i;
  x.cwiseAbs().maxCoeff(&i);
  if (x[i] < 0.0) x = -x;
  return x;
}

double elastic_energy(const ElasticModel& m, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  Eigen::SimplicialLDLT<Sparse> M(m.M);
  return 0.5 * v.dot(M.solve(v)) + 0.5 * u.dot(m.A * u);
}

Trajectory visco_solve(const ViscoProblem& p) {
  const ElasticModel& md = p.model;
  const Eigen::Index n = md.A.rows();
  if (n == 0 || md.M.rows() != n || md.load.size() != n) throw ConfigError("visco: inconsistent model sizes");
  if (!(p.t_end > 0.0) || !(p.eps > 0.0)) throw ConfigError("visco: invalid t_end or eps");
  if ((Sparse(md.A.transpose()) - md.A).norm() != 0.0 || (Sparse(md.M.transpose()) - md.M).norm() != 0.0)
    throw ConfigError("visco: M and A must be symmetric");
  Eigen::SimplicialLDLT<Sparse> Mf(md.M);
  if (Mf.info() != Eigen::Success) throw NumericalFailure("visco: mass factorization failed");
  if (Eigen::SimplicialLLT<Sparse>(md.A).info() != Eigen::Success)
    throw ConfigError("visco: stiffness is not positive definite");
  const LinearApply M_inv = [&Mf](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Mf.solve(x); };
  const LinearApply A_apply = [&md](const Eigen::VectorXd& x) -> Eigen::VectorXd { return md.A * x; };

  Eigen::VectorXd u = p.u0.size() ? p.u0 : lowest_mode(md);
  Eigen::VectorXd v = p.v0.size() ? p.v0 : Eigen::VectorXd::Zero(n);
  if (u.size() != n || v.size() != n) throw ConfigError("visco: initial data has wrong size");

  const bool memory = p.gamma != 0.0;
  std::optional<FastConvolution> engine;
  if (memory) engine.emplace(mittag_leffler_kernel(p.alpha), EngineConfig{p.h_min, p.B, p.t_end, p.contour, true}, n);
  auto load = [&](double t) -> Eigen::VectorXd { return p.amplitude(t) * md.load; };
  Eigen::VectorXd b = load(0.0);
  Eigen::VectorXd g = md.A * u - b;
  Eigen::VectorXd c = b;
  if (memory) engine->start(g);
  IntegratorState ctl = integrator_init(p.eps, M_inv, A_apply, u, v, c, 0.0);

  Trajectory tr;
  tr.columns = {"t", "h", "z", "ux", "uy", "vx", "vy", "ax", "ay", "energy"};
  auto record = [&](double t, double h) {
    const Eigen::VectorXd vel = Mf.solve(v);
    const Eigen::VectorXd acc = Mf.solve(c - md.A * u);
    const double energy = 0.5 * v.dot(vel) + 0.5 * u.dot(md.A * u);
    tr.add({t, h, ctl.z, u[md.probe_x], u[md.probe_y], vel[md.probe_x], vel[md.probe_y], acc[md.probe_x],
            acc[md.probe_y], energy});
  };
  record(0.0, 0.0);
  double t = 0.0;
  std::size_t steps = 0;
  try {
    while (t < p.t_end) {
      double h = integrating_step(ctl, M_inv, A_apply, u, v);
      if (t + h > p.t_end) h = p.t_end - t;
      const double tn = t + h;
      const Eigen::VectorXd v_half = v + 0.5 * h * (c - md.A * u);
      const Eigen::VectorXd u_new = u + h * Mf.solve(v_half);
      const Eigen::VectorXd b_new = load(tn);
      const Eigen::VectorXd g_new = md.A * u_new - b_new;
      Eigen::VectorXd c_new = b_new;
      if (memory) {
        const DiagonalWeights w = engine->diagonal(tn);
        c_new += p.gamma * (engine->history(tn) + w.prev * g + w.next * g_new);
        engine->commit(tn, g_new);
      }
      v = v_half + 0.5 * h * (c_new - md.A * u_new);
      u = u_new;
      g = g_new;
      c = c_new;
      t = tn;
      push_c(ctl, t, c);
      record(t, h);
      if (p.max_steps > 0 && ++steps >= p.max_steps) {
        tr.status = "step_limit";
        break;
      }
    }
  } catch (const NumericalFailure& e) {
    tr.status = "failed";
    tr.message = e.what();
  }
  tr.final_state["u"] = u;
  tr.final_state["v"] = v;
  if (memory) tr.counters = engine->counters();
  return tr;
}

}  // namespace fastconv
