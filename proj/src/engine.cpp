#include "fastconv/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "fastconv/error.hpp"

namespace fastconv {

std::string Counters::to_json() const {
  nlohmann::json j{{"F_evaluations", F_evaluations},
                   {"ode_advances", ode_advances},
                   {"direct_steps", direct_steps},
                   {"stored_vectors_peak", stored_vectors_peak},
                   {"g_reads", g_reads},
                   {"g_reads_step_max", g_reads_step_max},
                   {"split_direct_steps", split_direct_steps}};
  return j.dump(2);
}

long long ceil_units(double t, double h_min) {
  auto c = static_cast<long long>(std::ceil(t / h_min));
  while (c > 0 && static_cast<double>(c - 1) * h_min >= t) --c;
  while (static_cast<double>(c) * h_min < t) ++c;
  return c;
}

Decomposition decompose(double t, double h_min, int B) {
  Decomposition d;
  long long s = ceil_units(t, h_min) - 2;
  while (s > 0) {
    const int b = static_cast<int>((s - 1) % B) + 1;
    d.digits.push_back(b);
    s = (s - b) / B;
  }
  d.L = static_cast<int>(d.digits.size());
  return d;
}

cplx phi1(cplx z) {
  if (std::abs(z) < 0.5) {
    cplx sum = 0.0, term = 1.0;
    for (int j = 1; j <= 20; ++j) {
      sum += term;
      term *= z / static_cast<double>(j + 1);
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

cplx phi2(cplx z) {
  if (std::abs(z) < 0.5) {
    cplx sum = 0.0, term = 0.5;
    for (int j = 1; j <= 20; ++j) {
      sum += term;
      term *= z / static_cast<double>(j + 2);
    }
    return sum;
  }
  return (std::exp(z) - 1.0 - z) / (z * z);
}

cplx exp_euler_step(cplx lambda, double dt, cplx y0, cplx g0, cplx g1) {
  const cplx z = lambda * dt;
  return std::exp(z) * y0 + dt * phi1(z) * g0 + dt * phi2(z) * (g1 - g0);
}

void ode_advance(PatchState& patch, const Eigen::VectorXcd& lambdas, double t, const VectorXd& g) {
  const double dt = t - patch.tcur;
  if (!(dt > 0.0)) throw OrderingError("ode_advance: time must increase");
  const Eigen::Index n = lambdas.size();
  Eigen::VectorXcd e(n), p1(n), p2(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx z = lambdas[k] * dt;
    e[k] = std::exp(z);
    p1[k] = dt * phi1(z);
    p2[k] = dt * phi2(z);
  }
  const Eigen::RowVectorXcd g0 = patch.gcur.transpose().cast<cplx>();
  const Eigen::RowVectorXcd dg = (g - patch.gcur).transpose().cast<cplx>();
  patch.data = e.asDiagonal() * patch.data;
  patch.data += p1 * g0 + p2 * dg;
  patch.tcur = t;
  patch.gcur = g;
}

FastConvolution::FastConvolution(SectorialTransform kernel, EngineConfig cfg, Eigen::Index dim)
    : kernel_(std::move(kernel)), cfg_(cfg), dim_(dim) {
  if (dim_ < 1) throw ConfigError("engine: dimension must be >= 1");
  if (cfg_.B < 2) throw ConfigError("engine: B must be >= 2");
  if (!(cfg_.h_min > 0.0)) throw ConfigError("engine: h_min must be positive");
  if (!(cfg_.horizon > 0.0)) throw ConfigError("engine: horizon must be positive");
  const int L = std::max(1, decompose(cfg_.horizon, cfg_.h_min, cfg_.B).L);
  powB_.push_back(1);
  for (int e = 1; e <= L + 1; ++e) {
    if (powB_.back() > std::numeric_limits<long long>::max() / (4LL * cfg_.B))
      throw ConfigError("engine: horizon/h_min too large for B");
    powB_.push_back(powB_.back() * cfg_.B);
  }
  const int K = cfg_.contour.K;
  for (int l = 1; l <= L; ++l) {
    contours_.emplace_back(plan_level(l, cfg_.h_min, cfg_.B, cfg_.contour, kernel_.sigma), cfg_.contour, kernel_);
    counters_.F_evaluations += contours_.back().evaluations();
    const Contour& c = contours_.back();
    const int first = cfg_.fold ? K : 0;
    const int n = 2 * K + 1 - first;
    Eigen::VectorXcd lam(n), coef(n);
    for (int j = 0; j < n; ++j) {
      const int idx = first + j;
      lam[j] = c.nodes()[idx];
      coef[j] = c.weights()[idx] * c.values(Transform::F)[idx];
      if (cfg_.fold && idx > K) coef[j] *= 2.0;
    }
    bank_nodes_.push_back(std::move(lam));
    bank_coeffs_.push_back(std::move(coef));
  }
  levels_.resize(L);
}

double FastConvolution::lb(int level) const { return at_units(level_lb_units(level, cfg_.B)); }
double FastConvolution::ub(int level) const { return at_units(level_ub_units(level, cfg_.B)); }

std::uint64_t FastConvolution::stored_vectors() const {
  std::uint64_t n = 0;
  for (const auto& lv : levels_) {
    n += static_cast<std::uint64_t>(lv.running.data.rows());
    for (const auto& c : lv.copies) n += static_cast<std::uint64_t>(c.data.rows());
  }
  return n;
}

void FastConvolution::start(const VectorXd& g0) {
  if (g0.size() != dim_) throw ConfigError("engine: g has wrong dimension");
  tail_.clear();
  tail_.push_back({0.0, g0});
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    Level& lv = levels_[i];
    lv.copies.clear();
    lv.running = PatchState{};
    lv.running.data = MatrixXcd::Zero(bank_nodes_[i].size(), dim_);
    lv.running.gini = g0;
    lv.running.gcur = g0;
  }
  started_ = true;
  counters_.stored_vectors_peak = std::max(counters_.stored_vectors_peak, stored_vectors());
}

void FastConvolution::check_time(double t) const {
  if (!started_) throw ConfigError("engine: start() must be called first");
  if (!(t > last_time())) throw OrderingError("engine: time points must increase");
  if (decompose(t, cfg_.h_min, cfg_.B).L > levels())
    throw StepScaleError("engine: time beyond the configured horizon");
}

int FastConvolution::covering_level(double d) const {
  for (int l = 1; l <= levels(); ++l)
    if (d >= lb(l) * (1.0 - 1e-9) && d <= ub(l) * (1.0 + 1e-9)) return l;
  throw StepScaleError("engine: no approximation interval covers distance " + std::to_string(d));
}

std::vector<FastConvolution::Selected> FastConvolution::select(const Decomposition& dec) const {
  std::vector<Selected> used;
  long long tmin_u = 0;
  for (int l = dec.L; l >= 1; --l) {
    const long long w = pow_B(l - 1);
    const long long lo = tmin_u;
    const long long hi = lo + dec.digits[l - 1] * w;
    tmin_u = hi;
    const double tmax = at_units(hi);
    const Level& lv = levels_[l - 1];
    const PatchState* best = nullptr;
    auto consider = [&](const PatchState& p) {
      if (p.tcur > tmax) return;
      const bool match = p.block * pow_B(l) == lo;
      if (!best || p.tcur > best->tcur || (p.tcur == best->tcur && match)) best = &p;
    };
    for (const auto& c : lv.copies) consider(c);
    consider(lv.running);
    if (best && best->block * pow_B(l) == lo) used.push_back({l, best});
  }
  return used;
}

std::vector<Segment> FastConvolution::plan(double t) const {
  check_time(t);
  std::vector<Segment> segs;
  const Decomposition dec = decompose(t, cfg_.h_min, cfg_.B);
  double pos = 0.0;
  if (dec.L > 0) {
    const auto used = select(dec);
    if (used.empty()) throw Error("engine: no patch available");
    for (const auto& [l, p] : used) {
      if (p->tini < pos) throw Error("engine: overlapping patches");
      if (p->tini > pos) segs.push_back({Segment::Kind::Direct, pos, p->tini, 0});
      if (p->tcur > p->tini) {
        if (t - p->tcur < lb(l) * (1.0 - 1e-12) || t - p->tini > ub(l) * (1.0 + 1e-12))
          throw Error("engine: patch outside its approximation interval");
        segs.push_back({Segment::Kind::Ode, p->tini, p->tcur, l});
      }
      pos = p->tcur;
    }
  }
  std::size_t i = 0;
  while (i < tail_.size() && tail_[i].t < pos) ++i;
  if (i == tail_.size() || tail_[i].t != pos) throw Error("engine: grid history not retained");
  for (; i + 1 < tail_.size(); ++i) segs.push_back({Segment::Kind::Direct, tail_[i].t, tail_[i + 1].t, 0});
  segs.push_back({Segment::Kind::Diagonal, last_time(), t, 0});
  return segs;
}

FastConvolution::DirectWeights FastConvolution::direct_weights(double t, double a, double b) const {
  const double h = b - a;
  // Each piece [lo, hi] of distances is handled on one contour so that the
  // quadrature errors of f1 and f2 at its two ends cancel.
  auto piece = [&](int l, double lo, double hi, DirectWeights& w) {
    const F12 fh = contours_[l - 1].eval_f12(hi);
    const F12 fl = contours_[l - 1].eval_f12(lo);
    const double th = (t - hi - a) / h, tl = (t - lo - a) / h;
    const double ds = (fh.f2 - fl.f2) / h;
    w.ga += fh.f1 * (1.0 - th) - fl.f1 * (1.0 - tl) - ds;
    w.gb += fh.f1 * th - fl.f1 * tl + ds;
  };
  DirectWeights w{0.0, 0.0};
  const double da = t - a, db = t - b;
  if (db == 0.0) {
    piece(covering_level(da), 0.0, da, w);
    return w;
  }
  for (int l = 1; l <= levels(); ++l) {
    if (db >= lb(l) * (1.0 - 1e-9) && da <= ub(l) * (1.0 + 1e-9)) {
      piece(l, db, da, w);
      return w;
    }
  }
  double lo = db;
  while (lo < da) {
    int best = 0;
    for (int l = 1; l <= levels(); ++l)
      if (lo >= lb(l) * (1.0 - 1e-9) && lo < ub(l)) best = l;
    if (best == 0) throw StepScaleError("engine: no approximation interval covers distance " + std::to_string(lo));
    const double hi = std::min(da, ub(best));
    piece(best, lo, hi == da ? da : hi, w);
    ++counters_.split_direct_steps;
    lo = hi;
  }
  return w;
}

VectorXd FastConvolution::direct_step(double t, double a, double b, const VectorXd& ga,
                                      const VectorXd& gb) const {
  const DirectWeights w = direct_weights(t, a, b);
  ++counters_.direct_steps;
  return w.ga * ga + w.gb * gb;
}

VectorXd FastConvolution::ode_contribution(int l, const PatchState& p, double t) const {
  const auto& lam = bank_nodes_[l - 1];
  const auto& coef = bank_coeffs_[l - 1];
  Eigen::VectorXcd e(lam.size());
  const double dt = t - p.tcur;
  for (Eigen::Index k = 0; k < lam.size(); ++k) e[k] = coef[k] * std::exp(dt * lam[k]);
  return (p.data.transpose() * e).real();
}

VectorXd FastConvolution::history(double t) const {
  check_time(t);
  VectorXd u = VectorXd::Zero(dim_);
  const Decomposition dec = decompose(t, cfg_.h_min, cfg_.B);
  std::vector<double> reads;
  auto read = [&reads](double s) {
    if (std::find(reads.begin(), reads.end(), s) == reads.end()) reads.push_back(s);
  };
  double pos = 0.0;
  const VectorXd* gpos = &tail_.front().g;
  if (dec.L > 0) {
    const auto used = select(dec);
    if (used.empty()) throw Error("engine: no patch available");
    bool first = true;
    for (const auto& [l, p] : used) {
      if (p->tini < pos) throw Error("engine: overlapping patches");
      if (first && p->tini != 0.0) throw Error("engine: lowest patch does not start at 0");
      if (p->tini > pos) {
        read(pos);
        read(p->tini);
        u += direct_step(t, pos, p->tini, *gpos, p->gini);
      }
      if (p->tcur > p->tini) {
        if (t - p->tcur < lb(l) * (1.0 - 1e-12) || t - p->tini > ub(l) * (1.0 + 1e-12))
          throw Error("engine: patch outside its approximation interval");
        u += ode_contribution(l, *p, t);
      }
      pos = p->tcur;
      gpos = &p->gcur;
      first = false;
    }
  }
  std::size_t i = 0;
  while (i < tail_.size() && tail_[i].t < pos) ++i;
  if (i == tail_.size() || tail_[i].t != pos) throw Error("engine: grid history not retained");
  for (; i + 1 < tail_.size(); ++i) {
    read(tail_[i].t);
    read(tail_[i + 1].t);
    u += direct_step(t, tail_[i].t, tail_[i + 1].t, tail_[i].g, tail_[i + 1].g);
  }
  read(last_time());
  counters_.g_reads += reads.size();
  counters_.g_reads_step_max = std::max<std::uint64_t>(counters_.g_reads_step_max, reads.size());
  return u;
}

DiagonalWeights FastConvolution::diagonal(double t) const {
  check_time(t);
  const double h = t - last_time();
  if (h < cfg_.h_min * (1.0 - 1e-12)) throw StepScaleError("engine: step below h_min");
  const F12 f = contours_[covering_level(h) - 1].eval_f12(h);
  ++counters_.direct_steps;
  return {f.f1 - f.f2 / h, f.f2 / h, f.f1, f.f2};
}

void FastConvolution::snapshot(Level& lv) {
  if (!lv.copies.empty() && lv.copies.back().tcur == lv.running.tcur && lv.copies.back().tini == lv.running.tini)
    return;
  lv.copies.push_back(lv.running);
}

void FastConvolution::commit_level(int l, double t, const VectorXd& g) {
  Level& lv = levels_[l - 1];
  PatchState& y = lv.running;
  const long long span = pow_B(l), w = pow_B(l - 1);
  const long long start = y.block * span;
  const double block_end = at_units(start + span);
  if (t > at_units(start + y.b * w)) snapshot(lv);
  if (t <= block_end) {
    ode_advance(y, bank_nodes_[l - 1], t, g);
    ++counters_.ode_advances;
    const long long j = std::llround((t / cfg_.h_min - static_cast<double>(start)) / static_cast<double>(w));
    if (j >= 1 && j <= cfg_.B && at_units(start + j * w) == t) snapshot(lv);
  }
  if (t >= block_end) {
    const long long old = y.block;
    y.data.setZero();
    y.tini = y.tcur = t;
    y.gini = y.gcur = g;
    long long blk = std::max(y.block, static_cast<long long>(std::floor(t / (cfg_.h_min * static_cast<double>(span)))));
    while (blk > y.block && at_units(blk * span) > t) --blk;
    while (t >= at_units((blk + 1) * span)) ++blk;
    y.block = blk;
    if (t == at_units(y.block * span) && y.block - 1 != old) {
      PatchState point;
      point.tini = point.tcur = t;
      point.block = y.block - 1;
      point.b = cfg_.B;
      point.gini = point.gcur = g;
      lv.copies.push_back(std::move(point));
    }
  }
  int b = 1;
  while (t > at_units(y.block * span + b * w)) ++b;
  y.b = b;
}

void FastConvolution::commit(double t, const VectorXd& g) {
  check_time(t);
  if (g.size() != dim_) throw ConfigError("engine: g has wrong dimension");
  if (t - last_time() < cfg_.h_min * (1.0 - 1e-12)) throw StepScaleError("engine: step below h_min");
  const Decomposition dec = decompose(t, cfg_.h_min, cfg_.B);
  // Drop copies superseded by a later record that still fits below the patch topline.
  long long tmin_u = 0;
  for (int l = dec.L; l >= 1; --l) {
    tmin_u += dec.digits[l - 1] * pow_B(l - 1);
    const double tmax = at_units(tmin_u);
    Level& lv = levels_[l - 1];
    double best = -1.0;
    for (const auto& c : lv.copies)
      if (c.tcur <= tmax) best = std::max(best, c.tcur);
    if (lv.running.tcur <= tmax) best = std::max(best, lv.running.tcur);
    if (best < 0.0) continue;
    std::erase_if(lv.copies, [best](const PatchState& c) { return c.tcur < best; });
  }
  for (int l = 1; l <= levels(); ++l) commit_level(l, t, g);
  tail_.push_back({t, g});
  while (tail_.size() > 3) tail_.pop_front();
  counters_.stored_vectors_peak = std::max(counters_.stored_vectors_peak, stored_vectors());
}

VectorXd FastConvolution::evaluate(double t, const VectorXd& g) {
  VectorXd u = history(t);
  const DiagonalWeights d = diagonal(t);
  u += d.prev * tail_.back().g + d.next * g;
  commit(t, g);
  return u;
}

}  // namespace fastconv
