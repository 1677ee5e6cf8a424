#include "lndm/hyper_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lndm/error.hpp"
#include "lndm/parallel.hpp"

namespace lndm {

namespace {

double safe_eval(const LogDensity& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : -INFINITY;
}

struct Derivatives {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Gradient and Hessian of f from one batch of central differences.
Derivatives fd_derivatives(const LogDensity& f, const Eigen::VectorXd& x, double h, double fx, int threads) {
  const Eigen::Index d = x.size();
  struct Probe {
    Eigen::Index i, j;
    double si, sj;
  };
  std::vector<Probe> probes;
  for (Eigen::Index i = 0; i < d; ++i) {
    probes.push_back({i, -1, 1.0, 0.0});
    probes.push_back({i, -1, -1.0, 0.0});
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      for (double si : {1.0, -1.0}) {
        for (double sj : {1.0, -1.0}) probes.push_back({i, j, si, sj});
      }
    }
  }
  const auto values = parallel_map(probes.size(), threads, [&](std::size_t k) {
    Eigen::VectorXd y = x;
    y[probes[k].i] += probes[k].si * h;
    if (probes[k].j >= 0) y[probes[k].j] += probes[k].sj * h;
    return safe_eval(f, y);
  });
  Derivatives out;
  out.gradient.resize(d);
  out.hessian.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double fp = values[2 * i];
    const double fm = values[2 * i + 1];
    out.gradient[i] = (fp - fm) / (2.0 * h);
    out.hessian(i, i) = (fp - 2.0 * fx + fm) / (h * h);
  }
  std::size_t k = 2 * static_cast<std::size_t>(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double fpp = values[k], fpm = values[k + 1], fmp = values[k + 2], fmm = values[k + 3];
      k += 4;
      out.hessian(i, j) = out.hessian(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return out;
}

// Symmetric positive definite version of h: eigenvalues floored.
Eigen::MatrixXd floor_eigenvalues(const Eigen::MatrixXd& h, bool& floored) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()));
  Eigen::VectorXd lam = es.eigenvalues();
  const double top = std::max(lam.cwiseAbs().maxCoeff(), 1.0);
  const double floor = 1e-6 * top;
  floored = false;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (!(lam[i] > floor)) {
      lam[i] = std::max(std::abs(lam[i]), floor);
      floored = true;
    }
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

std::string trace_tail(const std::vector<double>& trace) {
  std::ostringstream s;
  const std::size_t from = trace.size() > 5 ? trace.size() - 5 : 0;
  for (std::size_t i = from; i < trace.size(); ++i) s << (i > from ? ", " : "") << trace[i];
  return s.str();
}

}  // namespace

double unit_ball_volume(int d) { return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

ModeResult nelder_mead(const LogDensity& f, const Eigen::VectorXd& x0, double step, int max_iterations,
                       double tolerance) {
  const Eigen::Index d = x0.size();
  ModeResult out;
  if (d == 0) {
    out.theta = x0;
    out.value = safe_eval(f, x0);
    out.converged = true;
    out.evaluations = 1;
    return out;
  }
  // minimize g = -f
  std::vector<Eigen::VectorXd> x(d + 1, x0);
  std::vector<double> g(d + 1);
  for (Eigen::Index i = 0; i < d; ++i) x[i + 1][i] += step;
  for (Eigen::Index i = 0; i <= d; ++i) g[i] = -safe_eval(f, x[i]);
  out.evaluations = static_cast<int>(d + 1);
  std::vector<int> order(d + 1);

  for (int it = 0; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return g[a] < g[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[d - 1];
    out.iterations = it + 1;
    out.trace.push_back(-g[best]);
    double size = 0.0;
    for (Eigen::Index i = 0; i <= d; ++i) size = std::max(size, (x[i] - x[best]).cwiseAbs().maxCoeff());
    if (std::isfinite(g[worst]) && g[worst] - g[best] <= tolerance * (1.0 + std::abs(g[best])) && size < 1e-4) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i <= d; ++i) {
      if (i != worst) centroid += x[i];
    }
    centroid /= static_cast<double>(d);
    const Eigen::VectorXd xr = centroid + (centroid - x[worst]);
    const double gr = -safe_eval(f, xr);
    ++out.evaluations;
    if (gr < g[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - x[worst]);
      const double ge = -safe_eval(f, xe);
      ++out.evaluations;
      if (ge < gr) {
        x[worst] = xe;
        g[worst] = ge;
      } else {
        x[worst] = xr;
        g[worst] = gr;
      }
      continue;
    }
    if (gr < g[second]) {
      x[worst] = xr;
      g[worst] = gr;
      continue;
    }
    const bool outside = gr < g[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (x[worst] - centroid));
    const double gc = -safe_eval(f, xc);
    ++out.evaluations;
    if (gc < (outside ? gr : g[worst])) {
      x[worst] = xc;
      g[worst] = gc;
      continue;
    }
    for (Eigen::Index i = 0; i <= d; ++i) {
      if (i == best) continue;
      x[i] = x[best] + 0.5 * (x[i] - x[best]);
      g[i] = -safe_eval(f, x[i]);
      ++out.evaluations;
    }
  }
  const auto best = std::min_element(g.begin(), g.end()) - g.begin();
  out.theta = x[best];
  out.value = -g[best];
  return out;
}

Eigen::VectorXd fd_gradient(const LogDensity& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const LogDensity& f, const Eigen::VectorXd& x, double h, double fx) {
  return fd_derivatives(f, x, h, fx, 1).hessian;
}

HyperGrid explore_hyperparameters(const LogDensity& log_post, const Eigen::VectorXd& start, const GridConfig& cfg) {
  if (!(cfg.step > 0.0) || cfg.steps < 0 || !(cfg.prune > 0.0) || cfg.max_iterations < 1) {
    throw InputError("grid settings: step and prune must be positive, steps >= 0, max_iterations >= 1");
  }
  const Eigen::Index d = start.size();
  HyperGrid grid;
  int evaluations = 0;
  const LogDensity f = [&](const Eigen::VectorXd& x) { return safe_eval(log_post, x); };

  if (d == 0) {
    grid.mode = start;
    grid.mode_log_post = f(start);
    if (!std::isfinite(grid.mode_log_post)) throw ConditioningError("log posterior is not finite at the fixed hyperparameters");
    grid.points = {start};
    grid.z = {Eigen::VectorXd()};
    grid.log_post = Eigen::VectorXd::Constant(1, grid.mode_log_post);
    grid.delta = Eigen::VectorXd::Ones(1);
    grid.weights = Eigen::VectorXd::Ones(1);
    grid.evaluations = 1;
    return grid;
  }

  // mode: simplex search with restarts, then Newton polish
  if (!std::isfinite(f(start))) {
    throw OptimizationError("log posterior is not finite at the starting hyperparameters");
  }
  ModeResult best = nelder_mead(f, start, cfg.initial_step, cfg.max_iterations, cfg.tolerance);
  evaluations += best.evaluations;
  std::vector<double> trace = best.trace;
  for (int r = 0; r < cfg.restarts; ++r) {
    ModeResult again = nelder_mead(f, best.theta, 0.5 * cfg.initial_step, cfg.max_iterations, cfg.tolerance);
    evaluations += again.evaluations;
    trace.insert(trace.end(), again.trace.begin(), again.trace.end());
    const double gain = again.value - best.value;
    const bool converged = again.converged;
    if (again.value >= best.value) best = std::move(again);
    best.converged = converged;
    if (gain < cfg.tolerance * (1.0 + std::abs(best.value))) break;
  }

  Eigen::VectorXd theta = best.theta;
  double value = best.value;
  Derivatives der = fd_derivatives(f, theta, cfg.fd_step, value, cfg.threads);
  evaluations += static_cast<int>(2 * d * d);
  double decrement = INFINITY;
  for (int it = 0; it < cfg.newton_iterations; ++it) {
    bool floored = false;
    const Eigen::MatrixXd h = floor_eigenvalues(-der.hessian, floored);
    const Eigen::VectorXd dir = h.ldlt().solve(der.gradient);
    decrement = der.gradient.dot(dir);
    if (!(decrement > 1e-10)) break;
    double t = 1.0;
    bool moved = false;
    while (t > 1e-4) {
      const Eigen::VectorXd trial = theta + t * dir;
      const double v = f(trial);
      ++evaluations;
      if (v > value) {
        theta = trial;
        value = v;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
    der = fd_derivatives(f, theta, cfg.fd_step, value, cfg.threads);
    evaluations += static_cast<int>(2 * d * d);
  }
  {
    bool floored = false;
    grid.mode_hessian = floor_eigenvalues(-der.hessian, floored);
    if (floored) {
      grid.warnings.push_back("Hessian at the mode is not positive definite; eigenvalues were floored");
    }
    decrement = der.gradient.dot(grid.mode_hessian.ldlt().solve(der.gradient));
  }
  grid.mode_converged = best.converged || decrement < 1e-4;
  if (!grid.mode_converged) {
    std::ostringstream msg;
    msg << "hyperparameter mode search did not converge after " << cfg.max_iterations
        << " iterations (Newton decrement " << decrement << "); last log posterior values: " << trace_tail(trace);
    throw OptimizationError(msg.str());
  }
  if (!best.converged) {
    grid.warnings.push_back("simplex search hit the iteration limit; mode located by Newton refinement");
  }
  grid.mode = theta;
  grid.mode_log_post = value;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(grid.mode_hessian);
  grid.axes = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();

  // split-normal scale per half-axis from a probe two standard deviations out
  const Eigen::VectorXd scales = [&] {
    const auto s = parallel_map(static_cast<std::size_t>(2 * d), cfg.threads, [&](std::size_t idx) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
      z[static_cast<Eigen::Index>(idx / 2)] = idx % 2 == 0 ? 2.0 : -2.0;
      const double drop = value - f(grid.mode + grid.axes * z);
      if (!std::isfinite(drop)) return 2.0 / std::sqrt(2.0 * cfg.prune);
      if (drop < 1e-12) return 5.0;
      return std::clamp(2.0 / std::sqrt(2.0 * drop), 0.2, 5.0);
    });
    return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())).eval();
  }();
  evaluations += static_cast<int>(2 * d);
  grid.scale_plus.resize(d);
  grid.scale_minus.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    grid.scale_plus[i] = scales[2 * i];
    grid.scale_minus[i] = scales[2 * i + 1];
  }
  // average stretch of a cell that straddles both halves of every axis
  const double stretch = ((grid.scale_plus + grid.scale_minus) / 2.0).prod();

  struct Probe {
    Eigen::VectorXd z, theta;
    double lp;
    int k;
  };
  const auto directions = parallel_map(static_cast<std::size_t>(2 * d), cfg.threads, [&](std::size_t idx) {
    const Eigen::Index axis = static_cast<Eigen::Index>(idx / 2);
    const double sign = idx % 2 == 0 ? 1.0 : -1.0;
    std::vector<Probe> probes;
    for (int k = 1; k <= cfg.steps; ++k) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
      z[axis] = sign * k * cfg.step * scales[static_cast<Eigen::Index>(idx)];
      const Eigen::VectorXd th = grid.mode + grid.axes * z;
      const double lp = f(th);
      probes.push_back({z, th, lp, k});
      if (!(value - lp <= cfg.prune)) break;
    }
    return probes;
  });

  const double vd = unit_ball_volume(static_cast<int>(d));
  const double dd = static_cast<double>(d);
  std::vector<double> lps{value}, deltas{vd * std::pow(0.5 * cfg.step, dd) * stretch};
  grid.points.push_back(grid.mode);
  grid.z.push_back(Eigen::VectorXd::Zero(d));
  for (std::size_t idx = 0; idx < directions.size(); ++idx) {
    const auto& probes = directions[idx];
    evaluations += static_cast<int>(probes.size());
    const Eigen::Index axis = static_cast<Eigen::Index>(idx / 2);
    const double own = scales[static_cast<Eigen::Index>(idx)];
    const double jac = stretch * own / (0.5 * (grid.scale_plus[axis] + grid.scale_minus[axis]));
    for (const auto& p : probes) {
      if (!(value - p.lp <= cfg.prune)) break;
      const double k = p.k;
      lps.push_back(p.lp);
      deltas.push_back(jac * vd / (2.0 * dd) *
                       (std::pow((k + 0.5) * cfg.step, dd) - std::pow((k - 0.5) * cfg.step, dd)));
      grid.points.push_back(p.theta);
      grid.z.push_back(p.z);
    }
  }
  grid.log_post = Eigen::Map<Eigen::VectorXd>(lps.data(), static_cast<Eigen::Index>(lps.size()));
  grid.delta = Eigen::Map<Eigen::VectorXd>(deltas.data(), static_cast<Eigen::Index>(deltas.size()));
  const double top = grid.log_post.maxCoeff();
  if (top > value + 0.1) {
    std::ostringstream msg;
    msg << "a grid point exceeds the located mode by " << top - value << " in log posterior";
    grid.warnings.push_back(msg.str());
  }
  grid.weights = ((grid.log_post.array() - top).exp() * grid.delta.array()).matrix();
  grid.weights /= grid.weights.sum();
  grid.evaluations = evaluations;
  return grid;
}

}  // namespace lndm
