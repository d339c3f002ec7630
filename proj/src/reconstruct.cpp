#include "omspec/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "omspec/errors.hpp"

namespace omspec {

namespace {

std::string plan_description(const SamplePlan& plan) {
  std::ostringstream os;
  os.precision(10);
  os << "[";
  for (int i = 0; i < plan.size(); ++i) {
    if (i > 0) os << ", ";
    os << plan.points[i];
  }
  os << "]";
  return os.str();
}

}  // namespace

void SamplePlan::validate(double omega_m) const {
  if (points.empty()) {
    throw InvalidInputError("SamplePlan: empty");
  }
  const double gap = 1e-9 * omega_m;
  std::vector<double> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] - sorted[i - 1] < gap) {
      throw InvalidInputError("SamplePlan: points not pairwise distinct");
    }
  }
}

SamplePlan sideband_plan(int N, const SystemParams& params) {
  params.validate();
  if (N < 1) {
    throw InvalidInputError("sideband_plan: N must be >= 1");
  }
  SamplePlan plan;
  plan.strategy = PlanStrategy::SidebandPeaks;
  plan.points.reserve(N);
  const int j0 = -(N / 2);
  for (int j = j0; j < j0 + N; ++j) {
    plan.points.push_back(-params.polaron_shift() + j * params.omega_m);
  }
  return plan;
}

SamplePlan general_sideband_plan(int N, const SystemParams& params) {
  if (N < 1) {
    throw InvalidInputError("general_sideband_plan: N must be >= 1");
  }
  const SamplePlan base = sideband_plan(N, params);
  SamplePlan plan;
  plan.strategy = PlanStrategy::SidebandPeaks;
  plan.points.reserve(static_cast<size_t>(N) * N);
  for (int i = 0; i < N; ++i) {
    for (double p : base.points) {
      plan.points.push_back(p + i * params.omega_m / N);
    }
  }
  return plan;
}

SamplePlan random_plan(int N, double low, double high, std::uint64_t seed,
                       const SystemParams& params) {
  params.validate();
  if (N < 1) {
    throw InvalidInputError("random_plan: N must be >= 1");
  }
  if (!(low < high)) {
    throw InvalidInputError("random_plan: degenerate range");
  }
  const double gap = 1e-6 * params.omega_m;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(low, high);
  SamplePlan plan;
  plan.strategy = PlanStrategy::RandomUniform;
  plan.points.reserve(N);
  long attempts = 0;
  while (plan.size() < N) {
    if (++attempts > 1000L * N + 1000) {
      throw InvalidInputError(
          "random_plan: cannot place distinct points in the range");
    }
    const double x = dist(rng);
    bool ok = true;
    for (double p : plan.points) {
      if (std::abs(x - p) < gap) {
        ok = false;
        break;
      }
    }
    if (ok) plan.points.push_back(x);
  }
  return plan;
}

SamplePlan explicit_plan(std::vector<double> points) {
  SamplePlan plan;
  plan.strategy = PlanStrategy::Explicit;
  plan.points = std::move(points);
  plan.validate();
  return plan;
}

DiagonalProblem build_diagonal_problem(const SamplePlan& plan,
                                       const Eigen::VectorXd& spectrum_values,
                                       const SystemParams& params, int n_d,
                                       const Eigen::VectorXd& sigma) {
  plan.validate(params.omega_m);
  const int N = plan.size();
  if (spectrum_values.size() != N) {
    throw InvalidInputError(
        "build_diagonal_problem: plan and observation lengths differ");
  }
  if (sigma.size() != 0 && sigma.size() != N) {
    throw InvalidInputError("build_diagonal_problem: sigma length mismatch");
  }
  if (n_d < N) {
    throw InvalidInputError("build_diagonal_problem: n_d must be >= N");
  }
  SpectraEngine engine(params, n_d);
  DiagonalProblem problem;
  problem.k.resize(N, N);
  for (int j = 0; j < N; ++j) {
    const Eigen::MatrixXcd b = engine.amplitude_matrix(plan.points[j], N);
    problem.k.row(j) = b.rowwise().squaredNorm().transpose();
  }
  problem.q = spectrum_values;
  problem.sigma = sigma;
  problem.truncation = N;
  problem.plan = plan;
  problem.params = params;
  problem.n_d = n_d;
  return problem;
}

namespace {

// Shared SVD solve with condition-number gate and recomputed residual.
template <typename Mat, typename Vec>
Vec gated_solve(const Mat& a, const Vec& b, const Eigen::VectorXd& sigma,
                const SamplePlan& plan, double condition_cap,
                double* condition_number, double* residual) {
  Mat aw = a;
  Vec bw = b;
  if (sigma.size() != 0) {
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      if (!(sigma(j) > 0.0)) {
        throw InvalidInputError("solve: sigma entries must be > 0");
      }
      aw.row(j) /= sigma(j);
      bw(j) /= sigma(j);
    }
  }
  Eigen::JacobiSVD<Mat> svd(aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double cond = (smin > 0.0) ? smax / smin
                                   : std::numeric_limits<double>::infinity();
  *condition_number = cond;
  if (!(cond <= condition_cap)) {
    throw IllPosedError("solve: condition number " + std::to_string(cond) +
                            " exceeds cap for plan " + plan_description(plan),
                        cond);
  }
  Vec x = svd.solve(bw);
  *residual = (a * x - b).norm();
  return x;
}

}  // namespace

DiagonalResult solve_diagonal(const DiagonalProblem& problem,
                              double condition_cap) {
  if (problem.k.rows() != problem.k.cols() ||
      problem.k.rows() != problem.q.size()) {
    throw InvalidInputError("solve_diagonal: malformed problem");
  }
  DiagonalResult result;
  result.solution =
      gated_solve(problem.k, problem.q, problem.sigma, problem.plan,
                  condition_cap, &result.condition_number, &result.residual);
  return result;
}

GeneralProblem build_general_problem(const SamplePlan& plan,
                                     const Eigen::VectorXd& spectrum_values,
                                     const SystemParams& params, int n_d,
                                     const Eigen::VectorXd& sigma) {
  plan.validate(params.omega_m);
  const int total = plan.size();
  const int N = static_cast<int>(std::lround(std::sqrt(double(total))));
  if (N * N != total) {
    throw InvalidInputError(
        "build_general_problem: plan length must be a perfect square");
  }
  if (spectrum_values.size() != total) {
    throw InvalidInputError(
        "build_general_problem: plan and observation lengths differ");
  }
  if (sigma.size() != 0 && sigma.size() != total) {
    throw InvalidInputError("build_general_problem: sigma length mismatch");
  }
  if (n_d < N) {
    throw InvalidInputError("build_general_problem: n_d must be >= N");
  }
  SpectraEngine engine(params, n_d);
  GeneralProblem problem;
  problem.m.resize(total, total);
  for (int j = 0; j < total; ++j) {
    const Eigen::MatrixXcd b = engine.amplitude_matrix(plan.points[j], N);
    const Eigen::MatrixXcd gram = b * b.adjoint();  // gram(m, n) = Lambda_{n,m}
    for (int col = 0; col < total; ++col) {
      const int m = col / N;
      const int n = col - m * N;
      problem.m(j, col) = gram(m, n);
    }
  }
  problem.r = spectrum_values.cast<std::complex<double>>();
  problem.sigma = sigma;
  problem.truncation = N;
  problem.plan = plan;
  problem.params = params;
  problem.n_d = n_d;
  return problem;
}

GeneralResult solve_general(const GeneralProblem& problem,
                            double condition_cap) {
  const int total = problem.truncation * problem.truncation;
  if (problem.m.rows() != total || problem.m.cols() != total ||
      problem.r.size() != total) {
    throw InvalidInputError("solve_general: malformed problem");
  }
  GeneralResult result;
  const Eigen::VectorXcd c =
      gated_solve(problem.m, problem.r, problem.sigma, problem.plan,
                  condition_cap, &result.condition_number, &result.residual);
  const int N = problem.truncation;
  result.solution.resize(N, N);
  for (int m = 0; m < N; ++m) {
    for (int n = 0; n < N; ++n) {
      result.solution(m, n) = c(m * N + n);
    }
  }
  result.hermiticity_deviation =
      (result.solution - result.solution.adjoint()).cwiseAbs().maxCoeff();
  result.trace = result.solution.trace().real();
  return result;
}

DensityMatrix project_to_physical(const DensityMatrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw InvalidInputError("project_to_physical: matrix must be square");
  }
  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  const Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
  const double tr = vals.sum();
  if (!(tr > 0.0)) {
    throw InvalidInputError("project_to_physical: projection annihilated rho");
  }
  return es.eigenvectors() * (vals / tr).asDiagonal() *
         es.eigenvectors().adjoint();
}

ScanResult convergence_scan(
    const std::function<Eigen::VectorXd(const SamplePlan&)>& values_for_plan,
    const SystemParams& params, int n_d, int n_min, int n_max,
    const ScanConfig& config) {
  if (n_min < 1 || n_max < n_min) {
    throw InvalidInputError("convergence_scan: require 1 <= n_min <= n_max");
  }
  ScanResult result;
  PhononDistribution previous;
  for (int N = n_min; N <= n_max; ++N) {
    SamplePlan plan;
    switch (config.strategy) {
      case PlanStrategy::SidebandPeaks:
        plan = sideband_plan(N, params);
        break;
      case PlanStrategy::RandomUniform:
        plan = random_plan(N, config.range_low, config.range_high,
                           config.seed + static_cast<std::uint64_t>(N),
                           params);
        break;
      case PlanStrategy::Explicit:
        throw InvalidInputError(
            "convergence_scan: Explicit strategy has no per-N plans");
    }
    const Eigen::VectorXd values = values_for_plan(plan);
    const DiagonalProblem problem =
        build_diagonal_problem(plan, values, params, n_d);
    const DiagonalResult solved = solve_diagonal(problem);

    ScanEntry entry;
    entry.truncation = N;
    entry.plan = plan;
    entry.solution = solved.solution;
    entry.condition_number = solved.condition_number;
    entry.residual = solved.residual;
    if (previous.size() > 0) {
      PhononDistribution padded = PhononDistribution::Zero(N);
      padded.head(previous.size()) = previous;
      entry.l1_step = (solved.solution - padded).cwiseAbs().sum();
    }
    previous = solved.solution;
    result.history.push_back(std::move(entry));
  }
  // Converged N: both following steps are below tolerance.
  for (size_t i = 0; i + 2 < result.history.size(); ++i) {
    if (result.history[i + 1].l1_step < config.tol &&
        result.history[i + 2].l1_step < config.tol) {
      result.converged = true;
      result.converged_n = result.history[i].truncation;
      break;
    }
  }
  return result;
}

}  // namespace omspec
