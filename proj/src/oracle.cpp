#include "omspec/oracle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "omspec/errors.hpp"

namespace omspec {

namespace {

using cd = std::complex<double>;

// Bessel J_k(z) for k = 0..kmax via Miller's downward recurrence with
// Neumann-series normalization. z is moderate here (propagation chunks are
// sized so z ~ 300); long double keeps the recurrence comfortably in range.
std::vector<double> bessel_j_sequence(int kmax, double z) {
  std::vector<double> out(kmax + 1, 0.0);
  if (z == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int start =
      std::max(kmax + 20 + static_cast<int>(std::ceil(std::sqrt(40.0 * (kmax + 1)))),
               static_cast<int>(z) + 40);
  std::vector<long double> f(start + 2, 0.0L);
  f[start + 1] = 0.0L;
  f[start] = 1e-30L;
  for (int k = start; k >= 1; --k) {
    f[k - 1] = (2.0L * k / z) * f[k] - f[k + 1];
    if (std::fabs(f[k - 1]) > 1e3800L) {
      for (int i = k - 1; i <= start + 1; ++i) f[i] *= 1e-3800L;
    }
  }
  long double norm = f[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0L * f[k];
  for (int k = 0; k <= kmax; ++k) {
    out[k] = static_cast<double>(f[k] / norm);
  }
  return out;
}

}  // namespace

std::vector<double> ContinuumDiscretization::grid() const {
  std::vector<double> g(modes);
  for (int j = 0; j < modes; ++j) g[j] = mode_detuning(j);
  return g;
}

void ContinuumDiscretization::validate(const SystemParams& params,
                                       int n_sideband) const {
  if (!(window > 0.0) || modes < 2) {
    throw InvalidInputError(
        "ContinuumDiscretization: window must be > 0 and modes >= 2");
  }
  const double needed = params.polaron_shift() + n_sideband * params.omega_m +
                        10.0 * params.gamma_c;
  if (window < needed) {
    throw InvalidInputError(
        "ContinuumDiscretization: window too narrow for the sideband comb");
  }
  if (dk() > params.gamma_c / 10.0) {
    throw InvalidInputError(
        "ContinuumDiscretization: dk must be <= gamma_c / 10");
  }
}

Eigen::SparseMatrix<double> build_hamiltonian(const SystemParams& params,
                                              const ContinuumDiscretization& disc,
                                              int n_d, long dimension_cap) {
  params.validate();
  disc.validate(params);
  if (n_d < 1) {
    throw InvalidInputError("build_hamiltonian: n_d must be >= 1");
  }
  const long dim = static_cast<long>(n_d) * (disc.modes + 1);
  if (dim > dimension_cap) {
    throw OracleResourceError("build_hamiltonian: dimension " +
                              std::to_string(dim) + " exceeds cap " +
                              std::to_string(dimension_cap));
  }
  const double g = std::sqrt(params.gamma_c * disc.dk() /
                             (2.0 * std::numbers::pi));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(3 * n_d) +
               3 * static_cast<size_t>(n_d) * disc.modes);
  auto outside_index = [&](int l, int j) {
    return n_d + static_cast<long>(l) * disc.modes + j;
  };
  for (int l = 0; l < n_d; ++l) {
    trip.emplace_back(l, l, l * params.omega_m);
    if (l + 1 < n_d) {
      const double v = -params.g0 * std::sqrt(l + 1.0);
      trip.emplace_back(l, l + 1, v);
      trip.emplace_back(l + 1, l, v);
    }
    for (int j = 0; j < disc.modes; ++j) {
      const long o = outside_index(l, j);
      trip.emplace_back(o, o, l * params.omega_m + disc.mode_detuning(j));
      trip.emplace_back(l, o, g);
      trip.emplace_back(o, l, g);
    }
  }
  Eigen::SparseMatrix<double> h(dim, dim);
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

OracleEngine::OracleEngine(const SystemParams& params,
                           const OracleConfig& config)
    : params_(params), config_(config) {
  params_.validate();
  config_.disc.validate(params_);
  if (config_.n_d < 1) {
    throw InvalidInputError("OracleEngine: n_d must be >= 1");
  }
  if (!(config_.tol > 0.0)) {
    throw InvalidInputError("OracleEngine: tol must be > 0");
  }
  const long dim =
      static_cast<long>(config_.n_d) * (config_.disc.modes + 1);
  if (dim > config_.dimension_cap) {
    throw OracleResourceError("OracleEngine: dimension " +
                              std::to_string(dim) + " exceeds cap " +
                              std::to_string(config_.dimension_cap));
  }
  grid_ = config_.disc.grid();
  const int n_d = config_.n_d;
  const int modes = config_.disc.modes;

  cavity_block_ = Eigen::MatrixXd::Zero(n_d, n_d);
  for (int l = 0; l < n_d; ++l) {
    cavity_block_(l, l) = l * params_.omega_m;
    if (l + 1 < n_d) {
      cavity_block_(l, l + 1) = -params_.g0 * std::sqrt(l + 1.0);
      cavity_block_(l + 1, l) = cavity_block_(l, l + 1);
    }
  }
  outside_diag_.resize(n_d, modes);
  for (int j = 0; j < modes; ++j) {
    for (int l = 0; l < n_d; ++l) {
      outside_diag_(l, j) = l * params_.omega_m + grid_[j];
    }
  }
  coupling_ = std::sqrt(params_.gamma_c * config_.disc.dk() /
                        (2.0 * std::numbers::pi));

  // Chebyshev spectral bounds: cavity-block eigenvalues, the outside band,
  // and a 2*||V|| cushion for the cavity-continuum coupling.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cavity_block_);
  const double cushion = 2.0 * coupling_ * std::sqrt(double(modes));
  const double lam_min =
      std::min(-config_.disc.window, es.eigenvalues()(0)) - cushion;
  const double lam_max =
      std::max(config_.disc.window + (n_d - 1) * params_.omega_m,
               es.eigenvalues()(n_d - 1)) +
      cushion;
  spec_center_ = 0.5 * (lam_max + lam_min);
  spec_radius_ = 0.5 * (lam_max - lam_min) * 1.005;
}

double OracleEngine::t_final() const {
  return config_.t_final_over_gamma / params_.gamma_c;
}

WavefunctionState OracleEngine::apply_hamiltonian(
    const WavefunctionState& psi) const {
  const int n_d = config_.n_d;
  const int modes = config_.disc.modes;
  if (psi.cavity.size() != n_d || psi.outside.rows() != n_d ||
      psi.outside.cols() != modes) {
    throw InvalidInputError("apply_hamiltonian: state shape mismatch");
  }
  WavefunctionState y;
  y.cavity.resize(n_d);
  y.outside.resize(n_d, modes);
  y.cavity.noalias() =
      cavity_block_.cast<cd>() * psi.cavity;
  Eigen::VectorXcd rowsum = Eigen::VectorXcd::Zero(n_d);
  const double* d = outside_diag_.data();
  const cd* b = psi.outside.data();
  cd* yo = y.outside.data();
  for (int j = 0; j < modes; ++j) {
    const long base = static_cast<long>(j) * n_d;
    for (int l = 0; l < n_d; ++l) {
      yo[base + l] = d[base + l] * b[base + l] + coupling_ * psi.cavity(l);
      rowsum(l) += b[base + l];
    }
  }
  y.cavity += coupling_ * rowsum;
  return y;
}

namespace {

// y = (H x - c x) / r, fused: diag_n holds (outside_diag - c)/r, cav_n the
// normalized cavity block, g_n = coupling/r.
void apply_normalized(const Eigen::MatrixXcd& cav_n,
                      const Eigen::MatrixXd& diag_n, double g_n,
                      const WavefunctionState& x, WavefunctionState& y) {
  const int n_d = static_cast<int>(x.cavity.size());
  const int modes = static_cast<int>(x.outside.cols());
  y.cavity.noalias() = cav_n * x.cavity;
  const double* d = diag_n.data();
  const cd* b = x.outside.data();
  cd* yo = y.outside.data();
  Eigen::VectorXcd rowsum = Eigen::VectorXcd::Zero(n_d);
  for (int j = 0; j < modes; ++j) {
    const long base = static_cast<long>(j) * n_d;
    for (int l = 0; l < n_d; ++l) {
      const cd bv = b[base + l];
      yo[base + l] = d[base + l] * bv + g_n * x.cavity(l);
      rowsum(l) += bv;
    }
  }
  y.cavity += g_n * rowsum;
}

}  // namespace

WavefunctionState OracleEngine::initial_state(
    const InitialCondition& init) const {
  const int n_d = config_.n_d;
  const int modes = config_.disc.modes;
  if (init.mechanical_fock < 0 || init.mechanical_fock >= n_d) {
    throw InvalidInputError("initial_state: mechanical_fock outside [0, n_d)");
  }
  WavefunctionState psi;
  psi.cavity = Eigen::VectorXcd::Zero(n_d);
  psi.outside = Eigen::MatrixXcd::Zero(n_d, modes);
  if (init.variant == PhotonVariant::Emission) {
    psi.cavity(init.mechanical_fock) = 1.0;
    return psi;
  }
  init.packet.validate();
  const double dk = config_.disc.dk();
  if (init.packet.width < 5.0 * dk) {
    throw InvalidInputError(
        "initial_state: packet width must be at least 5 mode spacings");
  }
  if (std::abs(init.packet.center) + 5.0 * init.packet.width >
      config_.disc.window) {
    throw InvalidInputError(
        "initial_state: packet support outside the discretization window");
  }
  const double amp = std::sqrt(init.packet.width / std::numbers::pi) *
                     std::sqrt(dk);
  for (int j = 0; j < modes; ++j) {
    psi.outside(init.mechanical_fock, j) =
        amp / cd(grid_[j] - init.packet.center, init.packet.width);
  }
  psi.outside /= std::sqrt(psi.norm_squared());
  return psi;
}

WavefunctionState OracleEngine::evolve(const InitialCondition& init,
                                       EvolutionDiagnostics* diag) const {
  const double t = t_final();
  const double dk = config_.disc.dk();
  const double revival = 2.0 * std::numbers::pi / dk;
  if (t >= revival) {
    throw OracleResourceError(
        "evolve: t_final exceeds the discretization revival time; increase "
        "modes");
  }

  WavefunctionState psi = initial_state(init);
  const int n_d = config_.n_d;
  const int modes = config_.disc.modes;
  const double c = spec_center_;
  const double r = spec_radius_;

  const Eigen::MatrixXcd cav_n =
      ((cavity_block_ - c * Eigen::MatrixXd::Identity(n_d, n_d)) / r)
          .cast<cd>();
  const Eigen::MatrixXd diag_n = (outside_diag_.array() - c) / r;
  const double g_n = coupling_ / r;

  auto energy = [&](const WavefunctionState& x) {
    const WavefunctionState hx = apply_hamiltonian(x);
    return (x.cavity.dot(hx.cavity) +
            x.outside.reshaped().dot(hx.outside.reshaped()))
        .real();
  };
  const double e0 = energy(psi);

  // Chunk so the Chebyshev order stays moderate; same coefficients reused
  // for every chunk.
  const double z_target = 300.0;
  const int n_chunks =
      std::max(1, static_cast<int>(std::ceil(r * t / z_target)));
  const double t_chunk = t / n_chunks;
  const double z = r * t_chunk;
  const int order =
      static_cast<int>(z + 30.0 + 5.0 * std::sqrt(z + 100.0));
  const std::vector<double> jk = bessel_j_sequence(order, z);
  std::vector<cd> coef(order + 1);
  const cd phase = std::exp(cd(0.0, -c * t_chunk));
  cd ipow = 1.0;  // (-i)^k
  for (int k = 0; k <= order; ++k) {
    coef[k] = (k == 0 ? 1.0 : 2.0) * ipow * jk[k];
    ipow *= cd(0.0, -1.0);
  }

  WavefunctionState p0, p1, tmp, acc;
  for (WavefunctionState* s : {&p0, &p1, &tmp, &acc}) {
    s->cavity.resize(n_d);
    s->outside.resize(n_d, modes);
  }

  double norm_drift = 0.0;
  long matvecs = 2;  // the two energy evaluations
  for (int chunk = 0; chunk < n_chunks; ++chunk) {
    p0 = psi;
    apply_normalized(cav_n, diag_n, g_n, p0, p1);
    ++matvecs;
    acc.cavity = coef[0] * p0.cavity + coef[1] * p1.cavity;
    acc.outside = coef[0] * p0.outside + coef[1] * p1.outside;
    int tiny_streak = 0;
    for (int k = 2; k <= order; ++k) {
      apply_normalized(cav_n, diag_n, g_n, p1, tmp);
      ++matvecs;
      p0.cavity = 2.0 * tmp.cavity - p0.cavity;
      p0.outside = 2.0 * tmp.outside - p0.outside;
      std::swap(p0, p1);
      acc.cavity += coef[k] * p1.cavity;
      acc.outside += coef[k] * p1.outside;
      if (k > static_cast<int>(z) && std::abs(jk[k]) < 1e-18) {
        if (++tiny_streak >= 4) break;
      } else {
        tiny_streak = 0;
      }
    }
    psi.cavity = phase * acc.cavity;
    psi.outside = phase * acc.outside;
    norm_drift =
        std::max(norm_drift, std::abs(std::sqrt(psi.norm_squared()) - 1.0));
    if (norm_drift > 10.0 * config_.tol) {
      throw IntegratorFailureError(
          "evolve: norm drift " + std::to_string(norm_drift) +
          " exceeds 10x tolerance");
    }
  }

  if (diag != nullptr) {
    diag->norm_drift = norm_drift;
    diag->cavity_population = psi.cavity.squaredNorm();
    diag->revival_margin = revival / t;
    diag->energy_drift = std::abs(energy(psi) - e0);
    diag->matvec_count = matvecs;
    diag->t_final = t;
  }
  return psi;
}

const Eigen::MatrixXcd& OracleEngine::cached_amplitudes(
    PhotonVariant variant, const LorentzianPacket& packet, int n0) const {
  const CacheKey key{variant,
                     variant == PhotonVariant::Scattering ? packet.center : 0.0,
                     variant == PhotonVariant::Scattering ? packet.width : 0.0,
                     n0};
  {
    std::scoped_lock lock(cache_mutex_);
    auto it = amplitude_cache_.find(key);
    if (it != amplitude_cache_.end()) return it->second;
  }
  EvolutionDiagnostics diag;
  WavefunctionState psi = evolve({variant, packet, n0}, &diag);
  std::scoped_lock lock(cache_mutex_);
  run_log_.emplace_back(key, diag);
  return amplitude_cache_.emplace(key, std::move(psi.outside)).first->second;
}

Spectrum OracleEngine::spectrum(const PhononDistribution& state,
                                PhotonVariant variant,
                                const LorentzianPacket& packet) const {
  if (state.size() == 0 || state.size() > config_.n_d) {
    throw InvalidInputError("spectrum: state dimension must be in [1, n_d]");
  }
  const double dk = config_.disc.dk();
  Eigen::VectorXd values = Eigen::VectorXd::Zero(config_.disc.modes);
  for (int n0 = 0; n0 < state.size(); ++n0) {
    if (state(n0) == 0.0) continue;
    const Eigen::MatrixXcd& b = cached_amplitudes(variant, packet, n0);
    values +=
        (state(n0) / dk) * b.cwiseAbs2().colwise().sum().transpose();
  }
  Spectrum out;
  out.points.reserve(grid_.size());
  for (int j = 0; j < config_.disc.modes; ++j) {
    out.points.push_back({grid_[j], values(j), -1.0});
  }
  return out;
}

Spectrum OracleEngine::spectrum(const DensityMatrix& state,
                                PhotonVariant variant,
                                const LorentzianPacket& packet) const {
  if (state.rows() != state.cols()) {
    throw InvalidInputError("spectrum: state must be square");
  }
  if (state.rows() == 0 || state.rows() > config_.n_d) {
    throw InvalidInputError("spectrum: state dimension must be in [1, n_d]");
  }
  const double dk = config_.disc.dk();
  const int dim = static_cast<int>(state.rows());
  Eigen::VectorXcd values = Eigen::VectorXcd::Zero(config_.disc.modes);
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      if (state(m, n) == cd(0.0, 0.0)) continue;
      const Eigen::MatrixXcd& bn = cached_amplitudes(variant, packet, n);
      const Eigen::MatrixXcd& bm = cached_amplitudes(variant, packet, m);
      // S += rho_{m,n} sum_l B*_{n,l,j} B_{m,l,j} / dk
      values += (state(m, n) / dk) *
                (bn.conjugate().cwiseProduct(bm)).colwise().sum().transpose();
    }
  }
  Spectrum out;
  out.points.reserve(grid_.size());
  for (int j = 0; j < config_.disc.modes; ++j) {
    const cd v = values(j);
    if (std::abs(v.imag()) > 1e-10 * std::max(std::abs(v.real()), 1e-300)) {
      throw InternalConsistencyError(
          "spectrum: non-negligible imaginary residue; input not Hermitian");
    }
    out.points.push_back({grid_[j], v.real(), -1.0});
  }
  return out;
}

std::string OracleEngine::diagnostics_report() const {
  std::scoped_lock lock(cache_mutex_);
  std::ostringstream os;
  os.precision(6);
  os << "runs = " << run_log_.size() << "\n";
  int i = 0;
  for (const auto& [key, d] : run_log_) {
    const std::string p = "run" + std::to_string(i++) + ".";
    os << p << "variant = "
       << (key.variant == PhotonVariant::Emission ? "emission" : "scattering")
       << "\n";
    os << p << "n0 = " << key.n0 << "\n";
    if (key.variant == PhotonVariant::Scattering) {
      os << p << "packet_center = " << key.packet_center << "\n";
      os << p << "packet_width = " << key.packet_width << "\n";
    }
    os << p << "t_final = " << d.t_final << "\n";
    os << p << "norm_drift = " << d.norm_drift << "\n";
    os << p << "revival_margin = " << d.revival_margin << "\n";
    os << p << "cavity_population = " << d.cavity_population << "\n";
    os << p << "energy_drift = " << d.energy_drift << "\n";
    os << p << "matvec_count = " << d.matvec_count << "\n";
  }
  return os.str();
}

}  // namespace omspec
