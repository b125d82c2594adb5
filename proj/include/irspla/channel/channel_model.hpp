#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "irspla/channel/complex_matrix.hpp"
#include "irspla/channel/geometry.hpp"
#include "irspla/config.hpp"
#include "irspla/errors.hpp"
#include "irspla/random.hpp"

namespace irspla::channel {

// ---------------------------------------------------------------------------
// Path loss (3GPP TR 38.901, indoor factory)
// ---------------------------------------------------------------------------

/// InF path loss in dB. The NLoS branch is the InF-SL sub-scenario, floored
/// by the LoS value.
inline double path_loss_db(double dist_m, double fc_ghz, bool los) {
  if (!(dist_m > 0.0)) throw DomainError("path_loss_db: distance must be positive, got " + std::to_string(dist_m));
  if (!(fc_ghz > 0.0)) throw DomainError("path_loss_db: carrier frequency must be positive");
  const double pl_los = 31.84 + 21.5 * std::log10(dist_m) + 19.0 * std::log10(fc_ghz);
  if (los) return pl_los;
  const double pl_sl = 33.0 + 25.5 * std::log10(dist_m) + 20.0 * std::log10(fc_ghz);
  return std::max(pl_los, pl_sl);
}

/// Linear power gain corresponding to a loss in dB.
inline double db_to_gain(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

// ---------------------------------------------------------------------------
// Fading blocks
// ---------------------------------------------------------------------------

/// CN(0, 1) draw.
inline Complex complex_gaussian(Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

/// Rice factors at or above this are treated as a pure LoS channel.
inline constexpr double kPureLosKappa = 1e12;

/// Rician block: sqrt(PL_los * k / (1 + k)) * los + sqrt(PL_nlos / (1 + k)) * H~
/// with H~ i.i.d. CN(0, 1). `los` is the deterministic unit-modulus array
/// response and fixes the output shape.
inline ComplexMatrix rician_channel(const ComplexMatrix& los, double kappa, double pl_los_db, double pl_nlos_db,
                                   Rng& rng) {
  if (!(kappa >= 0.0)) throw DomainError("rician_channel: Rice factor must be non-negative");
  if (los.rows() == 0 || los.cols() == 0) throw ShapeError("rician_channel: empty LoS component");
  ComplexMatrix out(los.rows(), los.cols());
  if (kappa >= kPureLosKappa) {
    const double a = std::sqrt(db_to_gain(pl_los_db));
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = a * los.data()[i];
    return out;
  }
  const double a = std::sqrt(db_to_gain(pl_los_db) * kappa / (1.0 + kappa));
  const double b = std::sqrt(db_to_gain(pl_nlos_db) / (1.0 + kappa));
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = a * los.data()[i] + b * complex_gaussian(rng);
  return out;
}

/// Far-field-free LoS response: entry (r, t) = exp(-j 2 pi |p_r - p_t| / lambda).
inline ComplexMatrix los_response(const std::vector<Position3D>& rx, const std::vector<Position3D>& tx,
                                  double wavelength_m) {
  ComplexMatrix out(rx.size(), tx.size());
  const double k = 2.0 * kPi / wavelength_m;
  for (std::size_t r = 0; r < rx.size(); ++r)
    for (std::size_t t = 0; t < tx.size(); ++t) out(r, t) = std::polar(1.0, -k * distance(rx[r], tx[t]));
  return out;
}

/// Diagonal IRS response with the given element phases.
inline ComplexMatrix irs_phase_matrix_from_angles(const std::vector<double>& theta) {
  std::vector<Complex> diag;
  diag.reserve(theta.size());
  for (double t : theta) diag.push_back(std::polar(1.0, t));
  return ComplexMatrix::diagonal(diag);
}

/// M x M diagonal IRS response, phases uniform on [0, 2 pi).
inline ComplexMatrix irs_phase_matrix(std::size_t m_elements, Rng& rng) {
  if (m_elements == 0) throw DomainError("irs_phase_matrix: need at least one element");
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  std::vector<double> theta(m_elements);
  for (auto& t : theta) t = u(rng);
  return irs_phase_matrix_from_angles(theta);
}

/// x = h * psi * g.
inline ComplexMatrix cascade_csi(const ComplexMatrix& h, const ComplexMatrix& psi, const ComplexMatrix& g) {
  if (h.cols() != psi.rows() || psi.cols() != g.rows())
    throw ShapeError("cascade_csi: non-conformable shapes h " + h.shape_string() + ", psi " + psi.shape_string() +
                     ", g " + g.shape_string());
  return (h * psi) * g;
}

/// Same product when psi is diagonal, in O(N_R * M * N_T).
inline ComplexMatrix cascade_csi_diagonal(const ComplexMatrix& h, const std::vector<Complex>& psi_diag,
                                          const ComplexMatrix& g) {
  if (h.cols() != psi_diag.size() || psi_diag.size() != g.rows())
    throw ShapeError("cascade_csi: non-conformable shapes h " + h.shape_string() + ", psi " +
                     std::to_string(psi_diag.size()) + " diag, g " + g.shape_string());
  ComplexMatrix out(h.rows(), g.cols());
  for (std::size_t r = 0; r < h.rows(); ++r) {
    for (std::size_t m = 0; m < psi_diag.size(); ++m) {
      const Complex w = h(r, m) * psi_diag[m];
      for (std::size_t t = 0; t < g.cols(); ++t) out(r, t) += w * g(m, t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct TransmitterSpec {
  std::string name;
  Position3D position;
  bool legitimate = true;
};

inline std::vector<TransmitterSpec> default_transmitters() {
  return {{"alice1", {10, 82, 0}, true}, {"alice2", {10, 84, 0}, true}, {"alice3", {10, 86, 0}, true},
          {"alice4", {10, 88, 0}, true}, {"eve1", {10, 70, 0}, false},  {"eve2", {10, 95, 0}, false}};
}

struct ChannelConfig {
  std::size_t n_tx_antennas = 4;
  std::size_t n_rx_antennas = 3;
  std::size_t irs_rows = 8;
  std::size_t irs_cols = 16;
  double carrier_ghz = 3.5;
  double rice_kappa_h = 3.0;
  double rice_kappa_g = 4.0;
  double bandwidth_hz = 1e6;
  double tx_speed_mps = 2.0;
  double sample_rate_hz = 100.0;
  Position3D bob{0, 0, 2};
  Position3D irs{5, 50, 5};
  std::vector<TransmitterSpec> transmitters = default_transmitters();
  /// Direction of travel in the x-y plane, degrees from +y towards +x.
  double heading_deg = 0.0;
  /// Half-extent of the box each user moves in (centred on its start
  /// position). Zero on an axis means unbounded motion along it.
  Position3D zone_half_extent{0, 0, 0};
  /// When false the cascade is replaced by a direct Rayleigh TX -> Bob link.
  bool irs_enabled = true;

  std::size_t irs_elements() const { return irs_rows * irs_cols; }
  std::size_t fingerprint_dim() const { return 2 * n_rx_antennas * n_tx_antennas; }
  double wavelength_m() const { return kSpeedOfLight / (carrier_ghz * 1e9); }

  Position3D velocity() const {
    const double a = heading_deg * kPi / 180.0;
    return {tx_speed_mps * std::sin(a), tx_speed_mps * std::cos(a), 0.0};
  }

  void validate() const {
    if (n_tx_antennas < 1 || n_rx_antennas < 1) throw ConfigError("antenna counts must be at least 1");
    if (irs_elements() < 1) throw ConfigError("IRS must have at least one element");
    if (!(carrier_ghz > 0.0)) throw ConfigError("carrier frequency must be positive");
    if (!(rice_kappa_h >= 0.0) || !(rice_kappa_g >= 0.0)) throw ConfigError("Rice factors must be non-negative");
    if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
    if (!(tx_speed_mps >= 0.0)) throw ConfigError("speed must be non-negative");
    if (transmitters.empty()) throw ConfigError("at least one transmitter is required");
    if (!bob.finite() || !irs.finite()) throw ConfigError("Bob and IRS positions must be finite");
    const double half_wave = wavelength_m() / 2.0;
    for (std::size_t i = 0; i < transmitters.size(); ++i) {
      if (!transmitters[i].position.finite())
        throw ConfigError("transmitter '" + transmitters[i].name + "' has a non-finite position");
      for (std::size_t j = i + 1; j < transmitters.size(); ++j)
        if (!(distance(transmitters[i].position, transmitters[j].position) > half_wave))
          throw ConfigError("transmitters '" + transmitters[i].name + "' and '" + transmitters[j].name +
                            "' are not separated by more than half a wavelength");
    }
  }

  static ChannelConfig from_config(const KeyValueConfig& kv) {
    ChannelConfig c;
    c.n_tx_antennas = static_cast<std::size_t>(kv.get_int("channel.n_tx_antennas", 4));
    c.n_rx_antennas = static_cast<std::size_t>(kv.get_int("channel.n_rx_antennas", 3));
    c.irs_rows = static_cast<std::size_t>(kv.get_int("channel.irs_rows", 8));
    c.irs_cols = static_cast<std::size_t>(kv.get_int("channel.irs_cols", 16));
    c.carrier_ghz = kv.get_double("channel.carrier_ghz", c.carrier_ghz);
    c.rice_kappa_h = kv.get_double("channel.rice_kappa_h", c.rice_kappa_h);
    c.rice_kappa_g = kv.get_double("channel.rice_kappa_g", c.rice_kappa_g);
    c.bandwidth_hz = kv.get_double("channel.bandwidth_hz", c.bandwidth_hz);
    c.tx_speed_mps = kv.get_double("channel.tx_speed_mps", c.tx_speed_mps);
    c.sample_rate_hz = kv.get_double("channel.sample_rate_hz", c.sample_rate_hz);
    c.heading_deg = kv.get_double("channel.heading_deg", c.heading_deg);
    c.irs_enabled = kv.get_bool("channel.irs_enabled", c.irs_enabled);
    c.bob = position_or(kv, "channel.bob", c.bob);
    c.irs = position_or(kv, "channel.irs", c.irs);
    c.zone_half_extent = position_or(kv, "channel.zone_half_extent", c.zone_half_extent);
    if (kv.has("channel.transmitters")) {
      c.transmitters.clear();
      for (const auto& name : kv.get_strings("channel.transmitters", {})) {
        TransmitterSpec t;
        t.name = name;
        if (!kv.has("tx." + name + ".position")) throw ConfigError("missing key 'tx." + name + ".position'");
        t.position = position_or(kv, "tx." + name + ".position", {});
        t.legitimate = kv.get_bool("tx." + name + ".legitimate", true);
        c.transmitters.push_back(t);
      }
    }
    c.validate();
    return c;
  }

 private:
  static Position3D position_or(const KeyValueConfig& kv, const std::string& key, Position3D fallback) {
    if (!kv.has(key)) return fallback;
    auto v = kv.get_doubles(key, {});
    if (v.size() != 3) throw ConfigError("key '" + key + "': expected 'x, y, z'");
    return {v[0], v[1], v[2]};
  }
};

// ---------------------------------------------------------------------------
// Trace generation
// ---------------------------------------------------------------------------

struct ChannelRealization {
  ComplexMatrix h;                              // IRS -> Bob, N_R x M (empty without IRS)
  ComplexMatrix g;                              // TX -> IRS, M x N_T (empty without IRS)
  std::shared_ptr<const ComplexMatrix> psi;     // M x M diagonal (null without IRS)
  ComplexMatrix x;                              // N_R x N_T
  Position3D tx_position;
  double timestamp_s = 0.0;
};

/// Stateful per-transmitter generator. Geometry, IRS phases and the
/// IRS -> Bob LoS block are fixed at construction; NLoS parts are redrawn
/// for every sample from a stream derived from (seed, tx_index).
class CsiTraceGenerator {
 public:
  CsiTraceGenerator(const ChannelConfig& cfg, std::size_t tx_index, std::uint64_t seed)
      : cfg_(cfg), tx_index_(tx_index), rng_(make_rng(seed, tx_index + 1)) {
    cfg_.validate();
    if (tx_index >= cfg_.transmitters.size())
      throw IndexError("transmitter index " + std::to_string(tx_index) + " out of range");
    const double lambda = cfg_.wavelength_m();
    start_ = cfg_.transmitters[tx_index].position;
    velocity_ = cfg_.velocity();
    if (cfg_.irs_enabled) {
      Rng irs_rng = make_rng(seed, 0);
      psi_ = std::make_shared<const ComplexMatrix>(irs_phase_matrix(cfg_.irs_elements(), irs_rng));
      psi_diag_.resize(cfg_.irs_elements());
      for (std::size_t m = 0; m < psi_diag_.size(); ++m) psi_diag_[m] = (*psi_)(m, m);
      irs_elements_ = planar_array_positions(cfg_.irs, cfg_.irs_rows, cfg_.irs_cols, lambda / 2.0);
      auto bob_ants = ula_positions(cfg_.bob, cfg_.n_rx_antennas, lambda / 2.0);
      h_los_ = los_response(bob_ants, irs_elements_, lambda);
      const double d_h = distance(cfg_.bob, cfg_.irs);
      h_pl_los_ = path_loss_db(d_h, cfg_.carrier_ghz, true);
      h_pl_nlos_ = path_loss_db(d_h, cfg_.carrier_ghz, false);
    }
  }

  Position3D position_at(std::size_t k) const {
    const double t = static_cast<double>(k) / cfg_.sample_rate_hz;
    return reflect_into_zone(start_ + t * velocity_, start_, cfg_.zone_half_extent);
  }

  ChannelRealization next() {
    ChannelRealization out;
    out.timestamp_s = static_cast<double>(k_) / cfg_.sample_rate_hz;
    out.tx_position = position_at(k_);
    ++k_;
    const double lambda = cfg_.wavelength_m();
    auto tx_ants = ula_positions(out.tx_position, cfg_.n_tx_antennas, lambda / 2.0);
    if (!cfg_.irs_enabled) {
      const double d = distance(out.tx_position, cfg_.bob);
      if (!(d > 0.0)) throw DomainError("transmitter coincides with Bob");
      const double pl = path_loss_db(d, cfg_.carrier_ghz, false);
      ComplexMatrix zero_los(cfg_.n_rx_antennas, cfg_.n_tx_antennas);
      out.x = rician_channel(zero_los, 0.0, pl, pl, rng_);
      return out;
    }
    const double d_g = distance(out.tx_position, cfg_.irs);
    if (!(d_g > 0.0)) throw DomainError("transmitter position coincides with the IRS");
    out.h = rician_channel(h_los_, cfg_.rice_kappa_h, h_pl_los_, h_pl_nlos_, rng_);
    auto g_los = los_response(irs_elements_, tx_ants, lambda);
    out.g = rician_channel(g_los, cfg_.rice_kappa_g, path_loss_db(d_g, cfg_.carrier_ghz, true),
                           path_loss_db(d_g, cfg_.carrier_ghz, false), rng_);
    out.psi = psi_;
    out.x = cascade_csi_diagonal(out.h, psi_diag_, out.g);
    return out;
  }

  std::size_t samples_drawn() const { return k_; }

 private:
  ChannelConfig cfg_;
  std::size_t tx_index_;
  Rng rng_;
  Position3D start_;
  Position3D velocity_;
  std::size_t k_ = 0;
  std::shared_ptr<const ComplexMatrix> psi_;
  std::vector<Complex> psi_diag_;
  std::vector<Position3D> irs_elements_;
  ComplexMatrix h_los_;
  double h_pl_los_ = 0.0;
  double h_pl_nlos_ = 0.0;
};

inline std::vector<ChannelRealization> generate_csi_trace(const ChannelConfig& cfg, std::size_t tx_index,
                                                          std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw DomainError("generate_csi_trace: need at least one sample");
  CsiTraceGenerator gen(cfg, tx_index, seed);
  std::vector<ChannelRealization> out;
  out.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) out.push_back(gen.next());
  return out;
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// Adds white Gaussian noise with per-component variance P / 10^(snr/10),
/// P being the mean square of `x`. +inf returns the input unchanged.
inline std::vector<double> add_awgn(std::span<const double> x, double snr_db, Rng& rng) {
  std::vector<double> out(x.begin(), x.end());
  if (std::isinf(snr_db) && snr_db > 0) return out;
  if (std::isnan(snr_db)) throw DomainError("add_awgn: SNR is NaN");
  double power = 0.0;
  for (double v : x) power += v * v;
  power = x.empty() ? 0.0 : power / static_cast<double>(x.size());
  if (!(power > 0.0)) throw DomainError("add_awgn: zero-power signal with finite SNR");
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& v : out) v += n(rng);
  return out;
}

}  // namespace irspla::channel
