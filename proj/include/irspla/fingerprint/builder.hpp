#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "irspla/channel/channel_model.hpp"
#include "irspla/errors.hpp"
#include "irspla/fingerprint/fingerprint.hpp"
#include "irspla/random.hpp"

namespace irspla::fingerprint {

/// Synthesises a clean (noise-free) dataset for the first `n_classes`
/// transmitters of `cfg`, `per_class` sequences of length `l` each.
inline LabeledDataset build_clean_dataset(const channel::ChannelConfig& cfg, std::size_t n_classes,
                                          std::size_t per_class, std::size_t l, std::uint64_t seed) {
  if (n_classes == 0 || n_classes > cfg.transmitters.size())
    throw ConfigError("dataset: class count must lie in [1, " + std::to_string(cfg.transmitters.size()) + "]");
  if (per_class == 0 || l == 0) throw ConfigError("dataset: sequence count and length must be positive");
  LabeledDataset ds{n_classes, cfg.fingerprint_dim(), l, {}};
  ds.sequences.reserve(n_classes * per_class);
  for (std::size_t k = 0; k < n_classes; ++k) {
    channel::CsiTraceGenerator gen(cfg, k, seed);
    std::vector<std::vector<double>> samples;
    samples.reserve(per_class * l);
    for (std::size_t i = 0; i < per_class * l; ++i) samples.push_back(flatten_csi(gen.next().x));
    for (auto& s : segment_sequences(samples, l, static_cast<std::uint32_t>(k))) ds.sequences.push_back(std::move(s));
  }
  return ds;
}

/// Adds AWGN at `snr_db` to every class stream independently; the signal
/// power reference is the mean square of that class's clean stream.
inline LabeledDataset apply_noise(LabeledDataset ds, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return ds;
  for (std::size_t k = 0; k < ds.n_classes; ++k) {
    std::vector<double> stream;
    std::vector<FingerprintSequence*> members;
    for (auto& s : ds.sequences) {
      if (s.tx_index != k) continue;
      members.push_back(&s);
      stream.insert(stream.end(), s.data.begin(), s.data.end());
    }
    if (members.empty()) continue;
    Rng rng = make_rng(seed, 0xa3c0 + k);
    const auto noisy = channel::add_awgn(stream, snr_db, rng);
    std::size_t off = 0;
    for (auto* s : members) {
      std::copy(noisy.begin() + static_cast<std::ptrdiff_t>(off),
                noisy.begin() + static_cast<std::ptrdiff_t>(off + s->data.size()), s->data.begin());
      off += s->data.size();
    }
  }
  return ds;
}

}  // namespace irspla::fingerprint
