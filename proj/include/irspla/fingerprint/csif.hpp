#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "irspla/errors.hpp"
#include "irspla/fingerprint/fingerprint.hpp"

// CSIF layout (all integers little-endian):
//
//   "CSIF" | u32 version=1 | u32 K | u32 per-class count | u32 d | u32 l
//   K * count records of: u32 class | u32 slot | d*l float64 (row-major)
//   u32 CRC-32 over every preceding byte, magic included
//
// Records follow the dataset block order (class, then slot).

namespace irspla::fingerprint {

inline constexpr char kCsifMagic[4] = {'C', 'S', 'I', 'F'};
inline constexpr std::uint32_t kCsifVersion = 1;
inline constexpr std::size_t kCsifHeaderBytes = 4 + 5 * 4;

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& buf, std::size_t limit) : buf_(buf), limit_(limit) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  void need(std::size_t n, const char* what) const {
    if (pos_ + n > limit_) throw FormatError(std::string("truncated file while reading ") + what, pos_);
  }

  const std::vector<unsigned char>& buf_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(const unsigned char* data, std::size_t n) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(::crc32(crc, data, static_cast<uInt>(n)));
}

}  // namespace detail

/// Serialises a dataset to CSIF bytes. Requires equal per-class counts.
inline std::vector<unsigned char> encode_dataset(const LabeledDataset& ds) {
  ds.validate();
  const auto counts = ds.class_counts();
  const std::size_t per_class = counts.empty() ? 0 : counts.front();
  for (auto c : counts)
    if (c != per_class) throw ContractError("CSIF requires the same sequence count for every class");
  LabeledDataset ordered = ds;
  ordered.sort_blocks();

  std::vector<unsigned char> out;
  out.reserve(kCsifHeaderBytes + ds.size() * (8 + 8 * ds.d * ds.l) + 4);
  out.insert(out.end(), kCsifMagic, kCsifMagic + 4);
  detail::put_u32(out, kCsifVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(ds.n_classes));
  detail::put_u32(out, static_cast<std::uint32_t>(per_class));
  detail::put_u32(out, static_cast<std::uint32_t>(ds.d));
  detail::put_u32(out, static_cast<std::uint32_t>(ds.l));
  for (const auto& s : ordered.sequences) {
    detail::put_u32(out, s.tx_index);
    detail::put_u32(out, s.slot_index);
    for (double v : s.data) detail::put_f64(out, v);
  }
  detail::put_u32(out, detail::crc32_of(out.data(), out.size()));
  return out;
}

inline LabeledDataset decode_dataset(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCsifMagic, 4) != 0) throw FormatError("bad CSIF magic", 0);
  if (bytes.size() < kCsifHeaderBytes + 4) throw FormatError("truncated CSIF header", bytes.size());
  const std::size_t payload_end = bytes.size() - 4;
  detail::ByteReader r(bytes, payload_end);
  r.skip(4);
  const auto version = r.u32("version");
  if (version != kCsifVersion) throw FormatError("unsupported CSIF version " + std::to_string(version), 4);
  LabeledDataset ds;
  ds.n_classes = r.u32("class count");
  const std::size_t per_class = r.u32("per-class count");
  ds.d = r.u32("d");
  ds.l = r.u32("l");
  const std::size_t record = 8 + 8 * ds.d * ds.l;
  const std::size_t expected = kCsifHeaderBytes + ds.n_classes * per_class * record;
  if (expected != payload_end) {
    throw FormatError("CSIF size mismatch: header implies " + std::to_string(expected + 4) + " bytes, file has " +
                          std::to_string(bytes.size()),
                      std::min(expected, payload_end));
  }
  detail::ByteReader crc_reader(bytes, bytes.size());
  crc_reader.skip(payload_end);
  const auto stored_crc = crc_reader.u32("crc");
  if (stored_crc != detail::crc32_of(bytes.data(), payload_end)) throw FormatError("CSIF CRC mismatch", payload_end);

  ds.sequences.reserve(ds.n_classes * per_class);
  for (std::size_t i = 0; i < ds.n_classes * per_class; ++i) {
    FingerprintSequence s;
    s.d = ds.d;
    s.l = ds.l;
    const std::size_t at = r.pos();
    s.tx_index = r.u32("class");
    s.slot_index = r.u32("slot");
    if (s.tx_index >= ds.n_classes) throw FormatError("record class out of range", at);
    s.data.resize(ds.d * ds.l);
    for (auto& v : s.data) v = r.f64("values");
    ds.sequences.push_back(std::move(s));
  }
  return ds;
}

inline void write_dataset(const LabeledDataset& ds, const std::string& path) {
  const auto bytes = encode_dataset(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline LabeledDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_dataset(bytes);
}

/// Inspection export: one row per (sequence, dimension).
inline std::string dataset_to_csv(const LabeledDataset& ds) {
  std::ostringstream os;
  os << "sequence,class,slot,dim";
  for (std::size_t t = 0; t < ds.l; ++t) os << ",t" << t;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t n = 0; n < ds.size(); ++n) {
    const auto& s = ds.sequences[n];
    for (std::size_t i = 0; i < ds.d; ++i) {
      os << n << ',' << s.tx_index << ',' << s.slot_index << ',' << i;
      for (double v : s.row(i)) os << ',' << v;
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace irspla::fingerprint
