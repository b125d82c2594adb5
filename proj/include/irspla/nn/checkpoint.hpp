#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "irspla/errors.hpp"
#include "irspla/nn/params.hpp"

// Named-tensor checkpoint, little-endian throughout:
//
//   "NTB1" | u32 metadata bytes | metadata ("key=value\n" lines)
//   u32 tensor count | per tensor: u32 name bytes | name | u32 rank |
//   rank * u64 dims | prod(dims) * float64

namespace irspla::nn {

struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return t;
    throw FormatError("checkpoint has no tensor '" + name + "'", 0);
  }
};

namespace detail {

template <class T>
void put_le(std::vector<unsigned char>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::vector<unsigned char>& b) : b_(b) {}

  template <class T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n, const char* what) const {
    if (pos_ + n > b_.size()) throw FormatError(std::string("truncated checkpoint while reading ") + what, pos_);
  }
  const std::vector<unsigned char>& b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const Checkpoint& ck) {
  std::vector<unsigned char> out{'N', 'T', 'B', '1'};
  std::string meta;
  for (const auto& [k, v] : ck.metadata) meta += k + "=" + v + "\n";
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& [name, t] : ck.tensors) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) detail::put_le<std::uint64_t>(out, d);
    for (double v : t.values()) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

inline Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "NTB1", 4) != 0) throw FormatError("bad checkpoint magic", 0);
  detail::CheckpointReader r(bytes);
  r.bytes(4, "magic");
  Checkpoint ck;
  const auto meta_len = r.get<std::uint32_t>("metadata length");
  const std::string meta = r.bytes(meta_len, "metadata");
  std::size_t pos = 0;
  while (pos < meta.size()) {
    auto nl = meta.find('\n', pos);
    if (nl == std::string::npos) nl = meta.size();
    auto line = meta.substr(pos, nl - pos);
    auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("malformed checkpoint metadata line", 8 + pos);
    ck.metadata[line.substr(0, eq)] = line.substr(eq + 1);
    pos = nl + 1;
  }
  const auto count = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>("name length");
    std::string name = r.bytes(name_len, "name");
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank > 8) throw FormatError("implausible tensor rank", r.pos());
    Shape shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>("dim")));
    std::vector<double> values(numel(shape));
    for (auto& v : values) v = std::bit_cast<double>(r.get<std::uint64_t>("values"));
    ck.tensors.emplace_back(std::move(name), Tensor::parameter(std::move(shape), std::move(values)));
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint", r.pos());
  return ck;
}

inline void write_checkpoint(const Checkpoint& ck, const std::string& path) {
  const auto bytes = encode_checkpoint(ck);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace irspla::nn
