#pragma once

// Checkpoint container. Byte layout (see docs/checkpoint_format.md):
//
//   text header, one "key value" pair per LF-terminated line, starting with
//   the magic line "GHLCKPT" and ending with "end_header";
//   tensor_count records of
//     u32 name length, name bytes (UTF-8),
//     u32 rank, rank x u64 extents,
//     prod(extents) x IEEE-754 binary64;
//   trailer line "GHLEND".
// All binary integers and doubles are little-endian.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <charconv>
#include <fstream>
#include <system_error>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ghl/error.hpp"
#include "ghl/io.hpp"
#include "ghl/model/ghnet.hpp"

namespace ghl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  nn::Tensor tensor;

  friend bool operator==(const NamedTensor& a, const NamedTensor& b) {
    return a.name == b.name && a.tensor.shape == b.tensor.shape && a.tensor.values == b.tensor.values;
  }
};

struct Checkpoint {
  std::uint32_t format_version = kCheckpointVersion;
  std::string fingerprint;
  std::string architecture;
  std::uint64_t parameter_count = 0;
  std::uint64_t seed = 0;
  double dropout_rate = kDefaultDropout;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
  Normalization normalization;
  std::string config_json = "{}";  // single line
  std::vector<NamedTensor> tensors;  // parameters, then batch-norm buffers

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline Checkpoint capture(GHNet& net, std::string config_json = "{}") {
  Checkpoint c;
  c.fingerprint = net.fingerprint();
  c.architecture = net.architecture();
  c.parameter_count = net.parameter_count();
  c.seed = net.seed();
  c.dropout_rate = net.options().dropout_rate;
  c.bn_momentum = net.options().bn_momentum;
  c.bn_epsilon = net.options().bn_epsilon;
  c.normalization = net.normalization();
  c.config_json = std::move(config_json);
  for (auto& p : net.network().parameters()) c.tensors.push_back({p.name, nn::Tensor(p.tensor->shape, p.tensor->values)});
  for (auto& p : net.network().buffers()) c.tensors.push_back({p.name, nn::Tensor(p.tensor->shape, p.tensor->values)});
  return c;
}

/// Rebuilds the network described by `c`; throws CorruptCheckpoint when the
/// architecture fingerprint, tensor names or shapes do not match.
inline GHNet restore(const Checkpoint& c) {
  if (c.format_version != kCheckpointVersion) {
    throw Error(ErrorCode::CorruptCheckpoint, "version mismatch: " + std::to_string(c.format_version));
  }
  GHNet net = GHNet::build(c.seed, {c.dropout_rate, c.bn_momentum, c.bn_epsilon});
  if (net.fingerprint() != c.fingerprint) {
    throw Error(ErrorCode::CorruptCheckpoint, "fingerprint mismatch: " + c.fingerprint + " vs " + net.fingerprint());
  }
  auto slots = net.network().parameters();
  auto buffers = net.network().buffers();
  slots.insert(slots.end(), buffers.begin(), buffers.end());
  if (slots.size() != c.tensors.size()) throw Error(ErrorCode::CorruptCheckpoint, "tensor count mismatch");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const NamedTensor& src = c.tensors[i];
    if (src.name != slots[i].name || src.tensor.shape != slots[i].tensor->shape) {
      throw Error(ErrorCode::CorruptCheckpoint, "unexpected tensor " + src.name + " " + nn::shape_string(src.tensor.shape));
    }
    slots[i].tensor->values = src.tensor.values;
  }
  net.set_normalization(c.normalization);
  return net;
}

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view line() {
    const std::size_t end = data_.find('\n', pos_);
    if (end == std::string_view::npos) corrupt("unterminated header line");
    std::string_view l = data_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return l;
  }

  /// Reads "key value" and returns value.
  std::string_view field(std::string_view key) {
    std::string_view l = line();
    if (l.size() < key.size() + 1 || l.substr(0, key.size()) != key || l[key.size()] != ' ') {
      corrupt("expected header field '" + std::string(key) + "'");
    }
    return l.substr(key.size() + 1);
  }

  std::string_view bytes(std::size_t n) {
    if (data_.size() - pos_ < n) corrupt("truncated tensor data");
    std::string_view b = data_.substr(pos_, n);
    pos_ += n;
    return b;
  }

  std::uint32_t u32() {
    auto b = bytes(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }
  std::uint64_t u64() {
    auto b = bytes(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }

  bool at_end() const noexcept { return pos_ == data_.size(); }

  [[noreturn]] static void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptCheckpoint, why); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline double to_double(std::string_view s) {
  double v;
  if (!parse_double(s, v)) Reader::corrupt("bad number '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t to_u64(std::string_view s) {
  std::uint64_t v;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) Reader::corrupt("bad integer '" + std::string(s) + "'");
  return v;
}

inline std::pair<double, double> to_pair(std::string_view s) {
  const std::size_t sp = s.find(' ');
  if (sp == std::string_view::npos) Reader::corrupt("expected two numbers");
  return {to_double(s.substr(0, sp)), to_double(s.substr(sp + 1))};
}

}  // namespace detail

inline std::string serialize(const Checkpoint& c) {
  if (c.config_json.find('\n') != std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "config echo must be a single line");
  }
  std::string out;
  auto kv = [&](std::string_view k, const std::string& v) {
    out.append(k);
    out.push_back(' ');
    out.append(v);
    out.push_back('\n');
  };
  out += "GHLCKPT\n";
  kv("format_version", std::to_string(c.format_version));
  kv("fingerprint", c.fingerprint);
  kv("architecture", c.architecture);
  kv("parameter_count", std::to_string(c.parameter_count));
  kv("seed", std::to_string(c.seed));
  kv("dropout_rate", format_double(c.dropout_rate));
  kv("bn_momentum", format_double(c.bn_momentum));
  kv("bn_epsilon", format_double(c.bn_epsilon));
  kv("normalization", to_string(c.normalization.kind));
  kv("norm_mean", format_double(c.normalization.mean[0]) + " " + format_double(c.normalization.mean[1]));
  kv("norm_std", format_double(c.normalization.stddev[0]) + " " + format_double(c.normalization.stddev[1]));
  kv("config", c.config_json);
  kv("tensor_count", std::to_string(c.tensors.size()));
  out += "end_header\n";
  for (const auto& t : c.tensors) {
    detail::put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    detail::put_u32(out, static_cast<std::uint32_t>(t.tensor.rank()));
    for (std::size_t e : t.tensor.shape) detail::put_u64(out, e);
    for (double v : t.tensor.values) detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  out += "GHLEND\n";
  return out;
}

inline Checkpoint deserialize(std::string_view bytes) {
  detail::Reader r(bytes);
  if (r.line() != "GHLCKPT") detail::Reader::corrupt("bad magic");
  Checkpoint c;
  c.format_version = static_cast<std::uint32_t>(detail::to_u64(r.field("format_version")));
  if (c.format_version != kCheckpointVersion) {
    throw Error(ErrorCode::CorruptCheckpoint, "version mismatch: file has " + std::to_string(c.format_version) +
                                                  ", reader supports " + std::to_string(kCheckpointVersion));
  }
  c.fingerprint = std::string(r.field("fingerprint"));
  c.architecture = std::string(r.field("architecture"));
  c.parameter_count = detail::to_u64(r.field("parameter_count"));
  c.seed = detail::to_u64(r.field("seed"));
  c.dropout_rate = detail::to_double(r.field("dropout_rate"));
  c.bn_momentum = detail::to_double(r.field("bn_momentum"));
  c.bn_epsilon = detail::to_double(r.field("bn_epsilon"));
  const std::string_view kind = r.field("normalization");
  if (kind == "raw") {
    c.normalization.kind = Normalization::Kind::Raw;
  } else if (kind == "zscore") {
    c.normalization.kind = Normalization::Kind::ZScore;
  } else {
    detail::Reader::corrupt("unknown normalization '" + std::string(kind) + "'");
  }
  const auto mean = detail::to_pair(r.field("norm_mean"));
  const auto sd = detail::to_pair(r.field("norm_std"));
  c.normalization.mean = {mean.first, mean.second};
  c.normalization.stddev = {sd.first, sd.second};
  c.normalization.fitted = true;
  c.config_json = std::string(r.field("config"));
  const std::uint64_t count = detail::to_u64(r.field("tensor_count"));
  if (r.line() != "end_header") detail::Reader::corrupt("missing end_header");
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedTensor t;
    t.name = std::string(r.bytes(r.u32()));
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 8) detail::Reader::corrupt("bad rank for " + t.name);
    nn::Shape shape(rank);
    std::uint64_t elements = 1;
    for (auto& e : shape) {
      e = r.u64();
      if (e == 0 || e > (1ULL << 32)) detail::Reader::corrupt("bad extent for " + t.name);
      elements *= e;
    }
    if (elements > bytes.size() / 8) detail::Reader::corrupt("truncated tensor data");
    std::vector<double> values(elements);
    for (auto& v : values) v = std::bit_cast<double>(r.u64());
    t.tensor = nn::Tensor(std::move(shape), std::move(values));
    c.tensors.push_back(std::move(t));
  }
  if (r.line() != "GHLEND" || !r.at_end()) detail::Reader::corrupt("missing trailer");
  return c;
}

inline void save(const Checkpoint& c, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  const std::string bytes = serialize(c);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::Io, "write failed: " + path);
}

inline Checkpoint load(const std::string& path) { return deserialize(read_file(path)); }

/// Headings for `samples` from the network stored in `c` (inference mode).
inline std::vector<double> predict(const Checkpoint& c, std::span<const LabeledSample> samples) {
  GHNet net = restore(c);
  return net.predict(samples);
}

}  // namespace ghl
