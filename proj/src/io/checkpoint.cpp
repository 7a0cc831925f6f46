// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/io/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "jgkd/errors.hpp"

namespace jgkd::io {

namespace {

constexpr char kMagic[4] = {'J', 'G', 'K', 'D'};
// Guards against absurd sizes in corrupted headers.
constexpr std::uint64_t kMaxCount = 1ULL << 32;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Cursor {
 public:
  Cursor(const std::string& bytes, std::string file) : bytes_(bytes), file_(std::move(file)) {}

  const char* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("'" + file_ + "' is truncated at byte " + std::to_string(pos_));
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint64_t u64() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(8));
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  std::uint16_t u16() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(2));
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  bool done() const { return pos_ == bytes_.size(); }
  const std::string& file() const { return file_; }

 private:
  const std::string& bytes_;
  std::string file_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_arrays(const std::filesystem::path& path, const std::vector<NamedArray>& arrays) {
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kCheckpointVersion & 0xff));
  out.push_back(static_cast<char>(kCheckpointVersion >> 8));
  put_u64(out, arrays.size());
  for (const auto& [name, t] : arrays) {
    put_u64(out, name.size());
    out += name;
    put_u64(out, t.rank());
    for (std::size_t d : t.shape()) put_u64(out, d);
    for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<NamedArray> read_arrays(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Cursor c(bytes, path.string());

  if (std::memcmp(c.take(4), kMagic, 4) != 0) throw FormatError("'" + path.string() + "' is not a jgkd checkpoint");
  const std::uint16_t version = c.u16();
  if (version != kCheckpointVersion) {
    throw FormatError("'" + path.string() + "' has format version " + std::to_string(version) + ", expected " +
                      std::to_string(kCheckpointVersion));
  }
  const std::uint64_t count = c.u64();
  if (count > kMaxCount) throw FormatError("'" + path.string() + "' has a corrupt array count");

  std::vector<NamedArray> arrays;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t len = c.u64();
    if (len > kMaxCount) throw FormatError("'" + path.string() + "' has a corrupt name length");
    std::string name(c.take(len), len);
    const std::uint64_t rank = c.u64();
    if (rank > 8) throw FormatError("'" + path.string() + "' array '" + name + "' has rank " + std::to_string(rank));
    ad::Shape shape;
    std::uint64_t numel = 1;
    for (std::uint64_t r = 0; r < rank; ++r) {
      shape.push_back(c.u64());
      numel *= shape.back();
      if (numel > kMaxCount) throw FormatError("'" + path.string() + "' array '" + name + "' is too large");
    }
    std::vector<double> data(numel);
    for (auto& v : data) v = std::bit_cast<double>(c.u64());
    arrays.emplace_back(std::move(name), ad::Tensor(std::move(shape), std::move(data)));
  }
  if (!c.done()) throw FormatError("'" + path.string() + "' has trailing bytes");
  return arrays;
}

void ArrayWriter::meta(const std::string& key, double value) {
  arrays_.emplace_back("meta/" + key, ad::Tensor(ad::Shape{}, std::vector<double>{value}));
}

void ArrayWriter::params(const std::string& prefix, const ad::ParamSet& ps) {
  for (const auto& p : ps) arrays_.emplace_back(prefix + "/" + p.name, p.value);
}

bool ArrayReader::has(const std::string& name) const {
  return std::any_of(arrays_.begin(), arrays_.end(), [&](const NamedArray& a) { return a.first == name; });
}

const ad::Tensor& ArrayReader::get(const std::string& name) const {
  for (const auto& a : arrays_) {
    if (a.first == name) return a.second;
  }
  throw FormatError("checkpoint is missing array '" + name + "'");
}

double ArrayReader::meta(const std::string& key) const {
  const ad::Tensor& t = get("meta/" + key);
  if (t.size() != 1) throw FormatError("meta entry '" + key + "' is not a scalar");
  return t[0];
}

std::vector<std::string> ArrayReader::names(const std::string& group) const {
  const std::string prefix = "meta/" + group + "/";
  std::map<std::size_t, std::string> found;
  for (const auto& [name, t] : arrays_) {
    if (name.rfind(prefix, 0) != 0) continue;
    const std::string rest = name.substr(prefix.size());
    const auto slash = rest.find('/');
    if (slash == std::string::npos) throw FormatError("malformed name entry '" + name + "'");
    found[std::stoul(rest.substr(0, slash))] = rest.substr(slash + 1);
  }
  std::vector<std::string> out;
  for (auto& [i, n] : found) out.push_back(n);
  return out;
}

void ArrayReader::load_params(const std::string& prefix, ad::ParamSet& ps) const {
  std::size_t under_prefix = 0;
  for (const auto& a : arrays_) under_prefix += a.first.rfind(prefix + "/", 0) == 0;
  if (under_prefix != ps.size()) {
    throw FormatError("checkpoint holds " + std::to_string(under_prefix) + " arrays under '" + prefix +
                      "', model expects " + std::to_string(ps.size()));
  }
  for (auto& p : ps) {
    const ad::Tensor& t = get(prefix + "/" + p.name);
    if (t.shape() != p.value.shape()) {
      throw FormatError("array '" + prefix + "/" + p.name + "' has shape " + ad::shape_str(t.shape()) +
                        ", model expects " + ad::shape_str(p.value.shape()));
    }
    p.value = t;
    p.zero_grad();
  }
}

}  // namespace jgkd::io
