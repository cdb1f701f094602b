#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "itercert/errors.hpp"
#include "itercert/poly.hpp"

namespace itercert {

/// Replayable iterator over d candidates in C^n that keeps one point.
///
/// Backends implement produce(); skip() and rewind() are optional hooks for
/// backends with a physical cursor.
class SolutionStream {
 public:
  SolutionStream(std::size_t d, std::size_t n) : d_(d), n_(n), slot_(n) {}
  virtual ~SolutionStream() = default;

  SolutionStream(const SolutionStream&) = default;
  SolutionStream& operator=(const SolutionStream&) = delete;

  std::size_t size() const { return d_; }
  std::size_t dim() const { return n_; }
  std::size_t position() const { return pos_; }
  bool exhausted() const { return pos_ >= d_; }

  /// Point at the cursor, or nullptr once position == d. The pointer stays
  /// valid until the next call on this stream.
  const ComplexPoint* next() {
    if (pos_ >= d_) return nullptr;
    produce(pos_, slot_);
    ++pos_;
    ++next_calls_;
    return &slot_;
  }

  void reset() {
    rewind();
    pos_ = 0;
  }

  void advance_by(std::size_t k) {
    if (k > d_ - pos_) throw StreamError("advance_by past the end of the stream");
    if (k == 0) return;
    skip(pos_, k);
    pos_ += k;
    advance_steps_ += k;
  }

  std::uint64_t next_calls() const { return next_calls_; }
  std::uint64_t advance_steps() const { return advance_steps_; }

  /// Candidate buffers retained between calls.
  static constexpr std::size_t held_points() { return 1; }

  /// Independent cursor over the same source; counters start at zero.
  virtual std::unique_ptr<SolutionStream> clone() const = 0;

 protected:
  virtual void produce(std::size_t index, ComplexPoint& out) = 0;
  virtual void rewind() {}
  virtual void skip(std::size_t /*from*/, std::size_t /*count*/) {}

  void reset_counters() {
    pos_ = 0;
    next_calls_ = 0;
    advance_steps_ = 0;
  }

 private:
  std::size_t d_;
  std::size_t n_;
  std::size_t pos_ = 0;
  std::uint64_t next_calls_ = 0;
  std::uint64_t advance_steps_ = 0;
  ComplexPoint slot_;
};

// ---------------------------------------------------------------------------

class InMemoryStream final : public SolutionStream {
 public:
  explicit InMemoryStream(std::vector<ComplexPoint> points, std::size_t n)
      : SolutionStream(points.size(), n), points_(std::make_shared<const std::vector<ComplexPoint>>(std::move(points))) {
    for (const auto& p : *points_)
      if (p.size() != n) throw DimensionError("in-memory stream: point dimension differs from n");
  }
  explicit InMemoryStream(std::vector<ComplexPoint> points)
      : InMemoryStream(points, points.empty() ? 1 : points.front().size()) {}

  const std::vector<ComplexPoint>& points() const { return *points_; }

  std::unique_ptr<SolutionStream> clone() const override {
    auto c = std::unique_ptr<InMemoryStream>(new InMemoryStream(*this));
    c->reset_counters();
    return c;
  }

 protected:
  void produce(std::size_t index, ComplexPoint& out) override { out = (*points_)[index]; }

 private:
  InMemoryStream(const InMemoryStream&) = default;
  std::shared_ptr<const std::vector<ComplexPoint>> points_;
};

// ---------------------------------------------------------------------------
// Candidate file: "CSOL" 0x01, u64 d, u32 n, then d*n (f64 re, f64 im),
// all little-endian.

namespace csol {

inline constexpr std::array<char, 4> kMagic{'C', 'S', 'O', 'L'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 4 + 1 + 8 + 4;

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

inline std::string encode_point(const ComplexPoint& p) {
  std::string out;
  out.reserve(16 * p.size());
  for (const auto& z : p.coords) {
    put_le(out, std::bit_cast<std::uint64_t>(z.real()));
    put_le(out, std::bit_cast<std::uint64_t>(z.imag()));
  }
  return out;
}

inline void decode_point(const unsigned char* bytes, ComplexPoint& p) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double re = std::bit_cast<double>(get_le<std::uint64_t>(bytes + 16 * j));
    const double im = std::bit_cast<double>(get_le<std::uint64_t>(bytes + 16 * j + 8));
    p[j] = {re, im};
  }
}

inline std::string encode_header(std::uint64_t d, std::uint32_t n) {
  std::string out(kMagic.begin(), kMagic.end());
  out.push_back(static_cast<char>(kVersion));
  put_le(out, d);
  put_le(out, n);
  return out;
}

struct Header {
  std::uint64_t d = 0;
  std::uint32_t n = 0;
};

inline Header read_header(std::istream& in) {
  std::array<unsigned char, kHeaderBytes> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) throw StreamError("candidate file: truncated header");
  if (std::memcmp(buf.data(), kMagic.data(), 4) != 0) throw StreamError("candidate file: bad magic");
  if (buf[4] != kVersion) throw StreamError("candidate file: unsupported version");
  Header h{get_le<std::uint64_t>(buf.data() + 5), get_le<std::uint32_t>(buf.data() + 13)};
  if (h.n == 0) throw StreamError("candidate file: n must be positive");
  return h;
}

/// Writes the remaining points of `s` (from its cursor).
inline void write(std::ostream& out, SolutionStream& s) {
  const std::string header = encode_header(s.size() - s.position(), static_cast<std::uint32_t>(s.dim()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  while (const ComplexPoint* p = s.next()) {
    const std::string rec = encode_point(*p);
    out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  }
  if (!out) throw StreamError("candidate file: write failed");
}

inline void write(const std::filesystem::path& path, const std::vector<ComplexPoint>& points, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StreamError("cannot open " + path.string() + " for writing");
  const std::string header = encode_header(points.size(), static_cast<std::uint32_t>(n));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& p : points) {
    if (p.size() != n) throw DimensionError("candidate file: point dimension differs from n");
    const std::string rec = encode_point(p);
    out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  }
  if (!out) throw StreamError("candidate file: write failed");
}

}  // namespace csol

/// Seekable binary candidate file. Each next() is one record read; each
/// advance_by() is one seek.
class FileStream final : public SolutionStream {
 public:
  explicit FileStream(std::filesystem::path path) : FileStream(path, open_header(path)) {}

  const std::filesystem::path& path() const { return path_; }
  std::uint64_t reads() const { return reads_; }
  std::uint64_t seeks() const { return seeks_; }

  std::unique_ptr<SolutionStream> clone() const override { return std::make_unique<FileStream>(path_); }

 protected:
  void produce(std::size_t /*index*/, ComplexPoint& out) override {
    if (!in_.read(reinterpret_cast<char*>(record_.data()), static_cast<std::streamsize>(record_.size())))
      throw StreamError("candidate file: truncated record in " + path_.string());
    ++reads_;
    csol::decode_point(record_.data(), out);
  }
  void rewind() override { seek_to(0); }
  void skip(std::size_t from, std::size_t count) override { seek_to(from + count); }

 private:
  FileStream(const std::filesystem::path& path, csol::Header h)
      : SolutionStream(static_cast<std::size_t>(h.d), h.n), path_(path), in_(path, std::ios::binary), record_(16 * h.n) {
    if (!in_) throw StreamError("cannot open " + path.string());
    seek_to(0);
    seeks_ = 0;
  }

  static csol::Header open_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StreamError("cannot open " + path.string());
    return csol::read_header(in);
  }

  void seek_to(std::size_t index) {
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(csol::kHeaderBytes + index * record_.size()));
    if (!in_) throw StreamError("candidate file: seek failed in " + path_.string());
    ++seeks_;
  }

  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<unsigned char> record_;
  std::uint64_t reads_ = 0;
  std::uint64_t seeks_ = 0;
};

/// Deterministic index -> point source. Skips are index arithmetic.
class GeneratorStream final : public SolutionStream {
 public:
  using Producer = std::function<void(std::size_t, ComplexPoint&)>;

  GeneratorStream(std::size_t d, std::size_t n, Producer producer)
      : SolutionStream(d, n), producer_(std::make_shared<const Producer>(std::move(producer))) {}

  std::unique_ptr<SolutionStream> clone() const override {
    auto c = std::unique_ptr<GeneratorStream>(new GeneratorStream(*this));
    c->reset_counters();
    return c;
  }

 protected:
  void produce(std::size_t index, ComplexPoint& out) override { (*producer_)(index, out); }

 private:
  GeneratorStream(const GeneratorStream&) = default;
  std::shared_ptr<const Producer> producer_;
};

/// Copies a one-shot CSOL byte stream (e.g. stdin) into `spool` and returns a
/// replayable stream over the copy.
inline std::unique_ptr<FileStream> spool(std::istream& in, const std::filesystem::path& spool_path) {
  const csol::Header h = csol::read_header(in);
  std::ofstream out(spool_path, std::ios::binary | std::ios::trunc);
  if (!out) throw StreamError("cannot create spool file " + spool_path.string());
  const std::string header = csol::encode_header(h.d, h.n);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::vector<char> rec(16 * h.n);
  for (std::uint64_t i = 0; i < h.d; ++i) {
    if (!in.read(rec.data(), static_cast<std::streamsize>(rec.size())))
      throw StreamError("candidate input: truncated record");
    out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  }
  out.close();
  if (!out) throw StreamError("spool write failed");
  return std::make_unique<FileStream>(spool_path);
}

/// Drains a stream from its cursor.
inline std::vector<ComplexPoint> collect(SolutionStream& s) {
  std::vector<ComplexPoint> out;
  out.reserve(s.size() - s.position());
  while (const ComplexPoint* p = s.next()) out.push_back(*p);
  return out;
}

}  // namespace itercert
