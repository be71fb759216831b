#pragma once

// FLD1 field container and PGM image ingestion.
//
// FLD1 layout: magic "FLD1", u32 dimension d, then per axis u64 node count
// and f64 length, then the node values as f64, all little-endian, row major
// with the last axis fastest. No origin slot: files always describe grids
// anchored at 0.

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <entroreg/error.hpp>
#include <entroreg/grid.hpp>

namespace entroreg {
namespace detail {

inline std::uint64_t byteswap64(std::uint64_t x) {
  x = ((x & 0x00000000FFFFFFFFull) << 32) | (x >> 32);
  x = ((x & 0x0000FFFF0000FFFFull) << 16) | ((x >> 16) & 0x0000FFFF0000FFFFull);
  x = ((x & 0x00FF00FF00FF00FFull) << 8) | ((x >> 8) & 0x00FF00FF00FF00FFull);
  return x;
}

inline void put_u32(std::string& out, std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    v = (std::uint32_t)(byteswap64((std::uint64_t)v << 32));
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

inline void put_u64(std::string& out, std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) v = byteswap64(v);
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

inline void put_f64(std::string& out, double x) {
  std::uint64_t v;
  std::memcpy(&v, &x, 8);
  put_u64(out, v);
}

struct ByteReader {
  const unsigned char* p;
  std::size_t left;
  const std::string& name;

  void need(std::size_t n, const char* what) {
    if (left < n)
      throw InputError(name + ": truncated file while reading " + what);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    left -= 4;
    if constexpr (std::endian::native == std::endian::big)
      v = (std::uint32_t)(byteswap64((std::uint64_t)v << 32));
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    p += 8;
    left -= 8;
    if constexpr (std::endian::native == std::endian::big) v = byteswap64(v);
    return v;
  }
  double f64(const char* what) {
    std::uint64_t v = u64(what);
    double x;
    std::memcpy(&x, &v, 8);
    return x;
  }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open");
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw InputError(path + ": read failure");
  return data;
}

}  // namespace detail

inline constexpr std::size_t kMaxFileNodes = (std::size_t)1 << 28;

inline void write_fld(const std::string& path, const ScalarField& f) {
  f.check_finite(path.c_str());
  for (int a = 0; a < f.grid.dim(); ++a)
    if (f.grid.origin(a) != 0.0)
      throw InputError(path + ": FLD1 stores origin-0 grids only");
  std::string out;
  out.reserve(16 + f.grid.dim() * 16 + f.values.size() * 8);
  out.append("FLD1", 4);
  detail::put_u32(out, (std::uint32_t)f.grid.dim());
  for (int a = 0; a < f.grid.dim(); ++a) {
    detail::put_u64(out, (std::uint64_t)f.grid.extent(a));
    detail::put_f64(out, f.grid.length(a));
  }
  for (double x : f.values) detail::put_f64(out, x);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError(path + ": cannot open for writing");
  os.write(out.data(), (std::streamsize)out.size());
  if (!os.good()) throw InputError(path + ": write failure");
}

inline ScalarField read_fld(const std::string& path) {
  const std::string data = detail::slurp(path);
  detail::ByteReader r{(const unsigned char*)data.data(), data.size(), path};
  r.need(4, "magic");
  if (std::memcmp(r.p, "FLD1", 4) != 0)
    throw InputError(path + ": not an FLD1 file (bad magic)");
  r.p += 4;
  r.left -= 4;
  const std::uint32_t d = r.u32("dimension");
  if (d < 1 || d > (std::uint32_t)kMaxDim)
    throw InputError(path + ": dimension must be 1, 2, or 3");
  std::vector<std::size_t> extents;
  std::vector<double> lengths;
  std::size_t nodes = 1;
  for (std::uint32_t a = 0; a < d; ++a) {
    const std::uint64_t n = r.u64("node count");
    const double len = r.f64("axis length");
    if (n < 2) throw InputError(path + ": axis with fewer than 2 nodes");
    if (n > kMaxFileNodes || nodes > kMaxFileNodes / n)
      throw InputError(path + ": grid too large");
    nodes *= (std::size_t)n;
    extents.push_back((std::size_t)n);
    lengths.push_back(len);
  }
  Grid g = Grid::make(extents, lengths);  // validates lengths
  if (r.left != nodes * 8)
    throw InputError(path + ": payload size does not match the declared grid");
  ScalarField f = ScalarField::zeros(g);
  for (std::size_t i = 0; i < nodes; ++i) f.values[i] = r.f64("node value");
  f.check_finite(path.c_str());
  return f;
}

// PGM (P2 ASCII / P5 binary), pixel values mapped linearly to [0, 1].
// Axis 0 is the image row, axis 1 the column; the longer side gets length 1
// and the other side keeps the pixel aspect ratio.
inline ScalarField read_pgm(const std::string& path) {
  const std::string data = detail::slurp(path);
  std::size_t pos = 0;
  auto skip_space = [&](bool required) {
    std::size_t start = pos;
    while (pos < data.size()) {
      if (std::isspace((unsigned char)data[pos])) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    if (required && pos == start)
      throw InputError(path + ": malformed PGM header");
  };
  auto next_int = [&](const char* what) -> long {
    skip_space(false);
    std::size_t start = pos;
    while (pos < data.size() && std::isdigit((unsigned char)data[pos])) ++pos;
    if (pos == start)
      throw InputError(path + ": expected integer for " + what);
    return std::stol(data.substr(start, pos - start));
  };

  if (data.size() < 2 || data[0] != 'P' || (data[1] != '2' && data[1] != '5'))
    throw InputError(path + ": not a P2/P5 PGM file");
  const bool binary = data[1] == '5';
  pos = 2;
  const long w = next_int("width");
  const long h = next_int("height");
  const long maxval = next_int("maxval");
  if (w < 2 || h < 2)
    throw InputError(path + ": image must be at least 2x2");
  if (maxval < 1 || maxval > 65535)
    throw InputError(path + ": maxval out of range");
  if ((std::size_t)w * (std::size_t)h > kMaxFileNodes)
    throw InputError(path + ": image too large");

  const std::size_t count = (std::size_t)w * (std::size_t)h;
  std::vector<double> pix(count);
  if (binary) {
    if (pos >= data.size() || !std::isspace((unsigned char)data[pos]))
      throw InputError(path + ": malformed PGM header");
    ++pos;  // single whitespace byte before the raster
    const int bytes = maxval > 255 ? 2 : 1;
    if (data.size() - pos < count * (std::size_t)bytes)
      throw InputError(path + ": truncated pixel data");
    const unsigned char* b = (const unsigned char*)data.data() + pos;
    for (std::size_t i = 0; i < count; ++i) {
      long v = bytes == 1 ? b[i] : (long)(b[2 * i] << 8 | b[2 * i + 1]);
      if (v > maxval) throw InputError(path + ": pixel exceeds maxval");
      pix[i] = (double)v / (double)maxval;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      long v = next_int("pixel");
      if (v > maxval) throw InputError(path + ": pixel exceeds maxval");
      pix[i] = (double)v / (double)maxval;
    }
  }

  const double unit = 1.0 / (double)(std::max(w, h) - 1);
  Grid g = Grid::make({(std::size_t)h, (std::size_t)w},
                      {(double)(h - 1) * unit, (double)(w - 1) * unit});
  ScalarField f = ScalarField::zeros(g);
  f.values = std::move(pix);
  return f;
}

}  // namespace entroreg
