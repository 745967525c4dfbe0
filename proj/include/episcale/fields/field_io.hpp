#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "episcale/core/format.hpp"
#include "episcale/fields/grid_field.hpp"

namespace episcale {

/// Columns x, y, fS, fI, fR; one row per cell, row-major.
inline void write_field_csv(std::ostream& out, const GridField& f) {
  out << "x,y,fS,fI,fR\n";
  for (std::size_t c = 0; c < f.cells(); ++c) {
    const Point x = f.center(c);
    out << detail::format_double(x.x) << ',' << detail::format_double(x.y) << ','
        << detail::format_double(f.at(HealthState::S, c)) << ','
        << detail::format_double(f.at(HealthState::I, c)) << ','
        << detail::format_double(f.at(HealthState::R, c)) << '\n';
  }
}

/// One ASCII header line "episcale-field v1 n=<n> h=<h> t=<t>" followed by
/// 3 n^2 little-endian float64 values in storage order (S, I, R blocks).
inline void write_field_binary(std::ostream& out, const GridField& f) {
  out << "episcale-field v1 n=" << f.n() << " h=" << detail::format_double(f.h())
      << " t=" << detail::format_double(f.time()) << '\n';
  for (double v : f.values()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
}

inline GridField read_field_binary(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("field file: missing header");
  std::istringstream hs(header);
  std::string magic, version, n_tok, h_tok, t_tok;
  hs >> magic >> version >> n_tok >> h_tok >> t_tok;
  if (magic != "episcale-field") throw std::runtime_error("field file: bad magic");
  if (version != "v1") throw std::runtime_error("field file: unsupported version " + version);
  if (n_tok.rfind("n=", 0) != 0 || t_tok.rfind("t=", 0) != 0)
    throw std::runtime_error("field file: malformed header");
  const std::size_t n = std::stoul(n_tok.substr(2));
  GridField f(n, std::stod(t_tok.substr(2)));
  for (double& v : f.values()) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw std::runtime_error("field file: truncated data");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
  return f;
}

}  // namespace episcale
