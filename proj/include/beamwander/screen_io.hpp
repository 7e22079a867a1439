#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "beamwander/errors.hpp"
#include "beamwander/phase_screen.hpp"

// Screen dump layout (little-endian):
//
//   offset  size  field
//        0     8  magic "BWSCREEN"
//        8     4  u32 format version (1)
//       12     4  u32 role (0 turbulence layer, 1 source coherence)
//       16     8  u64 n
//       24     8  f64 dx [m]
//       32     8  u64 seed
//       40     8  f64 cn2 [m^-2/3]
//       48     8  f64 inner scale l0 [m]
//       56     8  f64 outer scale L0 [m]
//       64     8  f64 layer thickness dz [m]
//       72     8  f64 q0 [1/m]
//       80     8  f64 coherence length lambda_c [m] (inf for none)
//       88   8n²  f64 phase values [rad], row-major (row = y)
//
// A text sidecar "<path>.txt" repeats the header as key = value lines.

namespace beamwander {

static_assert(std::endian::native == std::endian::little, "screen dumps assume little-endian");

inline constexpr std::array<char, 8> kScreenMagic = {'B', 'W', 'S', 'C', 'R', 'E', 'E', 'N'};
inline constexpr std::uint32_t kScreenFormatVersion = 1;

namespace detail {

template <class T> void put(std::ostream &os, T v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}
template <class T> T get(std::istream &is) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is)
    throw InputMismatchError("truncated screen dump");
  return v;
}

} // namespace detail

inline std::string screen_sidecar_text(const PhaseScreen &s) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "format = beamwander-screen v" << kScreenFormatVersion << "\n"
     << "role = " << (s.role == ScreenRole::turbulence_layer ? "turbulence-layer" : "source-coherence")
     << "\n"
     << "n = " << s.grid.n << "\n"
     << "dx = " << s.grid.dx << " m\n"
     << "seed = " << s.seed << "\n"
     << "cn2 = " << s.spectrum.cn2 << " m^-2/3\n"
     << "inner_scale = " << s.spectrum.inner_scale << " m\n"
     << "outer_scale = " << s.spectrum.outer_scale << " m\n"
     << "dz = " << s.spectrum.dz << " m\n"
     << "q0 = " << s.spectrum.q0 << " 1/m\n"
     << "lambda_c = " << s.spectrum.lambda_c << " m\n";
  return os.str();
}

inline void write_screen(const std::string &path, const PhaseScreen &s) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw Error("cannot open screen dump for writing: " + path);
  os.write(kScreenMagic.data(), kScreenMagic.size());
  detail::put<std::uint32_t>(os, kScreenFormatVersion);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(s.role));
  detail::put<std::uint64_t>(os, s.grid.n);
  detail::put<double>(os, s.grid.dx);
  detail::put<std::uint64_t>(os, s.seed);
  for (double v : {s.spectrum.cn2, s.spectrum.inner_scale, s.spectrum.outer_scale, s.spectrum.dz,
                   s.spectrum.q0, s.spectrum.lambda_c})
    detail::put<double>(os, v);
  const auto flat = s.values.flat();
  os.write(reinterpret_cast<const char *>(flat.data()),
           static_cast<std::streamsize>(flat.size() * sizeof(double)));
  std::ofstream side(path + ".txt");
  side << screen_sidecar_text(s);
  if (!os || !side)
    throw Error("failed writing screen dump: " + path);
}

inline PhaseScreen read_screen(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw Error("cannot open screen dump: " + path);
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kScreenMagic)
    throw InputMismatchError("not a beamwander screen dump: " + path);
  if (detail::get<std::uint32_t>(is) != kScreenFormatVersion)
    throw InputMismatchError("unsupported screen dump version");
  PhaseScreen s;
  const auto role = detail::get<std::uint32_t>(is);
  if (role > 1)
    throw InputMismatchError("unknown screen role");
  s.role = static_cast<ScreenRole>(role);
  s.grid.n = detail::get<std::uint64_t>(is);
  s.grid.dx = detail::get<double>(is);
  s.grid.validate();
  s.seed = detail::get<std::uint64_t>(is);
  s.spectrum.cn2 = detail::get<double>(is);
  s.spectrum.inner_scale = detail::get<double>(is);
  s.spectrum.outer_scale = detail::get<double>(is);
  s.spectrum.dz = detail::get<double>(is);
  s.spectrum.q0 = detail::get<double>(is);
  s.spectrum.lambda_c = detail::get<double>(is);
  s.inner_scale_unresolved = s.spectrum.inner_scale > 0.0 && s.grid.dx > s.spectrum.inner_scale;
  s.values = RealField(s.grid.n);
  auto flat = s.values.flat();
  is.read(reinterpret_cast<char *>(flat.data()),
          static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!is)
    throw InputMismatchError("truncated screen dump");
  return s;
}

} // namespace beamwander
