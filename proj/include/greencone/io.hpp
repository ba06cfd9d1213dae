#pragma once

// CSV series and the kernel binary format.
//
// Kernel file, little-endian:
//   bytes 0..7    magic "WKAMKRN1"
//   bytes 8..11   uint32 torus dimension n
//   bytes 12..15  uint32 resolution r (nodes per axis)
//   bytes 16..23  float64 t_step
//   then (r^n)^2 float64 entries A(x_i, y_j), row-major in (i, j)
// Node i has coordinates c_d / r with i = sum_d c_d r^d (first axis fastest).

#include "greencone/verification.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <string>

namespace greencone {

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("IoError: " + what) {}
};

/// Shortest text that reads back to the same double; "nan"/"inf" spelled out.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace detail {

inline std::string indexed(const std::string& stem, int i) { return stem + "_" + std::to_string(i + 1); }

inline void sym_header(std::ostream& os, const std::string& stem, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) os << ',' << stem << '_' << (i + 1) << (j + 1);
  }
}

inline void sym_row(std::ostream& os, const SymMatrix& m) {
  for (Eigen::Index i = 0; i < m.dim(); ++i) {
    for (Eigen::Index j = i; j < m.dim(); ++j) os << ',' << format_double(m(i, j));
  }
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

}  // namespace detail

/// t, upper-triangle entries of G_t and G_{-t}, gaps to the previous rung.
inline void write_ladder_csv(std::ostream& os, const GreenResult& g) {
  if (g.table.empty()) {
    os << "t,gap_plus,gap_minus\n";
    return;
  }
  const int n = static_cast<int>(g.table.front().g_plus_t.dim());
  os << 't';
  detail::sym_header(os, "g_plus", n);
  detail::sym_header(os, "g_minus", n);
  os << ",gap_plus,gap_minus\n";
  for (const auto& r : g.table) {
    os << format_double(r.t);
    detail::sym_row(os, r.g_plus_t);
    detail::sym_row(os, r.g_minus_t);
    os << ',' << format_double(r.gap_plus) << ',' << format_double(r.gap_minus) << '\n';
  }
}

/// t, x_i, p_i, H.
template <int Dim>
void write_orbit_csv(std::ostream& os, const std::vector<OrbitSample<Dim>>& orbit) {
  os << 't';
  for (int i = 0; i < Dim; ++i) os << ',' << detail::indexed("x", i);
  for (int i = 0; i < Dim; ++i) os << ',' << detail::indexed("p", i);
  os << ",H\n";
  for (const auto& s : orbit) {
    os << format_double(s.t);
    for (int i = 0; i < Dim; ++i) os << ',' << format_double(s.z.x(i));
    for (int i = 0; i < Dim; ++i) os << ',' << format_double(s.z.p(i));
    os << ',' << format_double(s.energy) << '\n';
  }
}

/// Node coordinates and one value per node.
template <int Dim>
void write_grid_function_csv(std::ostream& os, const GridFunction<Dim>& f, const std::string& name = "value") {
  for (int i = 0; i < Dim; ++i) os << detail::indexed("x", i) << ',';
  os << name << '\n';
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto x = f.grid.node(k);
    for (int i = 0; i < Dim; ++i) os << format_double(x(i)) << ',';
    os << format_double(f[k]) << '\n';
  }
}

/// Per node: coordinates, u, w, gap = u - w, contact flag, I_set flag and
/// the momentum du where the node is in I_set (empty otherwise).
template <int Dim>
void write_solution_csv(std::ostream& os, const ConjugatePairData<Dim>& pair) {
  for (int i = 0; i < Dim; ++i) os << detail::indexed("x", i) << ',';
  os << "u,w,gap,contact,in_iset";
  for (int i = 0; i < Dim; ++i) os << ',' << detail::indexed("p", i);
  os << '\n';
  std::vector<int> iset_slot(pair.u.u.size(), -1);
  std::vector<char> contact(pair.u.u.size(), 0);
  for (std::size_t k = 0; k < pair.i_nodes.size(); ++k) iset_slot[pair.i_nodes[k]] = static_cast<int>(k);
  for (auto k : pair.contact_nodes) contact[k] = 1;
  const auto& grid = pair.u.u.grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto x = grid.node(k);
    for (int i = 0; i < Dim; ++i) os << format_double(x(i)) << ',';
    os << format_double(pair.u.u[k]) << ',' << format_double(pair.w[k]) << ',' << format_double(pair.gap[k]) << ',' << int(contact[k]) << ','
       << (iset_slot[k] >= 0 ? 1 : 0);
    for (int i = 0; i < Dim; ++i) {
      os << ',';
      if (iset_slot[k] >= 0) os << format_double(pair.i_set.samples[static_cast<std::size_t>(iset_slot[k])].p(i));
    }
    os << '\n';
  }
}

/// One row per paratingent direction with both cone margins.
inline void write_directions_csv(std::ostream& os, const TheoremReport& r) {
  const auto n = r.z_x.size();
  os << "i,j,scale";
  for (Eigen::Index d = 0; d < n; ++d) os << ',' << detail::indexed("h", static_cast<int>(d));
  for (Eigen::Index d = 0; d < n; ++d) os << ',' << detail::indexed("k", static_cast<int>(d));
  os << ",margin,pass,modified_margin,modified_pass\n";
  for (const auto& c : r.directions) {
    os << c.dir.i << ',' << c.dir.j << ',' << format_double(c.dir.scale);
    for (Eigen::Index d = 0; d < n; ++d) os << ',' << format_double(c.dir.v.h(d));
    for (Eigen::Index d = 0; d < n; ++d) os << ',' << format_double(c.dir.v.k(d));
    os << ',' << format_double(c.margin) << ',' << (c.pass ? 1 : 0) << ',' << format_double(c.modified_margin) << ','
       << (c.modified_pass ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Kernel binary
// ---------------------------------------------------------------------------

inline constexpr char kKernelMagic[8] = {'W', 'K', 'A', 'M', 'K', 'R', 'N', '1'};

namespace detail {

template <typename T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw IoError("kernel file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

template <int Dim>
void write_kernel(std::ostream& os, const ActionKernel<Dim>& k) {
  os.write(kKernelMagic, sizeof kKernelMagic);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(Dim));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(k.grid.resolution));
  detail::put_le<double>(os, k.t_step);
  for (double v : k.entries) detail::put_le<double>(os, v);
}

template <int Dim>
void write_kernel(const std::string& path, const ActionKernel<Dim>& k) {
  auto f = detail::open_out(path, std::ios::out | std::ios::binary);
  write_kernel(f, k);
}

/// Reads a kernel written by write_kernel; segments and winding are not stored.
template <int Dim>
ActionKernel<Dim> read_kernel(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kKernelMagic, sizeof magic) != 0) {
    throw IoError("not a kernel file");
  }
  const auto dim = detail::get_le<std::uint32_t>(is);
  if (dim != static_cast<std::uint32_t>(Dim)) throw IoError("kernel dimension " + std::to_string(dim));
  const auto res = detail::get_le<std::uint32_t>(is);
  const double t_step = detail::get_le<double>(is);
  ActionKernel<Dim> k{Grid<Dim>(static_cast<int>(res)), t_step, 0, 0, {}};
  const std::size_t n = k.grid.size();
  k.entries.resize(n * n);
  for (auto& v : k.entries) v = detail::get_le<double>(is);
  return k;
}

template <int Dim>
ActionKernel<Dim> read_kernel(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  return read_kernel<Dim>(f);
}

}  // namespace greencone
