#pragma once

// Field generators and the binary field file: one JSON header line, a
// newline, then the cell values as raw little-endian float64.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pjn/error.hpp"
#include "pjn/field.hpp"

namespace pjn {

struct GeneratorParams {
  double a = 0.0;              // constant value
  double jump = 4.0;           // time_step jump J
  double step_time = 0.0;      // time_step jump location s
  bool nonincreasing = false;  // time_step direction
  double slope = 1.0;          // time_ramp slope
  std::vector<double> spike;   // log_spike point (n+1 coordinates); domain center if empty
  double cap = 1e3;            // log_spike clamp
};

inline const std::vector<std::string>& generator_presets() {
  static const std::vector<std::string> names{"constant", "time_step", "time_ramp", "random_cells", "log_spike"};
  return names;
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine output.
inline double unit_from_bits(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

inline GridField generate(const std::string& preset, const GeneratorParams& gp, const Box& domain,
                          const std::vector<std::size_t>& resolution, GeometryParams params, std::uint64_t seed) {
  auto time_of = [](std::span<const double> pt) { return pt.back(); };
  if (preset == "constant") {
    return GridField::sample(domain, resolution, params, [&](std::span<const double>) { return gp.a; });
  }
  if (preset == "time_step") {
    const double hi = 0.5 * gp.jump;
    return GridField::sample(domain, resolution, params, [&](std::span<const double> pt) {
      const bool before = time_of(pt) < gp.step_time;
      if (gp.nonincreasing) return before ? hi : -hi;
      return before ? -hi : hi;
    });
  }
  if (preset == "time_ramp") {
    return GridField::sample(domain, resolution, params,
                             [&](std::span<const double> pt) { return gp.slope * time_of(pt); });
  }
  if (preset == "random_cells") {
    std::mt19937_64 engine(seed);
    return GridField::sample(domain, resolution, params,
                             [&](std::span<const double>) { return 2.0 * unit_from_bits(engine()) - 1.0; });
  }
  if (preset == "log_spike") {
    std::vector<double> centre = gp.spike;
    if (centre.empty()) {
      centre.resize(domain.dims());
      for (std::size_t a = 0; a < domain.dims(); ++a) centre[a] = 0.5 * (domain.lo[a] + domain.hi[a]);
    }
    if (centre.size() != domain.dims()) throw RangeError("log_spike point must have n+1 coordinates");
    return GridField::sample(domain, resolution, params, [&](std::span<const double> pt) {
      double d2 = 0.0;
      for (std::size_t a = 0; a < pt.size(); ++a) d2 += (pt[a] - centre[a]) * (pt[a] - centre[a]);
      if (d2 == 0.0) return gp.cap;
      return std::min(gp.cap, -0.5 * std::log(d2));
    });
  }
  throw RangeError("unknown generator preset '" + preset + "'");
}

namespace detail {

inline std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFU) << (8 * (7 - i));
    return r;
  }
}

}  // namespace detail

inline nlohmann::json field_header(const GridField& f) {
  return nlohmann::json{{"n", f.params().n},
                        {"p", f.params().p},
                        {"resolution", f.resolution()},
                        {"lo", f.domain().lo},
                        {"hi", f.domain().hi},
                        {"dtype", "f64le"},
                        {"payload_bytes", f.values().size() * 8}};
}

inline void write_field(std::ostream& os, const GridField& f) {
  os << field_header(f).dump() << '\n';
  for (double v : f.values()) {
    std::uint64_t bits = detail::to_little(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    os.write(buf, 8);
  }
  if (!os) throw FormatError("failed writing field payload");
}

inline GridField read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("missing field header line");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field header is not valid JSON: ") + e.what());
  }
  try {
    if (h.at("dtype").get<std::string>() != "f64le") throw FormatError("unsupported dtype, expected f64le");
    GeometryParams params(h.at("n").get<int>(), h.at("p").get<double>());
    auto res = h.at("resolution").get<std::vector<std::size_t>>();
    Box domain(h.at("lo").get<std::vector<double>>(), h.at("hi").get<std::vector<double>>());
    std::size_t count = 1;
    for (auto r : res) count *= r;
    const auto bytes = h.at("payload_bytes").get<std::size_t>();
    if (bytes != count * 8) throw FormatError("payload_bytes does not match resolution");
    std::vector<double> vals(count);
    for (std::size_t i = 0; i < count; ++i) {
      char buf[8];
      if (!is.read(buf, 8)) throw FormatError("field payload is truncated");
      std::uint64_t bits;
      std::memcpy(&bits, buf, 8);
      vals[i] = std::bit_cast<double>(detail::to_little(bits));
    }
    if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after field payload");
    return GridField(std::move(domain), std::move(res), std::move(vals), params);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed field header: ") + e.what());
  } catch (const Error& e) {
    if (dynamic_cast<const FormatError*>(&e)) throw;
    throw FormatError(std::string("invalid field header: ") + e.what());
  }
}

inline void save_field(const std::string& path, const GridField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  write_field(os, f);
}

inline GridField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return read_field(is);
}

}  // namespace pjn
