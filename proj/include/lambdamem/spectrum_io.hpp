// spectrum_io.hpp - CSV ingestion and emission for Spectrum data.
//
// Format contract: UTF-8, LF line endings, comma separator, '.' decimal,
// no thousands separators. First non-comment line is the header
// `axis_<unit>,value_<unit>` with axis unit one of hz|mev|invcm and value
// unit one of transmission|counts|alpha_invcm|absorption. Lines starting
// with '#' are comments and are ignored on read.

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambdamem/spectroscopy.hpp"

namespace lambdamem {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string axis_unit_tag(AxisUnit u) {
  switch (u) {
    case AxisUnit::Hz: return "hz";
    case AxisUnit::MilliEv: return "mev";
    case AxisUnit::InvCm: return "invcm";
  }
  return "hz";
}

inline std::string value_unit_tag(ValueUnit u) {
  switch (u) {
    case ValueUnit::Transmission: return "transmission";
    case ValueUnit::Counts: return "counts";
    case ValueUnit::AlphaInvCm: return "alpha_invcm";
    case ValueUnit::Absorption: return "absorption";
  }
  return "counts";
}

inline AxisUnit parse_axis_unit(const std::string& tag) {
  if (tag == "hz") return AxisUnit::Hz;
  if (tag == "mev") return AxisUnit::MilliEv;
  if (tag == "invcm") return AxisUnit::InvCm;
  throw FormatError("spectrum csv: unknown axis unit tag '" + tag + "'");
}

inline ValueUnit parse_value_unit(const std::string& tag) {
  if (tag == "transmission") return ValueUnit::Transmission;
  if (tag == "counts") return ValueUnit::Counts;
  if (tag == "alpha_invcm") return ValueUnit::AlphaInvCm;
  if (tag == "absorption") return ValueUnit::Absorption;
  throw FormatError("spectrum csv: unknown value unit tag '" + tag + "'");
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string spectrum_to_csv(const Spectrum& s,
                                   const std::vector<std::string>& comments =
                                       {}) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "axis_" + axis_unit_tag(s.axis_unit) + ",value_" +
         value_unit_tag(s.value_unit) + "\n";
  for (std::size_t i = 0; i < s.axis.size(); ++i)
    out += format_double(s.axis[i]) + "," + format_double(s.values[i]) + "\n";
  return out;
}

inline void write_spectrum_csv(const std::string& path, const Spectrum& s,
                               const std::vector<std::string>& comments = {}) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open for writing: " + path);
  f << spectrum_to_csv(s, comments);
}

inline Spectrum parse_spectrum_csv(std::istream& in) {
  Spectrum s;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw FormatError("spectrum csv: line " + std::to_string(line_no) +
                        ": expected two comma-separated columns");
    const std::string a = line.substr(0, comma);
    const std::string b = line.substr(comma + 1);
    if (!header_seen) {
      if (a.rfind("axis_", 0) != 0 || b.rfind("value_", 0) != 0)
        throw FormatError(
            "spectrum csv: header must be axis_<unit>,value_<unit>, got '" +
            line + "'");
      s.axis_unit = parse_axis_unit(a.substr(5));
      s.value_unit = parse_value_unit(b.substr(6));
      header_seen = true;
      continue;
    }
    try {
      std::size_t pos = 0;
      s.axis.push_back(std::stod(a, &pos));
      if (pos != a.size()) throw std::invalid_argument(a);
      s.values.push_back(std::stod(b, &pos));
      if (pos != b.size()) throw std::invalid_argument(b);
    } catch (const std::exception&) {
      throw FormatError("spectrum csv: line " + std::to_string(line_no) +
                        ": malformed number");
    }
  }
  if (!header_seen) throw FormatError("spectrum csv: missing header row");
  s.validate();
  return s;
}

inline Spectrum read_spectrum_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open: " + path);
  return parse_spectrum_csv(f);
}

// FNV-1a hash of a file's bytes, for artifact provenance
inline std::string file_hash_hex(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open: " + path);
  unsigned long long h = 1469598103934665603ull;
  char c;
  while (f.get(c)) {
    h ^= (unsigned char)c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  return buf;
}

} // namespace lambdamem
