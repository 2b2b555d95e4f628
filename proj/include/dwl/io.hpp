#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dwl/ensemble.hpp"
#include "dwl/error.hpp"
#include "dwl/report.hpp"
#include "dwl/spectral_stats.hpp"
#include "dwl/stieltjes.hpp"

namespace dwl {

/// %.17g, enough to round-trip a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string density_csv(const std::vector<double>& x, const std::vector<double>& rho) {
  std::ostringstream out;
  out << "x,rho\n";
  for (std::size_t i = 0; i < x.size(); ++i) out << format_double(x[i]) << ',' << format_double(rho[i]) << '\n';
  return out.str();
}

inline std::string density_csv(const DensityProfile& p) { return density_csv(p.grid, p.values); }

inline json support_json(const SupportProfile& s) {
  json j;
  j["intervals"] = json::array();
  for (const auto& I : s.intervals) j["intervals"].push_back({I.lo, I.hi});
  j["quantiles"] = s.quantiles;
  j["condition_a"] = s.condition_a;
  j["interior_zeros"] = s.interior_zeros;
  return j;
}

/// Header line "# spec <digest>", then one eigenvalue per row, followed by
/// the real and imaginary parts of each eigenvector component when present.
inline std::string sample_csv(const SpectralSample& s, const std::string& digest) {
  std::ostringstream out;
  out << "# spec " << digest << '\n';
  if (!s.provenance.empty()) out << "# provenance " << s.provenance << '\n';
  out << "index,eigenvalue";
  const int n = s.size();
  if (s.eigenvectors)
    for (int j = 0; j < n; ++j) out << ",re" << j << ",im" << j;
  out << '\n';
  for (int i = 0; i < n; ++i) {
    out << i + 1 << ',' << format_double(s.eigenvalues[static_cast<std::size_t>(i)]);
    if (s.eigenvectors)
      for (int j = 0; j < n; ++j) {
        const auto v = (*s.eigenvectors)(j, i);
        out << ',' << format_double(v.real()) << ',' << format_double(v.imag());
      }
    out << '\n';
  }
  return out.str();
}

/// Reads eigenvalues back from sample_csv output (vectors are skipped).
inline SpectralSample read_sample_csv(std::istream& in) {
  SpectralSample s;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.starts_with("# provenance ")) {
      s.provenance = line.substr(13);
      continue;
    }
    if (line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos) throw InvalidArgument("sample csv: malformed row '" + line + "'");
    s.eigenvalues.push_back(detail::parse_double(line.substr(c1 + 1, c2 - c1 - 1), "eigenvalue"));
  }
  return s;
}

inline std::string cloud_csv(const std::vector<RescaledCloud>& clouds) {
  std::ostringstream out;
  out << "trial,x0,scale,u\n";
  for (std::size_t t = 0; t < clouds.size(); ++t)
    for (double u : clouds[t].points)
      out << t << ',' << format_double(clouds[t].x0) << ',' << format_double(clouds[t].scale) << ','
          << format_double(u) << '\n';
  return out.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace dwl
