#pragma once

// Text format for profiles:
//
//   # weinstock profile
//   n = 4
//   N = 64
//   shape = perturbed r0=1 P2=0.2
//   <any further key = value lines>
//   theta,rho
//   0,1.2
//   ...
//
// Node angles must be the standard j pi/(N-1) layout.

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "weinstock/domain.hpp"
#include "weinstock/error.hpp"

namespace weinstock {

using Header = std::map<std::string, std::string>;

inline void write_profile(std::ostream& os, const RadialProfile& profile, const Header& extra = {}) {
  os << "# weinstock profile\n";
  os << "n = " << profile.dim().n << "\n";
  os << "N = " << profile.size() << "\n";
  os << "shape = " << profile.spec().to_string() << "\n";
  for (const auto& [k, v] : extra) {
    if (k == "n" || k == "N" || k == "shape") continue;
    os << k << " = " << v << "\n";
  }
  os << "theta,rho\n";
  const auto old = os.precision(17);
  for (std::size_t j = 0; j < profile.size(); ++j) {
    os << profile.theta()[j] << "," << profile.rho()[j] << "\n";
  }
  os.precision(old);
}

inline void write_profile(const std::string& path, const RadialProfile& profile,
                          const Header& extra = {}) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_profile(os, profile, extra);
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

struct LoadedProfile {
  RadialProfile profile;
  Header header;
};

inline LoadedProfile read_profile(std::istream& is) {
  Header header;
  std::string line;
  bool table = false;
  std::vector<double> theta, rho;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!table) {
      if (line == "theta,rho") {
        table = true;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw DomainError("profile line " + std::to_string(line_no) + ": expected key = value");
      }
      header[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DomainError("profile line " + std::to_string(line_no) + ": expected theta,rho");
    }
    try {
      theta.push_back(std::stod(line.substr(0, comma)));
      rho.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw DomainError("profile line " + std::to_string(line_no) + ": bad number");
    }
  }
  if (!table) throw DomainError("profile: missing theta,rho table");
  if (!header.count("n")) throw DomainError("profile: missing n");
  const int n = std::stoi(header["n"]);
  if (header.count("N") && std::stoul(header["N"]) != rho.size()) {
    throw DomainError("profile: N does not match the node table");
  }
  const auto expected = CosineSeries::nodes(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (std::abs(theta[j] - expected[j]) > 1e-12) {
      throw DomainError("profile: node " + std::to_string(j) + " is not at j pi/(N-1)");
    }
  }
  // the description is kept for the round trip; the node values are what
  // define the profile
  ShapeSpec spec = header.count("shape") ? ShapeSpec::parse(header["shape"]) : ShapeSpec::nodes(rho);
  RadialProfile profile(Dimension(n), rho, std::move(spec));
  return {std::move(profile), std::move(header)};
}

inline LoadedProfile read_profile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_profile(is);
}

}  // namespace weinstock
