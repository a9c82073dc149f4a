#ifndef PEPO_IO_HPP
#define PEPO_IO_HPP

#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pepo/state.hpp"

namespace pepo {

// ---- checkpoint container ------------------------------------------------
//
// Plain-text, line-oriented, versioned. Layout:
//
//   pepo-checkpoint 1
//   local_dim <d>
//   max_bond <D>
//   beta <value>
//   site <0|1> <rank> <extent...>
//   <re> <im>          (one element per line, row-major)
//   lambda <0..3> <n>
//   <value>            (one weight per line)
//
// Numbers are written with 17 significant digits so a round trip is
// bit-faithful for doubles.

inline void savePepo(std::ostream& os, const VectorizedPepo& p, double beta) {
  os << "pepo-checkpoint 1\n";
  os << "local_dim " << p.local_dim << "\n";
  os << "max_bond " << p.max_bond << "\n";
  os << std::setprecision(17);
  os << "beta " << beta << "\n";
  for (std::size_t s = 0; s < 2; ++s) {
    const DenseTensor& t = p.sites[s];
    os << "site " << s << " " << t.rank();
    for (std::size_t k = 0; k < t.rank(); ++k) os << " " << t.extent(k);
    os << "\n";
    for (const Complex& z : t.elements())
      os << z.real() << " " << z.imag() << "\n";
  }
  for (std::size_t b = 0; b < 4; ++b) {
    os << "lambda " << b << " " << p.lambdas[b].size() << "\n";
    for (double v : p.lambdas[b]) os << v << "\n";
  }
}

inline void savePepo(const std::string& path, const VectorizedPepo& p,
                     double beta) {
  std::ofstream f(path);
  if (!f) throw ArgumentError("savePepo: cannot open " + path);
  savePepo(f, p, beta);
  if (!f) throw ArgumentError("savePepo: write failed on " + path);
}

inline VectorizedPepo loadPepo(std::istream& is, double& beta) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "pepo-checkpoint" || version != 1)
    throw ArgumentError("loadPepo: not a version-1 checkpoint");
  VectorizedPepo p;
  std::string key;
  if (!(is >> key >> p.local_dim) || key != "local_dim")
    throw ArgumentError("loadPepo: missing local_dim");
  if (!(is >> key >> p.max_bond) || key != "max_bond")
    throw ArgumentError("loadPepo: missing max_bond");
  if (!(is >> key >> beta) || key != "beta")
    throw ArgumentError("loadPepo: missing beta");
  for (std::size_t i = 0; i < 2; ++i) {
    std::size_t s = 0, rank = 0;
    if (!(is >> key >> s >> rank) || key != "site" || s > 1)
      throw ArgumentError("loadPepo: malformed site header");
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (auto& e : shape) {
      if (!(is >> e) || e == 0)
        throw ArgumentError("loadPepo: malformed site shape");
      n *= e;
    }
    std::vector<Complex> elems(n);
    for (auto& z : elems) {
      double re = 0.0, im = 0.0;
      if (!(is >> re >> im)) throw ArgumentError("loadPepo: short element list");
      z = Complex(re, im);
    }
    p.sites[s] = DenseTensor(std::move(shape), std::move(elems));
  }
  for (std::size_t i = 0; i < 4; ++i) {
    std::size_t b = 0, n = 0;
    if (!(is >> key >> b >> n) || key != "lambda" || b > 3)
      throw ArgumentError("loadPepo: malformed lambda header");
    p.lambdas[b].resize(n);
    for (auto& v : p.lambdas[b])
      if (!(is >> v)) throw ArgumentError("loadPepo: short lambda list");
  }
  return p;
}

inline VectorizedPepo loadPepo(const std::string& path, double& beta) {
  std::ifstream f(path);
  if (!f) throw ArgumentError("loadPepo: cannot open " + path);
  return loadPepo(f, beta);
}

// ---- key=value config ------------------------------------------------------
//
// One `key = value` pair per line; '#' starts a comment; blank lines ignored.
// Values keep internal spaces (lists are comma-separated within one value).

struct ConfigError : ArgumentError {
  using ArgumentError::ArgumentError;
};

inline std::map<std::string, std::string> parseConfig(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  auto strip = [](std::string s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string body = strip(line);
    if (body.empty()) continue;
    std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = strip(body.substr(0, eq));
    std::string val = strip(body.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    kv[key] = val;
  }
  return kv;
}

inline std::map<std::string, std::string> parseConfigFile(
    const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  return parseConfig(f);
}

inline std::vector<double> parseDoubleList(const std::string& s,
                                           const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      double v = std::stod(item, &pos);
      while (pos < item.size() &&
             (item[pos] == ' ' || item[pos] == '\t'))
        ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + item + "' in " + what);
    }
  }
  return out;
}

// ---- CSV number formatting -------------------------------------------------
//
// '.' decimal separator regardless of locale; scientific notation for small
// nonzero magnitudes so they never round to a bare 0 in fixed notation.

inline std::string csvNumber(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  double a = x < 0 ? -x : x;
  if (a != 0.0 && a < 1e-4)
    os << std::scientific << std::setprecision(9) << x;
  else
    os << std::setprecision(12) << x;
  return os.str();
}

}  // namespace pepo

#endif
