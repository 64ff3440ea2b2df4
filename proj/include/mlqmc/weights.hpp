#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace mlqmc {

// Sorted, unique, 1-based coordinate indices.
using Coords = std::vector<std::uint32_t>;

inline bool coords_valid(const Coords& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 1) return false;
    if (i && v[i] <= v[i - 1]) return false;
  }
  return true;
}

inline bool coords_contains(const Coords& v, std::uint32_t j) {
  return std::binary_search(v.begin(), v.end(), j);
}

inline bool coords_subset(const Coords& u, const Coords& v) {
  return std::includes(v.begin(), v.end(), u.begin(), u.end());
}

inline bool coords_disjoint(const Coords& a, const Coords& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return false;
    a[i] < b[j] ? ++i : ++j;
  }
  return true;
}

inline Coords coords_union(const Coords& a, const Coords& b) {
  Coords r;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

// [1..n]
inline Coords coords_range(std::uint32_t n) {
  Coords r(n);
  for (std::uint32_t i = 0; i < n; ++i) r[i] = i + 1;
  return r;
}

enum class WeightKind { product, finite_order, finite_intersection };

struct WeightEntry {
  Coords u;
  double gamma = 0;
  Rational gamma_exact = 0;
  bool exact = false;
};

// Weight assignment gamma_u over finite coordinate sets. Three flavors:
//  - product: gamma_u = prod_{j in u} c j^-q, certified summable by q > 1;
//  - finite_order table: finitely many supported sets, max order omega;
//  - finite_intersection table: additionally declares (eta, rho) and is
//    validated against them (each coordinate in at most eta supported sets,
//    each supported set meets at most 1+rho supported sets).
// gamma_emptyset = 1 always and is implicit.
class WeightModel {
 public:
  WeightKind kind = WeightKind::product;

  // product form
  double c = 0, q = 0;
  Rational c_exact = 0;
  bool c_has_exact = false;
  long q_int = 0;
  bool q_is_int = false;

  // table form
  std::vector<WeightEntry> entries;
  unsigned order = 0;  // omega = max |u|
  unsigned eta = 0, rho = 0;

  bool is_product() const { return kind == WeightKind::product; }
  bool is_fiw() const { return kind == WeightKind::finite_intersection; }

  static WeightModel product_weights(const std::string& c_str, const std::string& q_str) {
    WeightModel w;
    w.kind = WeightKind::product;
    w.c_exact = parse_rational(c_str);
    w.c_has_exact = true;
    w.c = to_double(w.c_exact);
    Rational qr = parse_rational(q_str);
    w.q = to_double(qr);
    if (denominator(qr) == 1 && numerator(qr) >= 0) {
      w.q_is_int = true;
      w.q_int = long(numerator(qr));
    }
    w.check_product();
    return w;
  }

  static WeightModel product_weights(double c, double q) {
    WeightModel w;
    w.kind = WeightKind::product;
    w.c = c;
    w.q = q;
    w.check_product();
    return w;
  }

  static WeightModel table(std::vector<WeightEntry> entries, WeightKind kind,
                           unsigned eta = 0, unsigned rho = 0) {
    if (kind == WeightKind::product) throw usage_error("WeightModel::table: product kind");
    WeightModel w;
    w.kind = kind;
    w.entries = std::move(entries);
    w.eta = eta;
    w.rho = rho;
    w.check_table();
    return w;
  }

  // gamma_j for singletons of product weights.
  double gamma1(std::uint64_t j) const {
    if (!is_product()) throw usage_error("gamma1: not product weights");
    return c * std::pow(double(j), -q);
  }

  Rational gamma1_exact(std::uint64_t j) const {
    if (!exact_capable()) throw usage_error("gamma1_exact: weights not exactly representable");
    return c_exact / ipow(BigInt(j), unsigned(q_int));
  }

  bool exact_capable() const {
    if (is_product()) return c_has_exact && q_is_int;
    for (const auto& e : entries)
      if (!e.exact) return false;
    return true;
  }

  double gamma(const Coords& u) const {
    if (u.empty()) return 1.0;
    if (is_product()) {
      double g = 1;
      for (auto j : u) g *= gamma1(j);
      return g;
    }
    for (const auto& e : entries)
      if (e.u == u) return e.gamma;
    return 0.0;
  }

  Rational gamma_exact(const Coords& u) const {
    if (u.empty()) return 1;
    if (is_product()) {
      Rational g = 1;
      for (auto j : u) g *= gamma1_exact(j);
      return g;
    }
    for (const auto& e : entries)
      if (e.u == u) {
        if (!e.exact) throw usage_error("gamma_exact: table entry not exact");
        return e.gamma_exact;
      }
    return 0;
  }

  // Mapped dimension for finite-intersection weights: d = eta*(omega-1)+1.
  unsigned fiw_d() const {
    if (!is_fiw()) throw usage_error("fiw_d: weights are not finite-intersection");
    return eta * (order - 1) + 1;
  }

  std::uint32_t max_coordinate() const {
    std::uint32_t m = 0;
    for (const auto& e : entries)
      if (!e.u.empty()) m = std::max(m, e.u.back());
    return m;
  }

  // Text form. Product: single line "product c q". Tables: header
  // "order=O eta=E rho=R kind=fi|fo" followed by "j1,j2,...:gamma" lines.
  static WeightModel parse(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw usage_error("weights: empty input");
    std::istringstream head(line);
    std::string tok;
    head >> tok;
    if (tok == "product") {
      std::string cs, qs;
      if (!(head >> cs >> qs)) throw usage_error("weights: product needs c and q");
      return product_weights(cs, qs);
    }
    // header key=value tokens
    std::map<std::string, std::string> kv;
    {
      std::istringstream h2(line);
      std::string t;
      while (h2 >> t) {
        auto eq = t.find('=');
        if (eq == std::string::npos) throw usage_error("weights: bad header token '" + t + "'");
        kv[t.substr(0, eq)] = t.substr(eq + 1);
      }
    }
    if (!kv.count("kind")) throw usage_error("weights: header missing kind");
    WeightKind kind;
    if (kv["kind"] == "fi") kind = WeightKind::finite_intersection;
    else if (kv["kind"] == "fo") kind = WeightKind::finite_order;
    else throw usage_error("weights: kind must be fi or fo");
    unsigned eta = 0, rho = 0;
    if (kind == WeightKind::finite_intersection) {
      if (!kv.count("eta") || !kv.count("rho"))
        throw usage_error("weights: fi tables must declare eta and rho");
      eta = unsigned(std::stoul(kv["eta"]));
      rho = unsigned(std::stoul(kv["rho"]));
    }
    std::vector<WeightEntry> entries;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto colon = line.find(':');
      if (colon == std::string::npos) throw usage_error("weights: bad entry '" + line + "'");
      WeightEntry e;
      std::istringstream cs(line.substr(0, colon));
      std::string jtok;
      while (std::getline(cs, jtok, ','))
        e.u.push_back(std::uint32_t(std::stoul(jtok)));
      e.gamma_exact = parse_rational(line.substr(colon + 1));
      e.exact = true;
      e.gamma = to_double(e.gamma_exact);
      entries.push_back(std::move(e));
    }
    WeightModel w = table(std::move(entries), kind, eta, rho);
    if (kv.count("order") && unsigned(std::stoul(kv["order"])) != w.order)
      throw usage_error("weights: declared order does not match entries");
    return w;
  }

  // Inline spec: "product:c,q" or "product c q".
  static WeightModel parse_spec(const std::string& s) {
    std::string t = s;
    for (auto& ch : t)
      if (ch == ':' || ch == ',') ch = ' ';
    std::istringstream in(t);
    std::string kindtok, cs, qs;
    if (!(in >> kindtok) || kindtok != "product" || !(in >> cs >> qs))
      throw usage_error("weights: inline spec must be product:c,q");
    return product_weights(cs, qs);
  }

  std::string format() const {
    std::ostringstream out;
    if (is_product()) {
      out << "product " << (c_has_exact ? to_string(c_exact) : std::to_string(c)) << " ";
      if (q_is_int) out << q_int;
      else out << q;
      out << "\n";
      return out.str();
    }
    out << "order=" << order;
    if (is_fiw()) out << " eta=" << eta << " rho=" << rho;
    out << " kind=" << (is_fiw() ? "fi" : "fo") << "\n";
    for (const auto& e : entries) {
      for (std::size_t i = 0; i < e.u.size(); ++i) out << (i ? "," : "") << e.u[i];
      out << ":" << (e.exact ? to_string(e.gamma_exact) : std::to_string(e.gamma)) << "\n";
    }
    return out.str();
  }

 private:
  void check_product() {
    if (c < 0) throw usage_error("weights: product constant must be nonnegative");
    if (!(q > 1)) throw usage_error("weights: product decay q must exceed 1 (summability)");
  }

  void check_table() {
    if (entries.empty()) throw usage_error("weights: empty table");
    order = 0;
    std::vector<Coords> seen;
    for (auto& e : entries) {
      if (e.u.empty()) throw usage_error("weights: empty set in table (gamma_emptyset is implicit)");
      if (!coords_valid(e.u)) throw usage_error("weights: table set must be sorted unique 1-based");
      if (e.gamma < 0) throw usage_error("weights: negative gamma");
      order = std::max<unsigned>(order, unsigned(e.u.size()));
      seen.push_back(e.u);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw usage_error("weights: duplicate set in table");
    if (kind == WeightKind::finite_intersection) validate_fiw();
  }

  void validate_fiw() {
    if (eta == 0) throw usage_error("weights: fi table needs eta >= 1");
    // coordinate -> indices of supported entries containing it
    std::map<std::uint32_t, std::vector<std::size_t>> by_coord;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].gamma == 0 && entries[i].gamma_exact == 0) continue;
      for (auto j : entries[i].u) by_coord[j].push_back(i);
    }
    for (const auto& [j, lst] : by_coord)
      if (lst.size() > eta)
        throw usage_error("weights: coordinate " + std::to_string(j) +
                          " lies in more than eta supported sets");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].gamma == 0 && entries[i].gamma_exact == 0) continue;
      std::vector<std::size_t> touch;
      for (auto j : entries[i].u) {
        const auto& lst = by_coord[j];
        touch.insert(touch.end(), lst.begin(), lst.end());
      }
      std::sort(touch.begin(), touch.end());
      touch.erase(std::unique(touch.begin(), touch.end()), touch.end());
      if (touch.size() > std::size_t(1) + rho)
        throw usage_error("weights: a supported set meets more than 1+rho supported sets");
    }
  }
};

// Coloring phi: coordinate -> column in [1..d] that is injective on every
// supported set. Greedy over coordinates in increasing order; the conflict
// graph has degree <= eta*(omega-1), so d = eta*(omega-1)+1 colors always
// suffice.
inline std::vector<std::uint32_t> fiw_phi_map(const WeightModel& w) {
  if (!w.is_fiw()) throw usage_error("fiw_phi_map: weights are not finite-intersection");
  const unsigned d = w.fiw_d();
  const std::uint32_t maxc = w.max_coordinate();
  std::vector<std::vector<std::uint32_t>> neighbors(maxc + 1);
  for (const auto& e : w.entries) {
    if (e.gamma == 0 && e.gamma_exact == 0) continue;
    for (auto a : e.u)
      for (auto b : e.u)
        if (a != b) neighbors[a].push_back(b);
  }
  std::vector<std::uint32_t> color(maxc + 1, 0);  // 0 = unassigned
  for (std::uint32_t j = 1; j <= maxc; ++j) {
    std::vector<bool> used(d + 1, false);
    for (auto nb : neighbors[j])
      if (nb < j && color[nb]) used[color[nb]] = true;
    std::uint32_t pick = 0;
    for (std::uint32_t col = 1; col <= d; ++col)
      if (!used[col]) {
        pick = col;
        break;
      }
    if (!pick) throw std::logic_error("fiw_phi_map: coloring exceeded d colors");
    color[j] = pick;
  }
  return color;  // color[0] unused
}

}  // namespace mlqmc
