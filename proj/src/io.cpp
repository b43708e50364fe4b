// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qwl/errors.hpp"

namespace qwl::io {

namespace {

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

bool is_container(const Json& j) { return j.is_array() || j.is_object(); }

void dump_into(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent < 0 ? "" : std::string(static_cast<size_t>(indent * (depth + 1)), ' ');
  const std::string close = indent < 0 ? "" : std::string(static_cast<size_t>(indent * depth), ' ');
  const char* nl = indent < 0 ? "" : "\n";
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; this keeps complex pairs and matrix rows compact.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return is_container(e); });
      const bool rows = !flat && std::all_of(j.begin(), j.end(), [](const Json& e) {
        return e.is_array() && std::none_of(e.begin(), e.end(), [](const Json& x) {
                 return x.is_array() && std::any_of(x.begin(), x.end(), [](const Json& y) { return is_container(y); });
               }) &&
               std::none_of(e.begin(), e.end(), [](const Json& x) { return x.is_object(); });
      });
      if (flat || indent < 0) {
        out += "[";
        for (size_t i = 0; i < j.size(); ++i) {
          if (i > 0) out += indent < 0 ? "," : ", ";
          dump_into(j[i], -1, 0, out);
        }
        out += "]";
        return;
      }
      out += "[";
      out += nl;
      for (size_t i = 0; i < j.size(); ++i) {
        out += pad;
        if (rows) dump_into(j[i], -1, 0, out);
        else dump_into(j[i], indent, depth + 1, out);
        if (i + 1 < j.size()) out += ",";
        out += nl;
      }
      out += close + "]";
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad + Json(it.key()).dump() + (indent < 0 ? ":" : ": ");
        dump_into(it.value(), indent, depth + 1, out);
        if (i + 1 < j.size()) out += ",";
        out += nl;
      }
      out += close + "}";
      return;
    }
    default:
      out += j.dump();
  }
}

// Collects "path: message" diagnostics while walking a document.
class Checker {
 public:
  std::vector<std::string> diags;

  void add(const std::string& path, const std::string& msg) { diags.push_back((path.empty() ? "$" : path) + ": " + msg); }

  const Json* field(const Json& j, const std::string& key, const std::string& path, bool required = true) {
    if (!j.is_object()) {
      add(path, "expected an object");
      return nullptr;
    }
    if (!j.contains(key)) {
      if (required) add(join(path, key), "missing field");
      return nullptr;
    }
    return &j.at(key);
  }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
  static std::string index(const std::string& path, size_t i) { return path + "[" + std::to_string(i) + "]"; }

  bool number(const Json& j, const std::string& path) {
    if (!j.is_number()) {
      add(path, "expected a number");
      return false;
    }
    if (!std::isfinite(j.get<double>())) {
      add(path, "must be finite");
      return false;
    }
    return true;
  }

  // Integer field >= lo; returns -1 when invalid.
  int integer(const Json& j, const std::string& key, const std::string& path, int lo) {
    const Json* v = field(j, key, path);
    if (v == nullptr) return -1;
    if (!v->is_number_integer()) {
      add(join(path, key), "expected an integer");
      return -1;
    }
    const long long x = v->get<long long>();
    if (x < lo || x > 4096) {
      add(join(path, key), "must be in [" + std::to_string(lo) + ", 4096]");
      return -1;
    }
    return static_cast<int>(x);
  }

  bool complex(const Json& j, const std::string& path) {
    if (j.is_number()) return number(j, path);
    if (!j.is_array() || j.size() != 2) {
      add(path, "expected a complex number [re, im]");
      return false;
    }
    return number(j[0], index(path, 0)) && number(j[1], index(path, 1));
  }

  // Length of a complex vector, or -1.
  int cvector(const Json& j, const std::string& path) {
    if (!j.is_array()) {
      add(path, "expected an array of [re, im] pairs");
      return -1;
    }
    bool ok = true;
    for (size_t i = 0; i < j.size(); ++i) ok = complex(j[i], index(path, i)) && ok;
    return ok ? static_cast<int>(j.size()) : -1;
  }

  // Shape of a matrix given as rows; (-1, -1) when invalid.
  std::pair<int, int> matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
      add(path, "expected a nonempty array of rows");
      return {-1, -1};
    }
    int cols = -1;
    bool ok = true;
    for (size_t r = 0; r < j.size(); ++r) {
      const int c = cvector(j[r], index(path, r));
      if (c < 0) {
        ok = false;
        continue;
      }
      if (cols >= 0 && c != cols) {
        add(index(path, r), "row has " + std::to_string(c) + " entries, expected " + std::to_string(cols));
        ok = false;
      }
      if (cols < 0) cols = c;
    }
    if (!ok) return {-1, -1};
    return {static_cast<int>(j.size()), cols};
  }

  void square_matrix(const Json& j, const std::string& path, int d) {
    const auto [r, c] = matrix(j, path);
    if (r < 0) return;
    if (r != c) add(path, "matrix must be square (got " + std::to_string(r) + " x " + std::to_string(c) + ")");
    else if (d > 0 && r != d) add(path, "matrix must be " + std::to_string(d) + " x " + std::to_string(d) + " (got " + std::to_string(r) + " x " + std::to_string(c) + ")");
  }

  void atom(const Json& j, const std::string& path, int p) {
    if (!j.is_object()) {
      add(path, "expected an atom object {alpha, a, coef}");
      return;
    }
    if (const Json* a = field(j, "alpha", path); a && number(*a, join(path, "alpha")) && !(a->get<double>() > -1.0))
      add(join(path, "alpha"), "alpha must exceed -1");
    if (const Json* a = field(j, "a", path); a && number(*a, join(path, "a")) && !(a->get<double>() > 0.0))
      add(join(path, "a"), "decay a must be positive");
    if (const Json* c = field(j, "coef", path)) {
      const int n = cvector(*c, join(path, "coef"));
      if (n >= 0 && p > 0 && n != p) add(join(path, "coef"), "expected " + std::to_string(p) + " entries, got " + std::to_string(n));
    }
  }

  void atoms(const Json& j, const std::string& path, int p) {
    if (!j.is_array()) {
      add(path, "expected an array of atoms");
      return;
    }
    for (size_t i = 0; i < j.size(); ++i) atom(j[i], index(path, i), p);
  }

  void superop(const Json& j, const std::string& path) {
    const int din = integer(j, "dim_in", path, 1);
    const int dout = integer(j, "dim_out", path, 1);
    const Json* a = field(j, "action", path);
    if (a == nullptr || din < 0 || dout < 0) return;
    const std::string ap = join(path, "action");
    const size_t rows = static_cast<size_t>(dout) * static_cast<size_t>(dout);
    const size_t cols = static_cast<size_t>(din) * static_cast<size_t>(din);
    if (a->is_array() && !a->empty() && (*a)[0].is_array() && !(*a)[0].empty() && (*a)[0][0].is_array()) {
      const auto [r, c] = matrix(*a, ap);
      if (r >= 0 && (static_cast<size_t>(r) != rows || static_cast<size_t>(c) != cols))
        add(ap, "action must be " + std::to_string(rows) + " x " + std::to_string(cols));
      return;
    }
    const int n = cvector(*a, ap);
    if (n >= 0 && static_cast<size_t>(n) != rows * cols)
      add(ap, "flat action needs " + std::to_string(rows * cols) + " entries, got " + std::to_string(n));
  }

  void canonical(const Json& j, const std::string& path) {
    if (const Json* s = field(j, "s", path)) number(*s, join(path, "s"));
    int d = -1;
    if (const Json* y = field(j, "Y", path)) {
      const auto [r, c] = matrix(*y, join(path, "Y"));
      if (r >= 0 && r != c) add(join(path, "Y"), "matrix must be square");
      d = r;
    }
    if (const Json* t = field(j, "terms", path, false)) {
      if (!t->is_array()) {
        add(join(path, "terms"), "expected an array");
        return;
      }
      for (size_t i = 0; i < t->size(); ++i) {
        const std::string tp = index(join(path, "terms"), i);
        if (const Json* l = field((*t)[i], "lambda", tp)) number(*l, join(tp, "lambda"));
        if (const Json* x = field((*t)[i], "X", tp)) square_matrix(*x, join(tp, "X"), d);
      }
    }
  }

  // Weight family body; p = 0 when unknown.
  void family(const Json& j, const std::string& path, int p_outer, int q_outer, int m_outer) {
    const int m = integer(j, "m", path, 1);
    const int q = integer(j, "q", path, 1);
    if (q_outer > 0 && q > 0 && q != q_outer) add(join(path, "q"), "must match the top-level q");
    if (m_outer > 0 && m > 0 && m != m_outer) add(join(path, "m"), "must match the top-level m");
    int p = p_outer;
    if (p <= 0 && j.is_object() && j.contains("p")) p = integer(j, "p", path, 1);
    if (p <= 0 && m > 0 && q > 0) p = q * m;
    if (p > 0 && m > 0 && q > 0 && p < q * m) add(join(path, "p"), "p must be at least q*m");
    if (p_outer <= 0 && j.is_object() && j.contains("units")) units(j.at("units"), join(path, "units"), q, p);
    int k = -1;
    if (const Json* g = field(j, "g", path)) {
      if (!g->is_array()) add(join(path, "g"), "expected an array of atom lists");
      else {
        k = static_cast<int>(g->size());
        for (size_t i = 0; i < g->size(); ++i) atoms((*g)[i], index(join(path, "g"), i), p);
      }
    }
    if (const Json* h = field(j, "h", path, false)) {
      const std::string hp = join(path, "h");
      if (!h->is_array()) {
        add(hp, "expected an array");
        return;
      }
      if (!h->empty() && k >= 0 && static_cast<int>(h->size()) != k) add(hp, "needs one entry per g");
      for (size_t i = 0; i < h->size(); ++i) {
        const Json& hk = (*h)[i];
        if (!hk.is_array()) {
          add(index(hp, i), "expected an array of atom lists");
          continue;
        }
        if (!hk.empty() && q > 0 && static_cast<int>(hk.size()) != q) add(index(hp, i), "needs q atom lists");
        for (size_t n = 0; n < hk.size(); ++n) atoms(hk[n], index(index(hp, i), n), p);
      }
    }
  }

  void units(const Json& j, const std::string& path, int q, int p) {
    if (!j.is_array()) {
      add(path, "expected an array of q^2 matrices");
      return;
    }
    if (q > 0 && static_cast<int>(j.size()) != q * q) add(path, "expected " + std::to_string(q * q) + " matrix units");
    for (size_t i = 0; i < j.size(); ++i) square_matrix(j[i], index(path, i), p);
  }

  void vector_weight(const Json& j, const std::string& path) {
    const int p = integer(j, "p", path, 1);
    const int q = integer(j, "q", path, 1);
    if (const Json* f = field(j, "f", path)) {
      if (!f->is_array()) {
        add(join(path, "f"), "expected an array");
        return;
      }
      for (size_t k = 0; k < f->size(); ++k) {
        const std::string fp = index(join(path, "f"), k);
        if (!(*f)[k].is_array() || (q > 0 && static_cast<int>((*f)[k].size()) != q)) {
          add(fp, "needs q atom lists");
          continue;
        }
        for (size_t i = 0; i < (*f)[k].size(); ++i) atoms((*f)[k][i], index(fp, i), p);
      }
    }
  }

  void qweight(const Json& j, const std::string& path) {
    const int p = integer(j, "p", path, 1);
    const int q = integer(j, "q", path, 1);
    const int m = integer(j, "m", path, 1);
    if (p > 0 && q > 0 && m > 0 && p < q * m) add(join(path, "p"), "p must be at least q*m");
    if (const Json* u = field(j, "units", path)) units(*u, join(path, "units"), q, p);
    if (const Json* psi = field(j, "psi", path)) {
      const std::string pp = join(path, "psi");
      if (psi->is_object() && psi->contains("action")) {
        superop(*psi, pp);
        if (q > 0 && psi->contains("dim_in") && psi->at("dim_in").is_number_integer() &&
            psi->at("dim_in").get<int>() != q)
          add(join(pp, "dim_in"), "psi must act on q x q coordinates");
      } else if (psi->is_object() && psi->contains("s")) {
        canonical(*psi, pp);
      } else {
        add(pp, "expected a superoperator {dim_in, dim_out, action} or a canonical form {s, Y, terms}");
      }
    }
    if (const Json* w = field(j, "weights", path)) family(*w, join(path, "weights"), p, q, m);
  }
};

SchemaKind detect(const Json& j) {
  if (!j.is_object()) return SchemaKind::Auto;
  if (j.contains("weights")) return SchemaKind::QWeightSpec;
  if (j.contains("action")) return SchemaKind::SuperOperator;
  if (j.contains("g")) return SchemaKind::WeightFamily;
  if (j.contains("f")) return SchemaKind::VectorWeight;
  if (j.contains("s") && j.contains("Y")) return SchemaKind::CanonicalForm;
  return SchemaKind::Auto;
}

void require_valid(const Json& j, SchemaKind kind) {
  const std::vector<std::string> d = validate_schema(j, kind);
  if (d.empty()) return;
  std::string msg = "schema violation";
  for (const std::string& s : d) msg += "\n  " + s;
  throw ParseError(msg);
}

std::vector<CMatrix> matrices_from_json(const Json& j) {
  std::vector<CMatrix> out;
  for (const Json& e : j) out.push_back(matrix_from_json(e));
  return out;
}

Json doubles(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json optional_vector(const std::optional<CVector>& v) { return v ? vector_to_json(*v) : Json(nullptr); }

}  // namespace

std::string dump(const Json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  if (indent >= 0) out += "\n";
  return out;
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
}

Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open file for writing");
  out << dump(j);
}

// ---------------------------------------------------------------------------
// Writers.

Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Json vector_to_json(const CVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

Json to_json(const CMatrix& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_to_json(m.row(r).transpose()));
  return a;
}

Json to_json(const SuperOperator& phi) {
  Json j;
  j["dim_in"] = phi.dim_in();
  j["dim_out"] = phi.dim_out();
  Json a = Json::array();
  for (Eigen::Index r = 0; r < phi.action().rows(); ++r)
    for (Eigen::Index c = 0; c < phi.action().cols(); ++c) a.push_back(to_json(phi.action()(r, c)));
  j["action"] = a;
  return j;
}

Json to_json(const CanonicalForm& cf) {
  Json j;
  j["s"] = cf.s;
  j["Y"] = to_json(cf.y);
  Json terms = Json::array();
  for (const InternalTerm& t : cf.internal) terms.push_back(Json{{"lambda", t.lambda}, {"X", to_json(t.x)}});
  j["terms"] = terms;
  return j;
}

Json to_json(const Atom& at) { return Json{{"alpha", at.alpha}, {"a", at.a}, {"coef", vector_to_json(at.coef)}}; }

Json to_json(const AtomList& f) {
  Json a = Json::array();
  for (const Atom& at : f) a.push_back(to_json(at));
  return a;
}

Json to_json(const WeightFamily& w) {
  Json j;
  j["m"] = w.m;
  j["q"] = w.q;
  j["p"] = w.p;
  Json units = Json::array();
  for (const CMatrix& e : w.units) units.push_back(to_json(e));
  j["units"] = units;
  Json g = Json::array();
  for (const AtomList& gk : w.g) g.push_back(to_json(gk));
  j["g"] = g;
  Json h = Json::array();
  for (const auto& hk : w.h) {
    Json row = Json::array();
    for (const AtomList& hi : hk) row.push_back(to_json(hi));
    h.push_back(row);
  }
  j["h"] = h;
  return j;
}

Json to_json(const VectorWeight& vw) {
  Json j;
  j["p"] = vw.p;
  j["q"] = vw.q;
  Json f = Json::array();
  for (const auto& fk : vw.f) {
    Json row = Json::array();
    for (const AtomList& fi : fk) row.push_back(to_json(fi));
    f.push_back(row);
  }
  j["f"] = f;
  return j;
}

Json to_json(const QWeightSpec& spec) {
  Json j;
  j["p"] = spec.w.p;
  j["q"] = spec.w.q;
  j["m"] = spec.w.m;
  Json units = Json::array();
  for (const CMatrix& e : spec.w.units) units.push_back(to_json(e));
  j["units"] = units;
  j["psi"] = to_json(spec.psi);
  Json w = to_json(spec.w);
  w.erase("p");
  w.erase("units");
  j["weights"] = w;
  return j;
}

Json to_json(const CpResult& r) {
  Json j;
  j["verdict"] = r.is_cp;
  j["min_choi_eig"] = r.min_eig;
  j["witness"] = r.is_cp ? Json(nullptr) : vector_to_json(r.witness);
  if (!r.is_cp) {
    Json fam = Json::array();
    for (size_t i = 0; i < r.family_a.size(); ++i)
      fam.push_back(Json{{"A", to_json(r.family_a[i])}, {"f", vector_to_json(r.family_f[i])}});
    j["family"] = fam;
  }
  return j;
}

Json to_json(const ClassResult& r) {
  return Json{{"class", to_string(r.cls)}, {"internal_eigenvalues", doubles(r.eigenvalues)}, {"threshold", r.threshold}};
}

Json to_json(const IdempotentReport& r) {
  return Json{{"verdict", r.holds},          {"cp", r.cp},
              {"contractive", r.contractive}, {"idempotent", r.idempotent},
              {"min_choi_eig", r.min_choi_eig}, {"unit_norm", r.unit_norm},
              {"idempotent_defect", r.idempotent_defect}};
}

Json to_json(const ChoiEffrosStructure& s) {
  Json j;
  j["F"] = to_json(s.f);
  j["I_o"] = to_json(s.unit);
  j["P"] = to_json(s.support.p);
  Json factors = Json::array();
  for (const RangeFactor& f : s.factors) {
    Json units = Json::array();
    for (const CMatrix& e : f.units) units.push_back(to_json(e));
    factors.push_back(Json{{"q", f.q}, {"central", to_json(f.central)}, {"units", units}});
  }
  j["factors"] = factors;
  Json comm = Json::array();
  for (const CMatrix& c : s.commutant) comm.push_back(to_json(c));
  j["commutant_basis"] = comm;
  j["checks"] = Json{{"dominates_support", s.support.dominates_support},
                     {"commutes_with_units", s.support.commutes_with_units},
                     {"absorbs_unit", s.support.absorbs_unit}};
  return j;
}

Json to_json(const SkeletonReport& r) {
  Json j;
  j["verdict"] = r.all();
  j["conditions"] = Json{{"ii_monotone", r.monotone},
                         {"iv_difference_cp", r.difference_cp},
                         {"vi_complement_cp", r.complement_cp},
                         {"vii_conditionally_negative", r.conditionally_negative}};
  Json table = Json::array();
  for (size_t i = 0; i < r.grid.size(); ++i)
    table.push_back(Json{{"t", r.grid[i]},
                         {"i_cp", static_cast<bool>(r.cp[i])},
                         {"iii_cp", static_cast<bool>(r.resolvent_cp[i])},
                         {"iii_norm", r.contraction[i]},
                         {"v_unit_bound", static_cast<bool>(r.unit_bound[i])},
                         {"integration_defect", r.integration_defect[i]},
                         {"integration_tail", r.integration_tail[i]}});
  j["grid"] = table;
  j["integration_tol"] = r.integration_tol;
  j["first_failure"] = r.first_failure;
  return j;
}

Json to_json(const BoundaryRepReport& r) {
  Json table = Json::array();
  for (size_t i = 0; i < r.grid.size(); ++i)
    table.push_back(Json{{"t", r.grid[i]},
                         {"cp", static_cast<bool>(r.cp[i])},
                         {"norm_of_unit_image", r.contraction[i]},
                         {"below_unit", static_cast<bool>(r.below_unit[i])}});
  return Json{{"verdict", r.all()}, {"grid", table}};
}

Json to_json(const ThetaLimitReport& r) {
  Json table = Json::array();
  for (size_t i = 0; i < r.grid.size(); ++i)
    table.push_back(Json{{"t", r.grid[i]},
                         {"w", r.w[i]},
                         {"v", r.v[i]},
                         {"distance_to_psi_ray", r.distance[i]},
                         {"cauchy_step", i == 0 ? Json(nullptr) : Json(r.cauchy[i - 1])}});
  return Json{{"cauchy_monotone", r.cauchy_monotone},
              {"scale", r.scale},
              {"extrapolated_distance", r.extrapolated_distance},
              {"theta_inverse", to_json(r.theta_inverse)},
              {"grid", table},
              {"caveat", "finite-grid diagnostics for a limit statement"}};
}

Json to_json(const PurityCertificate& c) {
  return Json{{"verdict", c.verdict},
              {"condition_i", c.condition_i},
              {"condition_ii", c.condition_ii},
              {"strictly_infinite", c.strictly_infinite},
              {"h_independent", c.h_independent},
              {"condition_iii", c.condition_iii},
              {"witness_i", optional_vector(c.witness_i)},
              {"witness_ii", optional_vector(c.witness_ii)},
              {"witness_iii", optional_vector(c.witness_iii)}};
}

Json to_json(const CornerCertificate& c) {
  Json z = Json::array();
  for (cplx v : c.z) z.push_back(to_json(v));
  return Json{{"verdict", c.hyper_maximal},
              {"s0", c.s0},
              {"Q", to_json(c.q)},
              {"B", to_json(c.b)},
              {"C", to_json(c.c)},
              {"Z0", to_json(c.z0)},
              {"z", z},
              {"real_parts_positive", c.real_parts_positive},
              {"corner_matches_z", c.corner_matches_z},
              {"corner_distinct", c.corner_distinct},
              {"enlarged_pure", c.enlarged_pure},
              {"eta_pure", c.eta_pure},
              {"shur_defect", c.shur_defect},
              {"sweep_size", c.sweep_size}};
}

Json to_json(const IndexZeroReport& r) {
  Json table = Json::array();
  for (size_t i = 0; i < r.grid.size(); ++i) table.push_back(Json{{"t", r.grid[i]}, {"norm", r.norms[i]}});
  return Json{{"s", r.s}, {"monotone", r.monotone}, {"limit", r.limit}, {"grid", table}};
}

// ---------------------------------------------------------------------------
// Readers.

cplx complex_from_json(const Json& j) {
  Checker c;
  c.complex(j, "$");
  if (!c.diags.empty()) throw ParseError(c.diags.front());
  if (j.is_number()) return {j.get<double>(), 0.0};
  return {j[0].get<double>(), j[1].get<double>()};
}

CVector vector_from_json(const Json& j) {
  Checker c;
  if (c.cvector(j, "$") < 0) throw ParseError(c.diags.front());
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

CMatrix matrix_from_json(const Json& j) {
  Checker c;
  const auto [r, cols] = c.matrix(j, "$");
  if (r < 0) throw ParseError(c.diags.front());
  CMatrix m(r, cols);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = complex_from_json(j[static_cast<size_t>(i)][static_cast<size_t>(k)]);
  return m;
}

SuperOperator superop_from_json(const Json& j) {
  require_valid(j, SchemaKind::SuperOperator);
  const int din = j.at("dim_in").get<int>();
  const int dout = j.at("dim_out").get<int>();
  const Json& a = j.at("action");
  CMatrix action(dout * dout, din * din);
  if (a[0].is_array() && !a[0].empty() && a[0][0].is_array()) {
    action = matrix_from_json(a);
  } else {
    for (Eigen::Index r = 0; r < action.rows(); ++r)
      for (Eigen::Index c = 0; c < action.cols(); ++c)
        action(r, c) = complex_from_json(a[static_cast<size_t>(r * action.cols() + c)]);
  }
  return SuperOperator(din, dout, action);
}

CanonicalForm canonical_from_json(const Json& j) {
  require_valid(j, SchemaKind::CanonicalForm);
  CanonicalForm cf;
  cf.s = j.at("s").get<double>();
  cf.y = matrix_from_json(j.at("Y"));
  cf.dim = static_cast<int>(cf.y.rows());
  if (j.contains("terms"))
    for (const Json& t : j.at("terms")) cf.internal.push_back({t.at("lambda").get<double>(), matrix_from_json(t.at("X"))});
  return cf;
}

AtomList atoms_from_json(const Json& j) {
  Checker c;
  c.atoms(j, "$", 0);
  if (!c.diags.empty()) throw ParseError(c.diags.front());
  AtomList out;
  for (const Json& e : j) out.push_back(Atom{e.at("alpha").get<double>(), e.at("a").get<double>(), vector_from_json(e.at("coef"))});
  return out;
}

namespace {

void fill_family(const Json& j, WeightFamily& w) {
  for (const Json& gk : j.at("g")) w.g.push_back(atoms_from_json(gk));
  if (j.contains("h"))
    for (const Json& hk : j.at("h")) {
      std::vector<AtomList> row;
      for (const Json& hi : hk) row.push_back(atoms_from_json(hi));
      w.h.push_back(row);
    }
}

}  // namespace

WeightFamily family_from_json(const Json& j) {
  require_valid(j, SchemaKind::WeightFamily);
  WeightFamily w;
  w.m = j.at("m").get<int>();
  w.q = j.at("q").get<int>();
  w.p = j.contains("p") ? j.at("p").get<int>() : w.q * w.m;
  w.units = j.contains("units") ? matrices_from_json(j.at("units")) : WeightFamily::standard_units(w.q, w.m, w.p);
  fill_family(j, w);
  return w;
}

VectorWeight vector_weight_from_json(const Json& j) {
  require_valid(j, SchemaKind::VectorWeight);
  VectorWeight vw;
  vw.p = j.at("p").get<int>();
  vw.q = j.at("q").get<int>();
  for (const Json& fk : j.at("f")) {
    std::vector<AtomList> row;
    for (const Json& fi : fk) row.push_back(atoms_from_json(fi));
    vw.f.push_back(row);
  }
  return vw;
}

QWeightSpec qweight_spec_from_json(const Json& j) {
  require_valid(j, SchemaKind::QWeightSpec);
  QWeightSpec spec;
  spec.w.p = j.at("p").get<int>();
  spec.w.q = j.at("q").get<int>();
  spec.w.m = j.at("m").get<int>();
  spec.w.units = matrices_from_json(j.at("units"));
  fill_family(j.at("weights"), spec.w);
  const Json& psi = j.at("psi");
  spec.psi = psi.contains("action") ? superop_from_json(psi) : reassemble(canonical_from_json(psi));
  return spec;
}

std::vector<std::string> validate_schema(const Json& j, SchemaKind kind) {
  Checker c;
  if (kind == SchemaKind::Auto) kind = detect(j);
  switch (kind) {
    case SchemaKind::SuperOperator:
      c.superop(j, "");
      break;
    case SchemaKind::CanonicalForm:
      c.canonical(j, "");
      break;
    case SchemaKind::WeightFamily:
      c.family(j, "", 0, 0, 0);
      break;
    case SchemaKind::VectorWeight:
      c.vector_weight(j, "");
      break;
    case SchemaKind::QWeightSpec:
      c.qweight(j, "");
      break;
    case SchemaKind::Auto:
      c.add("", "unrecognized document: expected a superoperator, canonical form, weight family, vector weight or q-weight spec");
  }
  return c.diags;
}

std::vector<std::string> validate_schema_file(const std::string& path, SchemaKind kind) {
  try {
    return validate_schema(read_file(path), kind);
  } catch (const std::exception& e) {
    return {e.what()};
  }
}

}  // namespace qwl::io
