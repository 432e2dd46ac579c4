#include "exactsdp/problem_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace exactsdp {
namespace {

using nlohmann::json;

constexpr double kAsymmetryTol = 1e-12;

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(where + ": non-finite value");
  return d;
}

Matrix dense_rows(const json& v, Eigen::Index cols, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of rows");
  Matrix m(static_cast<Eigen::Index>(v.size()), cols);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row_where = where + "[" + std::to_string(i) + "]";
    const json& row = v[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError(row_where + ": expected " + std::to_string(cols) +
                       " entries");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          number(row[j], row_where + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

SymMatrix sym_matrix(const json& v, std::size_t n, const std::string& where) {
  const auto dim = static_cast<Eigen::Index>(n);
  Matrix m = dense_rows(v, dim, where);
  if (m.rows() != dim) {
    throw ParseError(where + ": expected " + std::to_string(n) + " rows");
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > kAsymmetryTol) {
        throw ParseError(where + "[" + std::to_string(i) + "][" +
                         std::to_string(j) + "]: asymmetric matrix");
      }
    }
  }
  return SymMatrix::Symmetrized(m);
}

json lift_to_json(const Lift& lift) {
  return {{"mode", lift.mode == LiftMode::kAffine ? "affine" : "slack"},
          {"ell", lift.ell}};
}

Lift lift_from_json(const json& v) {
  const std::string where = "meta.lift";
  const json& mode = require(v, "mode", where);
  const json& ell = require(v, "ell", where);
  if (!mode.is_string() || !ell.is_number_unsigned()) {
    throw ParseError(where + ": malformed lift record");
  }
  Lift lift;
  const auto m = mode.get<std::string>();
  if (m == "affine") {
    lift.mode = LiftMode::kAffine;
  } else if (m == "slack") {
    lift.mode = LiftMode::kSlack;
  } else {
    throw ParseError(where + ".mode: unknown lift mode '" + m + "'");
  }
  lift.ell = ell.get<std::size_t>();
  return lift;
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ConicQcqp problem_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("document: expected an object");
  // An absent version means the current schema.
  if (auto v = doc.find("version"); v != doc.end()) {
    if (!v->is_number_integer() || v->get<int>() != kProblemSchemaVersion) {
      throw ParseError("version: unsupported schema version");
    }
  }
  const json& n_field = require(doc, "n", "document");
  if (!n_field.is_number_unsigned() || n_field.get<std::size_t>() == 0) {
    throw ParseError("n: expected a positive integer");
  }
  const auto n = n_field.get<std::size_t>();

  ConicQcqp p;
  p.Q = sym_matrix(require(doc, "Q", "document"), n, "Q");
  p.H = sym_matrix(require(doc, "H", "document"), n, "H");
  const json& cons = require(doc, "constraints", "document");
  if (!cons.is_array()) throw ParseError("constraints: expected an array");
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const std::string where = "constraints[" + std::to_string(i) + "]";
    const json& c = cons[i];
    if (!c.is_object()) throw ParseError(where + ": expected an object");
    const json& kind = require(c, "kind", where);
    SymMatrix m = sym_matrix(require(c, "matrix", where), n, where + ".matrix");
    if (kind == "eq") {
      p.eq_blocks.push_back(std::move(m));
    } else if (kind == "ineq") {
      p.ineq_blocks.push_back(std::move(m));
    } else {
      throw ParseError(where + ".kind: expected \"eq\" or \"ineq\"");
    }
  }
  if (auto it = doc.find("face_rows"); it != doc.end()) {
    p.face_rows = dense_rows(*it, static_cast<Eigen::Index>(n), "face_rows");
  }
  if (auto it = doc.find("meta"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("meta: expected an object");
    p.meta = *it;
    if (auto lit = p.meta.find("lift"); lit != p.meta.end()) {
      p.lift = lift_from_json(*lit);
    }
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw ParseError(std::string("document: ") + e.what());
  }
  return p;
}

ConicQcqp parse_problem(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what());
  }
  return problem_from_json(doc);
}

json problem_to_json(const ConicQcqp& p) {
  json doc;
  doc["version"] = kProblemSchemaVersion;
  doc["n"] = p.n();
  doc["Q"] = matrix_to_json(p.Q.dense());
  doc["H"] = matrix_to_json(p.H.dense());
  json cons = json::array();
  for (const auto& b : p.eq_blocks) {
    cons.push_back({{"kind", "eq"}, {"matrix", matrix_to_json(b.dense())}});
  }
  for (const auto& b : p.ineq_blocks) {
    cons.push_back({{"kind", "ineq"}, {"matrix", matrix_to_json(b.dense())}});
  }
  doc["constraints"] = std::move(cons);
  if (p.face_rows) doc["face_rows"] = matrix_to_json(*p.face_rows);
  json meta = p.meta.is_object() ? p.meta : json::object();
  if (p.lift) {
    meta["lift"] = lift_to_json(*p.lift);
  } else {
    meta.erase("lift");
  }
  if (!meta.empty()) doc["meta"] = std::move(meta);
  return doc;
}

std::string emit_problem(const ConicQcqp& p) {
  return problem_to_json(p).dump(2) + "\n";
}

ConicQcqp read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open problem file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_problem(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_problem_file(const std::string& path, const ConicQcqp& p) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write problem file '" + path + "'");
  out << emit_problem(p);
}

}  // namespace exactsdp
