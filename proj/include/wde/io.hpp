#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wde/conditions.hpp"
#include "wde/error.hpp"
#include "wde/inequalities.hpp"
#include "wde/linalg.hpp"
#include "wde/moments.hpp"
#include "wde/monte_carlo.hpp"
#include "wde/scenario.hpp"
#include "wde/weights.hpp"

namespace wde {

using Json = nlohmann::ordered_json;

// ---- matrices ----

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return Json{{"dim", m.rows()}, {"rows", std::move(rows)}};
}

/// {"dim": d, "rows": [[...], ...]}; entries must be numbers and the matrix symmetric.
inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows")) throw ConfigError("matrix must be an object with 'rows'");
  for (const auto& [key, value] : j.items()) {
    if (key != "dim" && key != "rows") throw ConfigError("unknown matrix key '" + key + "'");
  }
  const Json& rows = j.at("rows");
  if (!rows.is_array() || rows.empty()) throw ConfigError("matrix rows must be a nonempty array");
  const auto d = static_cast<Eigen::Index>(rows.size());
  if (j.contains("dim") && (!j.at("dim").is_number_integer() || j.at("dim").get<Eigen::Index>() != d)) {
    throw ConfigError("matrix 'dim' does not match the number of rows");
  }
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      throw ConfigError("matrix must be square");
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      const Json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw ConfigError("matrix entries must be numbers");
      m(i, k) = v.get<double>();
    }
  }
  if (!m.allFinite()) throw ConfigError("matrix entries must be finite");
  if (max_abs(m - m.transpose()) > 1e-12 * std::max(1.0, max_abs(m))) {
    throw ConfigError("matrix must be symmetric");
  }
  return m;
}

// ---- weight functions ----

inline Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a nonempty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(what) + " entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline void require_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string("unknown ") + what + " key '" + key + "'");
  }
}

inline std::string wf_type(const Json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("weight function needs a string 'type'");
  }
  return j.at("type").get<std::string>();
}

inline Factor factor_from_json(const Json& j) {
  const std::string type = wf_type(j);
  if (type == "constant") {
    require_keys(j, {"type", "c"}, "factor");
    return Constant{j.value("c", 1.0)};
  }
  if (type == "exp_tilt") {
    require_keys(j, {"type", "t"}, "factor");
    if (!j.contains("t")) throw ConfigError("exp_tilt factor needs 't'");
    const Json& t = j.at("t");
    return ExpTilt{t.is_number() ? Vector::Constant(1, t.get<double>()) : vector_from_json(t, "t")};
  }
  throw ConfigError("unknown factor type '" + type + "'");
}

inline WeightFunction wf_from_json(const Json& j) {
  const std::string type = wf_type(j);
  if (type == "constant") {
    require_keys(j, {"type", "c"}, "weight function");
    const Json c = j.value("c", Json(1.0));
    if (!c.is_number()) throw ConfigError("constant 'c' must be a number");
    return WeightFunction::constant(c.get<double>());
  }
  if (type == "exp_tilt") {
    require_keys(j, {"type", "t"}, "weight function");
    if (!j.contains("t")) throw ConfigError("exp_tilt needs 't'");
    return WeightFunction::exp_tilt(vector_from_json(j.at("t"), "t"));
  }
  if (type == "product") {
    require_keys(j, {"type", "factors"}, "weight function");
    if (!j.contains("factors") || !j.at("factors").is_array()) {
      throw ConfigError("product needs a 'factors' array");
    }
    Product p;
    for (const Json& f : j.at("factors")) p.factors.push_back(factor_from_json(f));
    return WeightFunction(std::move(p));
  }
  throw ConfigError("unknown weight function type '" + type + "'");
}

inline Json factor_to_json(const Factor& f) {
  if (const auto* c = std::get_if<Constant>(&f)) return Json{{"type", "constant"}, {"c", c->c}};
  return Json{{"type", "exp_tilt"}, {"t", std::get<ExpTilt>(f).t(0)}};
}

inline Json to_json(const WeightFunction& wf) {
  Json out;
  const auto& v = wf.variant();
  if (const auto* c = std::get_if<Constant>(&v)) {
    out = Json{{"type", "constant"}, {"c", c->c}};
  } else if (const auto* e = std::get_if<ExpTilt>(&v)) {
    out = Json{{"type", "exp_tilt"}, {"t", std::vector<double>(e->t.data(), e->t.data() + e->t.size())}};
  } else if (const auto* p = std::get_if<Product>(&v)) {
    Json fs = Json::array();
    for (const Factor& f : p->factors) fs.push_back(factor_to_json(f));
    out = Json{{"type", "product"}, {"factors", std::move(fs)}};
  } else {
    out = Json{{"type", "host"}, {"dim", wf.dim()}};
  }
  if (wf.scale() != 1.0) out["scale"] = wf.scale();
  return out;
}

// ---- scenarios ----

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

/// Line of the first occurrence of a quoted key, or 0.
inline std::size_t key_line(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_col(text, pos).first;
}

inline Scenario scenario_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  Scenario sc;
  for (const auto& [key, value] : j.items()) {
    if (key == "matrices") {
      if (!value.is_object()) throw ConfigError("'matrices' must be an object");
      for (const auto& [name, m] : value.items()) {
        if (name != "C" && name != "C1" && name != "C2" && name != "A" && name != "B" && name != "E") {
          throw ConfigError("unknown matrix name '" + name + "'");
        }
        try {
          sc.matrices[name] = matrix_from_json(m);
        } catch (const ConfigError& e) {
          throw ConfigError("matrix '" + name + "': " + e.what());
        }
      }
    } else if (key == "wf") {
      sc.wf = wf_from_json(value);
    } else if (key == "lambda") {
      if (!value.is_number()) throw ConfigError("'lambda' must be a number");
      sc.lambda = value.get<double>();
      sc.require_lambda();
    } else if (key == "p") {
      if (!value.is_number_integer()) throw ConfigError("'p' must be an integer");
      sc.p = value.get<int>();
    } else if (key == "r") {
      if (!value.is_number()) throw ConfigError("'r' must be a number");
      sc.r = value.get<double>();
    } else {
      throw ConfigError("unknown scenario key '" + key + "'");
    }
  }
  return sc;
}

/// Parses scenario text; errors carry "source:line:col" when a location is known.
inline Scenario parse_scenario(const std::string& text, const std::string& source = "scenario") {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": malformed JSON: " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const Error& e) {
    std::string msg = e.what();
    std::size_t line = 0;
    const auto open = msg.find('\'');
    if (open != std::string::npos) {
      const auto close = msg.find('\'', open + 1);
      if (close != std::string::npos) line = key_line(text, msg.substr(open + 1, close - open - 1));
    }
    throw ConfigError(source + ":" + (line ? std::to_string(line) + ": " : " ") + msg);
  }
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

inline Json to_json(const Scenario& sc) {
  Json out;
  Json ms = Json::object();
  for (const auto& [name, m] : sc.matrices) ms[name] = to_json(m);
  out["matrices"] = std::move(ms);
  out["wf"] = to_json(sc.wf);
  if (sc.lambda) out["lambda"] = *sc.lambda;
  if (sc.p) out["p"] = *sc.p;
  if (sc.r) out["r"] = *sc.r;
  return out;
}

// ---- reports ----

inline Json to_json(const Estimate& e) {
  return Json{{"value", e.value}, {"stderr", e.std_error}, {"n", e.n}, {"seed", e.seed}};
}

inline Json to_json(const EvalOptions& opt) {
  return Json{{"samples", opt.sampling.n_samples},
              {"seed", opt.sampling.seed},
              {"chunk_size", opt.sampling.chunk_size},
              {"zcrit", opt.zcrit},
              {"tolerance", opt.tolerance},
              {"force_monte_carlo", opt.force_monte_carlo}};
}

inline Json to_json(const ConditionReport& r) {
  Json parts = Json::array();
  for (const PartReport& p : r.parts) {
    parts.push_back(Json{{"label", p.label},
                         {"value", p.estimate.value},
                         {"stderr", p.estimate.std_error},
                         {"direction", to_string(p.direction)},
                         {"verdict", to_string(p.verdict)}});
  }
  return Json{{"id", r.id},
              {"method", to_string(r.method)},
              {"parts", std::move(parts)},
              {"verdict", to_string(r.verdict)}};
}

inline Json to_json(const InequalityReport& r) {
  Json out{{"id", r.id},
           {"method", to_string(r.method)},
           {"lhs", to_json(r.lhs)},
           {"rhs", to_json(r.rhs)},
           {"margin", to_json(r.margin)},
           {"direction", to_string(r.direction)}};
  if (!r.chain_values.empty()) {
    Json values = Json::array(), margins = Json::array();
    for (const Estimate& e : r.chain_values) values.push_back(to_json(e));
    for (std::size_t k = 0; k < r.chain_margins.size(); ++k) {
      Json m = to_json(r.chain_margins[k]);
      m["verdict"] = to_string(r.chain_verdicts[k]);
      margins.push_back(std::move(m));
    }
    out["chain_values"] = std::move(values);
    out["chain_margins"] = std::move(margins);
  }
  Json pre = Json::array();
  for (const ConditionReport& c : r.prerequisites) pre.push_back(to_json(c));
  out["prerequisites"] = std::move(pre);
  out["condition_verdict"] = to_string(r.condition_verdict());
  out["verdict"] = to_string(r.verdict);
  out["note"] = r.note;
  return out;
}

inline Json to_json(const ChainValues& c) {
  Json rows = Json::array();
  for (std::size_t k = 0; k < c.values.size(); ++k) {
    rows.push_back(Json{{"label", std::string(1, c.label)},
                        {"d", c.d},
                        {"k", k + 1},
                        {"value", c.values[k].value},
                        {"stderr", c.values[k].std_error}});
  }
  return rows;
}

inline std::string chain_csv(const ChainValues& c) {
  std::ostringstream os;
  os.precision(17);
  os << "label,d,k,value,stderr\n";
  for (std::size_t k = 0; k < c.values.size(); ++k) {
    os << c.label << ',' << c.d << ',' << k + 1 << ',' << c.values[k].value << ','
       << c.values[k].std_error << '\n';
  }
  return os.str();
}

inline Json to_json(const WeightedMoments& m) {
  Json phi = Json::array(), phi_err = Json::array();
  for (const auto& row : m.phi_matrix) {
    Json r = Json::array(), e = Json::array();
    for (const Estimate& x : row) {
      r.push_back(x.value);
      e.push_back(x.std_error);
    }
    phi.push_back(std::move(r));
    phi_err.push_back(std::move(e));
  }
  return Json{{"method", to_string(m.method)},
              {"alpha", to_json(m.alpha)},
              {"phi", std::move(phi)},
              {"phi_stderr", std::move(phi_err)}};
}

inline Json to_json(const SweepPoint& p) {
  return Json{{"grid_value", p.grid_value},
              {"classification", p.classification()},
              {"report", to_json(p.report)}};
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  os.precision(17);
  os << "grid_value,margin,margin_stderr,condition_verdict,inequality_verdict\n";
  for (const SweepPoint& p : points) {
    os << p.grid_value << ',' << p.report.margin.value << ',' << p.report.margin.std_error << ','
       << to_string(p.report.condition_verdict()) << ',' << to_string(p.report.verdict) << '\n';
  }
  return os.str();
}

}  // namespace wde
