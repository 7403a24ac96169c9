#pragma once

// JSON function specs and CSV writers.
//
//   {"kind": "piecewise_constant", "label": "delta", "breakpoints": [...], "values": [[re, im], ...]}
//   {"kind": "piecewise_linear",   "label": "saw",   "nodes": [...],       "values": [...]}
//   {"kind": "finite_fourier",     "label": "trig",  "sine": [...], "cosine": [...]}
//   {"kind": "indicator_step",     "label": "jump",  "c": [re, im], "a": 1.57}   c * chi_[a, pi]
//   {"kind": "indicator",          "label": "left",  "b": 1.57}                  chi_[0, b]
//   {"kind": "constant",           "label": "one",   "c": 1}
//
// Scalars may be plain numbers or [re, im] pairs.  Positions may also be
// strings such as "pi", "pi/3", "3*pi/4" or "0.25*pi".

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shooting.hpp"
#include "spectrum.hpp"

namespace equiconv {

using json = nlohmann::json;

namespace detail {

inline cplx parse_scalar(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(where + ": expected a number or [re, im]");
}

// Whole-string number, or nullopt.
inline std::optional<double> parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

// Accepts numbers and strings of the form [a*]pi[/b] or [a*]pi[*b].
inline double parse_position(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw ConfigError(where + ": expected a number or a multiple of pi");
  const std::string s = j.get<std::string>();
  auto fail = [&]() -> double { throw ConfigError(where + ": cannot read position '" + s + "'"); };
  const auto p = s.find("pi");
  if (p == std::string::npos) return parse_number(s) ? *parse_number(s) : fail();
  double v = pi;
  std::string pre = s.substr(0, p), post = s.substr(p + 2);
  if (!pre.empty()) {
    if (pre.back() != '*') return fail();
    pre.pop_back();
    const auto a = parse_number(pre);
    if (!a) return fail();
    v *= *a;
  }
  if (!post.empty()) {
    const auto b = parse_number(post.substr(1));
    if (!b || (post[0] != '/' && post[0] != '*')) return fail();
    v = post[0] == '/' ? v / *b : v * *b;
  }
  return v;
}

inline std::vector<cplx> parse_scalars(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_scalar(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> parse_positions(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_position(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline json scalar_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace detail

inline L2Function parse_function(const json& j) {
  if (!j.is_object()) throw ConfigError("function spec: expected an object");
  if (!j.contains("label") || !j["label"].is_string()) throw ConfigError("function spec: 'label' is required");
  const std::string label = j["label"].get<std::string>();
  const std::string where = "function '" + label + "'";
  const std::string kind = detail::field(j, "kind", where).get<std::string>();
  try {
    if (kind == "piecewise_constant")
      return {PiecewiseConstant{detail::parse_positions(detail::field(j, "breakpoints", where), where + ".breakpoints"),
                                detail::parse_scalars(detail::field(j, "values", where), where + ".values")},
              label};
    if (kind == "piecewise_linear")
      return {PiecewiseLinear{detail::parse_positions(detail::field(j, "nodes", where), where + ".nodes"),
                              detail::parse_scalars(detail::field(j, "values", where), where + ".values")},
              label};
    if (kind == "finite_fourier") {
      FiniteFourier ff;
      if (j.contains("sine")) ff.sine = detail::parse_scalars(j["sine"], where + ".sine");
      if (j.contains("cosine")) ff.cosine = detail::parse_scalars(j["cosine"], where + ".cosine");
      return {ff, label};
    }
    if (kind == "indicator_step")
      return make_step(detail::parse_scalar(detail::field(j, "c", where), where + ".c"),
                       detail::parse_position(detail::field(j, "a", where), where + ".a"), label);
    if (kind == "indicator")
      return make_indicator(detail::parse_position(detail::field(j, "b", where), where + ".b"), label);
    if (kind == "constant") return make_constant(detail::parse_scalar(detail::field(j, "c", where), where + ".c"), label);
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown kind '" + kind + "'");
}

inline json to_json(const L2Function& f) {
  json j;
  j["label"] = f.label();
  auto scalars = [](const std::vector<cplx>& v) {
    json a = json::array();
    for (const cplx& z : v) a.push_back(detail::scalar_json(z));
    return a;
  };
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PiecewiseConstant>) {
          j["kind"] = "piecewise_constant";
          j["breakpoints"] = k.breakpoints;
          j["values"] = scalars(k.values);
        } else if constexpr (std::is_same_v<K, PiecewiseLinear>) {
          j["kind"] = "piecewise_linear";
          j["nodes"] = k.nodes;
          j["values"] = scalars(k.values);
        } else {
          j["kind"] = "finite_fourier";
          j["sine"] = scalars(k.sine);
          j["cosine"] = scalars(k.cosine);
        }
      },
      f.kind());
  return j;
}

// ---------------------------------------------------------------------------
// CSV: '.' decimal, ',' separator, header row, LF endings.

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    if (!out_) throw Error("write failed: " + path_.string());
  }

  template <class... T>
  void values(const T&... v) {
    row({cell(v)...});
  }

 private:
  static std::string cell(double v) { return fmt_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_spectrum_csv(const std::filesystem::path& path, const std::vector<RootInfo>& roots) {
  CsvWriter w(path, {"n", "re_lambda", "im_lambda", "abs_phi", "abs_dphi", "simple"});
  for (const auto& r : roots) w.values(r.n, r.lambda.real(), r.lambda.imag(), r.phi_abs, r.dphi_abs, r.simple);
}

inline void write_trace_csv(const std::filesystem::path& path, const ShootingResult& r, const Grid& grid) {
  if (r.trace_omega.size() != grid.size()) throw GridMismatchError("write_trace_csv: trace was not taken on this grid");
  CsvWriter w(path, {"x", "re_omega", "im_omega", "re_quasi", "im_quasi"});
  for (std::size_t i = 0; i < grid.size(); ++i)
    w.values(grid.nodes()[i], r.trace_omega[i].real(), r.trace_omega[i].imag(), r.trace_quasi[i].real(),
             r.trace_quasi[i].imag());
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    const std::string tok = s.substr(pos, end - pos);
    if (!tok.empty()) {
      try {
        std::size_t used = 0;
        out.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("not an integer list: '" + s + "'");
      }
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace equiconv
