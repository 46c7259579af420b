#pragma once

// JSON and CSV serialization. Doubles are written in 17 significant digits
// (CSV) or shortest round-trip form (JSON), so reading back is bit-exact.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "blaschke/blaschke.hpp"

namespace blaschke::io {

using json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema violations in structured input.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// FiniteBlaschke <-> {"eta": [re, im], "zeros": [[re, im, multiplicity], ...]}

inline json complex_to_json(complex z) { return json::array({z.real(), z.imag()}); }

inline complex complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw SchemaError(where + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json multiset_to_json(const PointMultiset& s) {
  json arr = json::array();
  for (const auto& e : s.entries()) arr.push_back(json::array({e.point.real(), e.point.imag(), e.multiplicity}));
  return arr;
}

/// Entries are kept exactly as written (no clustering).
inline PointMultiset multiset_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected a list of [re, im, multiplicity]");
  PointMultiset s;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number() || !e[1].is_number() || !e[2].is_number_integer())
      throw SchemaError(where + ": expected [re, im, multiplicity]");
    const int m = e[2].get<int>();
    if (m < 1) throw SchemaError(where + ": multiplicity must be >= 1");
    s.append_exact({e[0].get<double>(), e[1].get<double>()}, m);
  }
  return s;
}

inline json to_json(const FiniteBlaschke& b) {
  return json{{"eta", complex_to_json(b.eta())}, {"zeros", multiset_to_json(b.zeros())}};
}

inline FiniteBlaschke blaschke_from_json(const json& j, const std::string& where = "product") {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (key != "eta" && key != "zeros") throw SchemaError(where + ": unknown key '" + key + "'");
  if (!j.contains("eta") || !j.contains("zeros")) throw SchemaError(where + ": needs 'eta' and 'zeros'");
  return FiniteBlaschke(complex_from_json(j["eta"], where + ".eta"), multiset_from_json(j["zeros"], where + ".zeros"));
}

// ---------------------------------------------------------------------------
// Output files.

struct Header {
  std::string tool;
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
};

inline json header_json(const Header& h) {
  return json{{"tool", h.tool}, {"version", h.version}, {"config_hash", h.config_hash}, {"seed", h.seed}};
}

/// Comma-separated table preceded by '#' header lines and a column row.
class CsvTable {
 public:
  CsvTable(std::initializer_list<std::string> columns) : columns_(columns) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw std::logic_error("CsvTable: row width mismatch");
    rows_.push_back(std::move(cells));
  }

  void add_note(std::string note) { notes_.push_back(std::move(note)); }

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }

  std::string render(const Header& h) const {
    std::string out = "# tool: " + h.tool + "\n# version: " + h.version + "\n# config_hash: " + h.config_hash +
                      "\n# seed: " + std::to_string(h.seed) + "\n";
    for (const auto& n : notes_) out += "# note: " + n + "\n";
    out += join(columns_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    return line + '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> notes_;
};

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(long long v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "1" : "0"; }
inline std::string cell(const char* v) { return v; }
inline std::string cell(const std::string& v) { return v; }

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw IoError("write to '" + path + "' failed");
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace blaschke::io
