#include "fluxrelax/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "fluxrelax/diagnostics.hpp"
#include "fluxrelax/errors.hpp"

namespace fluxrelax::io {

namespace {

using nlohmann::json;

struct Location {
  std::size_t line = 1;
  std::size_t column = 1;
};

Location locate(std::string_view text, std::size_t offset) {
  Location loc;
  offset = std::min(offset, text.size());
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

std::string where(const std::string& source, Location loc) {
  std::ostringstream s;
  s << source << ":" << loc.line << ":" << loc.column;
  return s.str();
}

// Forward iterator over a string that records how far the parser has read.
class CountingIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator() = default;
  CountingIterator(const char* p, const char* base, std::size_t* high) : p_(p), base_(base), high_(high) {}

  reference operator*() const { return *p_; }
  CountingIterator& operator++() {
    ++p_;
    *high_ = static_cast<std::size_t>(p_ - base_);
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const CountingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_ = nullptr;
  const char* base_ = nullptr;
  std::size_t* high_ = nullptr;
};

struct KeyPosition {
  std::size_t offset = 0;  // of the opening quote
};

// Parses JSON rejecting duplicate keys. Top-level key positions are returned
// so that callers can report unknown keys with a location.
json parse_strict(std::string_view text, const std::string& source,
                  std::map<std::string, KeyPosition>* top_keys) {
  std::size_t consumed = 0;
  std::vector<std::set<std::string>> seen;
  const char* base = text.data();
  CountingIterator first(base, base, &consumed);
  CountingIterator last(base + text.size(), base, &consumed);

  json::parser_callback_t cb = [&](int depth, json::parse_event_t event, json& parsed) -> bool {
    switch (event) {
      case json::parse_event_t::object_start:
        seen.emplace_back();
        break;
      case json::parse_event_t::object_end:
        if (!seen.empty()) seen.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        // The lexer stops right after the closing quote of the key.
        const std::size_t raw = json(key).dump().size();
        const std::size_t start = consumed >= raw ? consumed - raw : 0;
        if (!seen.empty() && !seen.back().insert(key).second) {
          throw DataError(where(source, locate(text, start)) + ": duplicate key \"" + key + "\"");
        }
        if (depth == 1 && top_keys != nullptr) (*top_keys)[key] = KeyPosition{start};
        break;
      }
      default:
        break;
    }
    return true;
  };

  try {
    return json::parse(first, last, cb);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    if (auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw DataError(where(source, locate(text, offset)) + ": invalid JSON: " + msg);
  }
}

void check_schema_tag(const json& doc, std::string_view kind, const std::string& source) {
  if (doc.contains("schema") && doc["schema"] != std::string(kSchemaId)) {
    throw DataError(source + ": unsupported schema " + doc["schema"].dump() + " (expected \"" +
                    std::string(kSchemaId) + "\")");
  }
  if (doc.contains("kind") && doc["kind"] != std::string(kind)) {
    throw DataError(source + ": expected kind \"" + std::string(kind) + "\", found " +
                    doc["kind"].dump());
  }
}

double number_field(const json& doc, const std::string& key, const std::string& source) {
  const json& v = doc.at(key);
  if (!v.is_number()) throw DataError(source + ": \"" + key + "\" must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw DataError(source + ": \"" + key + "\" must be finite");
  return d;
}

std::string string_field(const json& doc, const std::string& key, const std::string& source) {
  const json& v = doc.at(key);
  if (!v.is_string()) throw DataError(source + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

struct Plausible {
  const char* key;
  double lo;
  double hi;
};

constexpr std::array<Plausible, 8> kPlausibility = {{
    {"ej_ghz", 0.1, 100.0},
    {"ec_ghz", 0.1, 20.0},
    {"el_ghz", 0.01, 20.0},
    {"omega_res_ghz", 1.0, 20.0},
    {"g_mhz", 1.0, 1000.0},
    {"kappa_mhz", 0.001, 100.0},
    {"sqrt_a_phi_uphi0", 0.01, 100.0},
    {"t_qubit_k", 0.001, 1.0},
}};

const std::vector<std::string> kDeviceRequired = {"qubit_id",      "ej_ghz", "ec_ghz",    "el_ghz",
                                                  "omega_res_ghz", "g_mhz",  "kappa_mhz", "sqrt_a_phi_uphi0"};
const std::set<std::string> kDeviceOptional = {
    "schema",   "kind",      "process_label", "n_array", "junction_area_um2", "c_drive_f",
    "m_drive_wb_per_a", "t_qubit_k", "t_res_k", "z0_ohm", "x_qp", "gap_ghz", "qc_eff",
    "epsilon",  "alpha"};

double parse_number(std::string_view field, const std::string& what) {
  std::string_view s = field;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(what + ": cannot parse \"" + std::string(field) + "\" as a number");
  }
  return v;
}

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

std::string trimmed(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

struct Header {
  std::map<std::string, std::size_t> index;
};

Header read_header(const CsvRow& row, const std::set<std::string>& required,
                   const std::set<std::string>& optional, const std::string& source) {
  Header h;
  for (std::size_t i = 0; i < row.fields.size(); ++i) {
    const std::string name = trimmed(row.fields[i]);
    if (!required.contains(name) && !optional.contains(name)) {
      throw DataError(source + ":" + std::to_string(row.line) + ": unknown column \"" + name + "\"");
    }
    if (!h.index.emplace(name, i).second) {
      throw DataError(source + ":" + std::to_string(row.line) + ": duplicate column \"" + name + "\"");
    }
  }
  std::string missing;
  for (const auto& r : required) {
    if (!h.index.contains(r)) missing += (missing.empty() ? "" : ", ") + r;
  }
  if (!missing.empty()) {
    throw DataError(source + ": header is missing required column(s): " + missing);
  }
  return h;
}

std::string stem_of(const std::filesystem::path& p) { return p.stem().string(); }

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw InvalidArgument("cannot format number");
  return std::string(buf.data(), ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  if (in.bad()) throw DataError("error reading " + path.string());
  return s.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::random_device rd;
  std::ostringstream suffix;
  suffix << ".tmp." << std::hex << rd();
  const auto tmp = dir / (path.filename().string() + suffix.str());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw DataError("error writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf.data(), 16);
}

std::vector<CsvRow> parse_csv(std::string_view text, const std::string& source) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  row.line = 1;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    const bool empty_line = row.fields.size() == 1 && row.fields[0].empty() && !any;
    if (!empty_line && !(row.fields.size() == 1 && row.fields[0].rfind('#', 0) == 0)) {
      rows.push_back(std::move(row));
    }
    row = CsvRow{};
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        end_field();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row.line = line;
        break;
      default:
        field.push_back(c);
        break;
    }
  }
  if (quoted) {
    throw DataError(source + ":" + std::to_string(row.line) + ": unterminated quoted field");
  }
  if (!field.empty() || !row.fields.empty() || any) end_row();
  return rows;
}

DeviceModel parse_device_json(std::string_view text, const std::string& source) {
  std::map<std::string, KeyPosition> keys;
  json doc;
  if (blank(text)) {
    doc = json::object();
  } else {
    doc = parse_strict(text, source, &keys);
  }
  if (!doc.is_object()) throw DataError(source + ": device description must be a JSON object");
  check_schema_tag(doc, "device", source);

  for (const auto& [key, pos] : keys) {
    const bool known = kDeviceOptional.contains(key) ||
                       std::find(kDeviceRequired.begin(), kDeviceRequired.end(), key) != kDeviceRequired.end();
    if (!known) {
      throw DataError(where(source, locate(text, pos.offset)) + ": unknown key \"" + key + "\"");
    }
  }
  std::string missing;
  for (const auto& r : kDeviceRequired) {
    if (!doc.contains(r)) missing += (missing.empty() ? "" : ", ") + r;
  }
  if (!missing.empty()) throw DataError(source + ": missing required key(s): " + missing);

  for (const auto& p : kPlausibility) {
    if (!doc.contains(p.key)) continue;
    const double v = number_field(doc, p.key, source);
    if (!(v > p.lo && v < p.hi)) {
      std::ostringstream msg;
      msg << source << ": " << p.key << " = " << v << " is outside the plausible range (" << p.lo
          << ", " << p.hi << ")";
      warn(msg.str());
    }
  }

  DeviceModel d;
  d.qubit_id = string_field(doc, "qubit_id", source);
  if (doc.contains("process_label")) d.process_label = string_field(doc, "process_label", source);
  d.params.ej = number_field(doc, "ej_ghz", source) * 1e9;
  d.params.ec = number_field(doc, "ec_ghz", source) * 1e9;
  d.params.el = number_field(doc, "el_ghz", source) * 1e9;
  d.res.omega_res = number_field(doc, "omega_res_ghz", source) * 1e9;
  d.res.g = number_field(doc, "g_mhz", source) * 1e6;
  d.res.kappa = number_field(doc, "kappa_mhz", source) * 1e6;
  if (doc.contains("z0_ohm")) d.res.z0 = number_field(doc, "z0_ohm", source);
  const double sqrt_a = number_field(doc, "sqrt_a_phi_uphi0", source) * 1e-6;
  d.env.a_phi = sqrt_a * sqrt_a;
  if (doc.contains("n_array")) {
    const json& v = doc["n_array"];
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
      throw DataError(source + ": \"n_array\" must be a positive integer");
    }
    d.env.n_array = v.get<int>();
  }
  if (doc.contains("junction_area_um2")) d.junction_area = number_field(doc, "junction_area_um2", source);
  if (doc.contains("c_drive_f")) d.env.c_drive = number_field(doc, "c_drive_f", source);
  if (doc.contains("m_drive_wb_per_a")) d.env.m_drive = number_field(doc, "m_drive_wb_per_a", source);
  if (doc.contains("t_qubit_k")) d.env.t_qubit = number_field(doc, "t_qubit_k", source);
  if (doc.contains("t_res_k")) d.env.t_res = number_field(doc, "t_res_k", source);
  if (doc.contains("x_qp")) d.env.x_qp = number_field(doc, "x_qp", source);
  if (doc.contains("gap_ghz")) d.env.gap = number_field(doc, "gap_ghz", source) * 1e9;
  if (doc.contains("qc_eff")) d.env.qc_eff = number_field(doc, "qc_eff", source);
  if (doc.contains("epsilon")) d.env.epsilon = number_field(doc, "epsilon", source);
  if (doc.contains("alpha")) d.env.alpha = number_field(doc, "alpha", source);

  try {
    d.params.validate();
    d.res.validate();
    d.env.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(source + ": " + e.what());
  }
  return d;
}

DeviceModel parse_device_file(const std::filesystem::path& path) {
  return parse_device_json(read_file(path), path.string());
}

std::string device_to_json(const DeviceModel& d) {
  json j = json::object();
  j["schema"] = kSchemaId;
  j["kind"] = "device";
  j["qubit_id"] = d.qubit_id;
  j["process_label"] = d.process_label;
  j["ej_ghz"] = d.params.ej / 1e9;
  j["ec_ghz"] = d.params.ec / 1e9;
  j["el_ghz"] = d.params.el / 1e9;
  j["omega_res_ghz"] = d.res.omega_res / 1e9;
  j["g_mhz"] = d.res.g / 1e6;
  j["kappa_mhz"] = d.res.kappa / 1e6;
  j["z0_ohm"] = d.res.z0;
  j["sqrt_a_phi_uphi0"] = std::sqrt(d.env.a_phi) * 1e6;
  j["n_array"] = d.env.n_array;
  if (d.junction_area) j["junction_area_um2"] = *d.junction_area;
  j["c_drive_f"] = d.env.c_drive;
  j["m_drive_wb_per_a"] = d.env.m_drive;
  j["t_qubit_k"] = d.env.t_qubit;
  j["t_res_k"] = d.env.t_res;
  j["x_qp"] = d.env.x_qp;
  j["gap_ghz"] = d.env.gap / 1e9;
  j["qc_eff"] = d.env.qc_eff;
  j["epsilon"] = d.env.epsilon;
  j["alpha"] = d.env.alpha;
  return j.dump(2) + "\n";
}

T1Ingest parse_t1_csv(std::string_view text, const std::string& qubit_id, const std::string& source) {
  const auto rows = parse_csv(text, source);
  if (rows.empty()) throw DataError(source + ": missing header row");
  const Header h = read_header(rows.front(), {"phi_ext", "t1_s"},
                               {"omega01_hz", "t1_err_s", "n_binned"}, source);
  T1Ingest out;
  out.data.qubit_id = qubit_id;
  auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = h.index.find(name);
    if (it == h.index.end()) return std::nullopt;
    return it->second;
  };
  const auto c_phi = col("phi_ext");
  const auto c_t1 = col("t1_s");
  const auto c_f = col("omega01_hz");
  const auto c_err = col("t1_err_s");
  const auto c_n = col("n_binned");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    const std::string what = source + ":" + std::to_string(row.line);
    if (row.fields.size() != h.index.size()) {
      throw DataError(what + ": expected " + std::to_string(h.index.size()) + " fields, found " +
                      std::to_string(row.fields.size()));
    }
    T1Record rec;
    rec.phi_ext = parse_number(row.fields[*c_phi], what);
    rec.t1 = parse_number(row.fields[*c_t1], what);
    if (c_f && !blank(row.fields[*c_f])) rec.omega01 = parse_number(row.fields[*c_f], what);
    if (c_err && !blank(row.fields[*c_err])) rec.t1_err = parse_number(row.fields[*c_err], what);
    if (c_n && !blank(row.fields[*c_n])) {
      const double n = parse_number(row.fields[*c_n], what);
      if (!(n >= 1.0) || n != std::floor(n)) throw DataError(what + ": n_binned must be a positive integer");
      rec.n_binned = static_cast<std::size_t>(n);
    }
    if (!std::isfinite(rec.phi_ext) || !(rec.t1 > 0.0) || !std::isfinite(rec.t1)) {
      throw DataError(what + ": phi_ext must be finite and t1_s positive");
    }
    if (rec.omega01 && !(*rec.omega01 > 0.0)) throw DataError(what + ": omega01_hz must be positive");
    if (rec.t1_err && !(*rec.t1_err >= 0.0)) throw DataError(what + ": t1_err_s must be nonnegative");
    out.data.records.push_back(rec);
  }
  if (out.data.records.empty()) throw DataError(source + ": no data rows");
  out.dropped = apply_ingest_rule(out.data);
  return out;
}

T1Ingest parse_t1_csv_file(const std::filesystem::path& path) {
  return parse_t1_csv(read_file(path), stem_of(path), path.string());
}

std::string t1_to_csv(const T1Dataset& ds) {
  bool any_f = false;
  bool any_err = false;
  bool any_n = false;
  for (const auto& r : ds.records) {
    any_f = any_f || r.omega01.has_value();
    any_err = any_err || r.t1_err.has_value();
    any_n = any_n || r.n_binned != 1;
  }
  std::string out = "phi_ext,t1_s";
  if (any_f) out += ",omega01_hz";
  if (any_err) out += ",t1_err_s";
  if (any_n) out += ",n_binned";
  out += "\n";
  for (const auto& r : ds.records) {
    out += format_double(r.phi_ext) + "," + format_double(r.t1);
    if (any_f) out += "," + (r.omega01 ? format_double(*r.omega01) : std::string());
    if (any_err) out += "," + (r.t1_err ? format_double(*r.t1_err) : std::string());
    if (any_n) out += "," + std::to_string(r.n_binned);
    out += "\n";
  }
  return out;
}

DephasingDataset parse_dephasing_csv(std::string_view text, const std::string& qubit_id,
                                     const std::string& source) {
  const auto rows = parse_csv(text, source);
  if (rows.empty()) throw DataError(source + ": missing header row");
  const Header h = read_header(rows.front(), {"phi_ext", "gamma_phi_e_per_s"},
                               {"slope_rad_per_s_per_phi0"}, source);
  DephasingDataset ds;
  ds.qubit_id = qubit_id;
  const std::size_t c_phi = h.index.at("phi_ext");
  const std::size_t c_g = h.index.at("gamma_phi_e_per_s");
  const auto it = h.index.find("slope_rad_per_s_per_phi0");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    const std::string what = source + ":" + std::to_string(row.line);
    if (row.fields.size() != h.index.size()) {
      throw DataError(what + ": expected " + std::to_string(h.index.size()) + " fields, found " +
                      std::to_string(row.fields.size()));
    }
    DephasingRecord rec;
    rec.phi_ext = parse_number(row.fields[c_phi], what);
    rec.gamma_phi_e = parse_number(row.fields[c_g], what);
    if (it != h.index.end() && !blank(row.fields[it->second])) {
      rec.slope = parse_number(row.fields[it->second], what);
    }
    if (!std::isfinite(rec.phi_ext) || !(rec.gamma_phi_e >= 0.0)) {
      throw DataError(what + ": phi_ext must be finite and gamma_phi_e_per_s nonnegative");
    }
    ds.records.push_back(rec);
  }
  if (ds.records.empty()) throw DataError(source + ": no data rows");
  return ds;
}

DephasingDataset parse_dephasing_csv_file(const std::filesystem::path& path) {
  return parse_dephasing_csv(read_file(path), stem_of(path), path.string());
}

std::string distribution_to_json(const QceffDistribution& dist) {
  json j = json::object();
  j["schema"] = kSchemaId;
  j["kind"] = "qceff_distribution";
  j["qubit_id"] = dist.qubit_id;
  j["epsilon"] = dist.epsilon_used;
  json entries = json::array();
  for (const auto& e : dist.entries) {
    entries.push_back({{"freq_hz", e.freq}, {"qceff", e.qceff}, {"n_binned", e.n_binned},
                       {"phi_ext", e.phi_ext}});
  }
  j["entries"] = std::move(entries);
  if (dist.entries.size() >= 2) {
    const auto v = dist.values();
    const auto s = summarize(v);
    j["summary"] = {{"mean", s.mean}, {"median", s.median}, {"std", s.std}, {"iqr", s.iqr}, {"n", s.n}};
  }
  return j.dump(2) + "\n";
}

QceffDistribution parse_distribution_json(std::string_view text, const std::string& source) {
  std::map<std::string, KeyPosition> keys;
  const json doc = parse_strict(text, source, &keys);
  if (!doc.is_object()) throw DataError(source + ": distribution must be a JSON object");
  check_schema_tag(doc, "qceff_distribution", source);
  static const std::set<std::string> known = {"schema", "kind", "qubit_id", "epsilon", "entries", "summary"};
  for (const auto& [key, pos] : keys) {
    if (!known.contains(key)) {
      throw DataError(where(source, locate(text, pos.offset)) + ": unknown key \"" + key + "\"");
    }
  }
  for (const char* r : {"qubit_id", "entries"}) {
    if (!doc.contains(r)) throw DataError(source + ": missing required key \"" + std::string(r) + "\"");
  }
  QceffDistribution d;
  d.qubit_id = string_field(doc, "qubit_id", source);
  if (doc.contains("epsilon")) d.epsilon_used = number_field(doc, "epsilon", source);
  if (!doc["entries"].is_array()) throw DataError(source + ": \"entries\" must be an array");
  std::size_t i = 0;
  for (const auto& e : doc["entries"]) {
    const std::string what = source + ": entries[" + std::to_string(i++) + "]";
    if (!e.is_object() || !e.contains("qceff")) throw DataError(what + " needs a \"qceff\" number");
    for (const auto& [k, v] : e.items()) {
      if (k != "freq_hz" && k != "qceff" && k != "n_binned" && k != "phi_ext") {
        throw DataError(what + ": unknown key \"" + k + "\"");
      }
    }
    QceffEntry q;
    q.qceff = number_field(e, "qceff", what);
    if (!(q.qceff > 0.0)) throw DataError(what + ": qceff must be positive");
    if (e.contains("freq_hz")) q.freq = number_field(e, "freq_hz", what);
    if (e.contains("phi_ext")) q.phi_ext = number_field(e, "phi_ext", what);
    if (e.contains("n_binned")) {
      if (!e["n_binned"].is_number_unsigned()) throw DataError(what + ": n_binned must be a positive integer");
      q.n_binned = e["n_binned"].get<std::size_t>();
    }
    d.entries.push_back(q);
  }
  return d;
}

QceffDistribution parse_distribution_file(const std::filesystem::path& path) {
  return parse_distribution_json(read_file(path), path.string());
}

}  // namespace fluxrelax::io
