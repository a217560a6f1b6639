#include "ckn/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace ckn {

void atomic_write_text(const std::string& path, const std::string& content) {
  fs::path target(path);
  fs::path dir = target.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("atomic_write_text: cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("atomic_write_text: write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool KeyValueConfig::has(const std::string& key) const {
  return values.count(key) > 0;
}

std::string KeyValueConfig::get_str(const std::string& key,
                                    const std::string& dflt) const {
  auto it = values.find(key);
  return it == values.end() ? dflt : it->second;
}

double KeyValueConfig::get_num(const std::string& key, double dflt) const {
  auto it = values.find(key);
  if (it == values.end()) return dflt;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    while (pos < it->second.size() && std::isspace((unsigned char)it->second[pos])) ++pos;
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + key + "': expected a number, got '" +
                      it->second + "'");
  }
}

int KeyValueConfig::get_int(const std::string& key, int dflt) const {
  auto it = values.find(key);
  if (it == values.end()) return dflt;
  try {
    size_t pos = 0;
    long v = std::stol(it->second, &pos, 10);
    while (pos < it->second.size() && std::isspace((unsigned char)it->second[pos])) ++pos;
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return (int)v;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + key + "': expected an integer, got '" +
                      it->second + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool dflt) const {
  auto it = values.find(key);
  if (it == values.end()) return dflt;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config field '" + key + "': expected a boolean, got '" +
                    it->second + "'");
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values[key] = value;
}

std::string KeyValueConfig::canonical() const {
  std::ostringstream out;
  for (const auto& [k, v] : values) out << k << "=" << v << "\n";
  return out.str();
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void flatten_json(const nlohmann::json& j, const std::string& prefix,
                  KeyValueConfig& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      flatten_json(it.value(), key, out);
    }
    return;
  }
  if (j.is_array())
    throw ConfigError("config field '" + prefix + "': arrays are not supported");
  if (j.is_string())
    out.set(prefix, j.get<std::string>());
  else if (j.is_boolean())
    out.set(prefix, j.get<bool>() ? "true" : "false");
  else if (j.is_number_integer())
    out.set(prefix, std::to_string(j.get<long long>()));
  else if (j.is_number())
    out.set(prefix, format_g17(j.get<double>()));
  else if (j.is_null())
    out.set(prefix, "");
}

}  // namespace

KeyValueConfig parse_config_text(const std::string& text) {
  KeyValueConfig cfg;
  size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded())
      throw ConfigError("config: malformed JSON");
    if (!j.is_object())
      throw ConfigError("config: JSON root must be an object");
    flatten_json(j, "", cfg);
    return cfg;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    cfg.set(key, val);
  }
  return cfg;
}

KeyValueConfig parse_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash_hex(const KeyValueConfig& cfg) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                (unsigned long long)fnv1a(cfg.canonical()));
  return buf;
}

void append_line(const std::string& path, const std::string& line) {
  fs::path target(path);
  fs::path dir = target.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("append_line: cannot open " + path);
  out << line << "\n";
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace ckn
