#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ckn/common.hpp"

namespace ckn {

// Write-temp-then-rename; never leaves a partial file at `path`.
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

// Flat string-keyed configuration. Accepts `key = value` lines (with '#'
// comments) or a JSON object (nested keys flattened with dots).
struct KeyValueConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& dflt) const;
  double get_num(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  void set(const std::string& key, const std::string& value);

  // Canonical serialization: sorted `key=value` lines.
  std::string canonical() const;
};

KeyValueConfig parse_config_text(const std::string& text);
KeyValueConfig parse_config_file(const std::string& path);

std::uint64_t fnv1a(const std::string& data);
std::string config_hash_hex(const KeyValueConfig& cfg);

void append_line(const std::string& path, const std::string& line);

std::string format_g17(double v);

}  // namespace ckn
