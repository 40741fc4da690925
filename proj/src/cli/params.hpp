#pragma once

// Typed command parameters resolved with precedence
// command-line flag > config file entry > built-in default.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace schlab::cli {

/// Bad flags, missing or out-of-range parameters, malformed config: exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { integer, real, text };

struct ParamDef {
  std::string key;  // snake_case; the flag is --key with '_' -> '-'
  Kind kind = Kind::real;
  nlohmann::json fallback;  // null: no default (required unless optional)
  std::string help;
  std::vector<std::string> choices;
  bool optional = false;  // may stay null after resolution
};

class ParamSet {
 public:
  void add(ParamDef def);
  void attach(CLI::App& app);

  bool knows(const std::string& key) const;

  /// Resolved values in declaration order; throws UsageError.
  nlohmann::ordered_json resolve(const nlohmann::json& file_config) const;

 private:
  struct Entry {
    ParamDef def;
    std::optional<std::string> raw;
  };
  std::vector<Entry> entries_;
};

std::string flag_name(const std::string& key);

/// Accessors on a resolved config; they assume resolve() validated the type.
std::uint64_t get_uint(const nlohmann::ordered_json& cfg, const std::string& key);
double get_real(const nlohmann::ordered_json& cfg, const std::string& key);
std::string get_text(const nlohmann::ordered_json& cfg, const std::string& key);
bool is_set(const nlohmann::ordered_json& cfg, const std::string& key);

}  // namespace schlab::cli
