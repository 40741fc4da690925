#include "params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace schlab::cli {

namespace {

using Json = nlohmann::json;

Json parse_raw(const ParamDef& def, const std::string& text) {
  switch (def.kind) {
    case Kind::integer: {
      std::uint64_t value = 0;
      const char* end = text.data() + text.size();
      const auto res = std::from_chars(text.data(), end, value);
      if (res.ec != std::errc() || res.ptr != end || text.empty())
        throw UsageError(flag_name(def.key) + " expects a nonnegative integer, got '" + text + "'");
      return Json(value);
    }
    case Kind::real: {
      char* end = nullptr;
      const double value = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(value))
        throw UsageError(flag_name(def.key) + " expects a finite number, got '" + text + "'");
      return Json(value);
    }
    case Kind::text:
      return Json(text);
  }
  return Json();
}

Json check_json(const ParamDef& def, const Json& value) {
  const std::string where = "config entry '" + def.key + "'";
  switch (def.kind) {
    case Kind::integer:
      if (value.is_number_unsigned()) return value;
      if (value.is_number_integer() && value.get<std::int64_t>() >= 0)
        return Json(value.get<std::uint64_t>());
      if (value.is_number_float()) {
        const double d = value.get<double>();
        if (d >= 0 && d == std::floor(d) && d < 1.8e19) return Json(static_cast<std::uint64_t>(d));
      }
      throw UsageError(where + " must be a nonnegative integer");
    case Kind::real:
      if (value.is_number() && std::isfinite(value.get<double>())) return Json(value.get<double>());
      throw UsageError(where + " must be a finite number");
    case Kind::text:
      if (value.is_string()) return value;
      throw UsageError(where + " must be a string");
  }
  return value;
}

}  // namespace

std::string flag_name(const std::string& key) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

void ParamSet::add(ParamDef def) { entries_.push_back(Entry{std::move(def), std::nullopt}); }

void ParamSet::attach(CLI::App& app) {
  for (auto& e : entries_) {
    std::string help = e.def.help;
    if (!e.def.fallback.is_null()) {
      const auto& fb = e.def.fallback;
      help += " [default: " + (fb.is_string() ? fb.get<std::string>() : fb.dump()) + "]";
    } else if (!e.def.optional) {
      help += " [required]";
    }
    auto* opt = app.add_option(flag_name(e.def.key), e.raw, help);
    opt->type_name(e.def.kind == Kind::integer ? "UINT" : e.def.kind == Kind::real ? "REAL" : "TEXT");
    if (!e.def.choices.empty()) opt->check(CLI::IsMember(e.def.choices));
  }
}

bool ParamSet::knows(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.def.key == key; });
}

nlohmann::ordered_json ParamSet::resolve(const Json& file_config) const {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& e : entries_) {
    Json value;
    if (e.raw) {
      value = parse_raw(e.def, *e.raw);
    } else if (file_config.is_object() && file_config.contains(e.def.key) &&
               !file_config.at(e.def.key).is_null()) {
      value = check_json(e.def, file_config.at(e.def.key));
    } else {
      value = e.def.fallback;
    }
    if (value.is_null() && !e.def.optional)
      throw UsageError("missing required parameter " + flag_name(e.def.key));
    if (!e.def.choices.empty() && !value.is_null() &&
        std::find(e.def.choices.begin(), e.def.choices.end(), value.get<std::string>()) ==
            e.def.choices.end())
      throw UsageError(flag_name(e.def.key) + " must be one of the listed choices");
    out[e.def.key] = value;
  }
  return out;
}

std::uint64_t get_uint(const nlohmann::ordered_json& cfg, const std::string& key) {
  return cfg.at(key).get<std::uint64_t>();
}
double get_real(const nlohmann::ordered_json& cfg, const std::string& key) {
  return cfg.at(key).get<double>();
}
std::string get_text(const nlohmann::ordered_json& cfg, const std::string& key) {
  return cfg.at(key).get<std::string>();
}
bool is_set(const nlohmann::ordered_json& cfg, const std::string& key) {
  return cfg.contains(key) && !cfg.at(key).is_null();
}

}  // namespace schlab::cli
