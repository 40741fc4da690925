#include "report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace schlab::cli {

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string scalar_text(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_null()) return "";
  if (value.is_number_float()) return format_number(value.get<double>());
  return value.dump();
}

void write_row(std::ostringstream& out, const std::string& section,
               const std::string& name, const std::string& index,
               const std::string& x, const std::string& y) {
  out << csv_field(section) << ',' << csv_field(name) << ',' << index << ','
      << csv_field(x) << ',' << csv_field(y) << "\r\n";
}

// Leaves of nested objects become rows named by their dotted path; arrays
// contribute one row per element with the position in the index column.
void flatten(std::ostringstream& out, const std::string& section,
             const std::string& prefix, const Json& node) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items())
      flatten(out, section, prefix.empty() ? key : prefix + "." + key, value);
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (node[i].is_structured())
        flatten(out, section, prefix + "." + std::to_string(i), node[i]);
      else
        write_row(out, section, prefix, std::to_string(i), scalar_text(node[i]), "");
    }
  } else {
    write_row(out, section, prefix, "", scalar_text(node), "");
  }
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Series& Report::add_series(std::string name) {
  series.push_back(Series{std::move(name), {}, {}});
  return series.back();
}

std::string version_string() { return SCHLAB_VERSION; }

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string render_json(const Report& report) {
  Json doc = Json::object();
  doc["version"] = version_string();
  doc["command"] = report.command;
  doc["config"] = report.config;
  doc["results"] = report.results;
  doc["ci"] = report.ci;
  Json series = Json::object();
  for (const auto& s : report.series) {
    Json entry = Json::object();
    Json xs = Json::array(), ys = Json::array();
    for (double v : s.x) xs.push_back(number_or_null(v));
    for (double v : s.y) ys.push_back(number_or_null(v));
    entry["x"] = std::move(xs);
    entry["y"] = std::move(ys);
    series[s.name] = std::move(entry);
  }
  doc["series"] = std::move(series);
  doc["runtime_seconds"] =
      report.runtime_seconds ? Json(*report.runtime_seconds) : Json(nullptr);
  return doc.dump(2) + "\n";
}

std::string render_csv(const Report& report) {
  std::ostringstream out;
  out << "section,name,index,x,y\r\n";
  write_row(out, "meta", "version", "", version_string(), "");
  write_row(out, "meta", "command", "", report.command, "");
  if (report.runtime_seconds)
    write_row(out, "meta", "runtime_seconds", "", format_number(*report.runtime_seconds), "");
  flatten(out, "config", "", report.config);
  flatten(out, "results", "", report.results);
  flatten(out, "ci", "", report.ci);
  for (const auto& s : report.series) {
    for (std::size_t i = 0; i < s.y.size(); ++i)
      write_row(out, "series", s.name, std::to_string(i),
                i < s.x.size() ? format_number(s.x[i]) : "", format_number(s.y[i]));
  }
  return out.str();
}

}  // namespace schlab::cli
