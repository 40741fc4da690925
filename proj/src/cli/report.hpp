#pragma once

// Everything a command produces, rendered either as one JSON document or as
// long-format CSV with the columns section,name,index,x,y.

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace schlab::cli {

using Json = nlohmann::ordered_json;

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Report {
  std::string command;
  Json config = Json::object();
  Json results = Json::object();
  Json ci = Json::object();
  std::deque<Series> series;  // add_series references stay valid
  bool statistical_failure = false;
  std::optional<double> runtime_seconds;

  Series& add_series(std::string name);
};

std::string version_string();

std::string render_json(const Report& report);
std::string render_csv(const Report& report);

/// Shortest decimal that round-trips; "nan", "inf", "-inf" otherwise.
std::string format_number(double value);

}  // namespace schlab::cli
