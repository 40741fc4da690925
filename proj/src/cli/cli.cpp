#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "schlab/parallel.hpp"

namespace schlab::cli {

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> format;
  std::optional<std::string> out;
  std::optional<std::string> config;
  bool timing = false;
};

const std::set<std::string> kGlobalKeys{"seed", "threads", "format", "out", "timing"};

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
  return doc;
}

template <typename T>
std::optional<T> config_value(const nlohmann::json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  try {
    return cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError("config entry '" + key + "' has the wrong type");
  }
}

int write_output(const std::string& text, const std::optional<std::string>& path,
                 std::ostream& out, std::ostream& err) {
  if (!path || *path == "-") {
    out << text;
    out.flush();
    return out ? kExitOk : kExitIo;
  }
  std::ofstream file(*path, std::ios::binary | std::ios::trunc);
  if (file) file << text;
  if (file) file.close();
  if (!file) {
    err << "error: cannot write '" << *path << "'\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulations of the critical one-dimensional random Schroedinger operator", "schlab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", version_string());

  Globals g;
  app.add_option("--seed", g.seed, "master seed [default: 0]");
  app.add_option("--threads", g.threads, "worker threads [default: $SCHLAB_THREADS, else all cores]")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "output format [default: json]")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", g.out, "output file [default: stdout]");
  app.add_option("--config", g.config, "JSON file with parameter values");
  app.add_flag("--timing", g.timing, "record runtime_seconds (breaks byte-identical reruns)");

  auto commands = make_commands();
  std::vector<CLI::App*> subs;
  for (auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c->name, c->description);
    sub->footer("Output " + c->csv_help);
    c->params.attach(*sub);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Command* cmd = nullptr;
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) cmd = commands[i].get();

  Report report;
  RunContext ctx;
  std::optional<std::string> format = g.format, out_path = g.out;
  try {
    nlohmann::json file_cfg = nlohmann::json::object();
    if (g.config) file_cfg = load_config(*g.config);
    for (const auto& [key, value] : file_cfg.items())
      if (!kGlobalKeys.count(key) && !cmd->params.knows(key))
        throw UsageError("unknown config entry '" + key + "' for " + cmd->name);

    ctx.seed = g.seed ? *g.seed : config_value<std::uint64_t>(file_cfg, "seed").value_or(0);
    const int threads = g.threads ? *g.threads : config_value<int>(file_cfg, "threads").value_or(0);
    if (threads < 0) throw UsageError("threads must be positive");
    ctx.threads = resolve_threads(threads);
    if (!format) format = config_value<std::string>(file_cfg, "format");
    if (format && *format != "json" && *format != "csv")
      throw UsageError("format must be json or csv");
    if (!out_path) out_path = config_value<std::string>(file_cfg, "out");
    const bool timing = g.timing || config_value<bool>(file_cfg, "timing").value_or(false);

    report.config = Json::object();
    report.config["seed"] = ctx.seed;
    const Json resolved = cmd->params.resolve(file_cfg);
    for (const auto& [key, value] : resolved.items()) report.config[key] = value;
    cmd->validate(report.config);

    const auto start = std::chrono::steady_clock::now();
    Report result = cmd->run(report.config, ctx);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    result.command = cmd->name;
    result.config = std::move(report.config);
    if (timing) result.runtime_seconds = elapsed.count();
    report = std::move(result);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: computation failed: " << e.what() << "\n";
    return kExitCompute;
  }

  const std::string text = format.value_or("json") == "csv" ? render_csv(report) : render_json(report);
  const int io = write_output(text, out_path, out, err);
  if (io != kExitOk) return io;
  return report.statistical_failure ? kExitStatistical : kExitOk;
}

}  // namespace schlab::cli
