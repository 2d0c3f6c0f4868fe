#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

#include "crystal_heat/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

namespace {

using json = nlohmann::ordered_json;

int fail(int code, const std::string& kind, const std::string& message) {
  json e{{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << e.dump() << "\n";
  return code;
}

int thread_cap() {
  const char* env = std::getenv("CRYSTAL_HEAT_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) {
    throw crystal_heat::validation_error("CRYSTAL_HEAT_THREADS must be a positive integer");
  }
  return static_cast<int>(v);
}

struct Sub {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> flags;
  std::string config_path;
  std::string manifest_path;
  bool force = false;
  bool json_out = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat conduction in harmonic crystals with self-consistent reservoirs"};
  app.set_version_flag("--version", std::string(CRYSTAL_HEAT_VERSION));
  app.require_subcommand(1);

  std::map<std::string, Sub> subs;
  for (const auto& cmd : cli::commands()) {
    Sub& s = subs[cmd.name];
    s.app = app.add_subcommand(cmd.name, cmd.description);
    s.app->add_option("--config", s.config_path, "key = value file");
    s.app->add_option("--manifest", s.manifest_path, "rerun from a manifest.json");
    s.app->add_flag("--force", s.force, "overwrite existing outputs");
    s.app->add_flag("--json", s.json_out, "print the result as JSON");
    for (const auto& k : cli::schema_for(cmd.name)) {
      const std::string help = k.help + " (default " + k.fallback + ")";
      if (k.kind == cli::Kind::boolean) {
        // bare flag means true; --flag=false also accepted
        s.app->add_option_function<std::string>(
                 cli::flag_name(k.key), [&s, key = k.key](const std::string& v) { s.flags[key] = v; }, help)
            ->expected(0, 1)
            ->default_str("true");
      } else {
        s.app->add_option_function<std::string>(
            cli::flag_name(k.key), [&s, key = k.key](const std::string& v) { s.flags[key] = v; }, help);
      }
    }
  }
  bool selftest_json = false;
  CLI::App* selftest = app.add_subcommand("selftest", "run invariant and acceptance checks");
  selftest->add_flag("--json", selftest_json, "print the table as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "usage", e.what());
  }

  if (selftest->parsed()) {
    bool ok = false;
    try {
      const json rows = cli::run_selftest(ok);
      if (selftest_json) {
        std::cout << json{{"passed", ok}, {"checks", rows}}.dump(2) << "\n";
      } else {
        for (const auto& r : rows) {
          std::cout << (r["passed"].get<bool>() ? "[PASS] " : "[FAIL] ") << r["id"].get<std::string>() << "  "
                    << r["title"].get<std::string>() << "  " << r["detail"].get<std::string>() << "\n";
        }
      }
    } catch (const std::exception& e) {
      return fail(1, "internal", e.what());
    }
    return ok ? 0 : 1;
  }

  for (const auto& cmd : cli::commands()) {
    Sub& s = subs[cmd.name];
    if (!s.app->parsed()) continue;
    try {
      std::map<std::string, std::string> file;
      if (!s.manifest_path.empty()) file = cli::parse_manifest(s.manifest_path, cmd.name);
      if (!s.config_path.empty()) {
        for (const auto& [k, v] : cli::parse_config_file(s.config_path)) file[k] = v;
      }
      const cli::Config cfg = cli::Config::resolve(cmd.name, file, s.flags);
      const cli::Context ctx{thread_cap()};
      cli::OutputDir out(cfg.text("out"), s.force);
      std::vector<std::string> names = cmd.files(cfg);
      names.push_back("manifest.json");
      out.reserve(names);
      const json result = cmd.run(cfg, out, ctx);
      json manifest;
      manifest["artifact"] = "crystal_heat";
      manifest["version"] = CRYSTAL_HEAT_VERSION;
      manifest["command"] = cmd.name;
      manifest["config"] = cfg.to_json();
      manifest["files"] = out.written();
      out.write_json("manifest.json", manifest);
      if (s.json_out) {
        std::cout << result.dump(2) << "\n";
      } else {
        std::cout << cli::summarize(cmd.name, result) << "outputs in " << out.path() << "\n";
      }
      return 0;
    } catch (const crystal_heat::validation_error& e) {
      return fail(2, "validation", e.what());
    } catch (const crystal_heat::numerical_error& e) {
      return fail(1, "numerical", e.what());
    } catch (const std::exception& e) {
      return fail(1, "internal", e.what());
    }
  }
  return fail(2, "usage", "no command given");
}
