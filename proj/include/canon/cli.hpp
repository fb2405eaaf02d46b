#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace canon::cli {

// A fully-resolved run: defaults filled, config file merged, flags applied.
// Reports echo this object, and re-running an echoed config reproduces the
// report byte for byte.
struct RunConfig {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string format = "json";  // "json" or "csv"
  std::string out_path;         // empty writes to the output stream
};

struct RunOutput {
  std::string text;
  int code = 0;
};

// argv-style arguments without the program name. Throws canon::Error on
// config problems; --help yields command "help".
RunConfig parse_args(const std::vector<std::string>& args);

// Runs the computation and renders the report; no file or stream IO.
RunOutput execute(const RunConfig& cfg);

// Parse, execute, write to cfg.out_path (or `out` when no path).
// Exit codes: 0 success, 1 usage/config error, 2 verdict failure.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);
int run(int argc, char** argv);

// Grammar overview ("" or "help") or the key schema of one command.
std::string usage_text(const std::string& command);

}  // namespace canon::cli
