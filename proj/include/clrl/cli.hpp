#pragma once

#include <string>

#include <json.hpp>

namespace clrl {

// Applies one "dotted.path=value" override to a config document. Path
// segments that are decimal numbers index into arrays; the value is parsed
// as JSON when possible and kept as a string otherwise. Throws
// ValidationError on malformed specs or paths that do not resolve.
void apply_override(nlohmann::json& doc, const std::string& key_eq_value);

// Full command-line entry point. Returns the process exit code: 0 on
// success, 2 on usage or config validation problems, 1 on runtime failure.
int cli_main(int argc, const char* const* argv);

}  // namespace clrl
