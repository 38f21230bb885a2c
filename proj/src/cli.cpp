#include "clrl/cli.hpp"

#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "clrl/errors.hpp"
#include "clrl/harness.hpp"
#include "clrl/version.hpp"

namespace clrl {

namespace {

using nlohmann::json;

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

void apply_override(json& doc, const std::string& key_eq_value) {
  auto eq = key_eq_value.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("override \"" + key_eq_value + "\" must look like key=value");
  }
  std::string key = key_eq_value.substr(0, eq);
  std::string value = key_eq_value.substr(eq + 1);

  std::vector<std::string> segments;
  std::stringstream ss(key);
  std::string seg;
  while (std::getline(ss, seg, '.')) {
    if (seg.empty()) throw ValidationError("override key \"" + key + "\" has an empty segment");
    segments.push_back(seg);
  }
  if (segments.empty()) throw ValidationError("override key \"" + key + "\" is empty");

  json* node = &doc;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    const std::string& s = segments[i];
    if (node->is_array()) {
      if (!all_digits(s)) {
        throw ValidationError("override key \"" + key + "\": \"" + s +
                              "\" is not an array index");
      }
      std::size_t idx = std::stoul(s);
      if (idx >= node->size()) {
        throw ValidationError("override key \"" + key + "\": index " + s + " out of range");
      }
      node = &(*node)[idx];
    } else if (node->is_object() || node->is_null()) {
      node = &(*node)[s];
    } else {
      throw ValidationError("override key \"" + key + "\": \"" + s +
                            "\" descends into a non-container value");
    }
  }

  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // keep as string
  }
  const std::string& leaf = segments.back();
  if (node->is_array()) {
    if (!all_digits(leaf)) {
      throw ValidationError("override key \"" + key + "\": \"" + leaf +
                            "\" is not an array index");
    }
    std::size_t idx = std::stoul(leaf);
    if (idx >= node->size()) {
      throw ValidationError("override key \"" + key + "\": index " + leaf + " out of range");
    }
    (*node)[idx] = parsed;
  } else if (node->is_object() || node->is_null()) {
    (*node)[leaf] = parsed;
  } else {
    throw ValidationError("override key \"" + key + "\" descends into a non-container value");
  }
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Rate-limited posterior-sampling agents: experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  long seeds_n = 0;

  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", config_path, "Path to a JSON experiment config")->required();
    if (with_out) {
      sub->add_option("--out", out_dir,
                      "Output directory (default: the config's \"out\" field, else ./out)");
    }
    sub->add_option("--set", overrides,
                    "Config override as dotted.path=value; may be repeated");
    sub->add_option("--seeds", seeds_n, "Replace the config seed list with 1..N");
  };

  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  add_common(run, true);
  CLI::App* rd = app.add_subcommand("rd-curve", "Run a rate-distortion curve config");
  add_common(rd, true);
  CLI::App* marginal = app.add_subcommand("marginal-sweep",
                                          "Run an information-price marginal sweep config");
  add_common(marginal, true);
  CLI::App* validate = app.add_subcommand("validate-config", "Parse and validate a config");
  add_common(validate, false);
  app.add_subcommand("version", "Print the tool version");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "version") {
    std::cout << kVersion << "\n";
    return 0;
  }

  std::ifstream f(config_path);
  if (!f) {
    std::cerr << "error: cannot read config file: " << config_path << "\n";
    return 2;
  }
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << "\n";
    return 2;
  }

  ExperimentConfig cfg;
  try {
    for (const std::string& ov : overrides) apply_override(doc, ov);
    if (seeds_n < 0) throw ValidationError("--seeds must be positive");
    if (seeds_n > 0) {
      json seeds = json::array();
      for (long i = 1; i <= seeds_n; ++i) seeds.push_back(i);
      doc["seeds"] = seeds;
    }
    cfg = parse_config(doc);
    if (name == "rd-curve" && cfg.kind != ExperimentKind::kRdCurve) {
      throw ValidationError("config: kind: the rd-curve subcommand needs kind \"rd-curve\"");
    }
    if (name == "marginal-sweep" && cfg.kind != ExperimentKind::kMarginalSweep) {
      throw ValidationError(
          "config: kind: the marginal-sweep subcommand needs kind \"marginal-sweep\"");
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << "\n";
    return 2;
  }

  if (name == "validate-config") {
    std::cout << "OK\n";
    return 0;
  }

  if (out_dir.empty()) out_dir = cfg.out_dir.empty() ? "out" : cfg.out_dir;

  try {
    ExperimentResult res = run_experiment(cfg, out_dir, overrides);
    for (const std::string& file : res.files_written) {
      std::cout << (std::filesystem::path(out_dir) / file).string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace clrl
