#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rmplan/commands.hpp"
#include "rmplan/error.hpp"

using namespace rmplan;

int main(int argc, char** argv)
{
  CLI::App app{"Joint-space roadmap planning around surgical obstacles"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string space = "joint";

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration (defaults if omitted)");
    sub->add_option("--seed", seed, "Override the seed list with a single seed");
    sub->add_option("--out", out_dir, "Output directory");
  };
  auto* map = app.add_subcommand("map", "Map the scene boundary into joint space");
  auto* plan = app.add_subcommand("plan", "Plan one trajectory");
  auto* cmp = app.add_subcommand("compare", "Compare joint- and position-space planners over seeds");
  auto* cal = app.add_subcommand("calibrate", "Calibrate the joint-space barrier width");
  for (auto* sub : {map, plan, cmp, cal}) add_common(sub);
  plan->add_option("--space", space, "joint or position")->check(CLI::IsMember({"joint", "position"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed) cfg.seeds = {*seed};
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (*map) return cmd_map(cfg, std::cerr);
  if (*plan) return cmd_plan(cfg, space == "joint" ? Space::Joint : Space::Position, std::cerr);
  if (*cmp) return cmd_compare(cfg, std::cerr);
  return cmd_calibrate(cfg, std::cerr);
}
