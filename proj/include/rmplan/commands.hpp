#pragma once

#include <iosfwd>

#include "rmplan/config.hpp"
#include "rmplan/spline.hpp"

namespace rmplan {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitMapping = 3,
  kExitPlanning = 4,
  kExitIo = 5,
};

/// Each command writes its artifacts under cfg.output_dir and returns an exit
/// code; diagnostics go to `log`. Library errors never escape.
int cmd_map(const RunConfig& cfg, std::ostream& log);

/// Plans with the first configured seed.
int cmd_plan(const RunConfig& cfg, Space space, std::ostream& log);

int cmd_compare(const RunConfig& cfg, std::ostream& log);
int cmd_calibrate(const RunConfig& cfg, std::ostream& log);

}  // namespace rmplan
