#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace warpstab::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kNumericFailure = 1, kConfigError = 2 };

// Full command line without the program name, e.g. {"classify", "--config", "m.cfg"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Everything except the record's timestamp, for replay comparisons.
std::string csv_body_of_record(const std::string& json_line);

}  // namespace warpstab::cli
