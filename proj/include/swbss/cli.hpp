// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

namespace swbss::cli {

// Exit codes: 0 success, 1 failed trend assertion, 2 configuration or I/O
// error, 3 numerical failure.
constexpr int kExitOk = 0;
constexpr int kExitAssert = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int cmd_simulate(const std::string& spec_path, const std::string& out_dir);
int cmd_enhance(const std::string& in_dir, const std::string& config_path,
                const std::string& out_dir);
int cmd_evaluate(const std::string& est_dir, const std::string& truth_dir,
                 const std::string& report_path);
int cmd_sweep(const std::string& grid_path, const std::string& out_csv);

// Full argument parsing; used by the binary in tools/.
int run_main(int argc, char** argv);

}  // namespace swbss::cli
