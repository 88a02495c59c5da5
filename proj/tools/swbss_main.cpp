// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/cli.hpp"

int main(int argc, char** argv) { return swbss::cli::run_main(argc, argv); }
