#pragma once

// Command-line front end.
//
//     despso generate --n 64 --dim 2 --seed 7
//     despso solve    --problem smartwatch --mode both
//     despso bench    --problem linear2x2 --seeds 20 --jobs 4
//
// Every option may also come from a `key = value` file given with --config;
// flags on the command line take precedence. The output directory defaults
// to $DESPSO_OUT_DIR, then to the working directory.

#include <iosfwd>
#include <string>
#include <vector>

namespace despso::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,          // bad flags or arguments
  kNotStationary = 2,  // generate: points written, but the run hit max_steps
  kFailure = 3,        // runtime failure
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace despso::cli
