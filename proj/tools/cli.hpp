#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mgcn::cli {

/// Runs one subcommand (gen-synth, gb-stats, topology, train, evaluate,
/// ablate, sweep-beta). Returns 0 on success; every failure prints a
/// diagnostic to `err` and returns nonzero.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mgcn::cli
