#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rankone/tensor.hpp"

namespace rankone {

// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_input_error = 1,
    exit_breakdown = 2,
    exit_verification_failed = 3,
};

// Runs the tool with `args` (args[0] is the program name). Output that would
// go to stdout/stderr goes to `out`/`err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Tuple text format: line 1 = d, then one whitespace-separated vector per line.
// Vectors are returned as read, without normalization.
VectorTuple read_tuple_text(std::istream& in);
VectorTuple read_tuple_file(const std::string& path);
void write_tuple_text(std::ostream& out, const VectorTuple& v);

} // namespace rankone
