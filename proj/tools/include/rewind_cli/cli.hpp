// `rewind` command line driver, callable in-process.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rewind/eavesdrop.hpp"

namespace rewindlab::cli {

/// identity | strong | weak:<eps> | file:<path>. Builtin gates use qudit
/// dimension d (ancilla dimension d); file gates carry their own.
EavesdropGate parse_gate_spec(const std::string& spec, std::size_t d);

/// Comma separated numbers; "2^k" is accepted as a power of two.
std::vector<double> parse_list(const std::string& text);

/// Inserts "--key=value" pairs from a JSON object file after the
/// subcommand, ahead of the command line flags (which therefore win).
std::vector<std::string> expand_config(const std::vector<std::string>& args);

/// Runs the driver on args (without the program name). Returns the exit
/// code: 0 on success, 1 when an internal assertion failed, 2 on usage or
/// input errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rewindlab::cli
