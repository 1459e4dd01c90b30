#pragma once

#include <iosfwd>

namespace shardsim
{

/// Entry point of the shardsim tool. Returns 0 on success, 1 when a verdict
/// fails and 2 on configuration or usage errors.
int run_cli(int argc, char **argv, std::ostream &out, std::ostream &err);

} // namespace shardsim
